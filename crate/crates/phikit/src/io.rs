//! JSONL corpora, label map files and input digests.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use phikit_core::labels::{apply_label_map, builtin_label_maps};
use phikit_core::{Corpus, Document, LabelMap};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

/// Parse one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(Error::read(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(Error::read(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(Error::write(path))?;
    let mut w = BufWriter::new(file);
    write_jsonl_to(&mut w, items).map_err(Error::write(path))?;
    w.flush().map_err(Error::write(path))
}

pub fn write_jsonl_to<T: Serialize, W: Write>(w: &mut W, items: impl IntoIterator<Item = T>) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *w, &item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned())
}

/// Corpus in the unified taxonomy; the corpus is named after the file stem.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    Ok(Corpus::new(stem(path), read_jsonl::<Document>(path)?)?)
}

/// Corpus with labels kept as written, for mapping from a source taxonomy.
pub fn load_source_corpus(path: &Path) -> Result<Corpus<String>> {
    Ok(Corpus::new(stem(path), read_jsonl::<Document<String>>(path)?)?)
}

pub fn save_corpus<L: Serialize>(path: &Path, corpus: &Corpus<L>) -> Result<()> {
    write_jsonl(path, &corpus.documents)
}

/// A built-in map by name (`i2b2`, `aimi`, `identity`) or a JSON file of
/// `{source_label: unified_label}`.
pub fn load_label_map(name_or_path: &str) -> Result<LabelMap> {
    if name_or_path == "identity" {
        return Ok(LabelMap::identity());
    }
    if let Some(m) = builtin_label_maps().remove(name_or_path) {
        return Ok(m);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(Error::Invalid(format!(
            "label map {name_or_path} is neither a built-in map (i2b2, aimi, identity) nor a file"
        )));
    }
    let text = fs::read_to_string(path).map_err(Error::read(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Load a corpus in any taxonomy and map it onto the unified one.
/// Without a map, labels must already be unified category names.
pub fn load_mapped_corpus(path: &Path, map: Option<&str>, drop_other: bool) -> Result<Corpus> {
    let source = load_source_corpus(path)?;
    let map = match map {
        Some(m) => load_label_map(m)?,
        None => LabelMap::identity(),
    };
    Ok(apply_label_map(source, &map, drop_other)?)
}

/// Lowercase hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).map_err(Error::read(path))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf).map_err(Error::read(path))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}
