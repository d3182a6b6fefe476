//! Document embedding files: JSONL (`{"doc_id", "vector"}` per line) and
//! the little-endian `EMB1` binary layout.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use phikit_core::divergence::EmbeddingSet;
use serde::Deserialize;

use crate::io::read_jsonl;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"EMB1";

#[derive(Deserialize)]
struct Record {
    doc_id: String,
    vector: Vec<f64>,
}

/// Load either format, detected by the leading magic bytes.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet> {
    let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let bytes = fs::read(path).map_err(Error::read(path))?;
    if bytes.starts_with(MAGIC) {
        return decode_emb1(&bytes, name).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message,
        });
    }
    let records: Vec<Record> = read_jsonl(path)?;
    let (ids, rows) = records.into_iter().map(|r| (r.doc_id, r.vector)).unzip();
    Ok(EmbeddingSet::new(name, ids, rows)?)
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize) -> std::result::Result<&'a [u8], String> {
    let end = pos.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| format!("truncated at byte {pos}"))?;
    let out = &bytes[*pos..end];
    *pos = end;
    Ok(out)
}

fn u32_at(bytes: &[u8], pos: &mut usize) -> std::result::Result<u32, String> {
    Ok(u32::from_le_bytes(take(bytes, pos, 4)?.try_into().expect("4 bytes")))
}

pub fn decode_emb1(bytes: &[u8], name: String) -> std::result::Result<EmbeddingSet, String> {
    let mut pos = 0;
    if take(bytes, &mut pos, 4)? != MAGIC {
        return Err("missing EMB1 magic".into());
    }
    let dim = u32_at(bytes, &mut pos)? as usize;
    let count = u32_at(bytes, &mut pos)? as usize;
    let mut ids = Vec::with_capacity(count);
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let id_len = u16::from_le_bytes(take(bytes, &mut pos, 2)?.try_into().expect("2 bytes")) as usize;
        let id = std::str::from_utf8(take(bytes, &mut pos, id_len)?).map_err(|e| format!("doc id is not UTF-8: {e}"))?;
        ids.push(id.to_string());
        let raw = take(bytes, &mut pos, dim * 4)?;
        rows.push(
            raw.chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
                .collect(),
        );
    }
    if pos != bytes.len() {
        return Err(format!("{} trailing bytes after {count} records", bytes.len() - pos));
    }
    EmbeddingSet::new(name, ids, rows).map_err(|e| e.to_string())
}

/// Write `EMB1`; values are stored as `f32`.
pub fn write_emb1(path: &Path, set: &EmbeddingSet) -> Result<()> {
    let file = File::create(path).map_err(Error::write(path))?;
    let mut w = BufWriter::new(file);
    let mut put = |b: &[u8]| w.write_all(b).map_err(Error::write(path));
    let too_big = |what: &str| Error::Invalid(format!("{what} does not fit the EMB1 header"));
    put(MAGIC)?;
    put(&u32::try_from(set.dim()).map_err(|_| too_big("dimension"))?.to_le_bytes())?;
    put(&u32::try_from(set.len()).map_err(|_| too_big("row count"))?.to_le_bytes())?;
    for (i, id) in set.doc_ids.iter().enumerate() {
        put(&u16::try_from(id.len()).map_err(|_| too_big("doc id"))?.to_le_bytes())?;
        put(id.as_bytes())?;
        for v in set.row(i) {
            put(&(*v as f32).to_le_bytes())?;
        }
    }
    w.flush().map_err(Error::write(path))
}
