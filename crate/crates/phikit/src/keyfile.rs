//! Surrogate key files and name pools.
//!
//! Key file: `{"secret_hex": "...", "salt_hex": "...", "name_pool_path": "..."}`.
//! A relative pool path is resolved against the key file's directory; without
//! one the built-in pool is used. The pool is plain text with `FIRST` and
//! `LAST` section headers, one name per line, `#` comments.

use std::fs;
use std::path::{Path, PathBuf};

use phikit_core::surrogate::SurrogateKey;
use serde::Deserialize;

use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KeyFile {
    secret_hex: String,
    #[serde(default)]
    salt_hex: String,
    #[serde(default)]
    name_pool_path: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct NamePool {
    pub first: Vec<String>,
    pub last: Vec<String>,
}

pub fn parse_name_pool(text: &str) -> Result<NamePool> {
    let mut pool = NamePool::default();
    let mut section: Option<&mut Vec<String>> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.trim_start_matches('[').trim_end_matches(']') {
            "FIRST" => section = Some(&mut pool.first),
            "LAST" => section = Some(&mut pool.last),
            name => match section.as_deref_mut() {
                Some(list) => list.push(name.to_string()),
                None => {
                    return Err(Error::Invalid(format!(
                        "name pool line {}: name before any FIRST/LAST header",
                        i + 1
                    )))
                }
            },
        }
    }
    Ok(pool)
}

fn decode_hex(field: &str, value: &str) -> Result<Vec<u8>> {
    hex::decode(value.trim()).map_err(|e| Error::Invalid(format!("{field}: {e}")))
}

pub fn load_key(path: &Path) -> Result<SurrogateKey> {
    let text = fs::read_to_string(path).map_err(Error::read(path))?;
    let kf: KeyFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let secret = decode_hex("secret_hex", &kf.secret_hex)?;
    let salt = decode_hex("salt_hex", &kf.salt_hex)?;
    match kf.name_pool_path {
        None => Ok(SurrogateKey::with_default_names(secret, salt)?),
        Some(p) => {
            let p = if p.is_relative() {
                path.parent().unwrap_or(Path::new(".")).join(p)
            } else {
                p
            };
            let pool = parse_name_pool(&fs::read_to_string(&p).map_err(Error::read(&p))?)?;
            Ok(SurrogateKey::new(secret, salt, pool.first, pool.last)?)
        }
    }
}
