use alloc::string::String;
use alloc::vec::Vec;

use hmac::{Hmac, Mac};
use sha2::Sha256;

use crate::{Error, Result};

type HmacSha256 = Hmac<Sha256>;

pub const JITTER_MIN: i64 = 3;
pub const JITTER_MAX: i64 = 90;

/// Secret material and name pools for one release.
#[derive(Clone, PartialEq, Eq)]
pub struct SurrogateKey {
    secret: Vec<u8>,
    salt: Vec<u8>,
    pub first_names: Vec<String>,
    pub last_names: Vec<String>,
}

impl core::fmt::Debug for SurrogateKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SurrogateKey")
            .field("secret", &"<redacted>")
            .field("first_names", &self.first_names.len())
            .field("last_names", &self.last_names.len())
            .finish()
    }
}

impl SurrogateKey {
    pub fn new(secret: Vec<u8>, salt: Vec<u8>, first_names: Vec<String>, last_names: Vec<String>) -> Result<Self> {
        if secret.is_empty() {
            return Err(Error::InvalidKey("secret is empty".into()));
        }
        if first_names.is_empty() || last_names.is_empty() {
            return Err(Error::InvalidKey("name pool needs at least one FIRST and one LAST name".into()));
        }
        Ok(SurrogateKey {
            secret,
            salt,
            first_names,
            last_names,
        })
    }

    /// Key using the built-in synthetic name pool.
    pub fn with_default_names(secret: Vec<u8>, salt: Vec<u8>) -> Result<Self> {
        let own = |v: &[&str]| v.iter().map(|s| String::from(*s)).collect();
        Self::new(
            secret,
            salt,
            own(super::pools::FIRST_NAMES),
            own(super::pools::LAST_NAMES),
        )
    }

    fn mac(&self) -> HmacSha256 {
        HmacSha256::new_from_slice(&self.secret).expect("HMAC accepts keys of any length")
    }

    /// `HMAC-SHA256(secret, data)` without salt or domain.
    pub fn raw_digest(&self, data: &[u8]) -> [u8; 32] {
        let mut m = self.mac();
        m.update(data);
        m.finalize().into_bytes().into()
    }

    /// Salted, domain-separated keyed digest; `counter` selects a block.
    pub fn digest(&self, domain: &str, data: &[u8], counter: u32) -> [u8; 32] {
        let mut m = self.mac();
        m.update(&(self.salt.len() as u32).to_be_bytes());
        m.update(&self.salt);
        m.update(&(domain.len() as u32).to_be_bytes());
        m.update(domain.as_bytes());
        m.update(&counter.to_be_bytes());
        m.update(data);
        m.finalize().into_bytes().into()
    }

    /// Keyed hash of `data` reduced to an index in `0..modulus`.
    pub fn index(&self, domain: &str, data: &[u8], modulus: usize) -> usize {
        let d = self.digest(domain, data, 0);
        let v = u64::from_be_bytes(d[..8].try_into().expect("8 bytes"));
        (v % modulus as u64) as usize
    }

    /// One-way replacement for a patient identifier (lowercase hex).
    pub fn patient_hash(&self, patient_id: &str) -> String {
        hex::encode(self.digest("patient", patient_id.as_bytes(), 0))
    }
}

/// Per-patient signed day offset with magnitude in `[3, 90]`.
///
/// The HMAC of the patient id, read as a big-endian integer, gives the
/// magnitude `3 + value mod 88`; the low bit of the last byte gives the sign
/// (set means backwards).
pub fn derive_jitter(key: &SurrogateKey, patient_id: &str) -> Result<i64> {
    if patient_id.is_empty() {
        return Err(Error::EmptyPatientId);
    }
    let d = key.raw_digest(patient_id.as_bytes());
    let span = (JITTER_MAX - JITTER_MIN + 1) as u32;
    let rem = d.iter().fold(0u32, |acc, &b| (acc * 256 + b as u32) % span);
    let magnitude = JITTER_MIN + rem as i64;
    Ok(if d[31] & 1 == 1 { -magnitude } else { magnitude })
}

/// Endless keyed byte stream, used to draw digits and letters.
pub(crate) struct KeyedStream<'a> {
    key: &'a SurrogateKey,
    domain: &'a str,
    data: &'a [u8],
    counter: u32,
    block: [u8; 32],
    pos: usize,
}

impl<'a> KeyedStream<'a> {
    pub(crate) fn new(key: &'a SurrogateKey, domain: &'a str, data: &'a [u8], round: u32) -> Self {
        // Rounds are spaced so their blocks never coincide.
        let counter = round.wrapping_mul(1 << 20);
        KeyedStream {
            key,
            domain,
            data,
            counter,
            block: key.digest(domain, data, counter),
            pos: 0,
        }
    }

    fn byte(&mut self) -> u8 {
        if self.pos == self.block.len() {
            self.counter = self.counter.wrapping_add(1);
            self.block = self.key.digest(self.domain, self.data, self.counter);
            self.pos = 0;
        }
        let b = self.block[self.pos];
        self.pos += 1;
        b
    }

    pub(crate) fn digit(&mut self) -> char {
        loop {
            let b = self.byte();
            if b < 250 {
                return (b'0' + b % 10) as char;
            }
        }
    }

    pub(crate) fn letter(&mut self) -> char {
        loop {
            let b = self.byte();
            if b < 234 {
                return (b'a' + b % 26) as char;
            }
        }
    }

    pub(crate) fn hex(&mut self) -> char {
        let b = self.byte() & 0x0f;
        char::from_digit(b as u32, 16).expect("nibble")
    }
}
