//! Grounding of LLM extraction output to character spans, and BIO export.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::text::{overlap, whitespace_tokens, CharIndex};
use crate::{Category, Document, Error, PhiSpan, Result};

/// One extracted string with the model's confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub text: String,
    pub confidence: f64,
}

/// Parsed extraction response.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractionOutput {
    pub entities: BTreeMap<Category, Vec<Extraction>>,
    /// Set when the object came wrapped in a markdown code fence.
    #[serde(default)]
    pub fenced: bool,
}

impl ExtractionOutput {
    pub fn is_empty(&self) -> bool {
        self.entities.values().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.entities.values().map(Vec::len).sum()
    }

    /// Add an entry; a repeated (category, text) keeps the higher confidence.
    pub fn insert(&mut self, category: Category, text: String, confidence: f64) {
        let list = self.entities.entry(category).or_default();
        match list.iter_mut().find(|e| e.text == text) {
            Some(e) => e.confidence = e.confidence.max(confidence),
            None => list.push(Extraction { text, confidence }),
        }
    }
}

fn strip_fence(raw: &str) -> Option<&str> {
    let t = raw.trim();
    let body = t.strip_prefix("```")?.strip_suffix("```")?;
    // drop the info string ("json") on the opening line
    let nl = body.find('\n')?;
    let info = body[..nl].trim();
    (info.is_empty() || info.eq_ignore_ascii_case("json")).then_some(&body[nl + 1..])
}

/// Strict parse of an extraction response.
///
/// The response must be a JSON object keyed by entity type, each mapping to
/// a list of `{"text": ..., "confidence": ...}` items. Confidence defaults to
/// 1.0 when absent. A markdown fence around an otherwise valid object is
/// tolerated and recorded in `fenced`.
pub fn parse_extraction(raw: &str) -> Result<ExtractionOutput> {
    let (body, fenced) = match strip_fence(raw) {
        Some(b) => (b, true),
        None => (raw, false),
    };
    let value: Value = serde_json::from_str(body).map_err(|e| Error::InvalidJson(e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(Error::Schema("extraction output must be a JSON object".into()));
    };
    let mut out = ExtractionOutput {
        fenced,
        ..ExtractionOutput::default()
    };
    for (name, items) in map {
        let category = Category::from_str(&name).map_err(|_| Error::UnknownEntityType(name.clone()))?;
        let Value::Array(items) = items else {
            return Err(Error::NotAList(name));
        };
        for item in items {
            let Value::Object(fields) = item else {
                return Err(Error::Schema(format!("{name} entries must be objects")));
            };
            if let Some(k) = fields.keys().find(|k| *k != "text" && *k != "confidence") {
                return Err(Error::Schema(format!("unknown field {k} in {name} entry")));
            }
            let text = match fields.get("text") {
                Some(Value::String(s)) => s.clone(),
                Some(_) => return Err(Error::Schema(format!("{name} entry text must be a string"))),
                None => return Err(Error::Schema(format!("{name} entry is missing text"))),
            };
            let confidence = match fields.get("confidence") {
                None => 1.0,
                Some(v) => v
                    .as_f64()
                    .filter(|c| (0.0..=1.0).contains(c))
                    .ok_or_else(|| Error::Schema(format!("{name} entry confidence must be a number in [0, 1]")))?,
            };
            out.insert(category, text, confidence);
        }
    }
    Ok(out)
}

/// An entry that passed the threshold but does not occur in the note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ungroundable {
    pub category: Category,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grounding {
    pub spans: Vec<PhiSpan>,
    pub ungroundable: Vec<Ungroundable>,
}

/// Character start offsets of every occurrence of `needle`, overlapping ones included.
fn occurrences(haystack: &str, needle: &str, index: &CharIndex) -> Vec<usize> {
    let mut out = Vec::new();
    if needle.is_empty() {
        return out;
    }
    let mut from = 0;
    while let Some(pos) = haystack[from..].find(needle) {
        let byte = from + pos;
        out.push(index.char_offset(byte).expect("match starts on a char boundary"));
        from = byte + haystack[byte..].chars().next().map_or(1, char::len_utf8);
    }
    out
}

/// Locate every exact occurrence of each extracted string in `note`.
///
/// Entries under `min_confidence` are ignored. Overlapping candidates of one
/// category keep the longer one (earlier start on ties); candidates of
/// different categories may overlap.
pub fn ground_spans(note: &str, ext: &ExtractionOutput, min_confidence: f64) -> Result<Grounding> {
    if !(0.0..=1.0).contains(&min_confidence) {
        return Err(Error::InvalidConfig(format!("min_confidence {min_confidence} outside [0, 1]")));
    }
    let index = CharIndex::new(note);
    let mut candidates = Vec::new();
    let mut ungroundable = Vec::new();
    for (&category, entries) in &ext.entities {
        for e in entries.iter().filter(|e| e.confidence >= min_confidence) {
            let len = e.text.chars().count();
            let found = occurrences(note, &e.text, &index);
            if found.is_empty() {
                ungroundable.push(Ungroundable {
                    category,
                    text: e.text.clone(),
                });
            }
            candidates.extend(found.into_iter().map(|s| PhiSpan::new(s, s + len, category).with_confidence(e.confidence)));
        }
    }
    candidates.sort_by(|a, b| {
        (a.category, b.len(), a.start, a.end).cmp(&(b.category, a.len(), b.start, b.end))
    });
    let mut kept: Vec<PhiSpan> = Vec::new();
    for c in candidates {
        let clash = kept
            .iter()
            .rev()
            .take_while(|k| k.category == c.category)
            .any(|k| overlap(k.bounds(), c.bounds()) > 0);
        if !clash {
            kept.push(c);
        }
    }
    kept.sort_by_key(|s| (s.start, s.end, s.category));
    Ok(Grounding { spans: kept, ungroundable })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BioTag {
    O,
    B(Category),
    I(Category),
}

impl BioTag {
    pub fn category(self) -> Option<Category> {
        match self {
            BioTag::O => None,
            BioTag::B(c) | BioTag::I(c) => Some(c),
        }
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::O => f.write_str("O"),
            BioTag::B(c) => write!(f, "B-{c}"),
            BioTag::I(c) => write!(f, "I-{c}"),
        }
    }
}

impl FromStr for BioTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(BioTag::O);
        }
        let bad = || Error::Schema(format!("bad BIO tag {s}"));
        let (prefix, cat) = s.split_once('-').ok_or_else(bad)?;
        let cat = Category::from_str(cat).map_err(|_| bad())?;
        match prefix {
            "B" => Ok(BioTag::B(cat)),
            "I" => Ok(BioTag::I(cat)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BioToken {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BioSequence {
    pub tokens: Vec<BioToken>,
    pub tags: Vec<BioTag>,
}

impl BioSequence {
    /// No `I-` after `O`, at the start, or after a tag of another category.
    pub fn is_valid(&self) -> bool {
        let mut prev = BioTag::O;
        for &tag in &self.tags {
            if let BioTag::I(c) = tag {
                if prev.category() != Some(c) {
                    return false;
                }
            }
            prev = tag;
        }
        self.tags.len() == self.tokens.len()
    }
}

/// Whitespace-token BIO tags for a document.
///
/// A token takes the category of the span covering most of it (earlier span
/// start on ties). It is tagged `B-` unless the previous token was assigned
/// to the same span. OTHER spans are skipped unless `include_other` is set.
pub fn to_bio(doc: &Document, include_other: bool) -> BioSequence {
    let spans: Vec<&PhiSpan> = doc
        .spans
        .iter()
        .filter(|s| include_other || s.category != Category::Other)
        .collect();
    let mut seq = BioSequence::default();
    let mut prev_span: Option<usize> = None;
    for tok in whitespace_tokens(&doc.text) {
        let best = spans
            .iter()
            .enumerate()
            .map(|(i, s)| (i, overlap((tok.start, tok.end), s.bounds())))
            .filter(|&(_, ov)| ov > 0)
            .max_by(|&(i, a), &(j, b)| a.cmp(&b).then(spans[j].start.cmp(&spans[i].start)).then(j.cmp(&i)));
        let tag = match best {
            None => BioTag::O,
            Some((i, _)) if prev_span == Some(i) => BioTag::I(spans[i].category),
            Some((i, _)) => BioTag::B(spans[i].category),
        };
        prev_span = best.map(|(i, _)| i);
        seq.tokens.push(BioToken {
            text: tok.text.to_string(),
            start: tok.start,
            end: tok.end,
        });
        seq.tags.push(tag);
    }
    seq
}

/// Spans from BIO tags, each running from its first token's start to its
/// last token's end. A stray `I-` opens a new span.
pub fn from_bio(seq: &BioSequence) -> Vec<PhiSpan> {
    let mut out: Vec<PhiSpan> = Vec::new();
    let mut open = false;
    for (tok, &tag) in seq.tokens.iter().zip(&seq.tags) {
        match tag {
            BioTag::O => open = false,
            BioTag::I(c) if open && out.last().is_some_and(|s| s.category == c) => {
                out.last_mut().expect("open span").end = tok.end;
            }
            BioTag::B(c) | BioTag::I(c) => {
                out.push(PhiSpan::new(tok.start, tok.end, c));
                open = true;
            }
        }
    }
    out
}
