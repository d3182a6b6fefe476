use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::dates::{parse_dates, shift_date};
use super::generate::{age_band, surrogate_for};
use super::key::{derive_jitter, SurrogateKey};
use crate::text::CharIndex;
use crate::{Category, Document, Error, PhiSpan, Result};

/// Marker placed on released documents so they are never surrogated twice.
pub const SURROGATED_FLAG: &str = "surrogated";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub orig_start: usize,
    pub orig_end: usize,
    /// Where the replacement starts in the output text.
    pub output_start: usize,
    pub replacement_text: String,
    pub category: Category,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagReason {
    /// A date without a year and no reference year to resolve it.
    UnresolvableDate,
    /// A DATE span with no recognizable date in it.
    NoDateFound,
}

/// A span left unchanged by the plan. Holds offsets only, never the text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFlag {
    pub start: usize,
    pub end: usize,
    /// Position of the untouched span in the output text.
    pub output_start: usize,
    pub output_end: usize,
    pub category: Category,
    pub reason: FlagReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogatePlan {
    pub doc_id: String,
    pub replacements: Vec<Replacement>,
    pub output_text: String,
    pub output_spans: Vec<PhiSpan>,
    pub text_hash: String,
    pub patient_hash: String,
    pub flags: Vec<PlanFlag>,
}

impl SurrogatePlan {
    /// The released form of `source`: surrogate text and spans, hashed patient
    /// id, banded age and the surrogated marker.
    pub fn document(&self, source: &Document) -> Document {
        let mut demographics = source.demographics.clone();
        if let Some(age) = demographics.get_mut("age") {
            if let Ok(years) = age.trim().parse::<f64>() {
                if years.is_finite() && years >= 0.0 {
                    *age = String::from(age_band(years as u32));
                }
            }
        }
        let mut flags = source.flags.clone();
        flags.push(String::from(SURROGATED_FLAG));
        Document {
            doc_id: self.doc_id.clone(),
            patient_id: self.patient_hash.clone(),
            text: self.output_text.clone(),
            note_type: source.note_type.clone(),
            demographics,
            spans: self.output_spans.clone(),
            flags,
        }
    }
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Shift every date inside a DATE span; `None` plus a reason if nothing moved.
fn shift_span(text: &str, jitter: i64, reference_year: Option<i32>) -> core::result::Result<String, FlagReason> {
    let dates = parse_dates(text);
    if dates.is_empty() {
        return Err(FlagReason::NoDateFound);
    }
    let index = CharIndex::new(text);
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for d in &dates {
        let shifted = shift_date(d, jitter, reference_year).map_err(|_| FlagReason::UnresolvableDate)?;
        out.push_str(index.slice(text, cursor, d.start));
        out.push_str(&shifted);
        cursor = d.end;
    }
    out.push_str(index.slice(text, cursor, index.char_len()));
    Ok(out)
}

/// Build the surrogate plan for one document.
///
/// Spans of any category must not overlap. Dates that cannot be shifted are
/// left as they are and reported in `flags`; the span is still carried to
/// the output at its realigned position.
pub fn apply_surrogates(doc: &Document, key: &SurrogateKey, reference_year: Option<i32>) -> Result<SurrogatePlan> {
    if doc.has_flag(SURROGATED_FLAG) {
        return Err(Error::AlreadySurrogated(doc.doc_id.clone()));
    }
    let mut spans = doc.spans.clone();
    spans.sort_by_key(|s| (s.start, s.end));
    for w in spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::OverlappingReplacements {
                doc_id: doc.doc_id.clone(),
                start: w[1].start,
            });
        }
    }
    let index = CharIndex::new(&doc.text);
    let mut jitter = None;
    let mut output_text = String::with_capacity(doc.text.len());
    let mut replacements = Vec::with_capacity(spans.len());
    let mut output_spans = Vec::with_capacity(spans.len());
    let mut flags = Vec::new();
    let mut cursor = 0;
    let mut out_len = 0;
    for span in &spans {
        let original = index.slice(&doc.text, span.start, span.end);
        let new_text = if span.category == Category::Date {
            let j = match jitter {
                Some(j) => j,
                None => *jitter.insert(derive_jitter(key, &doc.patient_id)?),
            };
            match shift_span(original, j, reference_year) {
                Ok(s) => Some(s),
                Err(reason) => {
                    let output_start = out_len + (span.start - cursor);
                    flags.push(PlanFlag {
                        start: span.start,
                        end: span.end,
                        output_start,
                        output_end: output_start + span.len(),
                        category: span.category,
                        reason,
                    });
                    None
                }
            }
        } else {
            Some(surrogate_for(original, span.category, key)?)
        };
        let between = index.slice(&doc.text, cursor, span.start);
        output_text.push_str(between);
        out_len += span.start - cursor;
        let new_start = out_len;
        let body = new_text.as_deref().unwrap_or(original);
        output_text.push_str(body);
        out_len += body.chars().count();
        cursor = span.end;
        if let Some(text) = new_text {
            replacements.push(Replacement {
                orig_start: span.start,
                orig_end: span.end,
                output_start: new_start,
                replacement_text: text,
                category: span.category,
            });
        }
        output_spans.push(PhiSpan {
            start: new_start,
            end: out_len,
            category: span.category,
            confidence: span.confidence,
        });
    }
    output_text.push_str(index.slice(&doc.text, cursor, index.char_len()));
    Ok(SurrogatePlan {
        doc_id: doc.doc_id.clone(),
        replacements,
        text_hash: sha256_hex(&output_text),
        patient_hash: key.patient_hash(&doc.patient_id),
        output_text,
        output_spans,
        flags,
    })
}
