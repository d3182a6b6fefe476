//! Documents, spans and corpora.
//!
//! The label type is generic so that a corpus can be held in its source
//! taxonomy (`Corpus<String>`) until it is mapped onto [`Category`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text::{char_len, CharIndex};
use crate::{Category, Error, Result};

/// Labeled character interval `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Span<L = Category> {
    pub start: usize,
    pub end: usize,
    #[serde(rename = "label")]
    pub category: L,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

pub type PhiSpan = Span<Category>;

impl<L> Span<L> {
    pub fn new(start: usize, end: usize, category: L) -> Self {
        Span {
            start,
            end,
            category,
            confidence: None,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = Some(confidence);
        self
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn bounds(&self) -> (usize, usize) {
        (self.start, self.end)
    }
}

/// One clinical note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<L = Category> {
    pub doc_id: String,
    pub patient_id: String,
    pub text: String,
    #[serde(default)]
    pub note_type: String,
    #[serde(default)]
    pub demographics: BTreeMap<String, String>,
    #[serde(default = "Vec::new")]
    pub spans: Vec<Span<L>>,
    /// Processing markers such as `surrogated`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl<L> Document<L> {
    pub fn new(doc_id: impl Into<String>, patient_id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            doc_id: doc_id.into(),
            patient_id: patient_id.into(),
            text: text.into(),
            note_type: String::new(),
            demographics: BTreeMap::new(),
            spans: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn with_spans(mut self, spans: Vec<Span<L>>) -> Self {
        self.spans = spans;
        self
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }

    /// Text covered by `span`.
    pub fn span_text(&self, span: &Span<L>) -> &str {
        CharIndex::new(&self.text).slice(&self.text, span.start, span.end)
    }
}

impl<L: AsRef<str> + Ord + Clone> Document<L> {
    /// Sort spans by start and check bounds, confidences and same-label overlap.
    pub fn normalize(mut self) -> Result<Self> {
        let len = self.char_len();
        for s in &self.spans {
            if s.start >= s.end {
                return Err(Error::EmptySpan {
                    doc_id: self.doc_id.clone(),
                    start: s.start,
                });
            }
            if s.end > len {
                return Err(Error::SpanOutOfBounds {
                    doc_id: self.doc_id.clone(),
                    start: s.start,
                    end: s.end,
                    len,
                });
            }
            if let Some(c) = s.confidence {
                if !(0.0..=1.0).contains(&c) {
                    return Err(Error::InvalidConfidence(c));
                }
            }
        }
        self.spans
            .sort_by(|a, b| (a.start, a.end, &a.category).cmp(&(b.start, b.end, &b.category)));
        // Latest end seen so far per label; spans are sorted by start.
        let mut open: BTreeMap<&L, (usize, usize)> = BTreeMap::new();
        for s in &self.spans {
            if let Some(&(ps, pe)) = open.get(&s.category) {
                if s.start < pe {
                    return Err(Error::OverlappingSpans {
                        doc_id: self.doc_id.clone(),
                        label: s.category.as_ref().to_string(),
                        first_start: ps,
                        first_end: pe,
                        second_start: s.start,
                        second_end: s.end,
                    });
                }
            }
            open.insert(&s.category, (s.start, s.end));
        }
        Ok(self)
    }
}

/// A named collection of documents with unique `doc_id`s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus<L = Category> {
    pub name: String,
    pub documents: Vec<Document<L>>,
}

impl<L: AsRef<str> + Ord + Clone> Corpus<L> {
    /// Validate every document and the uniqueness of `doc_id`s.
    pub fn new(name: impl Into<String>, documents: Vec<Document<L>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(documents.len());
        for doc in documents {
            if !seen.insert(doc.doc_id.clone()) {
                return Err(Error::DuplicateDocId(doc.doc_id));
            }
            out.push(doc.normalize()?);
        }
        Ok(Corpus {
            name: name.into(),
            documents: out,
        })
    }
}

impl<L> Corpus<L> {
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document<L>> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.doc_id.as_str())
    }

    pub fn span_count(&self) -> usize {
        self.documents.iter().map(|d| d.spans.len()).sum()
    }
}

/// Pair the documents of `gold` with those of `pred` by `doc_id`, in gold order.
pub fn align_documents<'a, L, M>(
    gold: &'a Corpus<L>,
    pred: &'a Corpus<M>,
) -> Result<Vec<(&'a Document<L>, &'a Document<M>)>> {
    let by_id: BTreeMap<&str, &Document<M>> =
        pred.documents.iter().map(|d| (d.doc_id.as_str(), d)).collect();
    let gold_ids: BTreeSet<&str> = gold.doc_ids().collect();
    let only_gold: Vec<String> = gold_ids
        .iter()
        .filter(|id| !by_id.contains_key(*id))
        .map(|s| s.to_string())
        .collect();
    let only_pred: Vec<String> = by_id
        .keys()
        .filter(|id| !gold_ids.contains(*id))
        .map(|s| s.to_string())
        .collect();
    if !only_gold.is_empty() || !only_pred.is_empty() {
        return Err(Error::DocMismatch { only_gold, only_pred });
    }
    Ok(gold
        .documents
        .iter()
        .map(|g| (g, by_id[g.doc_id.as_str()]))
        .collect())
}
