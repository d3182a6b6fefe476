//! Source-taxonomy to unified-category mappings.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Span};
use crate::{Category, Error, Result};

/// Total map from source label strings to [`Category`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelMap {
    pub entries: BTreeMap<String, Category>,
}

impl LabelMap {
    pub fn new(entries: impl IntoIterator<Item = (impl Into<String>, Category)>) -> Self {
        LabelMap {
            entries: entries.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }

    /// Map that sends every unified label name to itself.
    pub fn identity() -> Self {
        LabelMap::new(Category::ALL.iter().map(|c| (c.as_str(), *c)))
    }

    pub fn get(&self, label: &str) -> Option<Category> {
        self.entries.get(label).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const I2B2: [(&str, Category); 20] = [
    ("DATE", Category::Date),
    ("PATIENT", Category::Patient),
    ("DOCTOR", Category::Doctor),
    ("MEDICALRECORD", Category::Id),
    ("IDNUM", Category::Id),
    ("USERNAME", Category::Id),
    ("DEVICE", Category::Id),
    ("AGE", Category::Age),
    ("HOSPITAL", Category::Hospital),
    ("PHONE", Category::Phone),
    ("FAX", Category::Phone),
    ("STREET", Category::Location),
    ("CITY", Category::Location),
    ("STATE", Category::Location),
    ("ZIP", Category::Location),
    ("COUNTRY", Category::Location),
    ("LOCATION-OTHER", Category::Location),
    ("EMAIL", Category::Web),
    ("PROFESSION", Category::Other),
    ("ORGANIZATION", Category::Other),
];

// AIMI's HOSPITAL is a location and its VENDOR is the institution.
const AIMI: [(&str, Category); 8] = [
    ("DATES", Category::Date),
    ("PATIENT", Category::Patient),
    ("HCW", Category::Doctor),
    ("UNIQUE", Category::Id),
    ("HOSPITAL", Category::Location),
    ("VENDOR", Category::Hospital),
    ("PHONE", Category::Phone),
    ("AGE", Category::Age),
];

/// The shipped mappings, keyed `"i2b2"` and `"aimi"`.
pub fn builtin_label_maps() -> BTreeMap<&'static str, LabelMap> {
    let mut maps = BTreeMap::new();
    maps.insert("i2b2", LabelMap::new(I2B2));
    maps.insert("aimi", LabelMap::new(AIMI));
    maps
}

/// Relabel every span through `map`, optionally dropping spans that land on OTHER.
///
/// Fails on the first span whose label is missing from the map.
pub fn apply_label_map<L: AsRef<str>>(
    corpus: Corpus<L>,
    map: &LabelMap,
    drop_other: bool,
) -> Result<Corpus> {
    let mut documents = Vec::with_capacity(corpus.documents.len());
    for doc in corpus.documents {
        let mut spans = Vec::with_capacity(doc.spans.len());
        for s in doc.spans {
            let label = s.category.as_ref();
            let category = map.get(label).ok_or_else(|| Error::UnmappedLabel {
                label: label.to_string(),
                doc_id: doc.doc_id.clone(),
            })?;
            if drop_other && category == Category::Other {
                continue;
            }
            spans.push(Span {
                start: s.start,
                end: s.end,
                category,
                confidence: s.confidence,
            });
        }
        documents.push(Document {
            doc_id: doc.doc_id,
            patient_id: doc.patient_id,
            text: doc.text,
            note_type: doc.note_type,
            demographics: doc.demographics,
            spans,
            flags: doc.flags,
        });
    }
    Corpus::new(corpus.name, documents)
}
