use alloc::string::String;
use alloc::vec::Vec;

use crate::Category;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown category {0}")]
    UnknownCategory(String),
    #[error("span out of bounds: [{start}, {end}) in document {doc_id} with {len} characters")]
    SpanOutOfBounds {
        doc_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("empty span at {start} in document {doc_id}")]
    EmptySpan { doc_id: String, start: usize },
    #[error("overlapping {label} spans in document {doc_id}: [{first_start}, {first_end}) and [{second_start}, {second_end})")]
    OverlappingSpans {
        doc_id: String,
        label: String,
        first_start: usize,
        first_end: usize,
        second_start: usize,
        second_end: usize,
    },
    #[error("confidence {0} outside [0, 1]")]
    InvalidConfidence(f64),
    #[error("duplicate doc_id {0}")]
    DuplicateDocId(String),
    #[error("unmapped label {label} in document {doc_id}")]
    UnmappedLabel { label: String, doc_id: String },
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("document sets differ (only in gold: [{}]; only in prediction: [{}])", only_gold.join(", "), only_pred.join(", "))]
    DocMismatch {
        only_gold: Vec<String>,
        only_pred: Vec<String>,
    },
    #[error("no true positive, false positive or false negative counts to average")]
    NoCounts,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("corpus has no documents")]
    EmptyCorpus,
    #[error("undefined estimate for {0}")]
    UndefinedEstimate(Category),
    #[error("need at least 2 embedding rows, got {0}")]
    TooFewRows(usize),
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("eigendecomposition did not converge")]
    EigenFailure,
    #[error("distribution has no tokens")]
    EmptyDistribution,
    #[error("invalid mixture weights ({0}, {1})")]
    InvalidWeights(f64, f64),
    #[error("missing {axis} value for document {doc_id}")]
    MissingDemographic { axis: String, doc_id: String },
    #[error("unknown strata axis {0}")]
    UnknownAxis(String),
    #[error("bin edges must be strictly increasing")]
    BadBinEdges,
    #[error("invalid surrogate key: {0}")]
    InvalidKey(String),
    #[error("empty patient_id")]
    EmptyPatientId,
    #[error("{0} spans have no surrogate generator")]
    UnsupportedCategory(Category),
    #[error("partial date {0} has no year and no reference year was given")]
    UnresolvableDate(String),
    #[error("overlapping replacements in document {doc_id} at {start}")]
    OverlappingReplacements { doc_id: String, start: usize },
    #[error("document {0} is already surrogated")]
    AlreadySurrogated(String),
    #[error("invalid JSON: {0}")]
    InvalidJson(String),
    #[error("unknown entity type {0}")]
    UnknownEntityType(String),
    #[error("entity type {0} must map to a list")]
    NotAList(String),
    #[error("{0}")]
    Schema(String),
    #[error("negative count {0}")]
    NegativeCount(String),
    #[error("division by zero")]
    DivisionByZero,
}
