//! Allocation-only core of `phikit`: PHI span evaluation, bootstrap statistics,
//! corpus divergence, diversity sampling, surrogate replacement for release,
//! grounding of LLM extraction output and the API cost model.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the parallel
//! bootstrap runner and the command line live in the `phikit` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod align;
pub mod category;
pub mod corpus;
pub mod cost;
pub mod divergence;
mod error;
pub mod labels;
pub mod sampler;
pub mod span_eval;
pub mod stats;
pub mod surrogate;
pub mod text;

pub use category::Category;
pub use corpus::{Corpus, Document, PhiSpan, Span};
pub use error::{Error, Result};
pub use labels::LabelMap;
