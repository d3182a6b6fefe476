//! Surrogate replacement for corpus release.
//!
//! Every PHI span is swapped for a type-appropriate synthetic value derived
//! from a secret key: dates move by a per-patient day offset, names are drawn
//! from a pool, identifiers become keyed hashes, and phone numbers, locations
//! and institutions keep their shape with new content. Span offsets are then
//! realigned to the rewritten text.

mod dates;
mod generate;
mod key;
mod pipeline;
pub mod pools;

pub use dates::{parse_dates, shift_date, CaseStyle, DateFormat, ParsedDate, YearStyle};
pub use generate::{age_band, surrogate_for};
pub use key::{derive_jitter, SurrogateKey, JITTER_MAX, JITTER_MIN};
pub use pipeline::{apply_surrogates, FlagReason, PlanFlag, Replacement, SurrogatePlan, SURROGATED_FLAG};
