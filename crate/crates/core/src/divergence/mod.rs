//! Distributional distance between corpora: Fréchet distance between Gaussians
//! fitted to document embeddings, and Jensen–Shannon divergence between
//! unigram distributions. Both come with document-level bootstrap estimates.

mod frechet;
mod jsd;

pub use frechet::{fit_gaussian, fit_gaussian_rows, ftd, ftd_bootstrap, ftd_bootstrap_with, EmbeddingSet, FtdComponents, FtdResult, GaussianSummary};
pub use jsd::{jsd, jsd_bootstrap, jsd_bootstrap_with, jsd_mixture_weighted, unigram_dist, JsdResult, UnigramDist};

use alloc::vec::Vec;

use crate::stats::{percentile_interval, BootstrapConfig};

/// Bootstrap summary of one scalar statistic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapEstimate {
    pub bootstrap_mean: f64,
    pub lower: f64,
    pub upper: f64,
    /// Statistic on the unresampled data.
    pub full_data: f64,
}

impl BootstrapEstimate {
    pub(crate) fn from_pool(mut pool: Vec<f64>, full_data: f64, cfg: &BootstrapConfig) -> Self {
        let mean = pool.iter().sum::<f64>() / pool.len() as f64;
        let (lower, upper) = percentile_interval(&mut pool, cfg);
        BootstrapEstimate {
            bootstrap_mean: mean,
            lower: lower.unwrap_or(f64::NAN),
            upper: upper.unwrap_or(f64::NAN),
            full_data,
        }
    }
}

/// Default resample count for divergence bootstraps.
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Bootstrap settings with the divergence defaults (1,000 resamples, seed 42, 95%).
pub fn default_config() -> BootstrapConfig {
    BootstrapConfig {
        resamples: DEFAULT_RESAMPLES,
        ..BootstrapConfig::default()
    }
}
