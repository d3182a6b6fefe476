use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::BootstrapEstimate;
use crate::stats::{iteration_rng, resample_indices, BootstrapConfig, Executor, Sequential};
use crate::{Error, Result};

const EIGEN_EPS: f64 = 1e-14;
const EIGEN_MAX_ITER: usize = 10_000;

/// Precomputed document embeddings of one corpus, one row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub corpus_name: String,
    pub doc_ids: Vec<String>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingSet {
    /// `rows` must all have the same length and only finite values.
    pub fn new(corpus_name: impl Into<String>, doc_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if doc_ids.len() != rows.len() {
            return Err(Error::DimensionMismatch(doc_ids.len(), rows.len()));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(dim, row.len()));
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: r, col: c });
            }
            data.extend_from_slice(row);
        }
        Ok(EmbeddingSet {
            corpus_name: corpus_name.into(),
            doc_ids,
            dim,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Mean vector and covariance matrix of a corpus's embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

impl GaussianSummary {
    /// Build from explicit parameters; the covariance must be square, match
    /// the mean and be symmetric to 1e-9 relative.
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(Error::DimensionMismatch(d, covariance.nrows()));
        }
        let scale = covariance.amax().max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > 1e-9 * scale {
                    return Err(Error::InvalidConfig(String::from("covariance is not symmetric")));
                }
            }
        }
        Ok(GaussianSummary { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Column means and unbiased (n - 1) sample covariance, symmetrized.
pub fn fit_gaussian(emb: &EmbeddingSet) -> Result<GaussianSummary> {
    let rows: Vec<usize> = (0..emb.len()).collect();
    fit_gaussian_rows(emb, &rows)
}

/// Fit on the given rows of `emb` (repeats allowed).
pub fn fit_gaussian_rows(emb: &EmbeddingSet, rows: &[usize]) -> Result<GaussianSummary> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let d = emb.dim();
    let mut mean = DVector::<f64>::zeros(d);
    for &r in rows {
        for (m, v) in mean.iter_mut().zip(emb.row(r)) {
            *m += v;
        }
    }
    mean /= n as f64;
    let mut centered = DMatrix::<f64>::zeros(n, d);
    for (i, &r) in rows.iter().enumerate() {
        for (j, v) in emb.row(r).iter().enumerate() {
            centered[(i, j)] = v - mean[j];
        }
    }
    let mut cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    let sym = (&cov + cov.transpose()) * 0.5;
    cov = sym;
    Ok(GaussianSummary { mean, covariance: cov })
}

/// Fréchet distance and its two additive components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtdComponents {
    pub total: f64,
    /// Squared distance between the means.
    pub mean_shift: f64,
    /// `tr(Σa + Σb - 2 (Σa Σb)^½)`.
    pub cov_divergence: f64,
}

fn symmetric_eigen(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenFailure)
}

/// Principal square root of a symmetric PSD matrix, negative eigenvalues clamped.
fn psd_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = symmetric_eigen(m.clone())?;
    let roots = eig.eigenvalues.map(|l| libm::sqrt(l.max(0.0)));
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&roots) * v.transpose())
}

/// Trace of `(Σa Σb)^½`, computed as the trace of `(R Σb R)^½` with `R = Σa^½`.
fn trace_sqrt_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let r = psd_sqrt(a)?;
    let m = &r * b * &r;
    let m = (&m + m.transpose()) * 0.5;
    let eig = symmetric_eigen(m)?;
    Ok(eig.eigenvalues.iter().map(|l| libm::sqrt(l.max(0.0))).sum())
}

pub fn ftd(a: &GaussianSummary, b: &GaussianSummary) -> Result<FtdComponents> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let diff = &a.mean - &b.mean;
    let mean_shift = diff.dot(&diff);
    let tr_sqrt = trace_sqrt_product(&a.covariance, &b.covariance)?;
    let scale = a.covariance.trace() + b.covariance.trace();
    let mut cov_divergence = scale - 2.0 * tr_sqrt;
    // The term is a squared distance; anything within rounding of zero is zero.
    if cov_divergence < 64.0 * f64::EPSILON * scale {
        cov_divergence = 0.0;
    }
    Ok(FtdComponents {
        total: mean_shift + cov_divergence,
        mean_shift,
        cov_divergence,
    })
}

/// Bootstrap estimates of the total and both components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FtdResult {
    pub total: BootstrapEstimate,
    pub mean_shift: BootstrapEstimate,
    pub cov_divergence: BootstrapEstimate,
}

pub fn ftd_bootstrap(a: &EmbeddingSet, b: &EmbeddingSet, cfg: &BootstrapConfig) -> Result<FtdResult> {
    ftd_bootstrap_with(&Sequential, a, b, cfg)
}

/// Each iteration resamples both sets to their own sizes (streams `2i` and
/// `2i + 1`), refits and recomputes the distance.
pub fn ftd_bootstrap_with<E: Executor>(
    exec: &E,
    a: &EmbeddingSet,
    b: &EmbeddingSet,
    cfg: &BootstrapConfig,
) -> Result<FtdResult> {
    cfg.validate()?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let full = ftd(&fit_gaussian(a)?, &fit_gaussian(b)?)?;
    let seed = cfg.seed;
    let runs: Vec<Result<FtdComponents>> = exec.map(cfg.resamples, |i| {
        let ia = resample_indices(&mut iteration_rng(seed, 2 * i as u64), a.len());
        let ib = resample_indices(&mut iteration_rng(seed, 2 * i as u64 + 1), b.len());
        ftd(&fit_gaussian_rows(a, &ia)?, &fit_gaussian_rows(b, &ib)?)
    });
    let runs: Vec<FtdComponents> = runs.into_iter().collect::<Result<_>>()?;
    let pool = |f: fn(&FtdComponents) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
    Ok(FtdResult {
        total: BootstrapEstimate::from_pool(pool(|c| c.total), full.total, cfg),
        mean_shift: BootstrapEstimate::from_pool(pool(|c| c.mean_shift), full.mean_shift, cfg),
        cov_divergence: BootstrapEstimate::from_pool(pool(|c| c.cov_divergence), full.cov_divergence, cfg),
    })
}
