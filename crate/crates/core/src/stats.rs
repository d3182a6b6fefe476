//! Document-level bootstrap confidence intervals and paired bootstrap tests.
//!
//! Iteration `i` draws its documents from a ChaCha stream keyed by
//! `(seed, i)`, so results do not depend on the order in which iterations run.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::span_eval::{per_document_span_counts, Counts, Metric, PRStats};
use crate::{Category, Corpus, Error, Result};

/// Family-wise significance level.
pub const ALPHA: f64 = 0.05;

/// Number of simultaneous per-category comparisons corrected for.
pub const COMPARISONS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    pub ci_level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 2000,
            seed: 42,
            ci_level: 0.95,
        }
    }
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resamples < 1 {
            return Err(Error::InvalidConfig("resamples must be at least 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::InvalidConfig(format!("ci_level {} outside (0, 1)", self.ci_level)));
        }
        Ok(())
    }

    /// Lower and upper percentile fractions, e.g. (0.025, 0.975).
    pub fn quantiles(&self) -> (f64, f64) {
        let tail = (1.0 - self.ci_level) / 2.0;
        (tail, 1.0 - tail)
    }
}

/// Random stream for one bootstrap iteration.
pub fn iteration_rng(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// Draw `n` indices from `0..n` with replacement.
pub fn resample_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// Runs independent iterations and returns their results in iteration order.
pub trait Executor {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs iterations one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Linear-interpolation percentile of an ascending slice; `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Percentile interval of `pool` (sorted in place).
pub fn percentile_interval(pool: &mut [f64], cfg: &BootstrapConfig) -> (Option<f64>, Option<f64>) {
    pool.sort_by(|a, b| a.total_cmp(b));
    let (lq, uq) = cfg.quantiles();
    (percentile(pool, lq), percentile(pool, uq))
}

type CategoryTable = [Counts; 10];

fn to_table(stats: &PRStats) -> CategoryTable {
    let mut t = [Counts::default(); 10];
    for (c, n) in &stats.counts {
        t[c.index()] = *n;
    }
    t
}

fn resampled_totals(tables: &[CategoryTable], indices: &[usize]) -> CategoryTable {
    let mut t = [Counts::default(); 10];
    for &i in indices {
        for (acc, n) in t.iter_mut().zip(tables[i].iter()) {
            *acc += *n;
        }
    }
    t
}

/// Bootstrap interval for one category and metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiEstimate {
    pub category: Category,
    pub metric: Metric,
    /// Full-data value.
    pub point: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

pub fn bootstrap_ci(gold: &Corpus, pred: &Corpus, metric: Metric, cfg: &BootstrapConfig) -> Result<Vec<CiEstimate>> {
    bootstrap_ci_with(&Sequential, gold, pred, metric, cfg)
}

pub fn bootstrap_ci_with<E: Executor>(
    exec: &E,
    gold: &Corpus,
    pred: &Corpus,
    metric: Metric,
    cfg: &BootstrapConfig,
) -> Result<Vec<CiEstimate>> {
    cfg.validate()?;
    if gold.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let per_doc = per_document_span_counts(gold, pred, crate::span_eval::DEFAULT_THRESHOLD)?;
    bootstrap_ci_from_counts(exec, &per_doc, metric, cfg)
}

/// Bootstrap over precomputed per-document counts.
pub fn bootstrap_ci_from_counts<E: Executor>(
    exec: &E,
    per_doc: &[PRStats],
    metric: Metric,
    cfg: &BootstrapConfig,
) -> Result<Vec<CiEstimate>> {
    cfg.validate()?;
    if per_doc.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let tables: Vec<CategoryTable> = per_doc.iter().map(to_table).collect();
    let full = resampled_totals(&tables, &(0..tables.len()).collect::<Vec<_>>());
    let categories: Vec<Category> = Category::EVALUATED
        .into_iter()
        .filter(|c| !full[c.index()].is_zero())
        .collect();

    let n = tables.len();
    let seed = cfg.seed;
    let samples: Vec<CategoryTable> = exec.map(cfg.resamples, |i| {
        let mut rng = iteration_rng(seed, i as u64);
        resampled_totals(&tables, &resample_indices(&mut rng, n))
    });

    Ok(categories
        .into_iter()
        .map(|c| {
            let mut pool: Vec<f64> = samples.iter().filter_map(|t| metric.of(&t[c.index()])).collect();
            let (lower, upper) = percentile_interval(&mut pool, cfg);
            CiEstimate {
                category: c,
                metric,
                point: metric.of(&full[c.index()]),
                lower,
                upper,
            }
        })
        .collect())
}

/// Result of a paired bootstrap comparison between two systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTestResult {
    pub category: Category,
    pub metric: Metric,
    /// Full-data `metric(B) - metric(A)`.
    pub delta: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

pub fn bonferroni(p: f64, comparisons: usize) -> f64 {
    (p * comparisons as f64).min(1.0)
}

pub fn paired_bootstrap_test(
    gold: &Corpus,
    pred_a: &Corpus,
    pred_b: &Corpus,
    metric: Metric,
    cfg: &BootstrapConfig,
) -> Result<Vec<PairedTestResult>> {
    paired_bootstrap_test_with(&Sequential, gold, pred_a, pred_b, metric, cfg)
}

pub fn paired_bootstrap_test_with<E: Executor>(
    exec: &E,
    gold: &Corpus,
    pred_a: &Corpus,
    pred_b: &Corpus,
    metric: Metric,
    cfg: &BootstrapConfig,
) -> Result<Vec<PairedTestResult>> {
    cfg.validate()?;
    if gold.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let threshold = crate::span_eval::DEFAULT_THRESHOLD;
    let a = per_document_span_counts(gold, pred_a, threshold)?;
    let b = per_document_span_counts(gold, pred_b, threshold)?;
    paired_test_from_counts(exec, &a, &b, metric, cfg)
}

/// Paired test over precomputed per-document counts aligned by index.
pub fn paired_test_from_counts<E: Executor>(
    exec: &E,
    per_doc_a: &[PRStats],
    per_doc_b: &[PRStats],
    metric: Metric,
    cfg: &BootstrapConfig,
) -> Result<Vec<PairedTestResult>> {
    cfg.validate()?;
    if per_doc_a.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if per_doc_a.len() != per_doc_b.len() {
        return Err(Error::DimensionMismatch(per_doc_a.len(), per_doc_b.len()));
    }
    let ta: Vec<CategoryTable> = per_doc_a.iter().map(to_table).collect();
    let tb: Vec<CategoryTable> = per_doc_b.iter().map(to_table).collect();
    let all: Vec<usize> = (0..ta.len()).collect();
    let (full_a, full_b) = (resampled_totals(&ta, &all), resampled_totals(&tb, &all));

    let n = ta.len();
    let seed = cfg.seed;
    let samples: Vec<(CategoryTable, CategoryTable)> = exec.map(cfg.resamples, |i| {
        let mut rng = iteration_rng(seed, i as u64);
        let idx = resample_indices(&mut rng, n);
        (resampled_totals(&ta, &idx), resampled_totals(&tb, &idx))
    });

    let floor = 1.0 / cfg.resamples as f64;
    let mut out = Vec::new();
    for c in Category::EVALUATED {
        let k = c.index();
        let (Some(ma), Some(mb)) = (metric.of(&full_a[k]), metric.of(&full_b[k])) else {
            continue;
        };
        let delta = mb - ma;
        let mut valid = 0usize;
        let mut flips = 0usize;
        for (sa, sb) in &samples {
            if let (Some(x), Some(y)) = (metric.of(&sa[k]), metric.of(&sb[k])) {
                valid += 1;
                let d = y - x;
                if d == 0.0 || sign(d) != sign(delta) {
                    flips += 1;
                }
            }
        }
        let raw = if valid == 0 { 1.0 } else { flips as f64 / valid as f64 };
        let p_value = raw.max(floor);
        let p_adjusted = bonferroni(p_value, COMPARISONS);
        out.push(PairedTestResult {
            category: c,
            metric,
            delta,
            p_value,
            p_adjusted,
            significant: p_adjusted < ALPHA,
        });
    }
    Ok(out)
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `"0.92 [0.90--0.93]"`.
pub fn format_ci(est: &CiEstimate) -> Result<String> {
    match (est.point, est.lower, est.upper) {
        (Some(p), Some(l), Some(u)) => Ok(format!("{p:.2} [{l:.2}--{u:.2}]")),
        _ => Err(Error::UndefinedEstimate(est.category)),
    }
}
