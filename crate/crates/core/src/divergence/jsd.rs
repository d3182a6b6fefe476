use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::BootstrapEstimate;
use crate::corpus::Corpus;
use crate::stats::{iteration_rng, resample_indices, BootstrapConfig, Executor, Sequential};
use crate::text::whitespace_tokens;
use crate::{Error, Result};

/// Raw whitespace-token counts; no case folding or punctuation stripping.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnigramDist {
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

impl UnigramDist {
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut d = UnigramDist::default();
        for t in texts {
            d.add_text(t);
        }
        d
    }

    pub fn add_text(&mut self, text: &str) {
        for tok in whitespace_tokens(text) {
            *self.counts.entry(tok.text.to_string()).or_insert(0) += 1;
            self.total += 1;
        }
    }

    pub fn probability(&self, token: &str) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(token).copied().unwrap_or(0) as f64 / self.total as f64
    }
}

pub fn unigram_dist<L>(corpus: &Corpus<L>) -> Result<UnigramDist> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let d = UnigramDist::from_texts(corpus.documents.iter().map(|d| d.text.as_str()));
    if d.total == 0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy)]
enum Weighting {
    /// Mixture and KL terms both use the weights.
    Generalized(f64, f64),
    /// Only the mixture is weighted; KL terms keep the ½ factors.
    MixtureOnly(f64, f64),
}

fn check_weights(w: (f64, f64)) -> Result<()> {
    let (a, b) = w;
    if a > 0.0 && b > 0.0 && (a + b - 1.0).abs() <= 1e-9 {
        Ok(())
    } else {
        Err(Error::InvalidWeights(a, b))
    }
}

/// Divergence over two count vectors aligned on a shared vocabulary.
fn divergence(p: &[u64], p_total: u64, q: &[u64], q_total: u64, weighting: Weighting) -> Result<f64> {
    if p_total == 0 || q_total == 0 {
        return Err(Error::EmptyDistribution);
    }
    let (mix_a, mix_b, kl_a, kl_b, clamp) = match weighting {
        Weighting::Generalized(a, b) => (a, b, a, b, true),
        Weighting::MixtureOnly(a, b) => (a, b, 0.5, 0.5, false),
    };
    let (pt, qt) = (p_total as f64, q_total as f64);
    let mut kl_p = 0.0;
    let mut kl_q = 0.0;
    for (&pc, &qc) in p.iter().zip(q) {
        let pw = pc as f64 / pt;
        let qw = qc as f64 / qt;
        let m = mix_a * pw + mix_b * qw;
        if pc > 0 {
            kl_p += pw * libm::log(pw / m);
        }
        if qc > 0 {
            kl_q += qw * libm::log(qw / m);
        }
    }
    let value = kl_a * kl_p + kl_b * kl_q;
    Ok(if clamp {
        value.clamp(0.0, core::f64::consts::LN_2)
    } else {
        value.max(0.0)
    })
}

fn aligned(p: &UnigramDist, q: &UnigramDist) -> (Vec<u64>, Vec<u64>) {
    let mut vocab: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for (t, c) in &p.counts {
        vocab.entry(t.as_str()).or_default().0 = *c;
    }
    for (t, c) in &q.counts {
        vocab.entry(t.as_str()).or_default().1 = *c;
    }
    vocab.values().map(|&(a, b)| (a, b)).unzip()
}

/// Jensen–Shannon divergence in nats.
///
/// Without weights this is the equal-weight form. With `(πa, πb)` it is the
/// generalized form `πa·KL(P‖M) + πb·KL(Q‖M)` with `M = πa·P + πb·Q`, which
/// keeps the `[0, ln 2]` bound.
pub fn jsd(p: &UnigramDist, q: &UnigramDist, weights: Option<(f64, f64)>) -> Result<f64> {
    let w = weights.unwrap_or((0.5, 0.5));
    check_weights(w)?;
    let (a, b) = aligned(p, q);
    divergence(&a, p.total, &b, q.total, Weighting::Generalized(w.0, w.1))
}

/// Variant that weights only the mixture distribution and keeps ½ on both
/// KL terms. Not bounded by ln 2 in general.
pub fn jsd_mixture_weighted(p: &UnigramDist, q: &UnigramDist, weights: (f64, f64)) -> Result<f64> {
    check_weights(weights)?;
    let (a, b) = aligned(p, q);
    divergence(&a, p.total, &b, q.total, Weighting::MixtureOnly(weights.0, weights.1))
}

/// Bootstrap estimates of the standard and size-weighted divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JsdResult {
    pub standard: BootstrapEstimate,
    pub weighted: BootstrapEstimate,
}

/// Per-document sparse counts over a shared vocabulary.
struct Interned {
    docs_a: Vec<Vec<(usize, u64)>>,
    docs_b: Vec<Vec<(usize, u64)>>,
    vocab: usize,
}

fn intern<L, M>(a: &Corpus<L>, b: &Corpus<M>) -> Interned {
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut doc_counts = |text: &str| {
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for tok in whitespace_tokens(text) {
            let next = ids.len();
            let id = *ids.entry(tok.text.to_string()).or_insert(next);
            *counts.entry(id).or_insert(0) += 1;
        }
        counts.into_iter().collect::<Vec<_>>()
    };
    let docs_a: Vec<_> = a.documents.iter().map(|d| doc_counts(&d.text)).collect();
    let docs_b: Vec<_> = b.documents.iter().map(|d| doc_counts(&d.text)).collect();
    Interned {
        docs_a,
        docs_b,
        vocab: ids.len(),
    }
}

fn accumulate(docs: &[Vec<(usize, u64)>], rows: &[usize], vocab: usize) -> (Vec<u64>, u64) {
    let mut dense = alloc::vec![0u64; vocab];
    let mut total = 0;
    for &r in rows {
        for &(id, c) in &docs[r] {
            dense[id] += c;
            total += c;
        }
    }
    (dense, total)
}

fn both(pa: &[u64], ta: u64, pb: &[u64], tb: u64) -> Result<(f64, f64)> {
    let standard = divergence(pa, ta, pb, tb, Weighting::Generalized(0.5, 0.5))?;
    let wa = ta as f64 / (ta + tb) as f64;
    let weighted = divergence(pa, ta, pb, tb, Weighting::Generalized(wa, 1.0 - wa))?;
    Ok((standard, weighted))
}

pub fn jsd_bootstrap<L, M>(a: &Corpus<L>, b: &Corpus<M>, cfg: &BootstrapConfig) -> Result<JsdResult> {
    jsd_bootstrap_with(&Sequential, a, b, cfg)
}

/// Documents of each corpus are resampled with replacement (streams `2i` and
/// `2i + 1`); weights follow the resampled token totals.
pub fn jsd_bootstrap_with<E: Executor, L, M>(
    exec: &E,
    a: &Corpus<L>,
    b: &Corpus<M>,
    cfg: &BootstrapConfig,
) -> Result<JsdResult> {
    cfg.validate()?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let data = intern(a, b);
    let all_a: Vec<usize> = (0..data.docs_a.len()).collect();
    let all_b: Vec<usize> = (0..data.docs_b.len()).collect();
    let (pa, ta) = accumulate(&data.docs_a, &all_a, data.vocab);
    let (pb, tb) = accumulate(&data.docs_b, &all_b, data.vocab);
    let full = both(&pa, ta, &pb, tb)?;

    let seed = cfg.seed;
    let runs: Vec<Result<(f64, f64)>> = exec.map(cfg.resamples, |i| {
        let ia = resample_indices(&mut iteration_rng(seed, 2 * i as u64), data.docs_a.len());
        let ib = resample_indices(&mut iteration_rng(seed, 2 * i as u64 + 1), data.docs_b.len());
        let (pa, ta) = accumulate(&data.docs_a, &ia, data.vocab);
        let (pb, tb) = accumulate(&data.docs_b, &ib, data.vocab);
        both(&pa, ta, &pb, tb)
    });
    let runs: Vec<(f64, f64)> = runs.into_iter().collect::<Result<_>>()?;
    Ok(JsdResult {
        standard: BootstrapEstimate::from_pool(runs.iter().map(|r| r.0).collect(), full.0, cfg),
        weighted: BootstrapEstimate::from_pool(runs.iter().map(|r| r.1).collect(), full.1, cfg),
    })
}
