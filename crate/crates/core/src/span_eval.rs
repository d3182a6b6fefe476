//! Span-level and token-level precision/recall.
//!
//! A prediction can be credited for a gold span only when both carry the same
//! category and the prediction alone covers at least `threshold` of the gold
//! span's characters. Each gold span and each prediction takes part in at most
//! one match.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::corpus::{align_documents, Corpus, Document, PhiSpan};
use crate::text::{overlap, whitespace_tokens};
use crate::{Category, Error, Result};

/// Coverage fraction required by default.
pub const DEFAULT_THRESHOLD: f64 = 0.8;

/// Outcome of matching one document's gold spans against its predictions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MatchResult {
    /// `(gold index, prediction index)`, sorted by gold index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_gold: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

impl MatchResult {
    pub fn match_count(&self) -> usize {
        self.pairs.len()
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

/// Whether `pred` alone covers enough of `gold` to be credited for it.
pub fn is_eligible(gold: &PhiSpan, pred: &PhiSpan, threshold: f64) -> bool {
    if gold.category != pred.category {
        return false;
    }
    let ov = overlap(gold.bounds(), pred.bounds());
    let need = threshold * gold.len() as f64;
    ov > 0 && ov as f64 >= need - 1e-9 * need
}

/// One-to-one matching of `pred` against `gold`.
///
/// Eligible pairs are first taken greedily by descending overlap length, ties
/// broken by gold start, then prediction start, then prediction end. Augmenting
/// paths then extend the greedy assignment until no further gold span can be
/// matched, so the number of pairs is always the maximum achievable.
pub fn match_spans(gold: &[PhiSpan], pred: &[PhiSpan], threshold: f64) -> Result<MatchResult> {
    check_threshold(threshold)?;
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    for (gi, g) in gold.iter().enumerate() {
        for (pi, p) in pred.iter().enumerate() {
            if is_eligible(g, p, threshold) {
                edges.push((gi, pi, overlap(g.bounds(), p.bounds())));
            }
        }
    }
    edges.sort_by(|a, b| {
        let (ga, pa) = (&gold[a.0], &pred[a.1]);
        let (gb, pb) = (&gold[b.0], &pred[b.1]);
        b.2.cmp(&a.2)
            .then(ga.start.cmp(&gb.start))
            .then(pa.start.cmp(&pb.start))
            .then(pa.end.cmp(&pb.end))
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });

    let mut gold_to_pred: Vec<Option<usize>> = alloc::vec![None; gold.len()];
    let mut pred_to_gold: Vec<Option<usize>> = alloc::vec![None; pred.len()];
    // Adjacency in greedy preference order.
    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); gold.len()];
    for &(gi, pi, _) in &edges {
        adjacency[gi].push(pi);
        if gold_to_pred[gi].is_none() && pred_to_gold[pi].is_none() {
            gold_to_pred[gi] = Some(pi);
            pred_to_gold[pi] = Some(gi);
        }
    }

    for gi in 0..gold.len() {
        if gold_to_pred[gi].is_none() && !adjacency[gi].is_empty() {
            let mut visited = alloc::vec![false; pred.len()];
            augment(gi, &adjacency, &mut visited, &mut gold_to_pred, &mut pred_to_gold);
        }
    }

    let mut result = MatchResult::default();
    for (gi, m) in gold_to_pred.iter().enumerate() {
        match m {
            Some(pi) => result.pairs.push((gi, *pi)),
            None => result.unmatched_gold.push(gi),
        }
    }
    result.unmatched_pred = pred_to_gold
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_none())
        .map(|(pi, _)| pi)
        .collect();
    Ok(result)
}

fn augment(
    gi: usize,
    adjacency: &[Vec<usize>],
    visited: &mut [bool],
    gold_to_pred: &mut [Option<usize>],
    pred_to_gold: &mut [Option<usize>],
) -> bool {
    for &pi in &adjacency[gi] {
        if visited[pi] {
            continue;
        }
        visited[pi] = true;
        let free = match pred_to_gold[pi] {
            None => true,
            Some(other) => augment(other, adjacency, visited, gold_to_pred, pred_to_gold),
        };
        if free {
            gold_to_pred[gi] = Some(pi);
            pred_to_gold[pi] = Some(gi);
            return true;
        }
    }
    false
}

/// True/false positive and false negative tallies for one category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Counts {
    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    pub fn is_zero(&self) -> bool {
        self.tp == 0 && self.fp == 0 && self.fn_ == 0
    }
}

impl core::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

/// Which ratio a statistic is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Metric {
    Precision,
    Recall,
}

impl Metric {
    pub fn of(self, counts: &Counts) -> Option<f64> {
        match self {
            Metric::Precision => counts.precision(),
            Metric::Recall => counts.recall(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Precision => "precision",
            Metric::Recall => "recall",
        }
    }
}

impl core::fmt::Display for Metric {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "precision" => Ok(Metric::Precision),
            "recall" => Ok(Metric::Recall),
            other => Err(Error::InvalidConfig(alloc::format!("unknown metric {other}"))),
        }
    }
}

/// Per-category counts. Categories with no gold and no predictions are absent.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PRStats {
    pub counts: BTreeMap<Category, Counts>,
}

impl PRStats {
    pub fn add(&mut self, category: Category, counts: Counts) {
        if counts.is_zero() {
            return;
        }
        *self.counts.entry(category).or_default() += counts;
    }

    pub fn merge(&mut self, other: &PRStats) {
        for (c, n) in &other.counts {
            self.add(*c, *n);
        }
    }

    pub fn get(&self, category: Category) -> Counts {
        self.counts.get(&category).copied().unwrap_or_default()
    }

    pub fn precision(&self, category: Category) -> Option<f64> {
        self.get(category).precision()
    }

    pub fn recall(&self, category: Category) -> Option<f64> {
        self.get(category).recall()
    }

    pub fn categories(&self) -> impl Iterator<Item = Category> + '_ {
        self.counts.keys().copied()
    }

    pub fn total(&self) -> Counts {
        let mut t = Counts::default();
        for (c, n) in &self.counts {
            if c.is_evaluated() {
                t += *n;
            }
        }
        t
    }
}

fn evaluated(spans: &[PhiSpan]) -> Vec<PhiSpan> {
    spans.iter().filter(|s| s.category.is_evaluated()).cloned().collect()
}

/// Span-level counts for one document pair.
pub fn document_span_counts(gold: &Document, pred: &Document, threshold: f64) -> Result<PRStats> {
    let g = evaluated(&gold.spans);
    let p = evaluated(&pred.spans);
    let m = match_spans(&g, &p, threshold)?;
    let mut stats = PRStats::default();
    for &(gi, _) in &m.pairs {
        stats.add(g[gi].category, Counts { tp: 1, ..Counts::default() });
    }
    for &gi in &m.unmatched_gold {
        stats.add(g[gi].category, Counts { fn_: 1, ..Counts::default() });
    }
    for &pi in &m.unmatched_pred {
        stats.add(p[pi].category, Counts { fp: 1, ..Counts::default() });
    }
    Ok(stats)
}

/// Per-document span-level counts, in gold document order.
pub fn per_document_span_counts(gold: &Corpus, pred: &Corpus, threshold: f64) -> Result<Vec<PRStats>> {
    check_threshold(threshold)?;
    align_documents(gold, pred)?
        .into_iter()
        .map(|(g, p)| document_span_counts(g, p, threshold))
        .collect()
}

/// Span-level counts summed over all documents. OTHER is excluded.
pub fn evaluate_spans(gold: &Corpus, pred: &Corpus, threshold: f64) -> Result<PRStats> {
    let mut total = PRStats::default();
    for s in per_document_span_counts(gold, pred, threshold)? {
        total.merge(&s);
    }
    Ok(total)
}

/// Micro-averaged precision and recall; `None` where the denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroAverage {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

pub fn micro_average(stats: &PRStats) -> Result<MicroAverage> {
    let t = stats.total();
    if t.is_zero() {
        return Err(Error::NoCounts);
    }
    Ok(MicroAverage {
        precision: t.precision(),
        recall: t.recall(),
    })
}

/// Category of the span covering a strict majority of `token`'s characters;
/// ties go to the earlier span start.
fn token_label(token: (usize, usize), spans: &[PhiSpan]) -> Option<Category> {
    let len = token.1 - token.0;
    let mut best: Option<(usize, usize, Category)> = None;
    for s in spans {
        if s.start >= token.1 {
            break;
        }
        let ov = overlap(token, s.bounds());
        if ov * 2 <= len {
            continue;
        }
        let better = match best {
            None => true,
            Some((bov, bstart, _)) => ov > bov || (ov == bov && s.start < bstart),
        };
        if better {
            best = Some((ov, s.start, s.category));
        }
    }
    best.map(|b| b.2)
}

fn sorted_evaluated(spans: &[PhiSpan]) -> Vec<PhiSpan> {
    let mut v = evaluated(spans);
    v.sort_by_key(|s| (s.start, s.end));
    v
}

/// Token-level counts for one document pair, tokens taken from the gold text.
pub fn document_token_counts(gold: &Document, pred: &Document) -> PRStats {
    let g = sorted_evaluated(&gold.spans);
    let p = sorted_evaluated(&pred.spans);
    let mut stats = PRStats::default();
    for tok in whitespace_tokens(&gold.text) {
        let b = (tok.start, tok.end);
        let gl = token_label(b, &g);
        let pl = token_label(b, &p);
        match (gl, pl) {
            (Some(x), Some(y)) if x == y => stats.add(x, Counts { tp: 1, ..Counts::default() }),
            (gl, pl) => {
                if let Some(x) = gl {
                    stats.add(x, Counts { fn_: 1, ..Counts::default() });
                }
                if let Some(y) = pl {
                    stats.add(y, Counts { fp: 1, ..Counts::default() });
                }
            }
        }
    }
    stats
}

/// Token-level counts summed over all documents. OTHER is excluded.
pub fn evaluate_tokens(gold: &Corpus, pred: &Corpus) -> Result<PRStats> {
    let mut total = PRStats::default();
    for (g, p) in align_documents(gold, pred)? {
        total.merge(&document_token_counts(g, p));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Span;
    use alloc::vec;

    fn s(start: usize, end: usize, c: Category) -> PhiSpan {
        Span::new(start, end, c)
    }

    #[test]
    fn exact_match() {
        let m = match_spans(&[s(10, 20, Category::Date)], &[s(10, 20, Category::Date)], 0.8).unwrap();
        assert_eq!(m.pairs, [(0, 0)]);
        assert!(m.unmatched_gold.is_empty() && m.unmatched_pred.is_empty());
    }

    #[test]
    fn eighty_percent_boundary() {
        let g = [s(0, 10, Category::Date)];
        let m = match_spans(&g, &[s(2, 10, Category::Date)], 0.8).unwrap();
        assert_eq!(m.match_count(), 1);
        let m = match_spans(&g, &[s(3, 10, Category::Date)], 0.8).unwrap();
        assert_eq!(m.match_count(), 0);
        assert_eq!(m.unmatched_gold, [0]);
        assert_eq!(m.unmatched_pred, [0]);
    }

    #[test]
    fn category_mismatch_never_matches() {
        let m = match_spans(&[s(0, 10, Category::Date)], &[s(0, 10, Category::Phone)], 0.8).unwrap();
        assert_eq!(m.match_count(), 0);
    }

    #[test]
    fn threshold_range() {
        assert!(match_spans(&[], &[], 0.0).is_err());
        assert!(match_spans(&[], &[], 1.5).is_err());
        assert!(match_spans(&[], &[], 1.0).is_ok());
    }

    #[test]
    fn augmentation_beats_plain_greedy() {
        // The long prediction ties with the exact one on gold 0; plain greedy
        // can hand it to gold 0 and leave gold 1 unmatched.
        let g = [s(0, 10, Category::Date), s(10, 20, Category::Date)];
        let p = [s(0, 20, Category::Date), s(0, 10, Category::Date)];
        let m = match_spans(&g, &p, 0.8).unwrap();
        assert_eq!(m.match_count(), 2);
    }

    #[test]
    fn micro_average_arithmetic() {
        let mut st = PRStats::default();
        st.add(Category::Date, Counts { tp: 88, fp: 12, fn_: 14 });
        let m = micro_average(&st).unwrap();
        assert!((m.precision.unwrap() - 0.88).abs() < 1e-12);
        assert!((m.recall.unwrap() - 88.0 / 102.0).abs() < 1e-12);

        let mut st = PRStats::default();
        st.add(Category::Date, Counts { tp: 1, fp: 1, fn_: 0 });
        st.add(Category::Id, Counts { tp: 1, fp: 0, fn_: 1 });
        let m = micro_average(&st).unwrap();
        assert!((m.precision.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.recall.unwrap() - 2.0 / 3.0).abs() < 1e-12);

        assert_eq!(micro_average(&PRStats::default()), Err(Error::NoCounts));
    }

    fn corpus(docs: Vec<(&str, &str, Vec<PhiSpan>)>) -> Corpus {
        Corpus::new(
            "c",
            docs.into_iter()
                .map(|(id, t, sp)| Document::new(id, "p", t).with_spans(sp))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn self_evaluation_is_perfect() {
        let g = corpus(vec![
            ("a", "seen 3/5/23 by Dr Smith", vec![s(5, 11, Category::Date), s(18, 23, Category::Doctor)]),
            ("b", "call 555-1234", vec![s(5, 13, Category::Phone)]),
        ]);
        let st = evaluate_spans(&g, &g, 0.8).unwrap();
        for c in st.categories() {
            assert_eq!(st.precision(c), Some(1.0));
            assert_eq!(st.recall(c), Some(1.0));
            assert_eq!(st.get(c).tp, st.get(c).support());
        }
        assert_eq!(st.counts.len(), 3);
    }

    #[test]
    fn empty_predictions() {
        let g = corpus(vec![("a", "seen 3/5/23", vec![s(5, 11, Category::Date)])]);
        let p = corpus(vec![("a", "seen 3/5/23", vec![])]);
        let st = evaluate_spans(&g, &p, 0.8).unwrap();
        assert_eq!(st.recall(Category::Date), Some(0.0));
        assert_eq!(st.precision(Category::Date), None);
    }

    #[test]
    fn other_is_excluded() {
        let g = corpus(vec![("a", "nurse on call", vec![s(0, 5, Category::Other)])]);
        let st = evaluate_spans(&g, &g, 0.8).unwrap();
        assert!(st.counts.is_empty());
    }

    #[test]
    fn token_walk() {
        // tokens: t0 t1 t2 t3 t4 t5 t6
        let text = "t0 t1 t2 t3 t4 t5 t6";
        let gold = corpus(vec![("a", text, vec![s(9, 17, Category::Patient)])]);
        let pred = corpus(vec![("a", text, vec![s(9, 14, Category::Patient)])]);
        let st = evaluate_tokens(&gold, &pred).unwrap();
        assert_eq!(st.get(Category::Patient), Counts { tp: 2, fp: 0, fn_: 1 });
    }

    #[test]
    fn pure_false_positive_tokens() {
        let text = "alpha beta gamma delta";
        let gold = corpus(vec![("a", text, vec![s(0, 5, Category::Patient)])]);
        let pred = corpus(vec![("a", text, vec![s(11, 22, Category::Location)])]);
        let st = evaluate_tokens(&gold, &pred).unwrap();
        assert_eq!(st.get(Category::Location), Counts { tp: 0, fp: 2, fn_: 0 });
        assert_eq!(st.get(Category::Patient), Counts { tp: 0, fp: 0, fn_: 1 });
    }

    #[test]
    fn minority_coverage_is_outside() {
        // span covers 2 of the 5 characters of "Smith,"
        let text = "Smith, x";
        let gold = corpus(vec![("a", text, vec![s(0, 2, Category::Patient)])]);
        let st = evaluate_tokens(&gold, &gold).unwrap();
        assert!(st.counts.is_empty());
    }
}
