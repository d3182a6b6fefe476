//! Greedy set-cover selection of a note subset spanning all demographic and
//! document strata.
//!
//! A stratum is one bin of one axis (never the cross product of axes). The
//! greedy loop repeatedly takes the note adding the most uncovered strata;
//! once everything is covered and a budget remains, it keeps picking notes
//! that lift the least-represented strata.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::stats::percentile;
use crate::text::char_len;
use crate::{Error, Result};

pub const UNKNOWN_BIN: &str = "UNKNOWN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Age,
    Sex,
    Race,
    Ethnicity,
    NoteType,
    NoteLength,
}

impl Axis {
    pub const ALL: [Axis; 6] = [Axis::Age, Axis::Sex, Axis::Race, Axis::Ethnicity, Axis::NoteType, Axis::NoteLength];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Age => "age",
            Axis::Sex => "sex",
            Axis::Race => "race",
            Axis::Ethnicity => "ethnicity",
            Axis::NoteType => "note_type",
            Axis::NoteLength => "note_length",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Axis::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::UnknownAxis(s.to_string()))
    }
}

/// How raw axis values become bin labels.
#[derive(Debug, Clone, PartialEq)]
pub enum Binning {
    /// The raw value is the bin.
    Categorical,
    /// Half-open numeric bins split at strictly increasing `edges`;
    /// `labels`, if given, has `edges.len() + 1` entries.
    Numeric { edges: Vec<f64>, labels: Option<Vec<String>> },
    /// Numeric bins at the corpus quintiles, resolved by [`StrataSpec::resolve`].
    Quintiles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingPolicy {
    Error,
    #[default]
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec {
    pub axis: Axis,
    pub binning: Binning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct StrataSpec {
    pub axes: Vec<AxisSpec>,
    pub missing: MissingPolicy,
}

fn fmt_edge(v: f64) -> String {
    if v == libm::trunc(v) && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn numeric_label(edges: &[f64], labels: Option<&[String]>, idx: usize) -> String {
    if let Some(l) = labels {
        return l[idx].clone();
    }
    if idx == 0 {
        format!("<{}", fmt_edge(edges[0]))
    } else if idx == edges.len() {
        format!("{}+", fmt_edge(edges[idx - 1]))
    } else {
        format!("{}-{}", fmt_edge(edges[idx - 1]), fmt_edge(edges[idx]))
    }
}

impl Binning {
    fn validate(&self) -> Result<()> {
        if let Binning::Numeric { edges, labels } = self {
            if edges.is_empty() || edges.windows(2).any(|w| w[0] >= w[1]) || edges.iter().any(|e| !e.is_finite()) {
                return Err(Error::BadBinEdges);
            }
            if let Some(l) = labels {
                if l.len() != edges.len() + 1 {
                    return Err(Error::InvalidConfig(format!(
                        "{} bin labels for {} edges",
                        l.len(),
                        edges.len()
                    )));
                }
            }
        }
        Ok(())
    }

    fn bin(&self, raw: &str) -> Option<String> {
        match self {
            Binning::Categorical => Some(raw.to_string()),
            Binning::Numeric { edges, labels } => {
                let v: f64 = raw.trim().trim_end_matches('+').parse().ok()?;
                let idx = edges.iter().take_while(|e| **e <= v).count();
                Some(numeric_label(edges, labels.as_deref(), idx))
            }
            Binning::Quintiles => None,
        }
    }
}

/// Default age bands: 0-17, 18-29, 30-44, 45-59, 60-74, 75-89, 90+.
pub fn default_age_binning() -> Binning {
    Binning::Numeric {
        edges: vec![18.0, 30.0, 45.0, 60.0, 75.0, 90.0],
        labels: Some(
            ["0-17", "18-29", "30-44", "45-59", "60-74", "75-89", "90+"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        ),
    }
}

impl Default for StrataSpec {
    /// All six axes: banded age, categorical sex/race/ethnicity/note type,
    /// note length at corpus quintiles.
    fn default() -> Self {
        StrataSpec {
            axes: vec![
                AxisSpec { axis: Axis::Age, binning: default_age_binning() },
                AxisSpec { axis: Axis::Sex, binning: Binning::Categorical },
                AxisSpec { axis: Axis::Race, binning: Binning::Categorical },
                AxisSpec { axis: Axis::Ethnicity, binning: Binning::Categorical },
                AxisSpec { axis: Axis::NoteType, binning: Binning::Categorical },
                AxisSpec { axis: Axis::NoteLength, binning: Binning::Quintiles },
            ],
            missing: MissingPolicy::Unknown,
        }
    }
}

fn raw_value<L>(doc: &Document<L>, axis: Axis) -> Option<String> {
    let lookup = |k: &str| doc.demographics.get(k).filter(|v| !v.trim().is_empty()).cloned();
    match axis {
        Axis::NoteLength => Some(char_len(&doc.text).to_string()),
        Axis::NoteType => lookup("note_type")
            .or_else(|| lookup("note type"))
            .or_else(|| (!doc.note_type.is_empty()).then(|| doc.note_type.clone())),
        other => lookup(other.as_str()),
    }
}

impl StrataSpec {
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for a in &self.axes {
            if !seen.insert(a.axis) {
                return Err(Error::InvalidConfig(format!("axis {} listed twice", a.axis)));
            }
            a.binning.validate()?;
        }
        Ok(())
    }

    /// Replace quintile binning with concrete edges computed from `corpus`.
    pub fn resolve<L>(&self, corpus: &Corpus<L>) -> Result<StrataSpec> {
        self.validate()?;
        let mut out = self.clone();
        for a in &mut out.axes {
            if a.binning != Binning::Quintiles {
                continue;
            }
            let mut values: Vec<f64> = corpus
                .documents
                .iter()
                .filter_map(|d| raw_value(d, a.axis))
                .filter_map(|v| v.trim().parse::<f64>().ok())
                .collect();
            values.sort_by(|x, y| x.total_cmp(y));
            let mut edges: Vec<f64> = Vec::new();
            for q in [0.2, 0.4, 0.6, 0.8] {
                if let Some(e) = percentile(&values, q) {
                    let e = libm::round(e);
                    if edges.last().is_none_or(|l| e > *l) {
                        edges.push(e);
                    }
                }
            }
            a.binning = if edges.is_empty() {
                Binning::Categorical
            } else {
                Binning::Numeric { edges, labels: None }
            };
        }
        Ok(out)
    }
}

/// One bin of one axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stratum {
    pub axis: Axis,
    pub bin: String,
}

impl Stratum {
    pub fn new(axis: Axis, bin: impl Into<String>) -> Self {
        Stratum { axis, bin: bin.into() }
    }
}

impl fmt::Display for Stratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.axis, self.bin)
    }
}

/// The strata a document belongs to: exactly one per axis of `spec`.
pub fn strata_of<L>(doc: &Document<L>, spec: &StrataSpec) -> Result<BTreeSet<Stratum>> {
    let mut out = BTreeSet::new();
    for a in &spec.axes {
        if a.binning == Binning::Quintiles {
            return Err(Error::InvalidConfig(format!(
                "axis {} uses quintiles; resolve the spec against a corpus first",
                a.axis
            )));
        }
        let bin = raw_value(doc, a.axis).and_then(|v| a.binning.bin(&v));
        let bin = match (bin, spec.missing) {
            (Some(b), _) => b,
            (None, MissingPolicy::Unknown) => UNKNOWN_BIN.to_string(),
            (None, MissingPolicy::Error) => {
                return Err(Error::MissingDemographic {
                    axis: a.axis.to_string(),
                    doc_id: doc.doc_id.clone(),
                })
            }
        };
        out.insert(Stratum::new(a.axis, bin));
    }
    Ok(out)
}

/// Progress of the greedy selection over elements of type `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageState<T = Stratum> {
    /// Every element present in the candidate sets.
    pub target: BTreeSet<T>,
    pub covered: BTreeSet<T>,
    /// Selected ids in selection order.
    pub selected: Vec<String>,
    /// Elements of each selected candidate, aligned with `selected`.
    pub selected_strata: Vec<BTreeSet<T>>,
    /// Newly covered elements per step of the covering phase.
    pub gains: Vec<usize>,
}

impl<T> Default for CoverageState<T> {
    fn default() -> Self {
        CoverageState {
            target: BTreeSet::new(),
            covered: BTreeSet::new(),
            selected: Vec::new(),
            selected_strata: Vec::new(),
            gains: Vec::new(),
        }
    }
}

impl<T: Ord> CoverageState<T> {
    pub fn is_complete(&self) -> bool {
        self.covered == self.target
    }

    pub fn selection_counts(&self) -> BTreeMap<&T, usize> {
        let mut counts: BTreeMap<&T, usize> = self.target.iter().map(|s| (s, 0)).collect();
        for strata in &self.selected_strata {
            for s in strata {
                if let Some(c) = counts.get_mut(s) {
                    *c += 1;
                }
            }
        }
        counts
    }
}

/// Greedy cover of the union of `candidates`, then (with a budget) min-count
/// balancing.
///
/// Covering step: most uncovered elements first, then fewest already-covered
/// elements, then smallest id. Balancing step: most elements at the current
/// minimum selection count, then fewest elements above it, then smallest id.
pub fn greedy_cover<T: Ord + Clone>(candidates: &[(&str, BTreeSet<T>)], budget: Option<usize>) -> Result<CoverageState<T>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if budget == Some(0) {
        return Err(Error::InvalidConfig("budget must be at least 1".into()));
    }
    let mut state = CoverageState {
        target: candidates.iter().flat_map(|(_, s)| s.iter().cloned()).collect(),
        ..CoverageState::default()
    };
    let limit = budget.unwrap_or(usize::MAX);
    let mut taken = vec![false; candidates.len()];

    let take = |state: &mut CoverageState<T>, taken: &mut Vec<bool>, i: usize| {
        taken[i] = true;
        state.selected.push(candidates[i].0.to_string());
        state.selected_strata.push(candidates[i].1.clone());
        state.covered.extend(candidates[i].1.iter().cloned());
    };
    let pick = |taken: &[bool], score: &dyn Fn(&BTreeSet<T>) -> usize| {
        (0..candidates.len())
            .filter(|&i| !taken[i])
            .map(|i| {
                let hit = score(&candidates[i].1);
                (i, hit, candidates[i].1.len() - hit)
            })
            .min_by(|a, b| {
                b.1.cmp(&a.1)
                    .then(a.2.cmp(&b.2))
                    .then(candidates[a.0].0.cmp(candidates[b.0].0))
            })
    };

    while !state.is_complete() && state.selected.len() < limit {
        let covered = &state.covered;
        let Some((i, new, _)) = pick(&taken, &|s| s.iter().filter(|x| !covered.contains(*x)).count()) else {
            break;
        };
        if new == 0 {
            break;
        }
        state.gains.push(new);
        take(&mut state, &mut taken, i);
    }

    if budget.is_some() {
        while state.selected.len() < limit {
            let counts = state.selection_counts();
            let min = counts.values().copied().min().unwrap_or(0);
            let Some((i, _, _)) = pick(&taken, &|s| s.iter().filter(|x| counts.get(*x) == Some(&min)).count()) else {
                break;
            };
            drop(counts);
            take(&mut state, &mut taken, i);
        }
    }
    Ok(state)
}

/// Select documents covering every stratum of `corpus` under `spec`.
pub fn sample_set_cover<L>(corpus: &Corpus<L>, spec: &StrataSpec, budget: Option<usize>) -> Result<CoverageState> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let spec = spec.resolve(corpus)?;
    let docs: Vec<(&str, BTreeSet<Stratum>)> = corpus
        .documents
        .iter()
        .map(|d| Ok((d.doc_id.as_str(), strata_of(d, &spec)?)))
        .collect::<Result<_>>()?;
    greedy_cover(&docs, budget)
}

/// Per-stratum selection count and coverage flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageRow {
    pub axis: Axis,
    pub bin: String,
    pub count: usize,
    pub covered: bool,
}

/// One row per target stratum, ordered by the spec's axis order, then bin.
pub fn coverage_report(state: &CoverageState, spec: &StrataSpec) -> Vec<CoverageRow> {
    let order = |a: Axis| spec.axes.iter().position(|s| s.axis == a).unwrap_or(usize::MAX);
    let mut rows: Vec<CoverageRow> = state
        .selection_counts()
        .into_iter()
        .map(|(s, count)| CoverageRow {
            axis: s.axis,
            bin: s.bin.clone(),
            count,
            covered: state.covered.contains(s),
        })
        .collect();
    rows.sort_by(|a, b| order(a.axis).cmp(&order(b.axis)).then(a.bin.cmp(&b.bin)));
    rows
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    axes: Vec<AxisRepr>,
    #[serde(default)]
    missing: MissingPolicy,
}

#[derive(Serialize, Deserialize)]
struct AxisRepr {
    name: Axis,
    bins: BinsRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BinsRepr {
    Keyword(String),
    Edges(Vec<f64>),
}

impl TryFrom<SpecRepr> for StrataSpec {
    type Error = Error;

    fn try_from(r: SpecRepr) -> Result<Self> {
        let axes = r
            .axes
            .into_iter()
            .map(|a| {
                let binning = match a.bins {
                    BinsRepr::Keyword(k) if k == "categorical" => Binning::Categorical,
                    BinsRepr::Keyword(k) if k == "quintiles" => Binning::Quintiles,
                    BinsRepr::Keyword(k) => return Err(Error::InvalidConfig(format!("unknown binning {k}"))),
                    BinsRepr::Edges(edges) => Binning::Numeric { edges, labels: a.labels },
                };
                Ok(AxisSpec { axis: a.name, binning })
            })
            .collect::<Result<_>>()?;
        let spec = StrataSpec { axes, missing: r.missing };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<StrataSpec> for SpecRepr {
    fn from(s: StrataSpec) -> Self {
        SpecRepr {
            axes: s
                .axes
                .into_iter()
                .map(|a| {
                    let (bins, labels) = match a.binning {
                        Binning::Categorical => (BinsRepr::Keyword("categorical".into()), None),
                        Binning::Quintiles => (BinsRepr::Keyword("quintiles".into()), None),
                        Binning::Numeric { edges, labels } => (BinsRepr::Edges(edges), labels),
                    };
                    AxisRepr { name: a.axis, bins, labels }
                })
                .collect(),
            missing: s.missing,
        }
    }
}
