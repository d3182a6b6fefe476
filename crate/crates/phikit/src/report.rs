//! CSV reports with optional JSON mirrors, CoNLL export.
//!
//! CSV numbers use fixed formatting so identical inputs give identical
//! bytes; undefined values are empty fields.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use phikit_core::align::BioSequence;
use phikit_core::divergence::BootstrapEstimate;
use phikit_core::sampler::CoverageRow;
use phikit_core::span_eval::{Counts, MicroAverage, PRStats};
use phikit_core::stats::{format_ci, CiEstimate, PairedTestResult};
use phikit_core::Category;
use serde::Serialize;

use crate::{Error, Result};

/// A row type with a fixed CSV header.
pub trait Report: Serialize {
    const HEADER: &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

fn two(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.2}"))
}

fn raw(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map_or_else(String::new, |x| x.to_string())
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub category: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub support: u64,
}

impl Report for EvalRow {
    const HEADER: &'static [&'static str] = &["category", "precision", "recall", "support"];
    fn record(&self) -> Vec<String> {
        vec![self.category.clone(), two(self.precision), two(self.recall), self.support.to_string()]
    }
}

/// Evaluated categories present in `stats`, alphabetically.
pub fn eval_rows(stats: &PRStats) -> Vec<EvalRow> {
    stats
        .counts
        .iter()
        .filter(|(c, _)| c.is_evaluated())
        .map(|(c, k)| row(c.as_str(), k))
        .collect()
}

fn row(label: &str, k: &Counts) -> EvalRow {
    EvalRow {
        category: label.to_string(),
        precision: k.precision(),
        recall: k.recall(),
        support: k.support(),
    }
}

/// The `MICRO` row pooled over evaluated categories.
pub fn micro_row(stats: &PRStats, micro: &MicroAverage) -> EvalRow {
    EvalRow {
        category: "MICRO".into(),
        precision: micro.precision,
        recall: micro.recall,
        support: stats.total().support(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiRow {
    pub category: Category,
    pub metric: String,
    pub point: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub formatted: Option<String>,
}

impl From<&CiEstimate> for CiRow {
    fn from(e: &CiEstimate) -> Self {
        CiRow {
            category: e.category,
            metric: e.metric.as_str().to_string(),
            point: e.point,
            lower: e.lower,
            upper: e.upper,
            formatted: format_ci(e).ok(),
        }
    }
}

impl Report for CiRow {
    const HEADER: &'static [&'static str] = &["category", "metric", "point", "lower", "upper", "formatted"];
    fn record(&self) -> Vec<String> {
        vec![
            self.category.to_string(),
            self.metric.clone(),
            raw(self.point),
            raw(self.lower),
            raw(self.upper),
            self.formatted.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedRow {
    pub category: Category,
    pub delta: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub significant: bool,
}

impl From<&PairedTestResult> for PairedRow {
    fn from(r: &PairedTestResult) -> Self {
        PairedRow {
            category: r.category,
            delta: r.delta,
            p_value: r.p_value,
            p_adjusted: r.p_adjusted,
            significant: r.significant,
        }
    }
}

impl Report for PairedRow {
    const HEADER: &'static [&'static str] = &["category", "delta", "p_value", "p_adjusted", "significant"];
    fn record(&self) -> Vec<String> {
        vec![
            self.category.to_string(),
            raw(Some(self.delta)),
            raw(Some(self.p_value)),
            raw(Some(self.p_adjusted)),
            self.significant.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub pair: String,
    pub metric: String,
    pub bootstrap_mean: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub full_data: Option<f64>,
}

impl DivergenceRow {
    pub fn new(pair: &str, metric: &str, e: &BootstrapEstimate) -> Self {
        DivergenceRow {
            pair: pair.to_string(),
            metric: metric.to_string(),
            bootstrap_mean: finite(e.bootstrap_mean),
            lower: finite(e.lower),
            upper: finite(e.upper),
            full_data: finite(e.full_data),
        }
    }
}

impl Report for DivergenceRow {
    const HEADER: &'static [&'static str] = &["pair", "metric", "bootstrap_mean", "lower", "upper", "full_data"];
    fn record(&self) -> Vec<String> {
        vec![
            self.pair.clone(),
            self.metric.clone(),
            raw(self.bootstrap_mean),
            raw(self.lower),
            raw(self.upper),
            raw(self.full_data),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageOut {
    pub axis: String,
    pub bin: String,
    pub count: usize,
    pub covered: bool,
}

impl From<&CoverageRow> for CoverageOut {
    fn from(r: &CoverageRow) -> Self {
        CoverageOut {
            axis: r.axis.to_string(),
            bin: r.bin.clone(),
            count: r.count,
            covered: r.covered,
        }
    }
}

impl Report for CoverageOut {
    const HEADER: &'static [&'static str] = &["axis", "bin", "count", "covered"];
    fn record(&self) -> Vec<String> {
        vec![self.axis.clone(), self.bin.clone(), self.count.to_string(), self.covered.to_string()]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRow {
    pub component: String,
    pub tokens: String,
    pub price_per_million: String,
    pub cost: String,
    pub cost_exact: String,
}

impl Report for CostRow {
    const HEADER: &'static [&'static str] = &["component", "tokens", "price_per_million", "cost", "cost_exact"];
    fn record(&self) -> Vec<String> {
        vec![
            self.component.clone(),
            self.tokens.clone(),
            self.price_per_million.clone(),
            self.cost.clone(),
            self.cost_exact.clone(),
        ]
    }
}

/// One audit line per replacement. Lengths and positions only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub doc_id: String,
    pub category: Category,
    pub output_start: usize,
    pub orig_len: usize,
    pub new_len: usize,
}

pub fn write_csv_to<R: Report, W: Write>(w: W, rows: &[R]) -> csv::Result<()> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wr.write_record(R::HEADER)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn csv_string<R: Report>(rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv_to(&mut buf, rows).expect("writing to memory");
    String::from_utf8(buf).expect("CSV of UTF-8 fields")
}

/// Write `<dir>/<stem>.csv`, plus `<dir>/<stem>.json` when `json` is set.
/// Returns the paths written.
pub fn write_report<R: Report>(dir: &Path, stem: &str, rows: &[R], json: bool) -> Result<Vec<PathBuf>> {
    let csv_path = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, csv_string(rows)).map_err(Error::write(&csv_path))?;
    let mut out = vec![csv_path];
    if json {
        let json_path = dir.join(format!("{stem}.json"));
        let mut text = serde_json::to_string_pretty(rows).expect("rows serialize");
        text.push('\n');
        std::fs::write(&json_path, text).map_err(Error::write(&json_path))?;
        out.push(json_path);
    }
    Ok(out)
}

/// `token<TAB>tag` lines, a blank line after each document.
pub fn write_conll<W: Write>(w: &mut W, docs: &[BioSequence]) -> std::io::Result<()> {
    for seq in docs {
        for (tok, tag) in seq.tokens.iter().zip(&seq.tags) {
            writeln!(w, "{}\t{tag}", tok.text)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_conll_file(path: &Path, docs: &[BioSequence]) -> Result<()> {
    let file = File::create(path).map_err(Error::write(path))?;
    let mut w = BufWriter::new(file);
    write_conll(&mut w, docs).map_err(Error::write(path))?;
    w.flush().map_err(Error::write(path))
}
