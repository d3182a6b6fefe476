//! The `phikit` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use phikit_core::align::{from_bio, ground_spans, parse_extraction, to_bio, BioSequence};
use phikit_core::cost::{estimate_cost, format_usd, reduction_factor, report as report_usd, round_significant, InputVolume, PriceSheet};
use phikit_core::divergence::{ftd_bootstrap_with, jsd_bootstrap_with, DEFAULT_RESAMPLES};
use phikit_core::labels::apply_label_map;
use phikit_core::sampler::{coverage_report, sample_set_cover, StrataSpec};
use phikit_core::span_eval::{evaluate_spans, evaluate_tokens, micro_average, per_document_span_counts, Metric, PRStats, DEFAULT_THRESHOLD};
use phikit_core::stats::{bootstrap_ci_from_counts, paired_test_from_counts, BootstrapConfig};
use phikit_core::surrogate::{apply_surrogates, PlanFlag};
use phikit_core::{Corpus, Document};
use rayon::prelude::*;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::embeddings::load_embeddings;
use crate::io::{load_label_map, load_mapped_corpus, load_source_corpus, read_jsonl, save_corpus, write_jsonl};
use crate::keyfile::load_key;
use crate::manifest::RunManifest;
use crate::parallel::Rayon;
use crate::report::{self, csv_string, eval_rows, micro_row, write_report, AuditRow, CiRow, CostRow, CoverageOut, DivergenceRow, PairedRow, Report};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "phikit", version, about = "PHI de-identification evaluation, corpus divergence and surrogate release")]
pub struct Cli {
    /// Worker threads for bootstrap and per-document work (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-category precision and recall of predictions against gold.
    Eval(EvalArgs),
    /// Bootstrap confidence intervals, and a paired test when two systems are given.
    Bootstrap(BootstrapArgs),
    /// Frechet text distance or Jensen-Shannon divergence between corpora.
    Diverge(DivergeArgs),
    /// Greedy set-cover sample over demographic and document strata.
    Sample(SampleArgs),
    /// Keyed surrogate replacement for release.
    Surrogate(SurrogateArgs),
    /// Ground LLM extraction responses to spans and export BIO tags.
    Align(AlignArgs),
    /// API cost of processing a text volume.
    Cost(CostArgs),
    /// Map a corpus from a source label taxonomy onto the unified one.
    MapLabels(MapArgs),
}

#[derive(Debug, Args)]
struct Output {
    /// Directory for report files and the run manifest. Reports go to stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a JSON copy of each report.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Level {
    Span,
    Token,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Fraction of the gold span a prediction must cover to match.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, value_enum, default_value = "span")]
    level: Level,
    /// Label map applied to both corpora: i2b2, aimi, identity or a JSON file.
    #[arg(long)]
    map: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long = "pred-a", alias = "pred")]
    pred_a: PathBuf,
    #[arg(long = "pred-b")]
    pred_b: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    resamples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "ci-level", default_value_t = 0.95)]
    ci_level: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long)]
    map: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DivMetric {
    Ftd,
    Jsd,
}

#[derive(Debug, Args)]
struct DivergeArgs {
    #[arg(long, value_enum)]
    metric: DivMetric,
    /// `NAME=PATH` or `PATH` (named after the file stem). Embedding files for
    /// ftd, corpora for jsd. Every unordered pair is compared.
    #[arg(long = "input", required = true, num_args = 1..)]
    inputs: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long = "ci-level", default_value_t = 0.95)]
    ci_level: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Strata spec JSON; defaults to all six axes.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of documents to select; without it, the smallest cover found.
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SurrogateArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    key: PathBuf,
    /// Year used to shift dates written without one.
    #[arg(long = "reference-year")]
    reference_year: Option<i32>,
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AlignArgs {
    /// Corpus JSONL with the note texts; existing spans are ignored.
    #[arg(long)]
    notes: PathBuf,
    /// JSONL of `{"doc_id", "response"}`.
    #[arg(long, conflicts_with = "responses_dir", required_unless_present = "responses_dir")]
    responses: Option<PathBuf>,
    /// Directory with one raw response file per note, named `<doc_id>.<ext>`.
    #[arg(long = "responses-dir")]
    responses_dir: Option<PathBuf>,
    #[arg(long = "min-confidence", default_value_t = 0.0)]
    min_confidence: f64,
    /// Keep OTHER spans in the BIO export.
    #[arg(long = "include-other")]
    include_other: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Tier {
    Flex,
    Standard,
    Priority,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["input_chars", "input_tokens"])))]
struct CostArgs {
    #[arg(long = "input-chars")]
    input_chars: Option<String>,
    #[arg(long = "input-tokens")]
    input_tokens: Option<String>,
    #[arg(long = "output-tokens")]
    output_tokens: String,
    /// Base prices; --price-in, --price-out and --chars-per-token override them.
    #[arg(long, value_enum, default_value = "flex")]
    tier: Tier,
    #[arg(long = "price-in")]
    price_in: Option<String>,
    #[arg(long = "price-out")]
    price_out: Option<String>,
    #[arg(long = "chars-per-token")]
    chars_per_token: Option<String>,
    /// Another total (dollars) to report the reduction factor against.
    #[arg(long = "compare-to")]
    compare_to: Option<String>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct MapArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    map: String,
    #[arg(long = "drop-other")]
    drop_other: bool,
    /// Output JSONL; stdout without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let recorded: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match std::panic::catch_unwind(|| execute(cli, recorded)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => 1,
    }
}

fn execute(cli: Cli, args: Vec<String>) -> Result<()> {
    let exec = Rayon::new(cli.threads)?;
    match cli.command {
        Command::Eval(a) => eval(a, args),
        Command::Bootstrap(a) => bootstrap(a, args, &exec),
        Command::Diverge(a) => diverge(a, args, &exec),
        Command::Sample(a) => sample(a, args),
        Command::Surrogate(a) => surrogate(a, args, &exec),
        Command::Align(a) => align(a, args),
        Command::Cost(a) => cost(a, args),
        Command::MapLabels(a) => map_labels(a),
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::write(dir))
}

/// Write a report to `--out` or print it.
fn emit<R: Report>(output: &Output, stem: &str, rows: &[R], written: &mut Vec<PathBuf>) -> Result<()> {
    match &output.out {
        Some(dir) => written.extend(write_report(dir, stem, rows, output.json)?),
        None => print!("{}", csv_string(rows)),
    }
    Ok(())
}

fn finish(output: &Output, mut manifest: RunManifest, written: Vec<PathBuf>) -> Result<()> {
    if let Some(dir) = &output.out {
        manifest.outputs(written);
        manifest.write(dir)?;
    }
    Ok(())
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t <= 1.0 {
        Ok(())
    } else {
        Err(phikit_core::Error::InvalidThreshold(t).into())
    }
}

fn eval(a: EvalArgs, args: Vec<String>) -> Result<()> {
    check_threshold(a.threshold)?;
    let gold = load_mapped_corpus(&a.gold, a.map.as_deref(), false)?;
    let pred = load_mapped_corpus(&a.pred, a.map.as_deref(), false)?;
    let stats = match a.level {
        Level::Span => evaluate_spans(&gold, &pred, a.threshold)?,
        Level::Token => evaluate_tokens(&gold, &pred)?,
    };
    let mut manifest = RunManifest::new("eval", args);
    manifest.input(&a.gold)?;
    manifest.input(&a.pred)?;
    if let Some(dir) = &a.output.out {
        out_dir(dir)?;
    }
    let mut written = Vec::new();
    emit(&a.output, "eval", &eval_rows(&stats), &mut written)?;
    let micro = micro_average(&stats)?;
    let micro = [micro_row(&stats, &micro)];
    match &a.output.out {
        Some(dir) => written.extend(write_report(dir, "micro", &micro, a.output.json)?),
        None => print!("{}", micro[0].record().join(",") + "\n"),
    }
    finish(&a.output, manifest, written)
}

fn bootstrap(a: BootstrapArgs, args: Vec<String>, exec: &Rayon) -> Result<()> {
    check_threshold(a.threshold)?;
    let cfg = BootstrapConfig {
        resamples: a.resamples,
        seed: a.seed,
        ci_level: a.ci_level,
    };
    cfg.validate()?;
    let gold = load_mapped_corpus(&a.gold, a.map.as_deref(), false)?;
    let pred_a = load_mapped_corpus(&a.pred_a, a.map.as_deref(), false)?;
    let pred_b = a
        .pred_b
        .as_deref()
        .map(|p| load_mapped_corpus(p, a.map.as_deref(), false))
        .transpose()?;
    let mut manifest = RunManifest::new("bootstrap", args);
    manifest.seed("bootstrap", a.seed);
    for p in [Some(&a.gold), Some(&a.pred_a), a.pred_b.as_ref()].into_iter().flatten() {
        manifest.input(p)?;
    }
    if let Some(dir) = &a.output.out {
        out_dir(dir)?;
    }
    let mut written = Vec::new();
    let ci = |counts: &[PRStats]| -> Result<Vec<CiRow>> {
        let mut rows = Vec::new();
        for metric in [Metric::Precision, Metric::Recall] {
            rows.extend(bootstrap_ci_from_counts(exec, counts, metric, &cfg)?.iter().map(CiRow::from));
        }
        Ok(rows)
    };
    let counts_a = per_document_span_counts(&gold, &pred_a, a.threshold)?;
    emit(&a.output, "bootstrap", &ci(&counts_a)?, &mut written)?;
    if let Some(pred_b) = &pred_b {
        let counts_b = per_document_span_counts(&gold, pred_b, a.threshold)?;
        emit(&a.output, "bootstrap_b", &ci(&counts_b)?, &mut written)?;
        for metric in [Metric::Precision, Metric::Recall] {
            let rows: Vec<PairedRow> = paired_test_from_counts(exec, &counts_a, &counts_b, metric, &cfg)?
                .iter()
                .map(PairedRow::from)
                .collect();
            emit(&a.output, &format!("paired_{}", metric.as_str()), &rows, &mut written)?;
        }
    }
    finish(&a.output, manifest, written)
}

fn named_inputs(inputs: &[String]) -> Result<Vec<(String, PathBuf)>> {
    if inputs.len() < 2 {
        return Err(Error::Invalid("diverge needs at least two --input values".into()));
    }
    Ok(inputs
        .iter()
        .map(|s| match s.split_once('=') {
            Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
            _ => {
                let p = PathBuf::from(s);
                let name = p.file_stem().map_or_else(|| s.clone(), |n| n.to_string_lossy().into_owned());
                (name, p)
            }
        })
        .collect())
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn diverge(a: DivergeArgs, args: Vec<String>, exec: &Rayon) -> Result<()> {
    let cfg = BootstrapConfig {
        resamples: a.resamples,
        seed: a.seed,
        ci_level: a.ci_level,
    };
    cfg.validate()?;
    let inputs = named_inputs(&a.inputs)?;
    let mut manifest = RunManifest::new("diverge", args);
    manifest.seed("bootstrap", a.seed);
    for (_, p) in &inputs {
        manifest.input(p)?;
    }
    let mut rows = Vec::new();
    match a.metric {
        DivMetric::Ftd => {
            let sets = inputs
                .iter()
                .map(|(_, p)| load_embeddings(p))
                .collect::<Result<Vec<_>>>()?;
            if let Some(bad) = sets.iter().find(|s| s.dim() != sets[0].dim()) {
                return Err(phikit_core::Error::DimensionMismatch(sets[0].dim(), bad.dim()).into());
            }
            for (i, j) in pairs(sets.len()) {
                let pair = format!("{}--{}", inputs[i].0, inputs[j].0);
                let r = ftd_bootstrap_with(exec, &sets[i], &sets[j], &cfg)?;
                rows.push(DivergenceRow::new(&pair, "ftd", &r.total));
                rows.push(DivergenceRow::new(&pair, "mean_shift", &r.mean_shift));
                rows.push(DivergenceRow::new(&pair, "cov_divergence", &r.cov_divergence));
            }
        }
        DivMetric::Jsd => {
            let corpora = inputs
                .iter()
                .map(|(_, p)| load_source_corpus(p))
                .collect::<Result<Vec<_>>>()?;
            for (i, j) in pairs(corpora.len()) {
                let pair = format!("{}--{}", inputs[i].0, inputs[j].0);
                let r = jsd_bootstrap_with(exec, &corpora[i], &corpora[j], &cfg)?;
                rows.push(DivergenceRow::new(&pair, "jsd_standard", &r.standard));
                rows.push(DivergenceRow::new(&pair, "jsd_weighted", &r.weighted));
            }
        }
    }
    if let Some(dir) = &a.output.out {
        out_dir(dir)?;
    }
    let mut written = Vec::new();
    emit(&a.output, "divergence", &rows, &mut written)?;
    finish(&a.output, manifest, written)
}

fn sample(a: SampleArgs, args: Vec<String>) -> Result<()> {
    let corpus = load_source_corpus(&a.corpus)?;
    let mut manifest = RunManifest::new("sample", args);
    manifest.input(&a.corpus)?;
    let spec = match &a.spec {
        Some(p) => {
            manifest.input(p)?;
            let text = fs::read_to_string(p).map_err(Error::read(p))?;
            serde_json::from_str::<StrataSpec>(&text).map_err(|e| Error::Parse {
                path: p.clone(),
                line: e.line(),
                message: e.to_string(),
            })?
        }
        None => StrataSpec::default(),
    };
    let state = sample_set_cover(&corpus, &spec, a.budget)?;
    let rows: Vec<CoverageOut> = coverage_report(&state, &spec).iter().map(CoverageOut::from).collect();
    let mut selected = state.selected.join("\n");
    selected.push('\n');
    let mut written = Vec::new();
    match &a.output.out {
        Some(dir) => {
            out_dir(dir)?;
            let path = dir.join("selected.txt");
            fs::write(&path, &selected).map_err(Error::write(&path))?;
            written.push(path);
            written.extend(write_report(dir, "coverage", &rows, a.output.json)?);
        }
        None => print!("{selected}"),
    }
    if !state.is_complete() {
        eprintln!(
            "warning: {} of {} strata left uncovered within the budget",
            state.target.len() - state.covered.len(),
            state.target.len()
        );
    }
    finish(&a.output, manifest, written)
}

/// Released document plus hashes and any spans the plan could not shift.
#[derive(Debug, Serialize, Deserialize)]
pub struct SurrogateRecord {
    #[serde(flatten)]
    pub document: Document,
    pub text_hash: String,
    pub patient_hash: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plan_flags: Vec<PlanFlag>,
}

fn surrogate(a: SurrogateArgs, args: Vec<String>, exec: &Rayon) -> Result<()> {
    let corpus = load_mapped_corpus(&a.corpus, a.map.as_deref(), false)?;
    let key = load_key(&a.key)?;
    let mut manifest = RunManifest::new("surrogate", args);
    manifest.input(&a.corpus)?;
    // the key file digest would fingerprint the secret, so only its path is kept
    let plans = exec.install(|| {
        corpus
            .documents
            .par_iter()
            .map(|d| apply_surrogates(d, &key, a.reference_year))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    let mut records = Vec::with_capacity(plans.len());
    let mut audit = Vec::new();
    let mut unshifted = 0;
    for (doc, plan) in corpus.documents.iter().zip(&plans) {
        audit.extend(plan.replacements.iter().map(|r| AuditRow {
            doc_id: plan.doc_id.clone(),
            category: r.category,
            output_start: r.output_start,
            orig_len: r.orig_end - r.orig_start,
            new_len: r.replacement_text.chars().count(),
        }));
        unshifted += plan.flags.len();
        records.push(SurrogateRecord {
            document: plan.document(doc),
            text_hash: plan.text_hash.clone(),
            patient_hash: plan.patient_hash.clone(),
            plan_flags: plan.flags.clone(),
        });
    }
    out_dir(&a.out)?;
    let corpus_path = a.out.join("surrogate.jsonl");
    let audit_path = a.out.join("audit.jsonl");
    write_jsonl(&corpus_path, &records)?;
    write_jsonl(&audit_path, &audit)?;
    if unshifted > 0 {
        eprintln!("warning: {unshifted} date span(s) left unshifted; see plan_flags in {}", corpus_path.display());
    }
    manifest.outputs([corpus_path, audit_path]);
    manifest.write(&a.out)?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ResponseLine {
    doc_id: String,
    response: String,
}

#[derive(Debug, Serialize)]
struct UngroundableLine<'a> {
    doc_id: &'a str,
    category: phikit_core::Category,
    text: &'a str,
}

fn read_responses(a: &AlignArgs) -> Result<Vec<(String, String)>> {
    if let Some(p) = &a.responses {
        return Ok(read_jsonl::<ResponseLine>(p)?.into_iter().map(|r| (r.doc_id, r.response)).collect());
    }
    let dir = a.responses_dir.as_ref().expect("clap requires one response source");
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(Error::read(dir))? {
        let path = entry.map_err(Error::read(dir))?.path();
        if !path.is_file() {
            continue;
        }
        let id = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        out.push((id, fs::read_to_string(&path).map_err(Error::read(&path))?));
    }
    out.sort();
    Ok(out)
}

fn align(a: AlignArgs, args: Vec<String>) -> Result<()> {
    let notes = load_source_corpus(&a.notes)?;
    let mut manifest = RunManifest::new("align", args);
    manifest.input(&a.notes)?;
    if let Some(p) = &a.responses {
        manifest.input(p)?;
    }
    let mut responses = std::collections::BTreeMap::new();
    for (id, raw) in read_responses(&a)? {
        if notes.get(&id).is_none() {
            return Err(Error::Invalid(format!("response for unknown document {id}")));
        }
        if responses.insert(id.clone(), raw).is_some() {
            return Err(Error::Invalid(format!("duplicate response for document {id}")));
        }
    }
    let missing: Vec<&str> = notes.doc_ids().filter(|id| !responses.contains_key(*id)).collect();
    if !missing.is_empty() {
        return Err(Error::Invalid(format!("no response for document(s): {}", missing.join(", "))));
    }
    let mut docs = Vec::with_capacity(notes.len());
    let mut bio: Vec<BioSequence> = Vec::with_capacity(notes.len());
    let mut ungroundable = Vec::new();
    for note in &notes.documents {
        let ext = parse_extraction(&responses[&note.doc_id])
            .map_err(|e| Error::Invalid(format!("document {}: {e}", note.doc_id)))?;
        if ext.fenced {
            eprintln!("warning: document {}: response wrapped in a code fence", note.doc_id);
        }
        let g = ground_spans(&note.text, &ext, a.min_confidence)?;
        for u in g.ungroundable {
            ungroundable.push((note.doc_id.clone(), u));
        }
        let doc = Document {
            doc_id: note.doc_id.clone(),
            patient_id: note.patient_id.clone(),
            text: note.text.clone(),
            note_type: note.note_type.clone(),
            demographics: note.demographics.clone(),
            spans: g.spans,
            flags: note.flags.clone(),
        };
        bio.push(to_bio(&doc, a.include_other));
        docs.push(doc);
    }
    debug_assert!(bio.iter().all(|s| s.is_valid() && from_bio(s).len() <= s.tokens.len()));
    let corpus = Corpus::new(notes.name.clone(), docs)?;
    out_dir(&a.out)?;
    let corpus_path = a.out.join("grounded.jsonl");
    let bio_path = a.out.join("bio.conll");
    let ung_path = a.out.join("ungroundable.jsonl");
    save_corpus(&corpus_path, &corpus)?;
    report::write_conll_file(&bio_path, &bio)?;
    write_jsonl(
        &ung_path,
        ungroundable.iter().map(|(id, u)| UngroundableLine {
            doc_id: id,
            category: u.category,
            text: &u.text,
        }),
    )?;
    if !ungroundable.is_empty() {
        eprintln!("warning: {} extracted string(s) not found in their notes", ungroundable.len());
    }
    manifest.outputs([corpus_path, bio_path, ung_path]);
    manifest.write(&a.out)?;
    Ok(())
}

fn decimal(flag: &str, s: &str) -> Result<Decimal> {
    let s = s.trim().replace(['_', ','], "");
    Decimal::from_str(&s)
        .or_else(|_| Decimal::from_scientific(&s))
        .map_err(|e| Error::Invalid(format!("--{flag} {s}: {e}")))
}

fn grouped(d: Decimal) -> String {
    let s = d.normalize().to_string();
    let (int, frac) = s.split_once('.').map_or((s.as_str(), None), |(i, f)| (i, Some(f)));
    let mut out = String::new();
    for (i, c) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    if let Some(f) = frac {
        out.push('.');
        out.push_str(f);
    }
    out
}

fn cost(a: CostArgs, args: Vec<String>) -> Result<()> {
    let mut sheet = match a.tier {
        Tier::Flex => PriceSheet::flex(),
        Tier::Standard => PriceSheet::standard(),
        Tier::Priority => PriceSheet::priority(),
    };
    if let Some(p) = &a.price_in {
        sheet.input_per_million = decimal("price-in", p)?;
    }
    if let Some(p) = &a.price_out {
        sheet.output_per_million = decimal("price-out", p)?;
    }
    if let Some(c) = &a.chars_per_token {
        sheet.chars_per_token = decimal("chars-per-token", c)?;
    }
    let input = match (&a.input_chars, &a.input_tokens) {
        (Some(c), None) => InputVolume::Chars(decimal("input-chars", c)?),
        (None, Some(t)) => InputVolume::Tokens(decimal("input-tokens", t)?),
        _ => unreachable!("clap enforces exactly one input flag"),
    };
    let e = estimate_cost(input, decimal("output-tokens", &a.output_tokens)?, &sheet)?;
    let rows = vec![
        CostRow {
            component: "input".into(),
            tokens: e.input_tokens.normalize().to_string(),
            price_per_million: sheet.input_per_million.normalize().to_string(),
            cost: format_usd(e.input_cost),
            cost_exact: e.input_cost.normalize().to_string(),
        },
        CostRow {
            component: "output".into(),
            tokens: e.output_tokens.normalize().to_string(),
            price_per_million: sheet.output_per_million.normalize().to_string(),
            cost: format_usd(e.output_cost),
            cost_exact: e.output_cost.normalize().to_string(),
        },
        CostRow {
            component: "total".into(),
            tokens: String::new(),
            price_per_million: String::new(),
            cost: format_usd(e.total),
            cost_exact: e.total.normalize().to_string(),
        },
    ];
    let factor = a
        .compare_to
        .as_deref()
        .map(|c| -> Result<Decimal> { Ok(reduction_factor(report_usd(decimal("compare-to", c)?), e.reported_total())?) })
        .transpose()?;
    println!("input   {:>20} tokens  @ ${}/1M  {}", grouped(e.input_tokens), sheet.input_per_million.normalize(), rows[0].cost);
    println!("output  {:>20} tokens  @ ${}/1M  {}", grouped(e.output_tokens), sheet.output_per_million.normalize(), rows[1].cost);
    println!("total   {}", rows[2].cost);
    if let Some(f) = factor {
        println!("reduction factor  ~{}x  ({})", grouped(round_significant(f, 3)), f.round_dp(1).normalize());
    }
    let mut written = Vec::new();
    if let Some(dir) = &a.output.out {
        out_dir(dir)?;
        written.extend(write_report(dir, "cost", &rows, a.output.json)?);
    }
    finish(&a.output, RunManifest::new("cost", args), written)
}

fn map_labels(a: MapArgs) -> Result<()> {
    let map = load_label_map(&a.map)?;
    let mapped = apply_label_map(load_source_corpus(&a.corpus)?, &map, a.drop_other)?;
    match &a.out {
        Some(p) => save_corpus(p, &mapped),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            crate::io::write_jsonl_to(&mut lock, &mapped.documents).map_err(Error::write("<stdout>"))
        }
    }
}
