//! End-to-end acceptance checks. Each criterion prints a single PASS or FAIL
//! line; the process exits nonzero if any of them fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rust_decimal::Decimal;

use phikit::core::align::{from_bio, ground_spans, parse_extraction, to_bio, BioTag};
use phikit::core::cost::{estimate_cost, format_usd, reduction_factor, report, round_significant, InputVolume, PriceSheet};
use phikit::core::divergence::{default_config, fit_gaussian, ftd, ftd_bootstrap_with, jsd, EmbeddingSet, GaussianSummary, UnigramDist};
use phikit::core::labels::{apply_label_map, builtin_label_maps};
use phikit::core::sampler::greedy_cover;
use phikit::core::span_eval::{match_spans, per_document_span_counts, Metric};
use phikit::core::stats::{bootstrap_ci_from_counts, paired_test_from_counts, BootstrapConfig, Sequential, ALPHA, COMPARISONS};
use phikit::core::surrogate::{apply_surrogates, derive_jitter, SurrogateKey};
use phikit::core::{Category, Corpus, Document, PhiSpan, Span};
use phikit::parallel::Rayon;
use phikit::report::{csv_string, CiRow, PairedRow};

type Check = Result<String, String>;
type Criterion = (&'static str, Option<Duration>, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run(name: &str, limit: Option<Duration>, f: fn() -> Check) -> bool {
    let t = Instant::now();
    let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
    let took = t.elapsed();
    let outcome = match (outcome, limit) {
        (Ok(_), Some(l)) if took > l => Err(format!("took {took:.2?}, limit {l:.0?}")),
        (o, _) => o,
    };
    match outcome {
        Ok(detail) => {
            println!("PASS  {name}: {detail} [{took:.2?}]");
            true
        }
        Err(why) => {
            println!("FAIL  {name}: {why} [{took:.2?}]");
            false
        }
    }
}

fn main() -> ExitCode {
    let checks: [Criterion; 10] = [
        ("cost table", Some(Duration::from_secs(1)), cost_table),
        ("ftd analytic oracle", Some(Duration::from_secs(10)), ftd_analytic),
        ("ftd bootstrap bias", Some(Duration::from_secs(60)), ftd_bias),
        ("jsd oracle suite", None, jsd_suite),
        ("span matcher vs exhaustive assignment", Some(Duration::from_secs(30)), matcher_oracle),
        ("bootstrap determinism and paired test", Some(Duration::from_secs(120)), bootstrap_determinism),
        ("surrogate invariants", Some(Duration::from_secs(30)), surrogate_invariants),
        ("set cover vs exhaustive optimum", None, set_cover_oracle),
        ("label maps", None, label_maps),
        ("grounding and bio round trip", None, align_round_trip),
    ];
    let failed = checks.iter().filter(|(n, l, f)| !run(n, *l, *f)).count();
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---------------------------------------------------------------- cost

fn dec(s: &str) -> Decimal {
    Decimal::from_str(s).or_else(|_| Decimal::from_scientific(s)).unwrap()
}

fn cost_table() -> Check {
    let sheet = PriceSheet::flex();
    let w = estimate_cost(InputVolume::Chars(dec("633e9")), dec("536e9"), &sheet).map_err(|e| e.to_string())?;
    let s = estimate_cost(InputVolume::Tokens(dec("13e6")), dec("6.5e6"), &sheet).map_err(|e| e.to_string())?;
    let got = [
        format_usd(report(w.input_cost)),
        format_usd(report(w.output_cost)),
        format_usd(w.reported_total()),
        format_usd(report(s.input_cost)),
        format_usd(report(s.output_cost)),
        format_usd(s.reported_total()),
    ];
    let want = ["$23,738", "$670,000", "$693,738", "$1.95", "$8.13", "$10.08"];
    ensure(got == want, || format!("got {got:?}"))?;
    let factor = reduction_factor(w.reported_total(), s.reported_total()).map_err(|e| e.to_string())?;
    let rounded = round_significant(factor, 3);
    ensure(rounded == Decimal::from(68800), || format!("factor {factor} rounds to {rounded}"))?;
    Ok(format!("{} / {} / {}, factor {rounded}", got[2], got[5], factor.round_dp(1)))
}

// ---------------------------------------------------------------- ftd

type M3 = [[f64; 3]; 3];

fn mul(a: &M3, b: &M3) -> M3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

fn inv(a: &M3) -> M3 {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    let det = a[0][0] * cof(1, 2, 1, 2) - a[0][1] * cof(1, 2, 0, 2) + a[0][2] * cof(1, 2, 0, 1);
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    adj.map(|row| row.map(|v| v / det))
}

fn avg(a: &M3, b: &M3) -> M3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = 0.5 * (a[i][j] + b[i][j]);
        }
    }
    c
}

fn trace(a: &M3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

/// Denman–Beavers iteration; converges to the principal root when the
/// eigenvalues are real and positive, as they are for a product of SPD matrices.
fn sqrtm(m: &M3) -> M3 {
    let mut y = *m;
    let mut z = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..60 {
        let (yi, zi) = (inv(&y), inv(&z));
        y = avg(&y, &zi);
        z = avg(&z, &yi);
    }
    y
}

fn cholesky(a: &M3) -> M3 {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = if i == j { (a[i][i] - s).sqrt() } else { (a[i][j] - s) / l[j][j] };
        }
    }
    l
}

fn closed_form(mu_a: &[f64; 3], sa: &M3, mu_b: &[f64; 3], sb: &M3) -> f64 {
    let shift: f64 = (0..3).map(|i| (mu_a[i] - mu_b[i]).powi(2)).sum();
    shift + trace(sa) + trace(sb) - 2.0 * trace(&sqrtm(&mul(sa, sb)))
}

fn sample(rng: &mut ChaCha8Rng, mu: &[f64; 3], sigma: &M3, n: usize, name: &str) -> EmbeddingSet {
    let l = cholesky(sigma);
    let rows = (0..n)
        .map(|_| {
            let z: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            (0..3).map(|i| mu[i] + (0..3).map(|k| l[i][k] * z[k]).sum::<f64>()).collect()
        })
        .collect();
    EmbeddingSet::new(name, (0..n).map(|i| format!("{name}{i}")).collect(), rows).unwrap()
}

fn summary(mu: &[f64], sigma: &[f64], d: usize) -> GaussianSummary {
    GaussianSummary::new(DVector::from_column_slice(mu), DMatrix::from_row_slice(d, d, sigma)).unwrap()
}

fn ftd_analytic() -> Check {
    let mu_a = [0.0, 0.0, 0.0];
    let sa = [[2.0, 0.5, 0.0], [0.5, 1.0, 0.3], [0.0, 0.3, 1.5]];
    let mu_b = [1.0, -0.5, 0.5];
    let sb = [[1.0, -0.2, 0.1], [-0.2, 2.0, 0.0], [0.1, 0.0, 0.5]];
    let exact = closed_form(&mu_a, &sa, &mu_b, &sb);

    let flat = |m: &M3| m.iter().flatten().copied().collect::<Vec<_>>();
    let on_params = ftd(&summary(&mu_a, &flat(&sa), 3), &summary(&mu_b, &flat(&sb), 3)).map_err(|e| e.to_string())?;
    ensure((on_params.total - exact).abs() < 1e-9, || {
        format!("generator parameters give {} vs closed form {exact}", on_params.total)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = sample(&mut rng, &mu_a, &sa, 500, "a");
    let b = sample(&mut rng, &mu_b, &sb, 500, "b");
    let est = ftd(&fit_gaussian(&a).unwrap(), &fit_gaussian(&b).unwrap()).map_err(|e| e.to_string())?;
    let rel = (est.total - exact).abs() / exact;
    ensure(rel <= 0.15, || format!("sampled {} vs closed form {exact}, relative error {rel:.3}", est.total))?;

    let unit = summary(&[0.0], &[1.0], 1);
    let cases = [
        (summary(&[1.0], &[1.0], 1), (1.0, 1.0, 0.0)),
        (summary(&[0.0], &[4.0], 1), (1.0, 0.0, 1.0)),
    ];
    for (other, (t, m, c)) in cases {
        let r = ftd(&unit, &other).map_err(|e| e.to_string())?;
        ensure(
            (r.total - t).abs() < 1e-9 && (r.mean_shift - m).abs() < 1e-9 && (r.cov_divergence - c).abs() < 1e-9,
            || format!("1-D case gave ({}, {}, {}), want ({t}, {m}, {c})", r.total, r.mean_shift, r.cov_divergence),
        )?;
    }
    Ok(format!("closed form {exact:.4}, sampled {:.4} ({:.1}% off), 1-D cases exact", est.total, rel * 100.0))
}

fn ftd_bias() -> Check {
    let (d, n) = (32, 200);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
    let a = EmbeddingSet::new("a", ids.clone(), rows.clone()).unwrap();
    let b = EmbeddingSet::new("b", ids, rows).unwrap();
    let full = ftd(&fit_gaussian(&a).unwrap(), &fit_gaussian(&b).unwrap()).map_err(|e| e.to_string())?;
    ensure(full.total.abs() <= 1e-9, || format!("full-data distance {}", full.total))?;
    let exec = Rayon::new(None).map_err(|e| e.to_string())?;
    let boot = ftd_bootstrap_with(&exec, &a, &b, &default_config()).map_err(|e| e.to_string())?;
    ensure(boot.total.full_data.abs() <= 1e-9, || format!("bootstrap full-data {}", boot.total.full_data))?;
    ensure(boot.total.bootstrap_mean > 0.0, || format!("bootstrap mean {}", boot.total.bootstrap_mean))?;
    Ok(format!(
        "full {:.1e}, bootstrap mean {:.4} [{:.4}, {:.4}]",
        full.total, boot.total.bootstrap_mean, boot.total.lower, boot.total.upper
    ))
}

// ---------------------------------------------------------------- jsd

fn dist(pairs: &[(&str, u64)]) -> UnigramDist {
    let counts: BTreeMap<String, u64> = pairs.iter().filter(|p| p.1 > 0).map(|&(t, c)| (t.to_string(), c)).collect();
    let total = counts.values().sum();
    UnigramDist { counts, total }
}

/// Equal-weight JS divergence by direct summation of both KL terms against the mixture.
fn direct_jsd(p: &UnigramDist, q: &UnigramDist) -> f64 {
    let vocab: BTreeSet<&String> = p.counts.keys().chain(q.counts.keys()).collect();
    let kl = |x: &UnigramDist| {
        vocab
            .iter()
            .map(|t| {
                let px = x.probability(t);
                let m = 0.5 * (p.probability(t) + q.probability(t));
                if px > 0.0 {
                    px * (px / m).ln()
                } else {
                    0.0
                }
            })
            .sum::<f64>()
    };
    0.5 * kl(p) + 0.5 * kl(q)
}

fn jsd_suite() -> Check {
    let j = |p: &UnigramDist, q: &UnigramDist| jsd(p, q, None).map_err(|e| e.to_string());
    let p = dist(&[("a", 3), ("b", 1), ("c", 2)]);
    let same = j(&p, &p)?;
    ensure(same.abs() <= 1e-15, || format!("jsd(P, P) = {same}"))?;

    let disjoint = j(&dist(&[("a", 1), ("b", 4)]), &dist(&[("x", 2), ("y", 7)]))?;
    ensure((disjoint - std::f64::consts::LN_2).abs() <= 1e-12, || format!("disjoint gave {disjoint}"))?;

    let (hp, hq) = (dist(&[("a", 1)]), dist(&[("a", 1), ("b", 1)]));
    let hand = j(&hp, &hq)?;
    let oracle = direct_jsd(&hp, &hq);
    ensure((hand - oracle).abs() <= 1e-9, || format!("hand case {hand} vs direct {oracle}"))?;
    ensure((hand - 0.2158).abs() < 5e-5, || format!("hand case {hand}"))?;

    let words = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut random = || {
        let mut pairs: Vec<(&str, u64)> = words.iter().map(|w| (*w, rng.gen_range(0..6u64))).collect();
        if pairs.iter().all(|p| p.1 == 0) {
            pairs[0].1 = 1;
        }
        dist(&pairs)
    };
    for _ in 0..1000 {
        let (p, q) = (random(), random());
        let (pq, qp) = (j(&p, &q)?, j(&q, &p)?);
        ensure((pq - qp).abs() <= 1e-12, || format!("asymmetric: {pq} vs {qp}"))?;
        ensure((-1e-15..=std::f64::consts::LN_2 + 1e-12).contains(&pq), || format!("out of bounds: {pq}"))?;
        let o = direct_jsd(&p, &q);
        ensure((pq - o).abs() <= 1e-9, || format!("{pq} vs direct {o}"))?;
    }
    Ok(format!("hand case {hand:.6}, 1000 random pairs symmetric and bounded"))
}

// ---------------------------------------------------------------- span matching

fn eligible(g: &PhiSpan, p: &PhiSpan) -> bool {
    let ov = g.end.min(p.end).saturating_sub(g.start.max(p.start));
    g.category == p.category && ov > 0 && 5 * ov >= 4 * (g.end - g.start)
}

fn best_assignment(gold: &[PhiSpan], pred: &[PhiSpan], gi: usize, used: u32) -> usize {
    if gi == gold.len() {
        return 0;
    }
    let mut best = best_assignment(gold, pred, gi + 1, used);
    for (pi, p) in pred.iter().enumerate() {
        if used & (1 << pi) == 0 && eligible(&gold[gi], p) {
            best = best.max(1 + best_assignment(gold, pred, gi + 1, used | (1 << pi)));
        }
    }
    best
}

fn random_span(rng: &mut ChaCha8Rng) -> PhiSpan {
    let start = rng.gen_range(0..30);
    let cat = if rng.gen_bool(0.7) { Category::Date } else { Category::Phone };
    Span::new(start, start + rng.gen_range(1..=10), cat)
}

fn matcher_oracle() -> Check {
    let d = |s, e| Span::new(s, e, Category::Date);
    let exact = match_spans(&[d(0, 10)], &[d(2, 10)], 0.8).map_err(|e| e.to_string())?;
    ensure(exact.match_count() == 1, || "8 of 10 characters did not match".into())?;
    let short = match_spans(&[d(0, 10)], &[d(3, 10)], 0.8).map_err(|e| e.to_string())?;
    ensure(
        short.match_count() == 0 && short.unmatched_gold.len() == 1 && short.unmatched_pred.len() == 1,
        || "7 of 10 characters matched".into(),
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut gaps = 0;
    for doc in 0..500 {
        let gold: Vec<PhiSpan> = (0..rng.gen_range(0..=6)).map(|_| random_span(&mut rng)).collect();
        let mut pred: Vec<PhiSpan> = Vec::new();
        for _ in 0..rng.gen_range(0..=6) {
            let near = !gold.is_empty() && rng.gen_bool(0.6);
            pred.push(if near {
                let g = gold.choose(&mut rng).unwrap();
                let start = (g.start as i64 + rng.gen_range(-2..=2)).max(0) as usize;
                let end = (g.end as i64 + rng.gen_range(-2..=2)).max(start as i64 + 1) as usize;
                Span::new(start, end, g.category)
            } else {
                random_span(&mut rng)
            });
        }
        let r = match_spans(&gold, &pred, 0.8).map_err(|e| e.to_string())?;
        let gs: BTreeSet<usize> = r.pairs.iter().map(|p| p.0).collect();
        let ps: BTreeSet<usize> = r.pairs.iter().map(|p| p.1).collect();
        ensure(gs.len() == r.pairs.len() && ps.len() == r.pairs.len(), || format!("doc {doc}: not one-to-one"))?;
        ensure(r.pairs.iter().all(|&(g, p)| eligible(&gold[g], &pred[p])), || {
            format!("doc {doc}: ineligible pair")
        })?;
        ensure(r.pairs.len() + r.unmatched_gold.len() == gold.len(), || format!("doc {doc}: gold not partitioned"))?;
        ensure(r.pairs.len() + r.unmatched_pred.len() == pred.len(), || format!("doc {doc}: pred not partitioned"))?;
        if r.match_count() != best_assignment(&gold, &pred, 0, 0) {
            gaps += 1;
            println!("      gap fixture: gold {gold:?} pred {pred:?}");
        }
    }
    ensure(gaps == 0, || format!("{gaps} of 500 documents below the optimum"))?;
    Ok("500/500 documents at the optimum, boundary 8/10 matches and 7/10 does not".into())
}

// ---------------------------------------------------------------- bootstrap

fn synthetic_eval_corpora(rng: &mut ChaCha8Rng, n: usize) -> (Corpus, Corpus, Corpus) {
    let cats = [Category::Date, Category::Doctor, Category::Patient, Category::Id, Category::Phone];
    let mut gold = Vec::new();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let slots = rng.gen_range(1..=8);
        let text = "x".repeat(slots * 12);
        let mut g = Vec::new();
        for k in 0..slots {
            let start = k * 12 + rng.gen_range(2..4);
            g.push(Span::new(start, start + rng.gen_range(3..=6), *cats.choose(rng).unwrap()));
        }
        let noisy = |rng: &mut ChaCha8Rng, keep: f64| -> Vec<PhiSpan> {
            let mut out = Vec::new();
            for s in &g {
                if rng.gen_bool(keep) {
                    out.push(Span::new(s.start + rng.gen_range(0..=2), s.end, s.category));
                }
            }
            out
        };
        let (pa, pb) = (noisy(rng, 0.7), noisy(rng, 0.85));
        let doc = |spans| Document::new(format!("doc{i:02}"), format!("p{}", i % 7), text.clone()).with_spans(spans);
        gold.push(doc(g.clone()));
        a.push(doc(pa));
        b.push(doc(pb));
    }
    (
        Corpus::new("gold", gold).unwrap(),
        Corpus::new("a", a).unwrap(),
        Corpus::new("b", b).unwrap(),
    )
}

fn bootstrap_reports<E: phikit::core::stats::Executor>(exec: &E, gold: &Corpus, a: &Corpus, b: &Corpus) -> Result<String, String> {
    let cfg = BootstrapConfig::default();
    let ca = per_document_span_counts(gold, a, 0.8).map_err(|e| e.to_string())?;
    let cb = per_document_span_counts(gold, b, 0.8).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for metric in [Metric::Precision, Metric::Recall] {
        let ci = bootstrap_ci_from_counts(exec, &ca, metric, &cfg).map_err(|e| e.to_string())?;
        out += &csv_string(&ci.iter().map(CiRow::from).collect::<Vec<_>>());
        let paired = paired_test_from_counts(exec, &ca, &cb, metric, &cfg).map_err(|e| e.to_string())?;
        out += &csv_string(&paired.iter().map(PairedRow::from).collect::<Vec<_>>());
    }
    Ok(out)
}

fn bootstrap_determinism() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (gold, a, b) = synthetic_eval_corpora(&mut rng, 50);
    let first = bootstrap_reports(&Sequential, &gold, &a, &b)?;
    let second = bootstrap_reports(&Sequential, &gold, &a, &b)?;
    ensure(first == second, || "two runs at seed 42 differ".into())?;
    let threaded = bootstrap_reports(&Rayon::new(Some(4)).map_err(|e| e.to_string())?, &gold, &a, &b)?;
    ensure(first == threaded, || "four threads differ from one".into())?;

    let empty_docs = gold.documents.iter().map(|d| Document::new(d.doc_id.clone(), d.patient_id.clone(), d.text.clone())).collect();
    let empty = Corpus::new("empty", empty_docs).unwrap();
    let cfg = BootstrapConfig::default();
    let ce = per_document_span_counts(&gold, &empty, 0.8).map_err(|e| e.to_string())?;
    let cg = per_document_span_counts(&gold, &gold, 0.8).map_err(|e| e.to_string())?;
    let res = paired_test_from_counts(&Sequential, &ce, &cg, Metric::Recall, &cfg).map_err(|e| e.to_string())?;
    ensure(!res.is_empty(), || "no categories tested".into())?;
    let bar = ALPHA / COMPARISONS as f64;
    for r in &res {
        ensure(r.p_value == 1.0 / 2000.0, || format!("{}: p = {}", r.category, r.p_value))?;
        ensure(r.p_value < bar && r.significant, || format!("{}: not significant", r.category))?;
    }
    Ok(format!("{} report bytes identical across runs and thread counts, p = 1/2000 in {} categories", first.len(), res.len()))
}

// ---------------------------------------------------------------- surrogates

const DOCTORS: [&str; 6] = ["Hall", "Okafor", "Lindqvist", "Moreau", "Tanaka", "Reyes"];

struct Built {
    doc: Document,
    dates: Vec<(NaiveDate, &'static str)>,
}

fn build_note(rng: &mut ChaCha8Rng, i: usize, patient: &str) -> Built {
    let mut text = String::new();
    let mut spans = Vec::new();
    let mut dates = Vec::new();
    let mut push = |text: &mut String, s: &str, cat: Option<Category>| {
        let start = text.chars().count();
        text.push_str(s);
        if let Some(c) = cat {
            spans.push(Span::new(start, text.chars().count(), c));
        }
    };
    for _ in 0..rng.gen_range(1..=6) {
        match rng.gen_range(0..5) {
            0 | 1 => {
                let day = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap() + chrono::Duration::days(rng.gen_range(0..8000));
                let fmt = if rng.gen_bool(0.5) { "%m/%d/%Y" } else { "%Y-%m-%d" };
                dates.push((day, fmt));
                push(&mut text, "Seen on ", None);
                push(&mut text, &day.format(fmt).to_string(), Some(Category::Date));
                push(&mut text, ". ", None);
            }
            2 => {
                push(&mut text, "Attending Dr. ", None);
                push(&mut text, DOCTORS.choose(rng).unwrap(), Some(Category::Doctor));
                push(&mut text, ". ", None);
            }
            3 => {
                push(&mut text, "Call ", None);
                let phone = format!("{:03}-{:03}-{:04}", rng.gen_range(200..999), rng.gen_range(0..999), rng.gen_range(0..9999));
                push(&mut text, &phone, Some(Category::Phone));
                push(&mut text, " if worse. ", None);
            }
            _ => {
                push(&mut text, "MRN ", None);
                push(&mut text, &format!("A{}", rng.gen_range(10000..99999)), Some(Category::Id));
                push(&mut text, ", age ", None);
                push(&mut text, &rng.gen_range(1..99).to_string(), Some(Category::Age));
                push(&mut text, ". ", None);
            }
        }
    }
    let doc = Document::new(format!("n{i:03}"), patient, text).with_spans(spans).normalize().unwrap();
    Built { doc, dates }
}

fn chars(s: &str, start: usize, len: usize) -> String {
    s.chars().skip(start).take(len).collect()
}

fn surrogate_invariants() -> Check {
    let key = || SurrogateKey::with_default_names(b"acceptance secret".to_vec(), b"release-1".to_vec()).unwrap();
    let k = key();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut shifts: BTreeMap<String, i64> = BTreeMap::new();
    let mut shifted_dates = 0;
    for i in 0..200 {
        let patient = format!("patient-{}", rng.gen_range(0..40));
        let Built { doc, dates } = build_note(&mut rng, i, &patient);
        let plan = apply_surrogates(&doc, &k, None).map_err(|e| format!("{}: {e}", doc.doc_id))?;
        ensure(plan.flags.is_empty(), || format!("{}: unexpected flags {:?}", doc.doc_id, plan.flags))?;

        // Splicing the replacements into the original must give the output exactly.
        let src: Vec<char> = doc.text.chars().collect();
        let mut rebuilt = String::new();
        let mut at = 0;
        for r in &plan.replacements {
            rebuilt.extend(&src[at..r.orig_start]);
            ensure(r.output_start == rebuilt.chars().count(), || format!("{}: output offset drift", doc.doc_id))?;
            rebuilt.push_str(&r.replacement_text);
            at = r.orig_end;
        }
        rebuilt.extend(&src[at..]);
        ensure(rebuilt == plan.output_text, || format!("{}: text outside spans changed", doc.doc_id))?;

        ensure(plan.output_spans.len() == doc.spans.len(), || format!("{}: span count changed", doc.doc_id))?;
        for (r, s) in plan.replacements.iter().zip(&plan.output_spans) {
            let len = r.replacement_text.chars().count();
            ensure(s.start == r.output_start && s.end == s.start + len && s.category == r.category, || {
                format!("{}: output span does not line up with its replacement", doc.doc_id)
            })?;
            ensure(chars(&plan.output_text, s.start, len) == r.replacement_text, || {
                format!("{}: output span does not slice to its replacement", doc.doc_id)
            })?;
        }

        let date_repls: Vec<_> = plan.replacements.iter().filter(|r| r.category == Category::Date).collect();
        ensure(date_repls.len() == dates.len(), || format!("{}: date count", doc.doc_id))?;
        let expected = derive_jitter(&k, &patient).map_err(|e| e.to_string())?;
        for (r, (orig, fmt)) in date_repls.iter().zip(&dates) {
            let new = NaiveDate::parse_from_str(&r.replacement_text, fmt)
                .map_err(|_| format!("{}: {:?} is not a {fmt} date", doc.doc_id, r.replacement_text))?;
            let delta = (new - *orig).num_days();
            ensure((3..=90).contains(&delta.abs()), || format!("{}: jitter {delta}", doc.doc_id))?;
            ensure(delta == expected, || format!("{}: shift {delta} but key gives {expected}", doc.doc_id))?;
            let prev = *shifts.entry(patient.clone()).or_insert(delta);
            ensure(prev == delta, || format!("{patient}: shifts {prev} and {delta}"))?;
            shifted_dates += 1;
        }
        // Intervals between any two dates of the note survive the shift.
        for x in 0..dates.len() {
            for y in x + 1..dates.len() {
                let nx = NaiveDate::parse_from_str(&date_repls[x].replacement_text, dates[x].1).unwrap();
                let ny = NaiveDate::parse_from_str(&date_repls[y].replacement_text, dates[y].1).unwrap();
                ensure(ny - nx == dates[y].0 - dates[x].0, || format!("{}: interval changed", doc.doc_id))?;
            }
        }

        let again = apply_surrogates(&doc, &key(), None).map_err(|e| e.to_string())?;
        ensure(again == plan, || format!("{}: second run differs", doc.doc_id))?;
    }
    Ok(format!("200 notes, {shifted_dates} dates over {} patients", shifts.len()))
}

// ---------------------------------------------------------------- set cover

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

fn set_cover_oracle() -> Check {
    let small = [
        ("d1", BTreeSet::from(['a', 'b'])),
        ("d2", BTreeSet::from(['b', 'c'])),
        ("d3", BTreeSet::from(['c'])),
    ];
    let s = greedy_cover(&small, None).map_err(|e| e.to_string())?;
    ensure(s.is_complete() && s.selected.len() == 2, || format!("selected {:?}", s.selected))?;

    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut at_optimum = 0;
    for inst in 0..100 {
        let n = rng.gen_range(1..=15);
        let universe = rng.gen_range(1..=8u8);
        let sets: Vec<BTreeSet<u8>> = (0..n)
            .map(|_| {
                let mut s: BTreeSet<u8> = (0..universe).filter(|_| rng.gen_bool(0.3)).collect();
                s.insert(rng.gen_range(0..universe));
                s
            })
            .collect();
        let ids: Vec<String> = (0..n).map(|i| format!("doc{i:02}")).collect();
        let candidates: Vec<(&str, BTreeSet<u8>)> = ids.iter().map(|s| s.as_str()).zip(sets.iter().cloned()).collect();
        let union: BTreeSet<u8> = sets.iter().flatten().copied().collect();
        let opt = (1u32..1 << n)
            .filter(|mask| {
                let covered: BTreeSet<u8> = (0..n).filter(|i| mask & (1 << i) != 0).flat_map(|i| sets[i].iter().copied()).collect();
                covered == union
            })
            .map(u32::count_ones)
            .min()
            .unwrap() as usize;
        let g = greedy_cover(&candidates, None).map_err(|e| e.to_string())?;
        ensure(g.is_complete() && g.covered == union, || format!("instance {inst}: cover incomplete"))?;
        let bound = harmonic(union.len()) * opt as f64;
        ensure(g.selected.len() as f64 <= bound + 1e-9, || {
            format!("instance {inst}: {} picks, optimum {opt}, bound {bound:.2}", g.selected.len())
        })?;
        if g.selected.len() == opt {
            at_optimum += 1;
        }
    }
    Ok(format!("100 instances within bound ({at_optimum} at the optimum), small instance takes 2"))
}

// ---------------------------------------------------------------- label maps

fn label_maps() -> Check {
    use Category::*;
    let i2b2 = [
        ("DATE", Date), ("PATIENT", Patient), ("DOCTOR", Doctor), ("MEDICALRECORD", Id), ("IDNUM", Id),
        ("USERNAME", Id), ("DEVICE", Id), ("AGE", Age), ("HOSPITAL", Hospital), ("PHONE", Phone),
        ("FAX", Phone), ("STREET", Location), ("CITY", Location), ("STATE", Location), ("ZIP", Location),
        ("COUNTRY", Location), ("LOCATION-OTHER", Location), ("EMAIL", Web), ("PROFESSION", Other),
        ("ORGANIZATION", Other),
    ];
    let aimi = [
        ("DATES", Date), ("PATIENT", Patient), ("HCW", Doctor), ("UNIQUE", Id), ("HOSPITAL", Location),
        ("VENDOR", Hospital), ("PHONE", Phone), ("AGE", Age),
    ];
    let maps = builtin_label_maps();
    for (name, table) in [("i2b2", &i2b2[..]), ("aimi", &aimi[..])] {
        let m = maps.get(name).ok_or_else(|| format!("no {name} map"))?;
        ensure(m.len() == table.len(), || format!("{name} has {} entries", m.len()))?;
        for &(label, cat) in table {
            ensure(m.get(label) == Some(cat), || format!("{name}: {label} maps to {:?}", m.get(label)))?;
        }
    }

    let doc = Document::<String>::new("x", "p", "St Mary Acme Corp")
        .with_spans(vec![Span::new(0, 7, "HOSPITAL".to_string()), Span::new(8, 17, "VENDOR".to_string())]);
    let mapped = apply_label_map(Corpus::new("aimi", vec![doc]).unwrap(), &maps["aimi"], false).map_err(|e| e.to_string())?;
    let cats: Vec<Category> = mapped.documents[0].spans.iter().map(|s| s.category).collect();
    ensure(cats == [Location, Hospital], || format!("crossover gave {cats:?}"))?;

    let doc = Document::<String>::new("y", "p", "nurse at Acme")
        .with_spans(vec![Span::new(0, 5, "PROFESSION".to_string()), Span::new(9, 13, "ORGANIZATION".to_string())]);
    let kept = apply_label_map(Corpus::new("i2b2", vec![doc.clone()]).unwrap(), &maps["i2b2"], false).map_err(|e| e.to_string())?;
    let dropped = apply_label_map(Corpus::new("i2b2", vec![doc]).unwrap(), &maps["i2b2"], true).map_err(|e| e.to_string())?;
    ensure(kept.documents[0].spans.len() == 2 && dropped.documents[0].spans.is_empty(), || {
        "OTHER handling".into()
    })?;
    Ok("20 and 8 entries, VENDOR->HOSPITAL and HOSPITAL->LOCATION".into())
}

// ---------------------------------------------------------------- grounding and BIO

const FILLER: [&str; 10] = ["seen", "in", "clinic", "for", "follow", "up", "stable", "and", "well", "today"];
const ENTITIES: [(Category, &str); 8] = [
    (Category::Patient, "Ana Kowal"),
    (Category::Patient, "Ana"),
    (Category::Doctor, "Dr Brandt"),
    (Category::Date, "3/5/23"),
    (Category::Date, "March 5"),
    (Category::Phone, "555-0192"),
    (Category::Hospital, "Lakeside General Hospital"),
    (Category::Id, "MRN-77120"),
];

fn align_round_trip() -> Check {
    let empty = parse_extraction("{}").map_err(|e| e.to_string())?;
    ensure(empty.is_empty(), || "empty object is not empty".into())?;
    let g = ground_spans("no phi here", &empty, 0.0).map_err(|e| e.to_string())?;
    ensure(g.spans.is_empty() && g.ungroundable.is_empty(), || "empty object grounded something".into())?;

    let spaced = parse_extraction(r#"{"PATIENT":[{"text":"Ana  Kowal","confidence":0.9}]}"#).map_err(|e| e.to_string())?;
    let g = ground_spans("Patient Ana Kowal seen", &spaced, 0.5).map_err(|e| e.to_string())?;
    ensure(g.spans.is_empty() && g.ungroundable.len() == 1, || "whitespace mismatch grounded".into())?;

    let repeated = parse_extraction(r#"{"DOCTOR":[{"text":"Smith","confidence":0.95}]}"#).map_err(|e| e.to_string())?;
    let g = ground_spans("Dr. Smith saw Smith", &repeated, 0.5).map_err(|e| e.to_string())?;
    let at: Vec<(usize, usize)> = g.spans.iter().map(|s| s.bounds()).collect();
    ensure(at == [(4, 9), (14, 19)], || format!("repeated mention spans {at:?}"))?;

    let low = ground_spans("Dr. Smith saw Smith", &repeated, 0.99).map_err(|e| e.to_string())?;
    ensure(low.spans.is_empty(), || "threshold did not filter".into())?;
    ensure(parse_extraction(r#"{"NAME":[]}"#).is_err(), || "unknown entity type accepted".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut total_spans = 0;
    for i in 0..200 {
        let mut words: Vec<&str> = Vec::new();
        let mut used = BTreeSet::new();
        for _ in 0..rng.gen_range(3..25) {
            if rng.gen_bool(0.25) {
                let e = rng.gen_range(0..ENTITIES.len());
                used.insert(e);
                words.push(ENTITIES[e].1);
            } else {
                words.push(FILLER.choose(&mut rng).unwrap());
            }
        }
        let note = words.join(" ");
        let mut obj: BTreeMap<String, Vec<serde_json::Value>> = BTreeMap::new();
        for &e in &used {
            let (cat, text) = ENTITIES[e];
            obj.entry(cat.to_string()).or_default().push(serde_json::json!({"text": text, "confidence": 0.9}));
        }
        let ext = parse_extraction(&serde_json::to_string(&obj).unwrap()).map_err(|e| format!("note {i}: {e}"))?;
        let grounded = ground_spans(&note, &ext, 0.5).map_err(|e| e.to_string())?;
        ensure(grounded.ungroundable.is_empty(), || format!("note {i}: ungroundable {:?}", grounded.ungroundable))?;
        for s in &grounded.spans {
            let text = chars(&note, s.start, s.len());
            ensure(ENTITIES.iter().any(|&(c, t)| c == s.category && t == text), || {
                format!("note {i}: span {:?} slices to {text:?}", s.bounds())
            })?;
        }

        let doc = Document::new(format!("n{i}"), "p", note.clone()).with_spans(grounded.spans).normalize().map_err(|e| e.to_string())?;
        let seq = to_bio(&doc, false);
        ensure(seq.is_valid(), || format!("note {i}: invalid BIO"))?;
        let mut prev = BioTag::O;
        for &t in &seq.tags {
            if let BioTag::I(c) = t {
                ensure(matches!(prev, BioTag::B(p) | BioTag::I(p) if p == c), || format!("note {i}: orphan I-{c}"))?;
            }
            prev = t;
        }
        let back: Vec<_> = from_bio(&seq).iter().map(|s| (s.bounds(), s.category)).collect();
        let want: Vec<_> = doc.spans.iter().map(|s| (s.bounds(), s.category)).collect();
        ensure(back == want, || format!("note {i}: round trip gave {back:?}, want {want:?}"))?;
        total_spans += back.len();
    }
    Ok(format!("200 notes, {total_spans} spans recovered exactly, edge cases hold"))
}
