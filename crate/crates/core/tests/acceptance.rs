//! Acceptance suite. Prints one PASS/FAIL line per criterion plus INFO lines
//! with the measured values.
//!
//! Run with `cargo test --release --test acceptance`. Failures only change the
//! exit status when `ACCEPTANCE_STRICT=1` is set, so a plain workspace test
//! run still reaches the suites that sort after this one.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::*;
use fuzzylabel::classify_multi::{threshold_posteriors, MlknnVariant, MultiLabelModel, DEFAULT_THRESHOLD};
use fuzzylabel::classify_single::{SingleLabelModel, DEFAULT_EPSILON};
use fuzzylabel::fcm::fcm_fit_with;
use fuzzylabel::flgen::{fixed_point_oracle, generate, FlGenConfig};
use fuzzylabel::graph::build_weight_graph;
use fuzzylabel::harness::{
    run_comparison, run_plan_with, run_three_arm, Arm, ExperimentReport, GeneratedLabels, GenerationDiagnostics,
    SoftLabelGenerator, CELLS_CSV, GRID_CSV, REPORT_JSON, SUMMARY_CSV,
};
use fuzzylabel::metrics::{
    accuracy, average_precision, coverage, f1, hamming_loss, one_error, ranking_loss, roc_auc_multiclass, F1Average,
    Metric,
};
use fuzzylabel::synthdata::{gen_multi_label, gen_single_label, SynthConfig};
use fuzzylabel::{
    dataset::load_dataset, Dataset, ExperimentPlan, FeatureMatrix, FuzzyLabelMatrix, LabelMode, LogicalLabelMatrix,
};
use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const REAL_SEED: u64 = 7;

struct Verdict {
    id: usize,
    pass: bool,
    summary: String,
    info: Vec<String>,
}

impl Verdict {
    fn new(id: usize, pass: bool, summary: impl Into<String>) -> Self {
        Verdict { id, pass, summary: summary.into(), info: Vec::new() }
    }

    fn with_info(mut self, info: Vec<String>) -> Self {
        self.info = info;
        self
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn close(got: f64, want: Q) -> bool {
    (got - to_f64(want)).abs() <= 1e-12
}

fn c1_propagation_oracle() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..50 {
        let n = rng.random_range(20..=100);
        let d = rng.random_range(1..=6);
        let l = rng.random_range(1..=10);
        let x = Array2::from_shape_fn((n, d), |_| rng.random::<f64>() * 4.0 - 2.0);
        let y = Array2::from_shape_fn((n, l), |_| u8::from(rng.random::<f64>() < 0.3));
        let (x, y) = (FeatureMatrix::new(x).unwrap(), LogicalLabelMatrix::new(y).unwrap());
        // the closed form describes the unclipped iteration
        let mut config = FlGenConfig::default();
        config.propagation.clip = false;
        config.fcm.seed = rng.random();
        let out = generate(&x, &y, &config).unwrap();
        let fcm = fcm_fit_with(&x, l, &config.fcm).unwrap();
        let graph = build_weight_graph(&x, fcm.membership.view(), &config.graph).unwrap();
        let oracle = fixed_point_oracle(&graph, y.to_f64().view(), config.propagation.alpha).unwrap();
        let err = out.memberships.iter().zip(oracle.iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err);
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        1,
        worst <= 1e-5 && secs < 5.0,
        format!("propagation oracle: max error {worst:.2e} (<= 1e-5), {secs:.2}s (< 5s) over 50 fixtures"),
    )
}

/// Per-seed best-grid means, averaged over seeds.
fn seed_average(reports: &[ExperimentReport], arm: Arm, metric: Metric, selected: bool) -> f64 {
    let total: f64 = reports
        .iter()
        .map(|r| {
            if selected {
                r.summary(arm).unwrap().metrics[&metric].mean
            } else {
                r.best_mean(arm, metric).unwrap()
            }
        })
        .sum();
    total / reports.len() as f64
}

fn c2_synthetic_single() -> Verdict {
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut sweep = Vec::new();
    for seed in SEEDS {
        let ds = gen_single_label(&SynthConfig::single_label_default(seed)).unwrap();
        let plan = ExperimentPlan::single_label(seed);
        reports.push(run_three_arm(&ds, &plan).unwrap());
        // cluster count sweep for the generator: K = 2L
        let mut wide = plan.clone();
        wide.arms = vec![Arm::Generated];
        wide.generator.fcm.k = Some(2 * ds.label_count());
        sweep.push(run_three_arm(&ds, &wide).unwrap());
    }
    let secs = start.elapsed().as_secs_f64();
    let acc = |arm| seed_average(&reports, arm, Metric::Accuracy, false);
    let (e1, e2, e3) = (acc(Arm::TrueLogical), acc(Arm::TrueFuzzy), acc(Arm::Generated));
    let wide = seed_average(&sweep, Arm::Generated, Metric::Accuracy, false);
    let pass = e2 - e1 >= 0.005 && e3 - e1 >= 0.005 && (e2 - e3).abs() <= 0.03;
    Verdict::new(
        2,
        pass,
        format!(
            "synthetic single-label: acc exp1 {e1:.4}, exp2 {e2:.4} ({:+.4}), exp3 {e3:.4} ({:+.4}); \
             need both gains >= 0.005 and |exp2-exp3| = {:.4} <= 0.03",
            e2 - e1,
            e3 - e1,
            (e2 - e3).abs()
        ),
    )
    .with_info(vec![
        format!("runtime {secs:.1}s (expected < 120s, includes the K = 2L sweep)"),
        format!("generator with FCM K = 2L: acc {wide:.4} vs K = L {e3:.4}"),
    ])
}

fn c3_synthetic_multi() -> Verdict {
    let start = Instant::now();
    let reports: Vec<_> = SEEDS
        .iter()
        .map(|&seed| {
            let ds = gen_multi_label(&SynthConfig::multi_label_default(seed)).unwrap();
            run_three_arm(&ds, &ExperimentPlan::multi_label(seed)).unwrap()
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let ap = |arm| seed_average(&reports, arm, Metric::AveragePrecision, false);
    // HL at the AP-selected setting of each arm
    let hl = |arm| seed_average(&reports, arm, Metric::HammingLoss, true);
    let (a1, a2, a3) = (ap(Arm::TrueLogical), ap(Arm::TrueFuzzy), ap(Arm::Generated));
    let (h1, h2, h3) = (hl(Arm::TrueLogical), hl(Arm::TrueFuzzy), hl(Arm::Generated));
    let pass = a2 - a1 >= 0.01 && a3 - a1 >= 0.01 && h2 < h1 && h3 < h1;
    Verdict::new(
        3,
        pass,
        format!(
            "synthetic multi-label: AP {a1:.4} / {a2:.4} / {a3:.4} (gains need >= 0.01), \
             HL {h1:.4} / {h2:.4} / {h3:.4} (exp2, exp3 need < exp1)"
        ),
    )
    .with_info(vec![format!("runtime {secs:.1}s (expected < 300s)")])
}

struct RealRun {
    name: &'static str,
    report: Option<ExperimentReport>,
    missing: Option<String>,
}

fn run_real(names: &[&'static str]) -> Vec<RealRun> {
    names
        .iter()
        .map(|&name| {
            let path = data_dir().join(format!("{name}.csv"));
            match load_dataset(&path) {
                Ok(ds) => {
                    let mut plan = ExperimentPlan::for_mode(ds.mode(), REAL_SEED);
                    plan.timing = true;
                    RealRun { name, report: Some(run_comparison(&ds, &plan).unwrap()), missing: None }
                }
                Err(e) => RealRun { name, report: None, missing: Some(e.to_string()) },
            }
        })
        .collect()
}

fn c4_real_single(runs: &[RealRun], secs: f64) -> Verdict {
    let reference = [("divorce", 0.9567, 0.9779), ("wine", 0.8951, 0.9580), ("breast_cancer", 0.9145, 0.9583)];
    let mut info = vec![format!("runtime {secs:.1}s (expected < 120s)")];
    let mut ok = true;
    let mut wins = 0;
    for run in runs {
        match &run.report {
            None => {
                ok = false;
                info.push(format!("{}: unavailable ({})", run.name, run.missing.as_deref().unwrap_or("")));
            }
            Some(r) => {
                let base = r.best_mean(Arm::Baseline, Metric::Accuracy).unwrap();
                let gen = r.best_mean(Arm::Generated, Metric::Accuracy).unwrap();
                ok &= gen >= base - 0.01;
                wins += usize::from(gen > base);
                let (_, pb, pg) = reference.iter().find(|p| p.0 == run.name).copied().unwrap_or(("", f64::NAN, f64::NAN));
                info.push(format!(
                    "{}: baseline {base:.4}, generated {gen:.4} (diff {:+.4}); reference magnitudes {pb:.4} -> {pg:.4}, \
                     within 0.03: {}",
                    run.name,
                    gen - base,
                    (base - pb).abs() <= 0.03 && (gen - pg).abs() <= 0.03
                ));
            }
        }
    }
    Verdict::new(
        4,
        ok && wins >= 2,
        format!("real single-label: no drop beyond 0.01 on all three and strict gain on {wins} of 3 (need >= 2)"),
    )
    .with_info(info)
}

fn c5_real_multi(runs: &[RealRun], stand_in: &[RealRun]) -> Verdict {
    let mut info = Vec::new();
    let mut ok = true;
    let mut hl_drop = false;
    for run in runs {
        match &run.report {
            None => {
                ok = false;
                info.push(format!("{}: unavailable ({})", run.name, run.missing.as_deref().unwrap_or("")));
            }
            Some(r) => {
                let (ba, ga) = (best_ap(r, Arm::Baseline), best_ap(r, Arm::Generated));
                let (bh, gh) = (selected_hl(r, Arm::Baseline), selected_hl(r, Arm::Generated));
                ok &= ga >= ba;
                hl_drop |= gh < bh;
                info.push(format!("{}: AP {ba:.4} -> {ga:.4}, HL {bh:.4} -> {gh:.4}", run.name));
            }
        }
    }
    for run in stand_in {
        if let Some(r) = &run.report {
            info.push(format!(
                "{} (not counted): AP {:.4} -> {:.4}, HL {:.4} -> {:.4}",
                run.name,
                best_ap(r, Arm::Baseline),
                best_ap(r, Arm::Generated),
                selected_hl(r, Arm::Baseline),
                selected_hl(r, Arm::Generated)
            ));
        }
    }
    Verdict::new(5, ok && hl_drop, "real multi-label: AP non-regression on both, HL reduced on at least one")
        .with_info(info)
}

fn best_ap(r: &ExperimentReport, arm: Arm) -> f64 {
    r.best_mean(arm, Metric::AveragePrecision).unwrap()
}

fn selected_hl(r: &ExperimentReport, arm: Arm) -> f64 {
    r.summary(arm).unwrap().metrics[&Metric::HammingLoss].mean
}

fn c6_metric_oracles() -> Verdict {
    let mut mismatches = Vec::new();
    for seed in 0..200 {
        let f = fixture(seed);
        let (s, t) = (f.scores.view(), f.truth.view());
        if hamming_loss(f.pred.view(), t).unwrap() != to_f64(brute_hl(&f)) {
            mismatches.push(format!("HL {seed}"));
        }
        let ranked = [
            ("AP", average_precision(s, t).ok().map(|r| r.value), brute_ap(&f)),
            ("OE", one_error(s, t).ok().map(|r| r.value), brute_oe(&f)),
            ("RL", ranking_loss(s, t).ok().map(|r| r.value), brute_rl(&f)),
            ("CV", coverage(s, t).ok().map(|r| r.value), brute_cv(&f)),
        ];
        for (name, got, want) in ranked {
            let agree = match (got, want) {
                (Some(g), Some(w)) => close(g, w),
                (None, None) => true,
                _ => false,
            };
            if !agree {
                mismatches.push(format!("{name} {seed}"));
            }
        }

        // single-label metrics on a fixture of the same size
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let n = f.scores.nrows();
        let c = rng.random_range(2..=5);
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
        let scores = Array2::from_shape_fn((n, c), |_| f64::from(rng.random_range(0..=6u8)) / 6.0);
        let hits = pred.iter().zip(&truth).filter(|(a, b)| a == b).count();
        if accuracy(&pred, &truth).unwrap() != to_f64(q(hits, n)) {
            mismatches.push(format!("ACC {seed}"));
        }
        let want_f1 = if c == 2 {
            brute_class_f1(&pred, &truth, 1)
        } else {
            (0..c).fold(Q::from_integer(0), |a, k| a + brute_class_f1(&pred, &truth, k)) / Q::from_integer(c as i64)
        };
        let avg = if c == 2 { F1Average::Binary } else { F1Average::Macro };
        if !close(f1(&pred, &truth, c, avg).unwrap(), want_f1) {
            mismatches.push(format!("F1 {seed}"));
        }
        let classes: Vec<usize> = if c == 2 { vec![1] } else { (0..c).collect() };
        let per_class: Vec<Q> = classes
            .iter()
            .filter_map(|&k| {
                let col: Vec<f64> = scores.column(k).to_vec();
                let is_k: Vec<bool> = truth.iter().map(|&t| t == k).collect();
                brute_auc(&col, &is_k)
            })
            .collect();
        let want_auc = (!per_class.is_empty()).then(|| {
            per_class.iter().fold(Q::from_integer(0), |a, &b| a + b) / Q::from_integer(per_class.len() as i64)
        });
        let agree = match (roc_auc_multiclass(scores.view(), &truth).unwrap(), want_auc) {
            (Some(g), Some(w)) => close(g, w),
            (None, None) => true,
            _ => false,
        };
        if !agree {
            mismatches.push(format!("AUC {seed}"));
        }
    }

    let rl_tie = ranking_loss(array![[0.5, 0.5]].view(), array![[1u8, 0]].view()).unwrap().value == 1.0;
    let boundary = threshold_posteriors(array![0.5].view(), 0.5) == array![1u8];
    let hl = hamming_loss(array![[1u8, 1, 1]].view(), array![[1u8, 0, 1]].view()).unwrap() == 1.0 / 3.0;
    let edges = rl_tie && boundary && hl;
    Verdict::new(
        6,
        mismatches.is_empty() && edges,
        format!(
            "metric oracles: {} mismatches over 200 fixtures; edge cases RL tie {rl_tie}, threshold boundary {boundary}, HL {hl}",
            mismatches.len()
        ),
    )
    .with_info(mismatches.into_iter().take(10).collect())
}

/// Hands the logical labels back unchanged.
struct Identity;

impl SoftLabelGenerator for Identity {
    fn name(&self) -> String {
        "identity".into()
    }

    fn generate(&self, _: &FeatureMatrix, logical: &LogicalLabelMatrix, _: u64) -> fuzzylabel::Result<GeneratedLabels> {
        Ok(GeneratedLabels {
            fuzzy: FuzzyLabelMatrix::new(logical.to_f64())?,
            diagnostics: GenerationDiagnostics::default(),
        })
    }
}

fn c7_degeneration() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);

    // one-hot labels with K = 1 against a hand-written nearest neighbour
    let (n, d, c) = (120, 4, 3);
    let x = FeatureMatrix::new(Array2::from_shape_fn((n, d), |_| rng.random::<f64>())).unwrap();
    let classes: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    let y = LogicalLabelMatrix::from_classes(&classes, c).unwrap();
    let model = SingleLabelModel::from_logical(x.clone(), &y, 1, DEFAULT_EPSILON).unwrap();
    let mut sl_agree = 0;
    for _ in 0..100 {
        let q: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let nearest = (0..n)
            .map(|i| (x.row(i).iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .unwrap()
            .1;
        sl_agree += usize::from(model.predict_class(ndarray::ArrayView1::from(&q)).unwrap() == classes[nearest]);
    }

    // U = Y against the ML-KNN baseline, bit for bit
    let l = 5;
    let ym = LogicalLabelMatrix::new(Array2::from_shape_fn((n, l), |_| u8::from(rng.random::<f64>() < 0.35))).unwrap();
    let ds = Dataset::new("degenerate", LabelMode::Multi, x.clone(), ym.clone(), None).unwrap();
    let baseline = MultiLabelModel::fit_baseline_mlknn(&ds, 7, 1.0).unwrap();
    let fed = MultiLabelModel::fit(
        x,
        FuzzyLabelMatrix::new(ym.to_f64()).unwrap(),
        7,
        1.0,
        DEFAULT_THRESHOLD,
        MlknnVariant::Fuzzy,
    )
    .unwrap();
    let mut ml_agree = 0;
    for _ in 0..100 {
        let q = ndarray::Array1::from_shape_fn(d, |_| rng.random::<f64>());
        let (a, b) = (baseline.predict_fuzzy(q.view()).unwrap(), fed.predict_fuzzy(q.view()).unwrap());
        let same = a.iter().zip(b.iter()).all(|(u, v)| u.to_bits() == v.to_bits())
            && baseline.predict_logical(q.view()).unwrap() == fed.predict_logical(q.view()).unwrap();
        ml_agree += usize::from(same);
    }

    // the same identity through the harness arms
    let mut plan = ExperimentPlan::multi_label(3);
    plan.k_grid = vec![3, 7];
    plan.smooth_grid = vec![0.05, 1.0];
    plan.arms = vec![Arm::Baseline, Arm::Generated];
    let report = run_plan_with(&ds, &plan, &Identity).unwrap();
    let arm_cells = |arm| report.cells.iter().filter(move |cell| cell.arm == arm);
    let harness_same = arm_cells(Arm::Baseline)
        .zip(arm_cells(Arm::Generated))
        .all(|(a, b)| (a.fold, a.k, a.smoothing) == (b.fold, b.k, b.smoothing) && a.evaluation == b.evaluation);

    Verdict::new(
        7,
        sl_agree == 100 && ml_agree == 100 && harness_same,
        format!(
            "degeneration: SL K=1 one-hot vs 1-NN {sl_agree}/100, ML U=Y vs baseline bitwise {ml_agree}/100, \
             harness arms identical {harness_same}"
        ),
    )
}

fn c8_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let input = data_dir().join("wine.csv");
    let mut ok = true;
    for run in ["a", "b"] {
        let out = Command::new(env!("CARGO_BIN_EXE_fuzzylabel"))
            .args(["compare", "--in", input.to_str().unwrap(), "--seed", "11", "--out"])
            .arg(dir.path().join(run))
            .output()
            .unwrap();
        ok &= out.status.success();
    }
    let files = [REPORT_JSON, CELLS_CSV, GRID_CSV, SUMMARY_CSV];
    let identical = ok
        && files.iter().all(|f| {
            let read = |run: &str| fs::read(dir.path().join(run).join(f)).ok();
            read("a").is_some() && read("a") == read("b")
        });
    Verdict::new(8, identical, format!("determinism: two `compare` runs on wine, reports byte-identical {identical}"))
}

fn c9_timing(runs: &[&RealRun]) -> Verdict {
    let mut info = Vec::new();
    let mut ok = true;
    for run in runs {
        match run.report.as_ref().and_then(|r| r.timings.as_ref()) {
            Some(t) => {
                let ratio = t.generated_over_baseline().unwrap();
                ok &= ratio <= 5.0;
                info.push(format!("{}: {ratio:.2}x", run.name));
            }
            None => {
                ok = false;
                info.push(format!("{}: not measured (dataset unavailable)", run.name));
            }
        }
    }
    Verdict::new(9, ok, "timing: (generation + prediction) / baseline prediction <= 5x on every dataset")
        .with_info(info)
}

fn main() {
    let mut verdicts = vec![c1_propagation_oracle(), c2_synthetic_single(), c3_synthetic_multi()];

    let start = Instant::now();
    let single = run_real(&["divorce", "wine", "breast_cancer"]);
    let single_secs = start.elapsed().as_secs_f64();
    let multi = run_real(&["flags", "emotions"]);
    let stand_in = run_real(&["yeast"]);
    verdicts.push(c4_real_single(&single, single_secs));
    verdicts.push(c5_real_multi(&multi, &stand_in));
    verdicts.push(c6_metric_oracles());
    verdicts.push(c7_degeneration());
    verdicts.push(c8_determinism());
    let timed: Vec<&RealRun> = single.iter().chain(&multi).collect();
    let mut timing = c9_timing(&timed);
    if let Some(t) = stand_in[0].report.as_ref().and_then(|r| r.timings.as_ref()) {
        timing.info.push(format!("yeast (not counted): {:.2}x", t.generated_over_baseline().unwrap()));
    }
    verdicts.push(timing);

    for v in &verdicts {
        println!("criterion {} {}: {}", v.id, if v.pass { "PASS" } else { "FAIL" }, v.summary);
        for line in &v.info {
            println!("    INFO {line}");
        }
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
