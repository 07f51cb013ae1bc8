//! Cross-validated experiments: the three-arm label-source study on
//! datasets with known fuzzy labels, baseline-vs-generated comparisons on
//! real data, parameter grids, timing and report output.
//!
//! Every fold standardizes with training statistics only and generates fuzzy
//! labels from the training fold alone. Neighbor lists are computed once per
//! fold (up to the largest K) and shared by all arms and grid points.
//! Randomness comes from seeds derived from the master seed and the fold
//! index, so results do not depend on execution order.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::classify_multi::{threshold_posteriors, MlknnVariant, MultiLabelModel};
use crate::classify_single::{majority_shares, weighted_vote, BaselineRule, SingleLabelModel, MajorityKnn};
use crate::dataset::{argmax, Dataset, FeatureMatrix, FoldSplit, FuzzyLabelMatrix, LabelMode, LogicalLabelMatrix, Standardizer};
use crate::error::{Error, Result};
use crate::flgen::{generate, FlGenConfig, FlGenOutput};
use crate::knn::NeighborTable;
use crate::metrics::{evaluate_multi, evaluate_single, mean_std, Evaluation, Metric};

pub const SCHEMA_VERSION: u32 = 1;

/// Source of the training labels a classifier sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arm {
    /// Plain KNN / ML-KNN on logical labels.
    Baseline,
    /// The fuzzy classifier fed logical labels.
    TrueLogical,
    /// The fuzzy classifier fed the dataset's known fuzzy labels.
    TrueFuzzy,
    /// The fuzzy classifier fed labels generated from the training fold.
    Generated,
}

impl Arm {
    pub fn name(self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::TrueLogical => "true-logical",
            Arm::TrueFuzzy => "true-fuzzy",
            Arm::Generated => "generated",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Anything that turns a training fold's logical labels into fuzzy labels.
pub trait SoftLabelGenerator {
    fn name(&self) -> String;

    /// Called once per training fold; `seed` is derived from the master seed
    /// and the fold index.
    fn generate(&self, features: &FeatureMatrix, logical: &LogicalLabelMatrix, seed: u64) -> Result<GeneratedLabels>;
}

#[derive(Debug, Clone)]
pub struct GeneratedLabels {
    pub fuzzy: FuzzyLabelMatrix,
    pub diagnostics: GenerationDiagnostics,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub kernel_sigma: Option<f64>,
}

/// Cluster-weighted label propagation.
#[derive(Debug, Clone, Default)]
pub struct FlGenLp(pub FlGenConfig);

impl SoftLabelGenerator for FlGenLp {
    fn name(&self) -> String {
        "fl-gen-lp".into()
    }

    fn generate(&self, features: &FeatureMatrix, logical: &LogicalLabelMatrix, seed: u64) -> Result<GeneratedLabels> {
        let mut config = self.0.clone();
        config.fcm.seed = seed.wrapping_add(self.0.fcm.seed);
        let out: FlGenOutput = generate(features, logical, &config)?;
        let diagnostics = GenerationDiagnostics {
            iterations: out.iterations,
            converged: out.converged,
            kernel_sigma: out.kernel_sigma,
        };
        let clipped = out.memberships.mapv(|v| v.clamp(0.0, 1.0));
        Ok(GeneratedLabels {
            fuzzy: FuzzyLabelMatrix::new(clipped)?,
            diagnostics,
        })
    }
}

/// Everything that defines a cross-validated run besides the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub mode: LabelMode,
    pub arms: Vec<Arm>,
    pub k_grid: Vec<usize>,
    /// Smoothing grid (multi-label only).
    pub smooth_grid: Vec<f64>,
    pub fold_count: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub threshold: f64,
    pub baseline: BaselineRule,
    pub variant: MlknnVariant,
    pub standardize: bool,
    pub generator: FlGenConfig,
    /// Re-run the best setting of each arm for wall-clock timings.
    #[serde(skip)]
    pub timing: bool,
}

impl ExperimentPlan {
    pub fn single_label(seed: u64) -> Self {
        ExperimentPlan {
            mode: LabelMode::Single,
            arms: vec![Arm::TrueLogical, Arm::TrueFuzzy, Arm::Generated],
            k_grid: crate::classify_single::K_GRID.to_vec(),
            smooth_grid: Vec::new(),
            fold_count: 5,
            seed,
            epsilon: crate::classify_single::DEFAULT_EPSILON,
            threshold: crate::classify_multi::DEFAULT_THRESHOLD,
            baseline: BaselineRule::Majority,
            variant: MlknnVariant::Fuzzy,
            standardize: true,
            generator: FlGenConfig::default(),
            timing: false,
        }
    }

    pub fn multi_label(seed: u64) -> Self {
        ExperimentPlan {
            mode: LabelMode::Multi,
            k_grid: crate::classify_multi::K_GRID.to_vec(),
            smooth_grid: crate::classify_multi::SMOOTH_GRID.to_vec(),
            ..Self::single_label(seed)
        }
    }

    pub fn for_mode(mode: LabelMode, seed: u64) -> Self {
        match mode {
            LabelMode::Single => Self::single_label(seed),
            LabelMode::Multi => Self::multi_label(seed),
        }
    }

    /// Baseline against generated labels.
    pub fn comparison(mut self) -> Self {
        self.arms = vec![Arm::Baseline, Arm::Generated];
        self
    }

    pub fn selection_metric(&self) -> Metric {
        match self.mode {
            LabelMode::Single => Metric::Accuracy,
            LabelMode::Multi => Metric::AveragePrecision,
        }
    }

    /// `(k, smoothing)` pairs in grid order.
    pub fn grid(&self) -> Vec<(usize, Option<f64>)> {
        match self.mode {
            LabelMode::Single => self.k_grid.iter().map(|&k| (k, None)).collect(),
            LabelMode::Multi => self
                .k_grid
                .iter()
                .flat_map(|&k| self.smooth_grid.iter().map(move |&s| (k, Some(s))))
                .collect(),
        }
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        let plan_err = |m: String| Err(Error::Plan(m));
        if dataset.mode() != self.mode {
            return plan_err(format!(
                "plan is {} but dataset {} is {}",
                self.mode,
                dataset.name(),
                dataset.mode()
            ));
        }
        if self.arms.is_empty() {
            return plan_err("no arms selected".into());
        }
        if self.arms.contains(&Arm::TrueFuzzy) && dataset.fuzzy().is_none() {
            return plan_err(format!("dataset {} has no true fuzzy labels", dataset.name()));
        }
        if self.k_grid.is_empty() || self.k_grid.contains(&0) {
            return plan_err("K grid must be non-empty with K >= 1".into());
        }
        if self.mode == LabelMode::Multi
            && (self.smooth_grid.is_empty() || self.smooth_grid.iter().any(|&s| !(s > 0.0 && s.is_finite())))
        {
            return plan_err("smoothing grid must be non-empty with values > 0".into());
        }
        if self.fold_count < 2 || self.fold_count > dataset.len() {
            return plan_err(format!(
                "fold count {} invalid for {} instances",
                self.fold_count,
                dataset.len()
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return plan_err(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return plan_err(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if let Err(e) = self.generator.propagation.validate() {
            return plan_err(e.to_string());
        }
        let k_max = *self.k_grid.iter().max().expect("non-empty");
        let smallest_train = dataset.len() - dataset.len().div_ceil(self.fold_count);
        let limit = if self.variant == MlknnVariant::Classic && self.mode == LabelMode::Multi {
            smallest_train.saturating_sub(1)
        } else {
            smallest_train
        };
        if k_max > limit {
            return plan_err(format!("K = {k_max} exceeds the smallest training fold ({limit})"));
        }
        Ok(())
    }
}

/// Seed for a `(master, fold, purpose)` work unit.
pub fn cell_seed(master: u64, fold: usize, purpose: u64) -> u64 {
    // splitmix64 finaliser over a simple combination
    let mut z = master
        .wrapping_add((fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(purpose.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SPLIT_PURPOSE: u64 = 1;
const GENERATION_PURPOSE: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub arm: Arm,
    pub fold: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<Evaluation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub arm: Arm,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    pub metrics: BTreeMap<Metric, MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub arm: Arm,
    pub best_k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_smoothing: Option<f64>,
    pub selected_by: Metric,
    pub metrics: BTreeMap<Metric, MeanStd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldDiagnostics {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generation: Option<GenerationDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub dataset: String,
    pub mode: LabelMode,
    pub instances: usize,
    pub features: usize,
    pub labels: usize,
    pub generator: String,
    pub plan: ExperimentPlan,
    pub folds: Vec<FoldDiagnostics>,
    pub cells: Vec<CellResult>,
    pub grid: Vec<GridPoint>,
    pub summaries: Vec<ArmSummary>,
    /// Wall-clock measurements; kept out of `report.json` so reports stay
    /// byte-identical between runs.
    #[serde(skip)]
    pub timings: Option<TimingReport>,
}

impl ExperimentReport {
    pub fn summary(&self, arm: Arm) -> Option<&ArmSummary> {
        self.summaries.iter().find(|s| s.arm == arm)
    }

    /// Mean of `metric` for `arm` at its selected parameters.
    pub fn best_mean(&self, arm: Arm, metric: Metric) -> Option<f64> {
        self.summary(arm)?.metrics.get(&metric).map(|m| m.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmTiming {
    pub arm: Arm,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    pub generation_secs: f64,
    pub training_secs: f64,
    pub prediction_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub dataset: String,
    /// Totals over all folds, warm-up run excluded.
    pub arms: Vec<ArmTiming>,
}

impl TimingReport {
    pub fn arm(&self, arm: Arm) -> Option<&ArmTiming> {
        self.arms.iter().find(|a| a.arm == arm)
    }

    /// (generation + prediction of `Generated`) over prediction time of the
    /// reference arm (`Baseline`, else `TrueLogical`).
    pub fn generated_over_baseline(&self) -> Option<f64> {
        let generated = self.arm(Arm::Generated)?;
        let base = self.arm(Arm::Baseline).or_else(|| self.arm(Arm::TrueLogical))?;
        let num = generated.generation_secs + generated.prediction_secs;
        Some(num / base.prediction_secs.max(1e-12))
    }
}

/// Training/test material of one fold after scaling and label generation.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub fold: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub train_features: FeatureMatrix,
    pub test_features: FeatureMatrix,
    pub train_logical: LogicalLabelMatrix,
    pub test_logical: LogicalLabelMatrix,
    pub train_true_fuzzy: Option<FuzzyLabelMatrix>,
    pub generated: Option<GeneratedLabels>,
}

impl PreparedFold {
    fn train_labels(&self, arm: Arm) -> Result<FuzzyLabelMatrix> {
        match arm {
            Arm::Baseline | Arm::TrueLogical => Ok(FuzzyLabelMatrix::from(&self.train_logical)),
            Arm::TrueFuzzy => self
                .train_true_fuzzy
                .clone()
                .ok_or_else(|| Error::Plan("true fuzzy labels missing".into())),
            Arm::Generated => self
                .generated
                .as_ref()
                .map(|g| g.fuzzy.clone())
                .ok_or_else(|| Error::Plan("generated labels missing".into())),
        }
    }
}

/// Splits, scales and (if the plan has a generated arm) generates labels for
/// one fold. Only training rows reach the generator.
pub fn prepare_fold(
    dataset: &Dataset,
    split: &FoldSplit,
    fold: usize,
    plan: &ExperimentPlan,
    generator: &dyn SoftLabelGenerator,
) -> Result<PreparedFold> {
    let train_indices = split.train_indices(fold);
    let test_indices = split.test_indices(fold);
    let raw_train = dataset.features().select_rows(&train_indices);
    let raw_test = dataset.features().select_rows(&test_indices);
    let (train_features, test_features) = if plan.standardize {
        let scaler = Standardizer::fit(&raw_train)?;
        (scaler.transform(&raw_train)?, scaler.transform(&raw_test)?)
    } else {
        (raw_train, raw_test)
    };
    let train_logical = dataset.logical().select_rows(&train_indices);
    let generated = if plan.arms.contains(&Arm::Generated) {
        Some(generator.generate(
            &train_features,
            &train_logical,
            cell_seed(plan.seed, fold, GENERATION_PURPOSE),
        )?)
    } else {
        None
    };
    Ok(PreparedFold {
        fold,
        train_true_fuzzy: dataset.fuzzy().map(|f| f.select_rows(&train_indices)),
        test_logical: dataset.logical().select_rows(&test_indices),
        train_logical,
        train_indices,
        test_indices,
        train_features,
        test_features,
        generated,
    })
}

/// The cross-validation split a plan uses for `dataset`.
pub fn fold_split(dataset: &Dataset, plan: &ExperimentPlan) -> Result<FoldSplit> {
    FoldSplit::for_dataset(dataset, plan.fold_count, cell_seed(plan.seed, 0, SPLIT_PURPOSE))
}

fn evaluate_single_cell(
    prepared: &PreparedFold,
    table: &NeighborTable,
    labels: &FuzzyLabelMatrix,
    arm: Arm,
    k: usize,
    plan: &ExperimentPlan,
) -> Result<Evaluation> {
    let n_test = prepared.test_features.nrows();
    let n_classes = labels.ncols();
    let majority = arm == Arm::Baseline && plan.baseline == BaselineRule::Majority;
    let classes = prepared.train_logical.class_indices();
    let mut scores = Array2::zeros((n_test, n_classes));
    for q in 0..n_test {
        let neighbors = table.get(q, k);
        let row = if majority {
            majority_shares(neighbors, &classes, n_classes)
        } else {
            weighted_vote(neighbors, labels.view(), plan.epsilon)
        };
        scores.row_mut(q).assign(&row);
    }
    let pred: Vec<usize> = scores.rows().into_iter().map(argmax).collect();
    evaluate_single(&pred, scores.view(), &prepared.test_logical.class_indices())
}

fn multi_model(
    prepared: &PreparedFold,
    labels: FuzzyLabelMatrix,
    k: usize,
    smoothing: f64,
    plan: &ExperimentPlan,
    loo: Option<&NeighborTable>,
) -> Result<MultiLabelModel> {
    MultiLabelModel::fit_with_loo(
        prepared.train_features.clone(),
        labels,
        k,
        smoothing,
        plan.threshold,
        plan.variant,
        loo,
    )
}

fn evaluate_multi_cell(
    prepared: &PreparedFold,
    table: &NeighborTable,
    model: &MultiLabelModel,
    plan: &ExperimentPlan,
) -> Result<Evaluation> {
    let n_test = prepared.test_features.nrows();
    let l = model.label_count();
    let mut scores = Array2::zeros((n_test, l));
    let mut pred = Array2::<u8>::zeros((n_test, l));
    for q in 0..n_test {
        let post = model.posteriors_from_neighbors(table.get(q, model.k_neighbors()));
        pred.row_mut(q).assign(&threshold_posteriors(post.view(), plan.threshold));
        scores.row_mut(q).assign(&post);
    }
    evaluate_multi(pred.view(), scores.view(), prepared.test_logical.view())
}

fn run_fold(prepared: &PreparedFold, plan: &ExperimentPlan) -> Result<Vec<CellResult>> {
    let k_max = *plan.k_grid.iter().max().expect("validated");
    let table = NeighborTable::build(&prepared.train_features, &prepared.test_features, k_max)?;
    let loo = if plan.mode == LabelMode::Multi && plan.variant == MlknnVariant::Classic {
        Some(NeighborTable::build_loo(&prepared.train_features, k_max)?)
    } else {
        None
    };
    let mut cells = Vec::new();
    for &arm in &plan.arms {
        let labels = prepared.train_labels(arm)?;
        for (k, smoothing) in plan.grid() {
            let outcome = match smoothing {
                None => evaluate_single_cell(prepared, &table, &labels, arm, k, plan),
                Some(s) => multi_model(prepared, labels.clone(), k, s, plan, loo.as_ref())
                    .and_then(|m| evaluate_multi_cell(prepared, &table, &m, plan)),
            };
            let (evaluation, failure) = match outcome {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e.to_string())),
            };
            cells.push(CellResult {
                arm,
                fold: prepared.fold,
                k,
                smoothing,
                evaluation,
                failure,
            });
        }
    }
    Ok(cells)
}

fn metrics_for(mode: LabelMode) -> &'static [Metric] {
    match mode {
        LabelMode::Single => &Metric::SINGLE,
        LabelMode::Multi => &Metric::MULTI,
    }
}

fn aggregate(cells: &[&CellResult], mode: LabelMode) -> BTreeMap<Metric, MeanStd> {
    let mut out = BTreeMap::new();
    for &metric in metrics_for(mode) {
        let values: Vec<f64> = cells
            .iter()
            .filter_map(|c| c.evaluation.as_ref()?.get(metric))
            .collect();
        if let Some((mean, std)) = mean_std(&values) {
            out.insert(metric, MeanStd { mean, std, n: values.len() });
        }
    }
    out
}

fn summarise(plan: &ExperimentPlan, cells: &[CellResult]) -> (Vec<GridPoint>, Vec<ArmSummary>) {
    let selected_by = plan.selection_metric();
    let mut grid = Vec::new();
    let mut summaries = Vec::new();
    for &arm in &plan.arms {
        let mut best: Option<(f64, usize)> = None;
        for (k, smoothing) in plan.grid() {
            let matching: Vec<&CellResult> = cells
                .iter()
                .filter(|c| c.arm == arm && c.k == k && c.smoothing == smoothing)
                .collect();
            let metrics = aggregate(&matching, plan.mode);
            if let Some(m) = metrics.get(&selected_by) {
                if best.is_none_or(|(b, _)| m.mean > b) {
                    best = Some((m.mean, grid.len()));
                }
            }
            grid.push(GridPoint {
                arm,
                k,
                smoothing,
                metrics,
            });
        }
        if let Some((_, idx)) = best {
            let point: &GridPoint = &grid[idx];
            summaries.push(ArmSummary {
                arm,
                best_k: point.k,
                best_smoothing: point.smoothing,
                selected_by,
                metrics: point.metrics.clone(),
            });
        }
    }
    (grid, summaries)
}

fn time_arm(
    prepared: &PreparedFold,
    arm: Arm,
    k: usize,
    smoothing: Option<f64>,
    plan: &ExperimentPlan,
    generator: &dyn SoftLabelGenerator,
) -> Result<(f64, f64, f64)> {
    let start = Instant::now();
    let labels = if arm == Arm::Generated {
        let seed = cell_seed(plan.seed, prepared.fold, GENERATION_PURPOSE);
        generator.generate(&prepared.train_features, &prepared.train_logical, seed)?.fuzzy
    } else {
        prepared.train_labels(arm)?
    };
    let generation = start.elapsed().as_secs_f64();
    let queries = prepared.test_features.view();

    match (plan.mode, smoothing) {
        (LabelMode::Single, _) => {
            let start = Instant::now();
            if arm == Arm::Baseline && plan.baseline == BaselineRule::Majority {
                let model = MajorityKnn::new(prepared.train_features.clone(), &prepared.train_logical, k)?;
                let training = start.elapsed().as_secs_f64();
                let start = Instant::now();
                for q in queries.rows() {
                    std::hint::black_box(model.predict_class(q)?);
                }
                Ok((generation, training, start.elapsed().as_secs_f64()))
            } else {
                let model = SingleLabelModel::new(prepared.train_features.clone(), labels, k, plan.epsilon)?;
                let training = start.elapsed().as_secs_f64();
                let start = Instant::now();
                for q in queries.rows() {
                    std::hint::black_box(model.predict_class(q)?);
                }
                Ok((generation, training, start.elapsed().as_secs_f64()))
            }
        }
        (LabelMode::Multi, s) => {
            let start = Instant::now();
            let model = MultiLabelModel::fit(
                prepared.train_features.clone(),
                labels,
                k,
                s.unwrap_or(crate::classify_multi::DEFAULT_SMOOTHING),
                plan.threshold,
                plan.variant,
            )?;
            let training = start.elapsed().as_secs_f64();
            let start = Instant::now();
            for q in queries.rows() {
                std::hint::black_box(model.predict_logical(q)?);
            }
            Ok((generation, training, start.elapsed().as_secs_f64()))
        }
    }
}

fn timing_pass(
    dataset: &Dataset,
    prepared: &[PreparedFold],
    summaries: &[ArmSummary],
    plan: &ExperimentPlan,
    generator: &dyn SoftLabelGenerator,
) -> Result<TimingReport> {
    let mut arms = Vec::new();
    for summary in summaries {
        let mut totals = (0.0, 0.0, 0.0);
        for fold in prepared {
            // warm-up, discarded
            time_arm(fold, summary.arm, summary.best_k, summary.best_smoothing, plan, generator)?;
            let (g, t, p) = time_arm(fold, summary.arm, summary.best_k, summary.best_smoothing, plan, generator)?;
            totals.0 += g;
            totals.1 += t;
            totals.2 += p;
        }
        arms.push(ArmTiming {
            arm: summary.arm,
            k: summary.best_k,
            smoothing: summary.best_smoothing,
            generation_secs: if summary.arm == Arm::Generated { totals.0 } else { 0.0 },
            training_secs: totals.1,
            prediction_secs: totals.2,
        });
    }
    Ok(TimingReport {
        dataset: dataset.name().to_string(),
        arms,
    })
}

/// Runs `plan` with a custom label generator.
pub fn run_plan_with(
    dataset: &Dataset,
    plan: &ExperimentPlan,
    generator: &dyn SoftLabelGenerator,
) -> Result<ExperimentReport> {
    plan.validate(dataset)?;
    let split = fold_split(dataset, plan)?;
    let mut prepared = Vec::with_capacity(plan.fold_count);
    let mut cells = Vec::new();
    let mut folds = Vec::new();
    for fold in 0..plan.fold_count {
        let p = prepare_fold(dataset, &split, fold, plan, generator)?;
        cells.extend(run_fold(&p, plan)?);
        folds.push(FoldDiagnostics {
            fold,
            train_size: p.train_indices.len(),
            test_size: p.test_indices.len(),
            generation: p.generated.as_ref().map(|g| g.diagnostics.clone()),
        });
        prepared.push(p);
    }
    let (grid, summaries) = summarise(plan, &cells);
    let timings = if plan.timing {
        Some(timing_pass(dataset, &prepared, &summaries, plan, generator)?)
    } else {
        None
    };
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        dataset: dataset.name().to_string(),
        mode: dataset.mode(),
        instances: dataset.len(),
        features: dataset.features().ncols(),
        labels: dataset.label_count(),
        generator: generator.name(),
        plan: plan.clone(),
        folds,
        cells,
        grid,
        summaries,
        timings,
    })
}

pub fn run_plan(dataset: &Dataset, plan: &ExperimentPlan) -> Result<ExperimentReport> {
    run_plan_with(dataset, plan, &FlGenLp(plan.generator.clone()))
}

/// True logical vs true fuzzy vs generated fuzzy labels.
pub fn run_three_arm(dataset: &Dataset, plan: &ExperimentPlan) -> Result<ExperimentReport> {
    let mut plan = plan.clone();
    plan.arms = vec![Arm::TrueLogical, Arm::TrueFuzzy, Arm::Generated];
    run_plan(dataset, &plan)
}

/// Baseline vs generated fuzzy labels over the parameter grid.
pub fn run_comparison(dataset: &Dataset, plan: &ExperimentPlan) -> Result<ExperimentReport> {
    run_plan(dataset, &plan.clone().comparison())
}

pub const REPORT_JSON: &str = "report.json";
pub const CELLS_CSV: &str = "cells.csv";
pub const GRID_CSV: &str = "grid_long.csv";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const TIMINGS_JSON: &str = "timings.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn write_csv_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Validation(format!("{other:?}")),
    })?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// One row per cell with a column per metric.
pub fn write_cells_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    let metrics = metrics_for(report.mode);
    let mut header: Vec<String> = ["arm", "fold", "k", "smoothing"].iter().map(|s| s.to_string()).collect();
    header.extend(metrics.iter().map(|m| m.name().to_string()));
    header.push("failure".into());
    let rows: Vec<Vec<String>> = report
        .cells
        .iter()
        .map(|c| {
            let mut row = vec![
                c.arm.name().to_string(),
                c.fold.to_string(),
                c.k.to_string(),
                fmt_opt(c.smoothing),
            ];
            row.extend(
                metrics
                    .iter()
                    .map(|&m| fmt_opt(c.evaluation.as_ref().and_then(|e| e.get(m)))),
            );
            row.push(c.failure.clone().unwrap_or_default());
            row
        })
        .collect();
    write_csv_rows(path, &header, &rows)
}

/// Long format: one row per (arm, k, smoothing, metric) with mean and std.
pub fn write_grid_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    let header: Vec<String> = ["arm", "k", "smoothing", "metric", "mean", "std", "n"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for g in &report.grid {
        for (m, v) in &g.metrics {
            rows.push(vec![
                g.arm.name().to_string(),
                g.k.to_string(),
                fmt_opt(g.smoothing),
                m.name().to_string(),
                format!("{}", v.mean),
                format!("{}", v.std),
                v.n.to_string(),
            ]);
        }
    }
    write_csv_rows(path, &header, &rows)
}

/// Per-arm results at the selected parameters, long format.
pub fn write_summary_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    let header: Vec<String> = ["arm", "best_k", "best_smoothing", "metric", "mean", "std"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for s in &report.summaries {
        for (m, v) in &s.metrics {
            rows.push(vec![
                s.arm.name().to_string(),
                s.best_k.to_string(),
                fmt_opt(s.best_smoothing),
                m.name().to_string(),
                format!("{}", v.mean),
                format!("{}", v.std),
            ]);
        }
    }
    write_csv_rows(path, &header, &rows)
}

pub fn report_to_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes the requested formats into `dir` and returns the files written.
/// Timings, when present, always go to a separate `timings.json`.
pub fn emit_report(report: &ExperimentReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            ReportFormat::Json => {
                let path = dir.join(REPORT_JSON);
                fs::write(&path, report_to_json(report)? + "\n").map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
            ReportFormat::Csv => {
                let cells = dir.join(CELLS_CSV);
                write_cells_csv(report, &cells)?;
                let grid = dir.join(GRID_CSV);
                write_grid_csv(report, &grid)?;
                let summary = dir.join(SUMMARY_CSV);
                write_summary_csv(report, &summary)?;
                written.extend([cells, grid, summary]);
            }
        }
    }
    if let Some(t) = &report.timings {
        let path = dir.join(TIMINGS_JSON);
        fs::write(&path, serde_json::to_string_pretty(t)? + "\n").map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Plain-text table of the per-arm summaries.
pub fn format_summary(report: &ExperimentReport) -> String {
    let metrics = metrics_for(report.mode);
    let mut out = format!(
        "{} ({}, N={}, D={}, L={})\n",
        report.dataset, report.mode, report.instances, report.features, report.labels
    );
    out.push_str(&format!("{:<14}{:>4}{:>7}", "arm", "K", "s"));
    for m in metrics {
        out.push_str(&format!("{:>20}", m.name()));
    }
    out.push('\n');
    for s in &report.summaries {
        out.push_str(&format!(
            "{:<14}{:>4}{:>7}",
            s.arm.name(),
            s.best_k,
            s.best_smoothing.map(|v| format!("{v}")).unwrap_or_else(|| "-".into())
        ));
        for m in metrics {
            let cell = s
                .metrics
                .get(m)
                .map(|v| format!("{:.4} ({:.4})", v.mean, v.std))
                .unwrap_or_else(|| "n/a".into());
            out.push_str(&format!("{cell:>20}"));
        }
        out.push('\n');
    }
    out
}
