use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fuzzylabel::classify_multi::{MlknnVariant, DEFAULT_THRESHOLD, K_GRID as MULTI_K_GRID, SMOOTH_GRID};
use fuzzylabel::classify_single::{BaselineRule, DEFAULT_EPSILON, K_GRID as SINGLE_K_GRID};
use fuzzylabel::dataset::{fuzzy_path, load_dataset, save_csv, save_fuzzy_csv, standardize, LabelMode};
use fuzzylabel::error::{Error, Result};
use fuzzylabel::fcm::FcmConfig;
use fuzzylabel::flgen::{generate, FlGenConfig, PropagationConfig};
use fuzzylabel::graph::{Bandwidth, GraphConfig, Normalization};
use fuzzylabel::harness::{
    emit_report, format_summary, load_report, run_comparison, run_three_arm, ExperimentPlan, ReportFormat,
};
use fuzzylabel::synthdata::{gen_multi_label, gen_single_label, SynthConfig};
use fuzzylabel::Dataset;

#[derive(Parser)]
#[command(name = "fuzzylabel", version, about = "Fuzzy label generation and fuzzy-label KNN experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an artificial dataset with true fuzzy labels.
    Synth(SynthArgs),
    /// Generate fuzzy labels for every row of a dataset.
    GenLabels(GenLabelsArgs),
    /// Three-arm single-label experiment (true logical / true fuzzy / generated).
    RunSingle(RunArgs),
    /// Three-arm multi-label experiment.
    RunMulti(RunArgs),
    /// Baseline vs generated fuzzy labels on a dataset.
    Compare(CompareArgs),
    /// Print a saved report and optionally re-emit it as CSV.
    Report(ReportArgs),
    /// Convert a MULAN-style ARFF file to CSV plus descriptor.
    ConvertArff(ConvertArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Single,
    Multi,
}

impl From<ModeArg> for LabelMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Single => LabelMode::Single,
            ModeArg::Multi => LabelMode::Multi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Symmetric,
    RowStochastic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    dims: Option<usize>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    alpha_offset: Option<f64>,
}

#[derive(Args, Clone)]
struct GenerationArgs {
    /// Propagation weight α in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Leave memberships unclamped (gen-labels output only; classifiers
    /// always see values clamped to [0, 1]).
    #[arg(long)]
    no_clip: bool,
    /// FCM cluster count (default: number of labels).
    #[arg(long)]
    fcm_k: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    fcm_m: f64,
    #[arg(long, default_value_t = 1e-5)]
    fcm_tol: f64,
    #[arg(long, default_value_t = 300)]
    fcm_max_iter: usize,
    #[arg(long, default_value_t = 0)]
    fcm_seed: u64,
    /// Gaussian kernel width: "median" or a positive number.
    #[arg(long, default_value = "median")]
    kernel_sigma: String,
    /// Keep each vertex's k strongest edges: a number or "full".
    #[arg(long, default_value = "full")]
    graph_knn: String,
    #[arg(long, value_enum, default_value = "symmetric")]
    normalization: NormArg,
    /// Skip averaging the cluster-weighted matrix with its transpose.
    #[arg(long)]
    asymmetric: bool,
}

impl GenerationArgs {
    fn config(&self) -> Result<FlGenConfig> {
        let bandwidth = match self.kernel_sigma.as_str() {
            "median" => Bandwidth::Median,
            s => Bandwidth::Fixed(s.parse().map_err(|_| {
                Error::InvalidParameter(format!("--kernel-sigma expects \"median\" or a number, got {s:?}"))
            })?),
        };
        let knn = match self.graph_knn.as_str() {
            "full" => None,
            s => Some(s.parse().map_err(|_| {
                Error::InvalidParameter(format!("--graph-knn expects \"full\" or an integer, got {s:?}"))
            })?),
        };
        Ok(FlGenConfig {
            fcm: FcmConfig {
                k: self.fcm_k,
                fuzzifier: self.fcm_m,
                tol: self.fcm_tol,
                max_iter: self.fcm_max_iter,
                seed: self.fcm_seed,
            },
            graph: GraphConfig {
                bandwidth,
                knn,
                symmetrize: !self.asymmetric,
                normalization: match self.normalization {
                    NormArg::Symmetric => Normalization::Symmetric,
                    NormArg::RowStochastic => Normalization::RowStochastic,
                },
            },
            propagation: PropagationConfig {
                alpha: self.alpha,
                tol: self.tol,
                max_iter: self.max_iter,
                clip: !self.no_clip,
            },
        })
    }
}

#[derive(Args)]
struct GenLabelsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to `<input stem>.generated.csv` next to the input.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_standardize: bool,
    #[command(flatten)]
    generation: GenerationArgs,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// Comma-separated K grid (default depends on the mode).
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "majority")]
    baseline: BaselineArg,
    /// Comma-separated smoothing grid (multi-label).
    #[arg(long, value_delimiter = ',')]
    smooth: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Literal indicator directions and posterior denominator.
    #[arg(long, conflicts_with = "classic_mlknn")]
    as_printed: bool,
    /// Histogram-conditioned ML-KNN likelihoods.
    #[arg(long)]
    classic_mlknn: bool,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_standardize: bool,
    /// Also measure wall-clock time at the selected parameters.
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json,csv")]
    format: Vec<FormatArg>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    generation: GenerationArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineArg {
    Majority,
    Soft,
}

impl ExperimentArgs {
    fn plan(&self, mode: LabelMode) -> Result<ExperimentPlan> {
        let mut plan = ExperimentPlan::for_mode(mode, self.seed);
        plan.k_grid = if self.k.is_empty() {
            match mode {
                LabelMode::Single => SINGLE_K_GRID.to_vec(),
                LabelMode::Multi => MULTI_K_GRID.to_vec(),
            }
        } else {
            self.k.clone()
        };
        if mode == LabelMode::Multi {
            plan.smooth_grid = if self.smooth.is_empty() {
                SMOOTH_GRID.to_vec()
            } else {
                self.smooth.clone()
            };
        }
        plan.epsilon = self.epsilon;
        plan.threshold = self.threshold;
        plan.baseline = match self.baseline {
            BaselineArg::Majority => BaselineRule::Majority,
            BaselineArg::Soft => BaselineRule::Soft,
        };
        plan.variant = if self.as_printed {
            MlknnVariant::AsPrinted
        } else if self.classic_mlknn {
            MlknnVariant::Classic
        } else {
            MlknnVariant::Fuzzy
        };
        plan.fold_count = self.folds;
        plan.standardize = !self.no_standardize;
        plan.timing = self.timing;
        plan.generator = self.generation.config()?;
        Ok(plan)
    }

    fn formats(&self) -> Vec<ReportFormat> {
        self.format
            .iter()
            .map(|f| match f {
                FormatArg::Json => ReportFormat::Json,
                FormatArg::Csv => ReportFormat::Csv,
            })
            .collect()
    }
}

#[derive(Args)]
struct RunArgs {
    /// Dataset with a `.fuzzy.csv` companion; an artificial dataset seeded
    /// with `--seed` is generated when omitted.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[command(flatten)]
    experiment: ExperimentArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// A report.json file or the directory containing one.
    #[arg(long = "in")]
    input: PathBuf,
    /// Write CSV tables into this directory.
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Number of trailing label attributes.
    #[arg(long)]
    label_count: usize,
}

fn synth(args: &SynthArgs) -> Result<()> {
    let mode: LabelMode = args.mode.into();
    let mut cfg = match mode {
        LabelMode::Single => SynthConfig::single_label_default(args.seed),
        LabelMode::Multi => SynthConfig::multi_label_default(args.seed),
    };
    if let Some(v) = args.n {
        cfg.n_total = v;
    }
    if let Some(v) = args.clusters {
        cfg.k_clusters = v;
    }
    if let Some(v) = args.dims {
        cfg.dims = v;
    }
    if let Some(v) = args.phi {
        cfg.phi = v;
    }
    if let Some(v) = args.rho {
        cfg.rho = v;
    }
    if let Some(v) = args.noise_sigma {
        cfg.noise_sigma = v;
    }
    if let Some(v) = args.alpha_offset {
        cfg.alpha_offset = v;
    }
    let ds = match mode {
        LabelMode::Single => gen_single_label(&cfg)?,
        LabelMode::Multi => gen_multi_label(&cfg)?,
    };
    save_csv(&ds, &args.out)?;
    eprintln!(
        "wrote {} ({} rows, {} features, {} labels) and {}",
        args.out.display(),
        ds.len(),
        ds.features().ncols(),
        ds.label_count(),
        fuzzy_path(&args.out).display()
    );
    Ok(())
}

fn gen_labels(args: &GenLabelsArgs) -> Result<()> {
    let ds = load_dataset(&args.input)?;
    let features = if args.no_standardize {
        ds.features().clone()
    } else {
        standardize(ds.features())?.0
    };
    let out = generate(&features, ds.logical(), &args.generation.config()?)?;
    if !out.converged {
        eprintln!(
            "warning: propagation stopped after {} iterations without reaching tol (last change {:.3e})",
            out.iterations, out.last_change
        );
    }
    let path = args.out.clone().unwrap_or_else(|| args.input.with_extension("generated.csv"));
    save_fuzzy_csv(out.memberships.view(), ds.label_names(), &path)?;
    eprintln!(
        "wrote {} ({} iterations, kernel sigma {})",
        path.display(),
        out.iterations,
        out.kernel_sigma.map(|s| format!("{s:.6}")).unwrap_or_else(|| "-".into())
    );
    Ok(())
}

fn run_experiment(ds: &Dataset, args: &ExperimentArgs, three_arm: bool) -> Result<()> {
    let plan = args.plan(ds.mode())?;
    let report = if three_arm {
        run_three_arm(ds, &plan)?
    } else {
        run_comparison(ds, &plan)?
    };
    let written = emit_report(&report, &args.out, &args.formats())?;
    print!("{}", format_summary(&report));
    if let Some(t) = &report.timings {
        if let Some(ratio) = t.generated_over_baseline() {
            println!("generation + prediction time / baseline prediction time: {ratio:.2}");
        }
    }
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(args: &RunArgs, mode: LabelMode) -> Result<()> {
    let ds = match &args.input {
        Some(p) => load_dataset(p)?,
        None => match mode {
            LabelMode::Single => gen_single_label(&SynthConfig::single_label_default(args.experiment.seed))?,
            LabelMode::Multi => gen_multi_label(&SynthConfig::multi_label_default(args.experiment.seed))?,
        },
    };
    if ds.mode() != mode {
        return Err(Error::Plan(format!("{} is a {} dataset", ds.name(), ds.mode())));
    }
    run_experiment(&ds, &args.experiment, true)
}

fn report(args: &ReportArgs) -> Result<()> {
    let path = if args.input.is_dir() {
        args.input.join(fuzzylabel::harness::REPORT_JSON)
    } else {
        args.input.clone()
    };
    let report = load_report(&path)?;
    print!("{}", format_summary(&report));
    if let Some(dir) = &args.csv_out {
        for p in emit_report(&report, dir, &[ReportFormat::Csv])? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::GenLabels(a) => gen_labels(a),
        Command::RunSingle(a) => run(a, LabelMode::Single),
        Command::RunMulti(a) => run(a, LabelMode::Multi),
        Command::Compare(a) => run_experiment(&load_dataset(&a.input)?, &a.experiment, false),
        Command::Report(a) => report(a),
        Command::ConvertArff(a) => {
            let rows = fuzzylabel::arff::convert_arff(&a.input, &a.out, a.label_count)?;
            eprintln!("wrote {} ({rows} rows)", a.out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
