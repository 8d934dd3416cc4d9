//! Command-line driver: training, cross-validation, noise sweeps, encoding
//! ablation, weight trajectories, bound verification and synthetic data.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use itboost::boosting::{train, train_timed, BoostConfig, Loss, TrustMode};
use itboost::complexity::Encoding;
use itboost::data::{load_csv, random_undersample, stratified_kfold, LabelColumn};
use itboost::eval::{
    cross_validate_runs, early_margins, noise_sweep, trajectory_summary, write_sweep_csv, CvOptions, MetricReport,
};
use itboost::noise::{inject, read_mask_rows, NoiseKind, NoiseSpec};
use itboost::synth::{two_gaussians, SynthSpec};
use itboost::theory::{
    ratio_bound_check, read_trace_complexities, separability, split_by_rows, trust_bound_check, BoundReport,
};
use itboost::Dataset;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "itboost", version, about = "Trust-weighted gradient boosting experiments")]
pub struct Cli {
    /// Seed for folds, noise and synthetic data.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// `key = value` boosting config; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel sections; 1 runs serially.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and write it (plus optional trace and noise mask).
    Train(TrainArgs),
    /// Stratified k-fold report: per-fold rows then mean and std.
    Evaluate(EvaluateArgs),
    /// Cross-validated metrics over noise rates, kinds and trust modes.
    NoiseSweep(SweepArgs),
    /// Binary against quantized history encoding, with timings.
    Ablate(AblateArgs),
    /// Mean weight per iteration for noisy, hard and easy rows.
    Trajectory(TrajectoryArgs),
    /// Trust bound, ratio bound and separability reports from a trace.
    VerifyBounds(VerifyArgs),
    /// Write a seeded two-Gaussian dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV with a header row. Without it the default synthetic task is used.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Label column name or 0-based index.
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Raw label value treated as the positive class.
    #[arg(long, default_value = "1")]
    pub positive: String,
}

#[derive(Debug, Args, Default)]
pub struct BoostArgs {
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    #[arg(long)]
    pub loss: Option<Loss>,
    #[arg(long)]
    pub encoding: Option<Encoding>,
    #[arg(long)]
    pub trust: Option<TrustMode>,
    /// Resumable LZ parsing instead of re-parsing each history.
    #[arg(long)]
    pub incremental_lz: bool,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, default_value = "symmetric")]
    pub noise_kind: NoiseKind,
    /// Fraction of training rows to corrupt; 0 disables noise.
    #[arg(long, default_value_t = 0.0)]
    pub noise_rate: f64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    /// Per-iteration trust CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Corrupted row ids, when noise is injected.
    #[arg(long)]
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Undersample {
    /// Rebalance the whole dataset before folding.
    Before,
    /// Rebalance each training split.
    After,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, value_enum)]
    pub undersample: Option<Undersample>,
    /// Fill the timing columns (not reproducible byte for byte).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[arg(long, value_delimiter = ',', default_value = "symmetric")]
    pub kind: Vec<NoiseKind>,
    #[arg(long, value_delimiter = ',', default_value = "0.0,0.1,0.2,0.3,0.4")]
    pub rates: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "disabled,enabled")]
    pub modes: Vec<TrustMode>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, value_delimiter = ',', default_value = "binary-sign,quantized")]
    pub encodings: Vec<Encoding>,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Blank the timing columns.
    #[arg(long)]
    pub no_timings: bool,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub boost: BoostArgs,
    #[arg(long, default_value = "symmetric")]
    pub noise_kind: NoiseKind,
    #[arg(long, default_value_t = 0.3)]
    pub noise_rate: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Trace CSV from `train --trace`.
    #[arg(long)]
    pub trace: PathBuf,
    /// Mask CSV from `train --mask`.
    #[arg(long)]
    pub mask: PathBuf,
    /// Iteration to check; defaults to the last one.
    #[arg(long)]
    pub iteration: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    #[arg(long, default_value_t = 0)]
    pub distractors: usize,
    #[arg(long, default_value_t = 4.0)]
    pub sep: f64,
    #[arg(long, default_value_t = 0.5)]
    pub positive_fraction: f64,
}

/// Failure of one subcommand, tagged with the operation that failed.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data { op: &'static str, source: itboost::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data { .. } => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Data { op, source } => write!(f, "{op}: {source}"),
        }
    }
}

impl std::error::Error for CliError {}

type CliResult<T> = std::result::Result<T, CliError>;

trait Context<T> {
    fn op(self, op: &'static str) -> CliResult<T>;
}

impl<T> Context<T> for itboost::Result<T> {
    fn op(self, op: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Data { op, source })
    }
}

fn usage<T>(op: &str, e: impl fmt::Display) -> CliResult<T> {
    Err(CliError::Usage(format!("{op}: {e}")))
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, inside a dedicated thread pool when `--threads`
/// is set.
pub fn execute(cli: &Cli) -> CliResult<()> {
    match cli.threads {
        Some(0) => usage("--threads", "must be at least 1"),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .or_else(|e| usage("--threads", e))?;
            pool.install(|| dispatch(cli))
        }
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Train(a) => cmd_train(cli, a),
        Command::Evaluate(a) => cmd_evaluate(cli, a),
        Command::NoiseSweep(a) => cmd_sweep(cli, a),
        Command::Ablate(a) => cmd_ablate(cli, a),
        Command::Trajectory(a) => cmd_trajectory(cli, a),
        Command::VerifyBounds(a) => cmd_verify(cli, a),
        Command::Synth(a) => cmd_synth(cli, a),
    }
}

fn output(cli: &Cli) -> CliResult<Box<dyn Write>> {
    match &cli.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::Data {
                op: "open output",
                source: io_error(path, e),
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_error(path: &Path, source: io::Error) -> itboost::Error {
    itboost::Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_out(cli: &Cli, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    let mut out = output(cli)?;
    let target = cli.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    f(&mut out).and_then(|()| out.flush()).map_err(|e| CliError::Data {
        op: "write output",
        source: io_error(&target, e),
    })
}

/// Config file (if any) with flag overrides applied, then validated.
fn boost_config(cli: &Cli, flags: &BoostArgs) -> CliResult<BoostConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Data {
                op: "read config",
                source: io_error(path, e),
            })?;
            BoostConfig::from_kv(&text).or_else(|e| usage("--config", e))?
        }
        None => BoostConfig::default(),
    };
    config.seed = cli.seed;
    if let Some(v) = flags.iterations {
        config.iterations = v;
    }
    if let Some(v) = flags.learning_rate {
        config.learning_rate = v;
    }
    if let Some(v) = flags.max_depth {
        config.max_depth = v;
    }
    if let Some(v) = flags.min_samples_leaf {
        config.min_samples_leaf = v;
    }
    if let Some(v) = flags.loss {
        config.loss = v;
    }
    if let Some(v) = flags.encoding {
        config.encoding = v;
    }
    if let Some(v) = flags.trust {
        config.trust = v;
    }
    if flags.incremental_lz {
        config.incremental_lz = true;
    }
    config.validate().or_else(|e| usage("boost config", e))?;
    Ok(config)
}

fn load_data(cli: &Cli, args: &DataArgs) -> CliResult<Dataset> {
    match &args.data {
        Some(path) => load_csv(path, &LabelColumn::parse(&args.label), &args.positive).op("load_csv"),
        None => {
            log::info!("no --data given; using the default synthetic task");
            two_gaussians(&SynthSpec {
                seed: cli.seed,
                ..SynthSpec::default()
            })
            .op("two_gaussians")
        }
    }
}

fn noise_spec(kind: NoiseKind, rate: f64, seed: u64) -> CliResult<Option<NoiseSpec>> {
    if rate == 0.0 {
        return Ok(None);
    }
    NoiseSpec::new(kind, rate, seed)
        .map(Some)
        .or_else(|e| usage("--noise-rate", e))
}

fn cmd_train(cli: &Cli, args: &TrainArgs) -> CliResult<()> {
    let config = boost_config(cli, &args.boost)?;
    let mut data = load_data(cli, &args.data)?;
    let mut mask = None;
    if let Some(spec) = noise_spec(args.noise.noise_kind, args.noise.noise_rate, cli.seed)? {
        let (noisy, m) = inject(&data, &spec).op("inject")?;
        data = noisy;
        mask = Some(m);
    } else if args.mask.is_some() {
        return usage("--mask", "needs --noise-rate > 0");
    }
    let (model, trace, timing) = train_timed(&data, &config).op("train")?;
    log::info!(
        "trained {} trees in {:.3}s ({:.3}s in trust weights)",
        model.trees.len(),
        timing.total.as_secs_f64(),
        timing.trust.as_secs_f64()
    );
    if let Some(path) = &args.trace {
        trace.save_csv(path).op("save trace")?;
    }
    if let (Some(path), Some(mask)) = (&args.mask, &mask) {
        mask.save_csv(path).op("save mask")?;
    }
    write_out(cli, |out| out.write_all(model.to_text().as_bytes()))
}

fn cmd_evaluate(cli: &Cli, args: &EvaluateArgs) -> CliResult<()> {
    let config = boost_config(cli, &args.boost)?;
    let mut data = load_data(cli, &args.data)?;
    if args.undersample == Some(Undersample::Before) {
        data = random_undersample(&data, cli.seed).op("random_undersample")?;
    }
    let plan = stratified_kfold(&data, args.k, cli.seed).op("stratified_kfold")?;
    let options = CvOptions {
        noise: noise_spec(args.noise.noise_kind, args.noise.noise_rate, cli.seed)?,
        undersample_seed: (args.undersample == Some(Undersample::After)).then_some(cli.seed),
    };
    let started = Instant::now();
    let runs = cross_validate_runs(&data, &config, &plan, &options).op("cross_validate")?;
    let report = MetricReport::from_folds(
        runs.into_iter().map(|r| r.result).collect(),
        started.elapsed().as_secs_f64(),
    );
    report_timing(&report);
    write_out(cli, |out| report.write_csv(out, args.timings))
}

fn report_timing(report: &MetricReport) {
    let trust: f64 = report.folds.iter().map(|f| f.trust_seconds).sum();
    let iterations: usize = report.folds.len();
    eprintln!(
        "wall time {:.3}s, trust computation {:.3}s over {iterations} folds",
        report.wall_time_seconds, trust
    );
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> CliResult<()> {
    let config = boost_config(cli, &args.boost)?;
    let data = load_data(cli, &args.data)?;
    let plan = stratified_kfold(&data, args.k, cli.seed).op("stratified_kfold")?;
    let mut rows = Vec::new();
    for &kind in &args.kind {
        let sweep = noise_sweep(&data, &config, &plan, kind, &args.rates, &args.modes, cli.seed);
        match sweep {
            Err(e @ itboost::Error::InvalidArgument(_)) => return usage("--rates", e),
            other => rows.extend(other.op("noise_sweep")?),
        }
    }
    write_out(cli, |out| write_sweep_csv(&rows, out, args.timings))
}

fn cmd_ablate(cli: &Cli, args: &AblateArgs) -> CliResult<()> {
    let base = boost_config(cli, &args.boost)?;
    if base.trust == TrustMode::Disabled {
        return usage("ablate", "encodings only matter with trust enabled");
    }
    let data = load_data(cli, &args.data)?;
    let plan = stratified_kfold(&data, args.k, cli.seed).op("stratified_kfold")?;
    let options = CvOptions {
        noise: noise_spec(args.noise.noise_kind, args.noise.noise_rate, cli.seed)?,
        ..CvOptions::default()
    };
    let mut lines =
        vec!["encoding,acc_mean,acc_std,f1_mean,auc_mean,log_loss_mean,train_seconds,trust_seconds".to_string()];
    for &encoding in &args.encodings {
        let config = BoostConfig { encoding, ..base };
        let started = Instant::now();
        let runs = cross_validate_runs(&data, &config, &plan, &options).op("cross_validate")?;
        let report = MetricReport::from_folds(
            runs.into_iter().map(|r| r.result).collect(),
            started.elapsed().as_secs_f64(),
        );
        let train: f64 = report.folds.iter().map(|f| f.train_seconds).sum();
        let trust: f64 = report.folds.iter().map(|f| f.trust_seconds).sum();
        eprintln!("{encoding}: training {train:.3}s, trust {trust:.3}s");
        let secs = |v: f64| {
            if args.no_timings {
                String::new()
            } else {
                format!("{v:.6}")
            }
        };
        lines.push(format!(
            "{encoding},{:?},{:?},{:?},{:?},{:?},{},{}",
            report.acc.mean,
            report.acc.std,
            report.f1.mean,
            report.auc.mean,
            report.log_loss.mean,
            secs(train),
            secs(trust)
        ));
    }
    write_out(cli, |out| lines.iter().try_for_each(|l| writeln!(out, "{l}")))
}

fn cmd_trajectory(cli: &Cli, args: &TrajectoryArgs) -> CliResult<()> {
    let config = boost_config(cli, &args.boost)?;
    let data = load_data(cli, &args.data)?;
    let spec = NoiseSpec::new(args.noise_kind, args.noise_rate, cli.seed).or_else(|e| usage("--noise-rate", e))?;
    let (noisy, mask) = inject(&data, &spec).op("inject")?;
    let (_, trace) = train(&noisy, &config).op("train")?;
    let margins = early_margins(&trace).op("early_margins")?;
    let summary = trajectory_summary(&trace, Some(&mask), &margins).op("trajectory_summary")?;
    write_out(cli, |out| summary.write_csv(out))
}

fn write_bound(out: &mut dyn Write, prefix: &str, r: &BoundReport) -> io::Result<()> {
    writeln!(out, "{prefix}.empirical_tau = {:?}", r.empirical_tau)?;
    writeln!(out, "{prefix}.mean_complexity = {:?}", r.mean_complexity)?;
    writeln!(out, "{prefix}.range = {:?}", r.range)?;
    writeln!(out, "{prefix}.jensen_lower = {:?}", r.jensen_lower)?;
    writeln!(out, "{prefix}.hoeffding_upper = {:?}", r.hoeffding_upper)?;
    if let Some(u) = r.subgaussian_upper {
        writeln!(out, "{prefix}.subgaussian_upper = {u:?}")?;
    }
    writeln!(out, "{prefix}.jensen_satisfied = {}", r.jensen_satisfied)?;
    writeln!(out, "{prefix}.hoeffding_satisfied = {}", r.hoeffding_satisfied)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> CliResult<()> {
    let (iteration, ids, values) = read_trace_complexities(&args.trace, args.iteration).op("read trace")?;
    let noisy_rows = read_mask_rows(&args.mask).op("read mask")?;
    let (clean, noisy) = split_by_rows(&ids, &values, &noisy_rows).op("split complexities")?;
    let sep = match separability(iteration, &clean, &noisy, args.epsilon, args.delta) {
        Err(e @ itboost::Error::InvalidArgument(_)) => return usage("--epsilon/--delta", e),
        other => other.op("separability")?,
    };
    let ratio = ratio_bound_check(&clean, &noisy);
    write_out(cli, |out| {
        write_bound(out, "clean", &trust_bound_check(&clean))?;
        write_bound(out, "noisy", &trust_bound_check(&noisy))?;
        writeln!(out, "ratio.empirical = {:?}", ratio.empirical_ratio)?;
        writeln!(out, "ratio.gap = {:?}", ratio.gap)?;
        writeln!(out, "ratio.correction = {:?}", ratio.correction)?;
        writeln!(out, "ratio.bound = {:?}", ratio.bound)?;
        writeln!(out, "ratio.bound_satisfied = {}", ratio.bound_satisfied)?;
        writeln!(out, "ratio.downweights_noisy = {}", ratio.downweights_noisy)?;
        sep.write_kv(out)
    })
}

fn cmd_synth(cli: &Cli, args: &SynthArgs) -> CliResult<()> {
    let spec = SynthSpec {
        n: args.n,
        d: args.d,
        distractors: args.distractors,
        sep: args.sep,
        positive_fraction: args.positive_fraction,
        seed: cli.seed,
    };
    let data = match two_gaussians(&spec) {
        Err(e @ itboost::Error::InvalidArgument(_)) => return usage("synth", e),
        other => other.op("two_gaussians")?,
    };
    write_out(cli, |out| data.write_csv_to(out))
}
