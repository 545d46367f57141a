//! The `miscal` command line.
//!
//! Every artifact written by a subcommand records the argument list that
//! produced it (and the seed), so re-running that argument list from the same
//! working directory reproduces the artifact byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use miscal::calibration::{self, AttackSpec, CalibrationReport};
use miscal::checkpoint::{self, Manifest};
use miscal::data::{self, BlobSpec, DataFormat, Dataset};
use miscal::training::{self, Strategy, TrainConfig};
use miscal::{AttackConfig, Error, Method, Model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "MISCAL_THREADS";

pub const DEFAULT_EPS_SWEEP: [f32; 5] = [0.02, 0.04, 0.06, 0.08, 0.1];
pub const DEFAULT_LAMBDA_SWEEP: [f64; 5] = [1.0, 3.0, 5.0, 7.0, 10.0];

#[derive(Debug, Parser)]
#[command(
    name = "miscal",
    version,
    about = "Calibration attacks and calibration-aware training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model and write a checkpoint plus a per-epoch history CSV.
    Train(TrainArgs),
    /// Attack a checkpoint and write a calibration report (JSON) and a per-ε CSV.
    Attack(AttackArgs),
    /// Sweep λ × ε for the inverse adversarial attack.
    SweepLambda(SweepArgs),
    /// Cross-model transfer matrix of MCS values.
    Transfer(TransferArgs),
    /// Clean (unattacked) calibration report.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// `synth:K=..,n=..,dim=..,spread=..,seed=..`, an IDX images file or a
    /// CIFAR-10 binary batch. Defaults to the dataset recorded in the checkpoint.
    #[arg(long)]
    data: Option<String>,
    /// Labels file for IDX image data.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Treat `--data` as a CIFAR-10 binary batch.
    #[arg(long)]
    cifar: bool,
    /// Number of classes for file datasets.
    #[arg(long)]
    classes: Option<usize>,
    /// Fraction of the dataset assigned to the training split.
    #[arg(long)]
    split_ratio: Option<f64>,
    /// Seed of the train/test permutation.
    #[arg(long)]
    split_seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// pt | at | iat | at-iat
    #[arg(long, default_value = "pt")]
    strategy: String,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Hidden layer widths, comma separated. Empty for a linear model.
    #[arg(long, default_value = "16")]
    hidden: String,
    /// Inner-attack radius for at / iat / at-iat.
    #[arg(long, default_value_t = 0.3)]
    eps: f32,
    #[arg(long, default_value_t = miscal::attacks::DEFAULT_LAMBDA)]
    lambda: f64,
    /// Inner-attack iterations.
    #[arg(long, default_value_t = training::DEFAULT_INNER_ITERATIONS)]
    iters: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// History CSV path; defaults to `history.csv` next to the checkpoint.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalSplitArgs {
    /// Which split of the dataset to score: train | test | all.
    #[arg(long, default_value = "test")]
    split: String,
    /// Score at most this many examples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = calibration::DEFAULT_BINS)]
    bins: usize,
}

#[derive(Debug, Args)]
struct AttackArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalSplitArgs,
    /// iaa | pgd | un
    #[arg(long)]
    method: String,
    /// Radius or comma-separated list of radii.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long, default_value_t = miscal::attacks::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = 40)]
    iters: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Per-ε CSV path; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalSplitArgs,
    #[arg(long)]
    lambdas: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long, default_value_t = 40)]
    iters: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TransferArgs {
    /// Comma-separated checkpoints the attack is crafted on.
    #[arg(long)]
    threats: String,
    /// Comma-separated checkpoints the perturbed inputs are scored on.
    #[arg(long)]
    targets: String,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalSplitArgs,
    #[arg(long, default_value = "iaa")]
    method: String,
    #[arg(long)]
    eps: f32,
    #[arg(long, default_value_t = miscal::attacks::DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = 40)]
    iters: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    eval: EvalSplitArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Format { .. } => EXIT_IO,
            Error::InvalidConfig(_)
            | Error::DegenerateConfig(_)
            | Error::InvalidInput(_)
            | Error::EmptyInput(_) => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

type CliResult<T> = Result<T, CliError>;

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let invocation = Invocation(argv.into_iter().skip(1).collect());
    match dispatch(cli.command, &invocation) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // fails harmlessly if the pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

/// The argument list of this run, minus the program name.
#[derive(Debug, Clone)]
pub struct Invocation(pub Vec<String>);

impl Invocation {
    fn json(&self) -> String {
        serde_json::to_string(&self.0).expect("strings serialise")
    }

    /// Leading comment lines for CSV artifacts.
    fn csv_preamble(&self, seed: u64) -> String {
        format!("# invocation: {}\n# seed: {seed}\n", self.json())
    }
}

/// Reads back the invocation recorded in an artifact written by this CLI.
pub fn recorded_invocation(artifact: &[u8]) -> Option<Vec<String>> {
    if artifact.starts_with(b"magic=") {
        let (_, manifest) = checkpoint::decode(artifact).ok()?;
        return serde_json::from_str(manifest.get("invocation")?).ok();
    }
    let text = std::str::from_utf8(artifact).ok()?;
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# invocation: ")) {
        return serde_json::from_str(line).ok();
    }
    let value: serde_json::Value = serde_json::from_str(text).ok()?;
    serde_json::from_value(value.get("invocation")?.clone()).ok()
}

fn dispatch(command: Command, inv: &Invocation) -> CliResult<()> {
    match command {
        Command::Train(a) => cmd_train(a, inv),
        Command::Attack(a) => cmd_attack(a, inv),
        Command::SweepLambda(a) => cmd_sweep(a, inv),
        Command::Transfer(a) => cmd_transfer(a, inv),
        Command::Eval(a) => cmd_eval(a, inv),
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> CliResult<Vec<T>> {
    let items = text
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::usage(format!("--{flag}: cannot parse {text:?}")))?;
    if items.is_empty() {
        return Err(CliError::usage(format!(
            "--{flag} needs at least one value"
        )));
    }
    Ok(items)
}

const DEFAULT_SPLIT_RATIO: f64 = 0.75;

/// Where the data came from, in the form recorded in checkpoints.
#[derive(Debug, Clone, PartialEq)]
struct DataSource {
    data: String,
    labels: Option<String>,
    cifar: bool,
    classes: Option<usize>,
    split_ratio: f64,
    split_seed: u64,
}

impl DataSource {
    fn from_args(
        args: &DataArgs,
        inherited: Option<&Manifest>,
        default_seed: u64,
    ) -> CliResult<Self> {
        let from_manifest = |k: &str| inherited.and_then(|m| m.get(k)).map(str::to_string);
        let data = match (&args.data, from_manifest("data")) {
            (Some(d), _) => d.clone(),
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::usage("--data is required")),
        };
        let same = args.data.is_none();
        let parse_or = |k: &str| -> CliResult<Option<String>> {
            Ok(if same { from_manifest(k) } else { None })
        };
        let labels = match &args.labels {
            Some(p) => Some(p.display().to_string()),
            None => parse_or("labels")?,
        };
        let cifar = args.cifar || (same && from_manifest("format").as_deref() == Some("cifar"));
        let classes = match args.classes {
            Some(c) => Some(c),
            None => parse_or("classes_hint")?
                .map(|c| c.parse())
                .transpose()
                .map_err(|_| CliError::usage("bad recorded class count"))?,
        };
        let split_ratio = match args.split_ratio {
            Some(r) => r,
            None => from_manifest("split_ratio")
                .map(|r| r.parse())
                .transpose()
                .map_err(|_| CliError::usage("bad recorded split ratio"))?
                .unwrap_or(DEFAULT_SPLIT_RATIO),
        };
        let split_seed = match args.split_seed {
            Some(s) => s,
            None => from_manifest("split_seed")
                .map(|r| r.parse())
                .transpose()
                .map_err(|_| CliError::usage("bad recorded split seed"))?
                .unwrap_or(default_seed),
        };
        Ok(Self {
            data,
            labels,
            cifar,
            classes,
            split_ratio,
            split_seed,
        })
    }

    fn load(&self) -> CliResult<Dataset> {
        if self.data.starts_with("synth:") {
            let spec: BlobSpec = self.data.parse()?;
            return Ok(data::synth_blobs(&spec)?);
        }
        let classes = self.classes.unwrap_or(10);
        let format = if self.cifar {
            DataFormat::CifarBin
        } else {
            match &self.labels {
                Some(l) => DataFormat::Idx { labels: l.into() },
                None => {
                    return Err(CliError::usage(
                        "file datasets need --labels <idx labels> or --cifar",
                    ))
                }
            }
        };
        Ok(data::load_dataset(&self.data, &format, classes)?)
    }

    fn splits(&self) -> CliResult<(Dataset, Dataset)> {
        Ok(self.load()?.split(self.split_ratio, self.split_seed)?)
    }

    fn record(&self, manifest: &mut Manifest) -> CliResult<()> {
        manifest.set("data", self.data.clone())?;
        if let Some(l) = &self.labels {
            manifest.set("labels", l.clone())?;
        }
        if self.cifar {
            manifest.set("format", "cifar")?;
        }
        if let Some(c) = self.classes {
            manifest.set("classes_hint", c.to_string())?;
        }
        manifest.set("split_ratio", self.split_ratio.to_string())?;
        manifest.set("split_seed", self.split_seed.to_string())?;
        Ok(())
    }
}

fn pick_split(args: &EvalSplitArgs, source: &DataSource) -> CliResult<Dataset> {
    let (train, test) = source.splits()?;
    let chosen = match args.split.as_str() {
        "train" => train,
        "test" => test,
        "all" => source.load()?,
        other => {
            return Err(CliError::usage(format!(
                "--split must be train, test or all, not {other:?}"
            )))
        }
    };
    Ok(match args.samples {
        Some(n) => chosen.take(n),
        None => chosen,
    })
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn cmd_train(a: TrainArgs, inv: &Invocation) -> CliResult<()> {
    let strategy: Strategy = a.strategy.parse()?;
    let source = DataSource::from_args(&a.data, None, a.seed)?;
    let (train_set, _) = source.splits()?;
    let hidden: Vec<usize> = if a.hidden.trim().is_empty() {
        Vec::new()
    } else {
        parse_list("hidden", &a.hidden)?
    };
    let mut dims = vec![train_set.feature_dim()];
    dims.extend(hidden);
    dims.push(train_set.num_classes());
    let init = Model::init(&dims, a.seed)?;

    let mut cfg = TrainConfig::new(strategy, a.eta, a.epochs);
    cfg.batch_size = a.batch_size;
    cfg.seed = a.seed;
    cfg.inner_attack = AttackConfig::new(a.eps, a.iters)
        .with_lambda(a.lambda)
        .with_seed(a.seed);
    let (model, history) = training::train(&init, &train_set, &cfg)?;

    let mut manifest = Manifest::new(a.seed);
    manifest.set("strategy", strategy.name())?;
    source.record(&mut manifest)?;
    manifest.set("epochs", a.epochs.to_string())?;
    manifest.set("eta", a.eta.to_string())?;
    manifest.set("batch_size", a.batch_size.to_string())?;
    if strategy != Strategy::Plain {
        manifest.set("inner_eps", a.eps.to_string())?;
        manifest.set("inner_lambda", a.lambda.to_string())?;
        manifest.set("inner_iters", a.iters.to_string())?;
    }
    manifest.set("checksum", format!("{:016x}", history.checksum))?;
    manifest.set("invocation", inv.json())?;
    write(&a.out, checkpoint::encode(&model, &manifest))?;

    let history_path = a.history.unwrap_or_else(|| {
        a.out
            .parent()
            .map(|p| p.join("history.csv"))
            .unwrap_or_else(|| PathBuf::from("history.csv"))
    });
    write(&history_path, inv.csv_preamble(a.seed) + &history.to_csv())?;
    let last = history.epochs.last().expect("at least one epoch");
    eprintln!(
        "trained {} for {} epochs: loss {:.4}, acc {:.4} -> {}",
        strategy.name(),
        a.epochs,
        last.loss,
        last.accuracy,
        a.out.display()
    );
    Ok(())
}

fn load_model(path: &Path) -> CliResult<(Model, Manifest)> {
    Ok(checkpoint::load(path)?)
}

/// JSON schema of a calibration report.
#[derive(Debug, Serialize)]
struct ReportRecord<'a> {
    invocation: &'a [String],
    seed: u64,
    attack: AttackDescriptor,
    num_bins: usize,
    bins: Vec<[f64; 3]>,
    mcs: f64,
    ece: f64,
    acc: f64,
    conf: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    gt_conf: Option<f64>,
    n: usize,
}

#[derive(Debug, Clone, Serialize)]
struct AttackDescriptor {
    method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f32>,
}

impl AttackDescriptor {
    fn none() -> Self {
        Self {
            method: "none".into(),
            eps: None,
            lambda: None,
            iters: None,
            alpha: None,
        }
    }

    fn of(spec: &AttackSpec) -> Self {
        let c = &spec.config;
        Self {
            method: spec.method.name().into(),
            eps: Some(c.epsilon),
            lambda: (spec.method == Method::Iaa).then_some(c.lambda),
            iters: (spec.method != Method::Uniform).then_some(c.iterations),
            alpha: (spec.method != Method::Uniform).then_some(c.step()),
        }
    }
}

fn report_record<'a>(
    inv: &'a Invocation,
    seed: u64,
    attack: AttackDescriptor,
    r: &CalibrationReport,
) -> ReportRecord<'a> {
    ReportRecord {
        invocation: &inv.0,
        seed,
        attack,
        num_bins: r.num_bins,
        bins: r
            .bins
            .iter()
            .map(|b| [b.count as f64, b.mean_confidence, b.accuracy])
            .collect(),
        mcs: r.mcs,
        ece: r.ece,
        acc: r.overall_acc,
        conf: r.overall_conf,
        gt_conf: r.mean_ground_truth_conf,
        n: r.total,
    }
}

/// Report JSON for the first ε, with every ε under `sweep` when there are several.
#[derive(Debug, Serialize)]
struct AttackFile<'a> {
    #[serde(flatten)]
    report: ReportRecord<'a>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sweep: Vec<SweepEntry>,
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    eps: f32,
    acc: f64,
    conf: f64,
    mcs: f64,
    ece: f64,
    n: usize,
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serialises") + "\n"
}

fn cmd_attack(a: AttackArgs, inv: &Invocation) -> CliResult<()> {
    let method: Method = a.method.parse()?;
    let eps_list: Vec<f32> = match &a.eps {
        Some(text) => parse_list("eps", text)?,
        None => DEFAULT_EPS_SWEEP.to_vec(),
    };
    let (model, manifest) = load_model(&a.model)?;
    let source = DataSource::from_args(&a.data, Some(&manifest), manifest.seed)?;
    let set = pick_split(&a.eval, &source)?;

    let mut reports = Vec::with_capacity(eps_list.len());
    for &eps in &eps_list {
        let spec = AttackSpec {
            method,
            config: AttackConfig::new(eps, a.iters)
                .with_lambda(a.lambda)
                .with_seed(a.seed),
        };
        let report = calibration::evaluate(&model, &set, Some(&spec), a.eval.bins)?;
        reports.push((spec, report));
    }

    let sweep = if reports.len() > 1 {
        reports
            .iter()
            .map(|(s, r)| SweepEntry {
                eps: s.config.epsilon,
                acc: r.overall_acc,
                conf: r.overall_conf,
                mcs: r.mcs,
                ece: r.ece,
                n: r.total,
            })
            .collect()
    } else {
        Vec::new()
    };
    let (first_spec, first) = &reports[0];
    let file = AttackFile {
        report: report_record(inv, a.seed, AttackDescriptor::of(first_spec), first),
        sweep,
    };
    write(&a.out, to_json(&file))?;

    let mut csv = inv.csv_preamble(a.seed);
    csv.push_str("eps,acc,conf,mcs,ece\n");
    for (s, r) in &reports {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            s.config.epsilon, r.overall_acc, r.overall_conf, r.mcs, r.ece
        );
    }
    let csv_path = a.csv.unwrap_or_else(|| a.out.with_extension("csv"));
    write(&csv_path, csv)?;
    eprintln!(
        "{} eps={} on {} examples: acc {:.4} conf {:.4} mcs {:.4} ece {:.4}",
        method.name(),
        first_spec.config.epsilon,
        first.total,
        first.overall_acc,
        first.overall_conf,
        first.mcs,
        first.ece
    );
    Ok(())
}

fn cmd_sweep(a: SweepArgs, inv: &Invocation) -> CliResult<()> {
    let lambdas: Vec<f64> = match &a.lambdas {
        Some(t) => parse_list("lambdas", t)?,
        None => DEFAULT_LAMBDA_SWEEP.to_vec(),
    };
    let eps_list: Vec<f32> = match &a.eps {
        Some(t) => parse_list("eps", t)?,
        None => DEFAULT_EPS_SWEEP.to_vec(),
    };
    let (model, manifest) = load_model(&a.model)?;
    let source = DataSource::from_args(&a.data, Some(&manifest), manifest.seed)?;
    let set = pick_split(&a.eval, &source)?;

    let mut csv = inv.csv_preamble(a.seed);
    csv.push_str("lambda,eps,acc,conf,mcs\n");
    for &lambda in &lambdas {
        for &eps in &eps_list {
            let spec = AttackSpec {
                method: Method::Iaa,
                config: AttackConfig::new(eps, a.iters)
                    .with_lambda(lambda)
                    .with_seed(a.seed),
            };
            let r = calibration::evaluate(&model, &set, Some(&spec), a.eval.bins)?;
            let _ = writeln!(
                csv,
                "{lambda},{eps},{},{},{}",
                r.overall_acc, r.overall_conf, r.mcs
            );
        }
    }
    write(&a.out, csv)
}

fn model_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn cmd_transfer(a: TransferArgs, inv: &Invocation) -> CliResult<()> {
    let method: Method = a.method.parse()?;
    let threat_paths: Vec<PathBuf> = parse_list("threats", &a.threats)?;
    let target_paths: Vec<PathBuf> = parse_list("targets", &a.targets)?;
    let threats = threat_paths
        .iter()
        .map(|p| load_model(p))
        .collect::<CliResult<Vec<_>>>()?;
    let targets = target_paths
        .iter()
        .map(|p| load_model(p))
        .collect::<CliResult<Vec<_>>>()?;
    let source = DataSource::from_args(&a.data, Some(&targets[0].1), targets[0].1.seed)?;
    let set = pick_split(&a.eval, &source)?;
    let spec = AttackSpec {
        method,
        config: AttackConfig::new(a.eps, a.iters)
            .with_lambda(a.lambda)
            .with_seed(a.seed),
    };

    let mut csv = inv.csv_preamble(a.seed);
    csv.push_str("threat,target,mcs\n");
    for (tp, (threat, _)) in threat_paths.iter().zip(&threats) {
        for (gp, (target, _)) in target_paths.iter().zip(&targets) {
            let r = calibration::evaluate_transfer(threat, target, &set, Some(&spec), a.eval.bins)?;
            let _ = writeln!(csv, "{},{},{}", model_name(tp), model_name(gp), r.mcs);
        }
    }
    write(&a.out, csv)
}

fn cmd_eval(a: EvalArgs, inv: &Invocation) -> CliResult<()> {
    let (model, manifest) = load_model(&a.model)?;
    let source = DataSource::from_args(&a.data, Some(&manifest), manifest.seed)?;
    let set = pick_split(&a.eval, &source)?;
    let report = calibration::evaluate(&model, &set, None, a.eval.bins)?;
    write(
        &a.out,
        to_json(&report_record(
            inv,
            manifest.seed,
            AttackDescriptor::none(),
            &report,
        )),
    )?;
    eprintln!(
        "clean on {} examples: acc {:.4} conf {:.4} mcs {:.4} ece {:.4}",
        report.total, report.overall_acc, report.overall_conf, report.mcs, report.ece
    );
    Ok(())
}
