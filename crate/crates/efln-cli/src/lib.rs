//! Command-line front end: scenario selection, config-file loading with
//! flag overrides, and tidy CSV/JSON result emission.
//!
//! Precedence for every parameter: explicit flag, then config file, then
//! the `EFLN_SEED` environment variable (seed only, when no config file is
//! given), then the built-in default.

pub mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use efln::cost::CostSpec;
use efln::experiments::{
    run_case1, run_case2, run_identify, Algorithm, Case1Config, Case2Config, DataSource,
    ExperimentError, IdentifyConfig, SweepVariable, TrialProtocol,
};
use efln::filter::FilterError;
use efln::report;

pub use config::{CostCurvesConfig, RunConfig};

/// Environment variable consulted for the default base seed.
pub const SEED_ENV: &str = "EFLN_SEED";

pub const REFERENCE_TRIALS: usize = 50;

#[derive(Parser, Debug)]
#[command(
    name = "efln",
    version,
    about = "Robust nonlinear adaptive filtering experiments",
    after_help = "Exit codes: 0 success, 1 runtime or data error, 2 usage error.\n\
                  EFLN_SEED sets the default base seed when neither --seed nor --config does."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Steady-state error sweeps: theory against simulation over step size or SNR
    Case1(Case1Args),
    /// Algorithm comparison or lambda sweep under impulsive interference
    Case2(Case2Args),
    /// Fit adaptive models to a data record and score the identification
    Identify(IdentifyArgs),
    /// Emit cost and influence curves over an error grid
    Costcurves(CostCurvesArgs),
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// TOML config, or a previous output file whose embedded config is reused (scenario must match this subcommand)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file (default: scenario name plus format extension)
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct ProtocolArgs {
    /// Independent trials (reference protocol: 50)
    #[arg(long)]
    pub trials: Option<usize>,
    /// Iterations per trial
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Base seed; trial t draws its streams from seed base+t
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trial worker threads (0 = all cores; 1 = sequential, bit-exact)
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    /// Sweep the step size at fixed SNR
    Mu,
    /// Sweep the SNR at fixed step size
    Snr,
}

impl From<SweepArg> for SweepVariable {
    fn from(v: SweepArg) -> Self {
        match v {
            SweepArg::Mu => SweepVariable::StepSize,
            SweepArg::Snr => SweepVariable::Snr,
        }
    }
}

#[derive(Args, Debug)]
pub struct Case1Args {
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Sweep variable (default: mu)
    #[arg(long, value_enum)]
    pub sweep: Option<SweepArg>,
    /// Fixed step size for the snr sweep
    #[arg(long)]
    pub mu: Option<f64>,
    /// Fixed SNR in dB for the mu sweep
    #[arg(long)]
    pub snr: Option<f64>,
    /// Robustness parameter of the inverse-square-root cost
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Args, Debug)]
pub struct Case2Args {
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Comma-separated algorithms to compare
    /// (efln-isr, efln-lms, efln-mcc, efln-tanh, sovf-isr, tfln-isr)
    #[arg(long, value_delimiter = ',', value_name = "NAME")]
    pub algos: Option<Vec<String>>,
    /// Run EFLN-ISR once per lambda instead of the comparison
    #[arg(long, value_delimiter = ',', value_name = "LAMBDA")]
    pub lambda_sweep: Option<Vec<f64>>,
    /// Pure alpha-stable noise (drop the Gaussian component)
    #[arg(long)]
    pub stable_only: bool,
    /// Reference step size (sets both mu_w and mu_q)
    #[arg(long)]
    pub mu: Option<f64>,
    /// ISR lambda in comparison mode
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Run competitors at the reference steps instead of calibrating
    #[arg(long)]
    pub no_calibrate: bool,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Two-column CSV record (input, output) to fit
    #[arg(long, value_name = "FILE", conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Fit the built-in synthetic hysteresis record
    #[arg(long)]
    pub synthetic: bool,
    /// Length of the synthetic record
    #[arg(long)]
    pub samples: Option<usize>,
    /// Input taps
    #[arg(long)]
    pub taps: Option<usize>,
    /// Trigonometric expansion order
    #[arg(long)]
    pub order: Option<usize>,
    /// Step size (sets both mu_w and mu_q)
    #[arg(long)]
    pub mu: Option<f64>,
    /// Robustness parameter of the inverse-square-root cost
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated algorithms to fit
    #[arg(long, value_delimiter = ',', value_name = "NAME")]
    pub algos: Option<Vec<String>>,
}

#[derive(Args, Debug)]
pub struct CostCurvesArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Single lambda instead of the default {0.1, 1, 10, 100, 1000} grid
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Error grid half-width; the grid spans [-emax, emax]
    #[arg(long)]
    pub emax: Option<f64>,
    /// Number of grid points per lambda
    #[arg(long)]
    pub gridpoints: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    /// Invalid invocation or configuration: exit 2.
    Usage(String),
    /// Failure while running or writing: exit 1.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Experiment failures that trace back to parameter values are usage
/// errors; failures during the run itself are runtime errors.
fn map_experiment_error(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::UnknownAlgorithm(_)
        | ExperimentError::NoAlgorithms
        | ExperimentError::NoTrials
        | ExperimentError::InsufficientData { .. }
        | ExperimentError::Cost(_)
        | ExperimentError::Expansion(_) => CliError::Usage(e.to_string()),
        ExperimentError::Filter(
            ref f @ (FilterError::InvalidStepSize { .. }
            | FilterError::WeightLength { .. }
            | FilterError::NoFactorToAdapt(_)),
        ) => CliError::Usage(f.to_string()),
        other => CliError::Runtime(other.to_string()),
    }
}

fn map_report_error(e: report::ReportError) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses and dispatches; the process exit code follows the convention
/// 0 success, 1 runtime error, 2 usage error.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Case1(args) => cmd_case1(args),
        Command::Case2(args) => cmd_case2(args),
        Command::Identify(args) => cmd_identify(args),
        Command::Costcurves(args) => cmd_costcurves(args),
    }
}

/// Loads a run configuration from a TOML file, or recovers the embedded
/// one from a result file this tool wrote (CSV comment block or JSON
/// document), so any output can be re-fed to reproduce its run.
fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let bad = |e: &dyn std::fmt::Display| CliError::Usage(format!("config {}: {e}", path.display()));
    let trimmed = text.trim_start();
    if trimmed.starts_with('#') {
        report::read_csv_config(path).map_err(|e| bad(&e))
    } else if trimmed.starts_with('{') {
        let doc: report::Document<RunConfig, serde_json::Value> =
            report::read_json(path).map_err(|e| bad(&e))?;
        Ok(doc.config)
    } else {
        toml::from_str(&text).map_err(|e| bad(&e))
    }
}

fn scenario_mismatch(expected: &str, got: &RunConfig) -> CliError {
    CliError::Usage(format!(
        "config file is for scenario {:?} but this is the {expected} command",
        got.scenario_name()
    ))
}

/// The seed the environment supplies when neither a flag nor a config file
/// names one.
fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={text:?} is not a valid seed"))),
        Err(_) => Ok(None),
    }
}

fn apply_protocol(proto: &mut TrialProtocol, args: &ProtocolArgs) {
    if let Some(v) = args.trials {
        proto.n_trials = v;
    }
    if let Some(v) = args.iterations {
        proto.n_iterations = v;
    }
    if let Some(v) = args.seed {
        proto.base_seed = v;
    }
    if let Some(v) = args.jobs {
        proto.jobs = v;
    }
}

fn warn_reduced_trials(n_trials: usize) {
    if n_trials < REFERENCE_TRIALS {
        eprintln!("warning: running {n_trials} trials; the reference protocol is {REFERENCE_TRIALS}");
    }
}

fn out_path(args: &OutArgs, stem: &str) -> PathBuf {
    args.out.clone().unwrap_or_else(|| {
        let ext = match args.format {
            FormatArg::Csv => "csv",
            FormatArg::Json => "json",
        };
        PathBuf::from(format!("{stem}.{ext}"))
    })
}

fn parse_algos(names: &[String]) -> Result<Vec<Algorithm>, CliError> {
    names
        .iter()
        .map(|n| Algorithm::parse(n).map_err(map_experiment_error))
        .collect()
}

fn cmd_case1(args: Case1Args) -> Result<(), CliError> {
    let mut cfg = match &args.out.config {
        Some(path) => match load_config(path)? {
            RunConfig::Case1(c) => c,
            other => return Err(scenario_mismatch("case1", &other)),
        },
        None => {
            let mut c = Case1Config::default();
            if args.protocol.seed.is_none() {
                if let Some(seed) = env_seed()? {
                    c.protocol.base_seed = seed;
                }
            }
            c
        }
    };
    if let Some(s) = args.sweep {
        cfg.sweep = s.into();
    }
    if let Some(v) = args.mu {
        cfg.fixed_mu = v;
    }
    if let Some(v) = args.snr {
        cfg.fixed_snr_db = v;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    apply_protocol(&mut cfg.protocol, &args.protocol);
    warn_reduced_trials(cfg.protocol.n_trials);

    let points = run_case1(&cfg).map_err(map_experiment_error)?;

    let path = out_path(&args.out, "case1");
    let run_cfg = RunConfig::Case1(cfg.clone());
    match args.out.format {
        FormatArg::Csv => {
            let (columns, rows) = report::sweep_table(cfg.sweep, &points);
            report::write_csv(&path, &run_cfg, &columns, &rows).map_err(map_report_error)?;
        }
        FormatArg::Json => {
            report::write_json(&path, &run_cfg, &points).map_err(map_report_error)?;
        }
    }

    let x_name = match cfg.sweep {
        SweepVariable::StepSize => "mu",
        SweepVariable::Snr => "snr_db",
    };
    for p in &points {
        let sim = p
            .simulated_db()
            .map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
        println!(
            "{x_name}={} theory={:.3} dB sim={sim} dB diverged={}",
            p.x,
            p.theory_db(),
            p.diverged_trials
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_case2(args: Case2Args) -> Result<(), CliError> {
    let mut cfg = match &args.out.config {
        Some(path) => match load_config(path)? {
            RunConfig::Case2(c) => c,
            other => return Err(scenario_mismatch("case2", &other)),
        },
        None => {
            let mut c = Case2Config::default();
            if args.protocol.seed.is_none() {
                if let Some(seed) = env_seed()? {
                    c.protocol.base_seed = seed;
                }
            }
            c
        }
    };
    if let Some(names) = &args.algos {
        cfg.algorithms = parse_algos(names)?;
    }
    if let Some(lambdas) = &args.lambda_sweep {
        cfg.lambda_sweep = Some(lambdas.clone());
    }
    if args.stable_only {
        cfg.stable_only = true;
    }
    if let Some(v) = args.mu {
        cfg.mu_w = v;
        cfg.mu_q = v;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if args.no_calibrate {
        cfg.calibrate = false;
    }
    apply_protocol(&mut cfg.protocol, &args.protocol);
    warn_reduced_trials(cfg.protocol.n_trials);

    let curves = run_case2(&cfg).map_err(map_experiment_error)?;

    for c in &curves {
        if c.mu_w != cfg.mu_w || c.mu_q != cfg.mu_q {
            eprintln!(
                "calibrated: {} mu_w={} mu_q={} (reference {} at mu_w={})",
                c.label,
                c.mu_w,
                c.mu_q,
                Algorithm::EflnIsr,
                cfg.mu_w
            );
        }
    }

    let path = out_path(&args.out, "case2");
    let run_cfg = RunConfig::Case2(cfg.clone());
    match args.out.format {
        FormatArg::Csv => {
            let (columns, rows) = report::curves_table(&curves);
            report::write_csv(&path, &run_cfg, &columns, &rows).map_err(map_report_error)?;
        }
        FormatArg::Json => {
            report::write_json(&path, &run_cfg, &curves).map_err(map_report_error)?;
        }
    }

    for c in &curves {
        let tail = c
            .median_tail_emse()
            .map_or_else(|| "n/a".to_string(), |v| format!("{:.3}", 10.0 * v.log10()));
        let cross = c
            .iterations_to_db(-10.0, efln::experiments::CROSSING_SMOOTH)
            .map_or_else(|| "never".to_string(), |i| i.to_string());
        println!(
            "{} mu_w={} median tail EMSE={tail} dB, -10 dB at iteration {cross}, diverged {}",
            c.label, c.mu_w, c.diverged_trials
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_identify(args: IdentifyArgs) -> Result<(), CliError> {
    let mut cfg = match &args.out.config {
        Some(path) => match load_config(path)? {
            RunConfig::Identify(c) => c,
            other => return Err(scenario_mismatch("identify", &other)),
        },
        None => IdentifyConfig::default(),
    };
    if let Some(path) = &args.data {
        cfg.source = DataSource::Csv { path: path.clone() };
    } else if args.synthetic {
        cfg.source = DataSource::Synthetic {
            samples: match cfg.source {
                DataSource::Synthetic { samples } => samples,
                DataSource::Csv { .. } => 8000,
            },
        };
    }
    if let Some(n) = args.samples {
        match &mut cfg.source {
            DataSource::Synthetic { samples } => *samples = n,
            DataSource::Csv { .. } => {
                return Err(CliError::Usage(
                    "--samples applies only to the synthetic record".to_string(),
                ))
            }
        }
    }
    if let Some(v) = args.taps {
        cfg.taps = v;
    }
    if let Some(v) = args.order {
        cfg.order = v;
    }
    if let Some(v) = args.mu {
        cfg.mu_w = v;
        cfg.mu_q = v;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(names) = &args.algos {
        cfg.algorithms = parse_algos(names)?;
    }

    let outcome = run_identify(&cfg).map_err(map_experiment_error)?;

    let path = out_path(&args.out, "identify");
    let run_cfg = RunConfig::Identify(cfg.clone());
    match args.out.format {
        FormatArg::Csv => {
            let (columns, rows) = report::identify_trace_table(&outcome);
            let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
            report::write_csv(&path, &run_cfg, &column_refs, &rows).map_err(map_report_error)?;
        }
        FormatArg::Json => {
            report::write_json(&path, &run_cfg, &outcome).map_err(map_report_error)?;
        }
    }

    println!("samples: {}", outcome.samples);
    for r in &outcome.reports {
        println!(
            "{:10} rmse={:.6}  re={:.3}%  mae={:.6}",
            r.label, r.rmse, r.re_percent, r.mae
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

/// One emitted point of the cost/influence grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CostCurvePoint {
    pub lambda: f64,
    pub e: f64,
    pub cost: f64,
    pub influence: f64,
}

pub fn cost_curve_points(cfg: &CostCurvesConfig) -> Result<Vec<CostCurvePoint>, CliError> {
    if cfg.gridpoints < 2 {
        return Err(CliError::Usage(format!(
            "gridpoints must be at least 2, got {}",
            cfg.gridpoints
        )));
    }
    if !(cfg.emax.is_finite() && cfg.emax > 0.0) {
        return Err(CliError::Usage(format!(
            "emax must be positive and finite, got {}",
            cfg.emax
        )));
    }
    let mut points = Vec::with_capacity(cfg.lambdas.len() * cfg.gridpoints);
    for &lambda in &cfg.lambdas {
        let cost = CostSpec::isr(lambda).map_err(|e| CliError::Usage(e.to_string()))?;
        for j in 0..cfg.gridpoints {
            let e = -cfg.emax + 2.0 * cfg.emax * j as f64 / (cfg.gridpoints - 1) as f64;
            points.push(CostCurvePoint {
                lambda,
                e,
                cost: cost.value(e),
                influence: cost.influence(e),
            });
        }
    }
    Ok(points)
}

fn cmd_costcurves(args: CostCurvesArgs) -> Result<(), CliError> {
    let mut cfg = match &args.out.config {
        Some(path) => match load_config(path)? {
            RunConfig::CostCurves(c) => c,
            other => return Err(scenario_mismatch("costcurves", &other)),
        },
        None => CostCurvesConfig::default(),
    };
    if let Some(v) = args.lambda {
        cfg.lambdas = vec![v];
    }
    if let Some(v) = args.emax {
        cfg.emax = v;
    }
    if let Some(v) = args.gridpoints {
        cfg.gridpoints = v;
    }

    let points = cost_curve_points(&cfg)?;

    let path = out_path(&args.out, "costcurves");
    let run_cfg = RunConfig::CostCurves(cfg.clone());
    match args.out.format {
        FormatArg::Csv => {
            let rows: Vec<Vec<String>> = points
                .iter()
                .map(|p| {
                    vec![
                        p.lambda.to_string(),
                        p.e.to_string(),
                        p.cost.to_string(),
                        p.influence.to_string(),
                    ]
                })
                .collect();
            report::write_csv(
                &path,
                &run_cfg,
                &["lambda", "e", "cost", "influence"],
                &rows,
            )
            .map_err(map_report_error)?;
        }
        FormatArg::Json => {
            report::write_json(&path, &run_cfg, &points).map_err(map_report_error)?;
        }
    }
    println!(
        "wrote {} ({} rows: {} lambdas x {} gridpoints)",
        path.display(),
        points.len(),
        cfg.lambdas.len(),
        cfg.gridpoints
    );
    Ok(())
}
