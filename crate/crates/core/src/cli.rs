//! Command implementations behind the `smoothcdf` binary.
//!
//! Experiments take JSON configs, one-shot estimates take flags. Every
//! command produces a [`RunManifest`]; it goes to `manifest.json` in
//! `--out-dir` when one is given and to stderr otherwise.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage or config error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::asymptotics::{c_opt, c_star, m_opt_mise, m_opt_mse, mise_constants, pointwise_coeffs};
use crate::estimators::{EstimatorSpec, Sample};
use crate::models::ModelSpec;
use crate::simulation::{normality_experiment, parameter_sweep, ExperimentConfig};
use crate::theory_checks::{run_suite, SuiteLevel};

pub const WORKERS_ENV: &str = "SMOOTHCDF_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "smoothcdf", version, about = "Smooth CDF estimation on [0, ∞)")]
pub struct Cli {
    /// Worker threads; `SMOOTHCDF_WORKERS` takes precedence.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write outputs and the manifest into this directory instead of stdout/stderr.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an estimator to a sample file and print `x,F_hat` rows.
    Estimate {
        /// One non-negative number per line; `#` starts a comment.
        #[arg(long)]
        sample: PathBuf,
        /// Estimator spec as JSON, e.g. `{"kind":"szasz","m":50}`, or a path to one.
        #[arg(long)]
        estimator: String,
        /// Evaluation points, comma separated or repeated.
        #[arg(long = "x", value_delimiter = ',', required = true, allow_negative_numbers = true)]
        points: Vec<f64>,
        /// Model spec, needed only by standardized Hermite without `sigma`.
        #[arg(long)]
        model: Option<String>,
    },
    /// Monte Carlo MISE over a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sampling distribution of an estimate at one point.
    Normality {
        #[arg(long)]
        config: PathBuf,
    },
    /// Asymptotic coefficients and optimal orders for a model.
    Asymptotics {
        /// Model spec as JSON or a path to one.
        #[arg(long)]
        model: String,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        n: f64,
        /// Exponent of the MISE weight `e^{-ax} f(x)`.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
    /// Numeric checks of the Poisson-weight lemmas and exact moments.
    TheoryCheck {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// Config of the `normality` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalityConfig {
    pub dist: ModelSpec,
    pub estimator: EstimatorSpec,
    pub x: f64,
    pub n: usize,
    #[serde(rename = "M", alias = "repetitions")]
    pub repetitions: usize,
    pub master_seed: u64,
}

/// Provenance record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the canonical config JSON (sorted keys, no whitespace).
    pub config_digest: String,
    pub master_seed: Option<u64>,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub started_at: f64,
    pub finished_at: f64,
    pub outputs: Vec<PathBuf>,
}

/// Digest of a config: serialize, re-read as a sorted JSON value, hash the compact form.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let value = serde_json::to_value(config).expect("config serializes");
    let canonical = serde_json::to_string(&value).expect("value serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable input or invalid config; exit 2.
    Usage(String),
    /// The command ran but a check failed; exit 1.
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::CheckFailed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::CheckFailed(m) => f.write_str(m),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parse a sample file body. Errors name the 1-based line.
pub fn parse_sample_text(text: &str) -> Result<Sample, CliError> {
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 =
            body.parse().map_err(|_| usage(format!("line {}: cannot parse {body:?} as a number", i + 1)))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(usage(format!("line {}: expected a finite non-negative value, got {body}", i + 1)));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(usage("sample file contains no observations"));
    }
    Ok(Sample::new(values)?)
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Inline JSON, or the contents of the file it names.
fn json_arg<T: for<'de> Deserialize<'de>>(arg: &str, what: &str) -> Result<T, CliError> {
    let text = if arg.trim_start().starts_with('{') { arg.to_owned() } else { read_file(Path::new(arg))? };
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid {what}: {e}")))
}

fn json_file<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| usage(format!("invalid {what} {}: {e}", path.display())))
}

/// Where outputs go.
struct Sink {
    out_dir: Option<PathBuf>,
    written: Vec<PathBuf>,
}

impl Sink {
    fn new(out_dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(dir) = &out_dir {
            fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        }
        Ok(Self { out_dir, written: Vec::new() })
    }

    /// Primary output: a file, or stdout.
    fn data(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.emit(name, body, false)
    }

    /// Secondary output: a file, or stderr.
    fn side(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.emit(name, body, true)
    }

    fn emit(&mut self, name: &str, body: &str, side: bool) -> Result<(), CliError> {
        match &self.out_dir {
            Some(dir) => {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                self.written.push(path);
            }
            None if side => eprint!("{body}"),
            None => print!("{body}"),
        }
        Ok(())
    }
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn workers(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{WORKERS_ENV}: expected a count, got {v:?}"))),
        _ => Ok(flag),
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers(cli.workers)? {
        if w == 0 {
            return Err(usage("worker count must be at least 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| usage(e.to_string()))?;
    let mut sink = Sink::new(cli.out_dir)?;
    let started_at = unix_now();
    let (name, digest, seed) = pool.install(|| dispatch(cli.command, &mut sink))?;
    let manifest = RunManifest {
        command: name.to_owned(),
        config_digest: digest,
        master_seed: seed,
        version: env!("CARGO_PKG_VERSION").to_owned(),
        started_at,
        finished_at: unix_now(),
        outputs: sink.written.clone(),
    };
    sink.side("manifest.json", &pretty(&manifest))?;
    Ok(())
}

type Dispatched = (&'static str, String, Option<u64>);

fn dispatch(command: Command, sink: &mut Sink) -> Result<Dispatched, CliError> {
    match command {
        Command::Estimate { sample, estimator, points, model } => {
            let text = read_file(&sample)?;
            let sample = parse_sample_text(&text).map_err(|e| usage(format!("{}: {e}", sample.display())))?;
            let spec: EstimatorSpec = json_arg(&estimator, "estimator spec")?;
            let model: Option<ModelSpec> = model.map(|m| json_arg(&m, "model spec")).transpose()?;
            let truth = model.as_ref().map(ModelSpec::build).transpose()?;
            let fit = spec.fit(&sample, truth.as_ref())?;
            let mut csv = String::from("x,F_hat\n");
            for &x in &points {
                writeln!(csv, "{x},{}", fit.evaluate(x)?).unwrap();
            }
            sink.data("estimate.csv", &csv)?;
            let config = json!({ "sample": sample.values(), "estimator": spec, "x": points, "model": model });
            Ok(("estimate", config_digest(&config), None))
        }
        Command::Sweep { config } => {
            let config: ExperimentConfig = json_file(&config, "sweep config")?;
            config.validate()?;
            let result = parameter_sweep(&config)?;
            let mut csv = String::from("param,mise,se\n");
            for row in &result.rows {
                let se = row.se.map(|s| s.to_string()).unwrap_or_default();
                writeln!(csv, "{},{},{se}", row.param, row.mise).unwrap();
            }
            sink.data("sweep.csv", &csv)?;
            let summary = json!({
                "argmin_param": result.argmin_param,
                "argmin_mise": result.argmin_mise,
                "se": result.argmin_se,
            });
            sink.side("summary.json", &pretty(&summary))?;
            Ok(("sweep", config_digest(&config), Some(config.master_seed)))
        }
        Command::Normality { config } => {
            let config: NormalityConfig = json_file(&config, "normality config")?;
            let dist = config.dist.build()?;
            let result = normality_experiment(
                &dist,
                &config.estimator,
                config.x,
                config.n,
                config.repetitions,
                config.master_seed,
            )?;
            let mut csv = String::from("value\n");
            for v in &result.values {
                writeln!(csv, "{v}").unwrap();
            }
            sink.data("normality.csv", &csv)?;
            let summary = json!({
                "ks_distance": result.ks_distance,
                "reference_mean": result.reference_mean,
                "reference_sd": result.reference_sd,
            });
            sink.side("summary.json", &pretty(&summary))?;
            Ok(("normality", config_digest(&config), Some(config.master_seed)))
        }
        Command::Asymptotics { model, x, n, a } => {
            let spec: ModelSpec = json_arg(&model, "model spec")?;
            let report = asymptotics_report(&spec, x, n, a)?;
            sink.data("asymptotics.json", &pretty(&report))?;
            let config = json!({ "model": spec, "x": x, "n": n, "a": a });
            Ok(("asymptotics", config_digest(&config), None))
        }
        Command::TheoryCheck { level } => {
            let level = match level {
                Level::Fast => SuiteLevel::Fast,
                Level::Full => SuiteLevel::Full,
            };
            let report = run_suite(level)?;
            sink.data("theory_check.json", &pretty(&report))?;
            if !report.all_passed {
                let failed: Vec<&str> =
                    report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                return Err(CliError::CheckFailed(format!("failed checks: {}", failed.join(", "))));
            }
            Ok(("theory-check", config_digest(&json!({ "level": level })), None))
        }
    }
}

/// The `asymptotics` report. Optimal orders that do not exist (zero bias
/// coefficient, vanishing `C3`) are reported as `null`.
pub fn asymptotics_report(spec: &ModelSpec, x: f64, n: f64, a: f64) -> Result<Value, CliError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(usage(format!("x must be positive, got {x}")));
    }
    if !(n > 0.0 && n.is_finite()) {
        return Err(usage(format!("n must be positive, got {n}")));
    }
    let dist = spec.build()?;
    let coeffs = pointwise_coeffs(&dist, x)?;
    let consts = mise_constants(&dist, a)?;
    Ok(json!({
        "x": x,
        "n": n,
        "a": a,
        "sigma2": coeffs.sigma2,
        "bS": coeffs.b_s,
        "VS": coeffs.v_s,
        "m_opt_mse": m_opt_mse(&coeffs, n).ok().map(|o| o.m_opt),
        "C1": consts.c1,
        "C2": consts.c2,
        "C3": consts.c3,
        "m_opt_mise": m_opt_mise(&consts, n).ok().map(|o| o.m_opt),
        "c_star": c_star(&consts).ok(),
        "c_opt": c_opt(&consts).ok(),
    }))
}
