//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | bad command-line usage |
//! | 3 | file not found or other I/O failure |
//! | 4 | config file schema violation |
//! | 5 | invalid sampler configuration |
//! | 6 | numerical failure at run time |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::Error;
use crate::harness::{
    self, EstimateMode, ExperimentConfig, MixSchedule, ScheduleKind, TableRun, TableSpec,
};
use crate::report;
use crate::samplers::{Algorithm, DEFAULT_A, DEFAULT_SIGMA};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_SAMPLER_CONFIG: i32 = 5;
pub const EXIT_RUNTIME: i32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Table,
}

/// The TOML config file accepted by `estimate` and `diagnose`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfigFile {
    pub alpha: f64,
    pub n: usize,
    pub levels: Vec<f64>,
    pub algorithm: Algorithm,
    pub samples: usize,
    pub reps: usize,
    pub seed: u64,
    pub mode: EstimateMode,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    /// `"constant"`, `"balanced"` or an explicit list `p_1..p_{n-1}`.
    #[serde(default)]
    pub mix_p: MixSchedule,
    #[serde(default)]
    pub anchor: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

fn default_a() -> f64 {
    DEFAULT_A
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn schema(field: &str, detail: impl std::fmt::Display) -> Self {
        Self::new(EXIT_SCHEMA, format!("config field `{field}`: {detail}"))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_SAMPLER_CONFIG,
            Error::Domain { .. } | Error::TooFew { .. } => EXIT_SCHEMA,
            _ => EXIT_RUNTIME,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::new(EXIT_IO, e.to_string())
    }
}

impl CliConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            // value errors carry a span but not the key; recover it from the line
            let key = e.span().and_then(|span| {
                let start = text[..span.start].rfind('\n').map_or(0, |i| i + 1);
                let line = &text[start..];
                line.split_once('=').map(|(k, _)| k.trim().to_string())
            });
            match key {
                Some(k) if !k.is_empty() && !k.contains('\n') => CliError::schema(&k, e.message()),
                _ => CliError::new(EXIT_SCHEMA, format!("config: {}", e.message())),
            }
        })?;
        cfg.check_schema()?;
        Ok(cfg)
    }

    fn check_schema(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(CliError::schema("alpha", format!("{} must be positive", self.alpha)));
        }
        if self.n == 0 {
            return Err(CliError::schema("n", "must be at least 1"));
        }
        if self.levels.is_empty() {
            return Err(CliError::schema("levels", "must not be empty"));
        }
        if let Some(p) = self.levels.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
            return Err(CliError::schema("levels", format!("{p} is outside (0, 1)")));
        }
        if self.samples == 0 {
            return Err(CliError::schema("samples", "must be at least 1"));
        }
        if self.reps == 0 {
            return Err(CliError::schema("reps", "must be at least 1"));
        }
        Ok(())
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            alpha: self.alpha,
            n: self.n,
            levels: self.levels.clone(),
            algorithm: self.algorithm,
            samples: self.samples,
            reps: self.reps,
            seed: self.seed,
            a: self.a,
            sigma: self.sigma,
            mix_p: self.mix_p.clone(),
            mode: self.mode,
            anchor: self.anchor,
        }
    }
}

#[derive(Debug, clap::Args)]
struct OutputArgs {
    /// Overrides the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run replicated VaR / ES / tail-probability estimates from a config file.
    Estimate {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rerun every cell of one of the four reference tables.
    ReproduceTable {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        table: u8,
        /// Samples per replication.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = harness::REFERENCE_SAMPLES)]
        reference_samples: usize,
        #[arg(long, default_value_t = harness::REFERENCE_REPS)]
        reference_reps: usize,
        /// Skip the reference column.
        #[arg(long)]
        no_reference: bool,
        /// Also write the CSV here.
        #[arg(long)]
        csv_out: Option<PathBuf>,
        /// Mixing schedule of the SM and DLW columns.
        #[arg(long, value_enum, default_value_t = ScheduleArg::Balanced)]
        schedule: ScheduleArg,
        /// Jump fraction `a` of the DLW column.
        #[arg(long, default_value_t = harness::TABLE_DLW_A)]
        dlw_a: f64,
        /// Final-step gate fraction `a` of the SM column.
        #[arg(long, default_value_t = DEFAULT_A)]
        sm_a: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Second-moment ratios and efficiency bounds over a grid of c.
    Diagnose {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated multiples of lambda.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        c_grid: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Constant,
    Balanced,
}

impl From<ScheduleArg> for MixSchedule {
    fn from(s: ScheduleArg) -> Self {
        MixSchedule::Kind(match s {
            ScheduleArg::Constant => ScheduleKind::Constant,
            ScheduleArg::Balanced => ScheduleKind::Balanced,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "tailsim", version, about = "Importance-sampling VaR and expected shortfall for heavy-tailed random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match workers {
        None => job(),
        Some(0) => Err(CliError::new(EXIT_USAGE, "--workers must be at least 1")),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| CliError::new(EXIT_RUNTIME, e.to_string()))?
            .install(job),
    }
}

fn emit(out: Option<&Path>, body: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, body)
            .map_err(|e| CliError::new(EXIT_IO, format!("{}: {e}", path.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(body)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn estimate(config: &Path, output: OutputArgs) -> Result<(), CliError> {
    let file = CliConfigFile::load(config)?;
    let mut cfg = file.experiment();
    if let Some(seed) = output.seed {
        cfg.seed = seed;
    }
    let report = with_workers(output.workers, || Ok(harness::run_experiment(&cfg)?))?;
    let format = output.format.or(file.format).unwrap_or(OutputFormat::Csv);
    let body = match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            report::write_experiment_csv(&report, &mut buf)?;
            buf
        }
        OutputFormat::Table => report::experiment_text(&report).into_bytes(),
    };
    let out = output.out.or(file.output);
    emit(out.as_deref(), &body)
}

#[allow(clippy::too_many_arguments)]
fn reproduce_table(
    table: u8,
    samples: usize,
    reps: usize,
    reference_samples: usize,
    reference_reps: usize,
    no_reference: bool,
    csv_out: Option<PathBuf>,
    mixing: (ScheduleArg, f64, f64),
    output: OutputArgs,
) -> Result<(), CliError> {
    let spec = TableSpec::by_id(table)
        .ok_or_else(|| CliError::new(EXIT_USAGE, format!("unknown table {table}")))?;
    if samples == 0 || reps == 0 || reference_samples == 0 || reference_reps == 0 {
        return Err(CliError::new(EXIT_USAGE, "sample and replication counts must be positive"));
    }
    let run = TableRun {
        samples,
        reps,
        seed: output.seed.unwrap_or(0),
        reference_samples,
        reference_reps,
        skip_reference: no_reference,
        schedule: mixing.0.into(),
        dlw_a: mixing.1,
        sm_a: mixing.2,
    };
    let report = with_workers(output.workers, || Ok(harness::reproduce_table(spec, &run)?))?;
    let mut csv = Vec::new();
    report::write_table_csv(&report, &mut csv)?;
    let body = match output.format.unwrap_or(OutputFormat::Table) {
        OutputFormat::Csv => csv.clone(),
        OutputFormat::Table => report::table_text(&report).into_bytes(),
    };
    emit(output.out.as_deref(), &body)?;
    if let Some(path) = csv_out {
        emit(Some(&path), &csv)?;
    }
    Ok(())
}

fn diagnose(config: &Path, c_grid: &[f64], output: OutputArgs) -> Result<(), CliError> {
    if let Some(c) = c_grid.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
        return Err(CliError::new(EXIT_USAGE, format!("c-grid value {c} must be positive")));
    }
    let file = CliConfigFile::load(config)?;
    let mut cfg = file.experiment();
    if let Some(seed) = output.seed {
        cfg.seed = seed;
    }
    let diag = with_workers(output.workers, || Ok(harness::diagnose(&cfg, c_grid)?))?;
    let body = match output.format.or(file.format).unwrap_or(OutputFormat::Table) {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            report::write_diagnostic_csv(&diag, cfg.alpha, &cfg.levels, &mut buf)?;
            buf
        }
        OutputFormat::Table => report::diagnostic_text(&diag, cfg.alpha, &cfg.levels).into_bytes(),
    };
    let out = output.out.or(file.output);
    emit(out.as_deref(), &body)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Estimate { config, output } => estimate(&config, output),
        Command::ReproduceTable {
            table,
            samples,
            reps,
            reference_samples,
            reference_reps,
            no_reference,
            csv_out,
            schedule,
            dlw_a,
            sm_a,
            output,
        } => reproduce_table(
            table,
            samples,
            reps,
            reference_samples,
            reference_reps,
            no_reference,
            csv_out,
            (schedule, dlw_a, sm_a),
            output,
        ),
        Command::Diagnose {
            config,
            c_grid,
            output,
        } => diagnose(&config, &c_grid, output),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("tailsim: {}", e.message);
            e.code
        }
    }
}
