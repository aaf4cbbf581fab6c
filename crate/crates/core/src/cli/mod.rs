//! The `mminf` command line.
//!
//! Exit codes: 0 success, 1 a required check failed, 2 bad input
//! (unreadable or invalid model, bad flags), 3 numerical failure.

pub mod checks;
pub mod report;
pub mod schema;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use checks::{run_checks, Tolerances};
pub use report::{CheckVerdict, Comparison, ComparisonRow, RunReport};
pub use schema::ModelFile;

use crate::environment::{chain_statics, ChainStatics, EnvironmentModel};
use crate::error::{Error, Result};
use crate::moments::{MomentTable, Weighting, DEFAULT_ORDER};
use crate::sim::{
    estimate_factorial_moments, SimulationConfig, DEFAULT_REPLICATIONS, DEFAULT_SEED,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "mminf",
    version,
    about = "Moments of M/M/inf queues in a semi-Markov random environment"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic moments of the stationary number of customers.
    Moments(MomentsArgs),
    /// Simulation estimates of the factorial moments.
    Simulate(SimulateArgs),
    /// Structural checks on the analytic moments.
    Validate(ValidateArgs),
    /// Analytic moments against simulation under each state weighting.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Model file (TOML, or JSON for a `.json` extension).
    #[arg(long)]
    pub model: PathBuf,
    /// Write a JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightingChoice {
    Embedded,
    Occupancy,
    Both,
}

impl WeightingChoice {
    pub fn weightings(self) -> Vec<Weighting> {
        match self {
            Self::Embedded => vec![Weighting::Embedded],
            Self::Occupancy => vec![Weighting::Occupancy],
            Self::Both => Weighting::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = WeightingChoice::Both)]
    pub weighting: WeightingChoice,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPLICATIONS)]
    pub reps: usize,
    /// End time of each replication, warmup included [default: warmup + 2000 mean cycles].
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Discarded initial stretch [default: model-scaled].
    #[arg(long)]
    pub warmup: Option<f64>,
    /// Time between samples [default: one mean cycle].
    #[arg(long)]
    pub interval: Option<f64>,
    /// Worker threads; 0 uses all cores. Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl SimArgs {
    pub fn config(
        &self,
        model: &EnvironmentModel,
        statics: &ChainStatics,
        order: usize,
    ) -> SimulationConfig {
        let mut c = SimulationConfig::for_model(model, statics);
        let default_window = c.horizon - c.warmup;
        if let Some(w) = self.warmup {
            c.warmup = w;
        }
        c.horizon = self.horizon.unwrap_or(c.warmup + default_window);
        if let Some(dt) = self.interval {
            c.sampling_interval = dt;
        }
        c.replications = self.reps;
        c.seed = self.seed;
        c.max_order = order;
        c
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Highest factorial moment to estimate (at most 6).
    #[arg(long, default_value_t = 4)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[command(flatten)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = WeightingChoice::Both)]
    pub weighting: WeightingChoice,
    /// Largest acceptable |analytic - simulated| / SE.
    #[arg(long, default_value_t = 3.0)]
    pub z_max: f64,
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERIC
    }
}

fn load(path: &std::path::Path) -> Result<(ModelFile, EnvironmentModel, ChainStatics)> {
    let file = ModelFile::load(path)?;
    let model = file.to_model()?;
    let statics = chain_statics(&model)?;
    Ok((file, model, statics))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(f)
}

fn moments(args: &MomentsArgs) -> Result<RunReport> {
    let (file, model, statics) = load(&args.io.model)?;
    let table = MomentTable::compute(&model, &statics, args.order)?;
    let mut report = RunReport::new("moments", file, &statics);
    report.analytic = Some(report::AnalyticReport::new(
        &table,
        &args.weighting.weightings(),
    ));
    Ok(report.finish())
}

fn simulate(args: &SimulateArgs) -> Result<RunReport> {
    let (file, model, statics) = load(&args.io.model)?;
    let config = args.sim.config(&model, &statics, args.order);
    let estimate = with_threads(args.sim.threads, || {
        estimate_factorial_moments(&model, &config)
    })?;
    let mut report = RunReport::new("simulate", file, &statics);
    report
        .checks
        .push(CheckVerdict::new("half_split", estimate.half_split.z, 3.0).informational());
    report.simulation = Some(estimate);
    Ok(report.finish())
}

fn validate(args: &ValidateArgs) -> Result<RunReport> {
    let (file, model, statics) = load(&args.io.model)?;
    let table = MomentTable::compute(&model, &statics, args.order)?;
    let mut report = RunReport::new("validate", file, &statics);
    report.checks = run_checks(&model, &statics, &table, &args.tolerances)?;
    report.analytic = Some(report::AnalyticReport::new(&table, &Weighting::ALL));
    Ok(report.finish())
}

/// z-score of `analytic` against an estimate with standard error `se`.
pub fn z_score(analytic: f64, estimate: f64, se: f64) -> f64 {
    let gap = (analytic - estimate).abs();
    if gap == 0.0 {
        0.0
    } else if se > 0.0 {
        gap / se
    } else {
        f64::INFINITY
    }
}

fn compare(args: &CompareArgs) -> Result<RunReport> {
    let (file, model, statics) = load(&args.io.model)?;
    let config = args.sim.config(&model, &statics, args.order);
    config.check()?;
    let table = MomentTable::compute(&model, &statics, args.order)?;
    let estimate = with_threads(args.sim.threads, || {
        estimate_factorial_moments(&model, &config)
    })?;
    let weightings = args.weighting.weightings();
    let rows: Vec<ComparisonRow> = estimate
        .orders
        .iter()
        .map(|o| {
            let analytic: Vec<f64> = weightings
                .iter()
                .map(|w| table.weighted(*w).factorial[o.order])
                .collect();
            let z = analytic
                .iter()
                .map(|a| z_score(*a, o.estimate, o.std_error))
                .collect();
            ComparisonRow {
                order: o.order,
                estimate: o.estimate,
                std_error: o.std_error,
                analytic,
                z,
            }
        })
        .collect();
    let max_z: Vec<f64> = (0..weightings.len())
        .map(|i| rows.iter().map(|r| r.z[i]).fold(0.0, f64::max))
        .collect();
    let consistent = weightings
        .iter()
        .zip(&max_z)
        .filter(|(_, z)| **z <= args.z_max)
        .map(|(w, _)| *w)
        .collect();

    let mut report = RunReport::new("compare", file, &statics);
    for (w, z) in weightings.iter().zip(&max_z) {
        report.checks.push(
            CheckVerdict::new(format!("simulation[{}]", w.name()), *z, args.z_max).informational(),
        );
    }
    let best = max_z.iter().copied().fold(f64::INFINITY, f64::min);
    report
        .checks
        .push(CheckVerdict::new("simulation[any]", best, args.z_max));
    report
        .checks
        .push(CheckVerdict::new("half_split", estimate.half_split.z, args.z_max).informational());
    report.analytic = Some(report::AnalyticReport::new(&table, &weightings));
    report.comparison = Some(Comparison {
        weightings,
        z_max: args.z_max,
        rows,
        consistent,
    });
    report.simulation = Some(estimate);
    Ok(report.finish())
}

pub fn execute(command: &Command) -> Result<RunReport> {
    match command {
        Command::Moments(a) => moments(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
        Command::Compare(a) => compare(a),
    }
}

fn out_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Moments(a) => a.io.out.as_ref(),
        Command::Simulate(a) => a.io.out.as_ref(),
        Command::Validate(a) => a.io.out.as_ref(),
        Command::Compare(a) => a.io.out.as_ref(),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let _ = stdout.write_all(report.render().as_bytes());
    if let Some(path) = out_path(&cli.command) {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    if report.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_an_input_error() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(
            run(["mminf", "moments", "--bogus"], &mut o, &mut e),
            EXIT_INPUT
        );
        assert_eq!(run(["mminf", "--help"], &mut o, &mut e), EXIT_OK);
    }

    #[test]
    fn z_scores() {
        assert_eq!(z_score(1.0, 1.0, 0.0), 0.0);
        assert_eq!(z_score(1.0, 2.0, 0.5), 2.0);
        assert!(z_score(1.0, 2.0, 0.0).is_infinite());
    }
}
