//! Argument parsing and dispatch.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use simcap::adsim::DecisionRule;

use crate::commands::{self, AdSimParams, Outcome, StrategySpec, SweepSpec};
use crate::error::CliError;
use crate::input::read_input;
use crate::output::{write_with_manifest, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "simcap", version, about = "Two-qubit key distillation analysis and simulation")]
pub struct Cli {
    /// Tolerance for entanglement and boundary decisions.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// CSV output path; a manifest is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Decision {
    Bayes,
    Majority,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SweepMode {
    Simplex,
    Slice,
    Point,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement, filtering and security analysis of a state file.
    AnalyzeState { input: PathBuf },
    /// Monte-Carlo advantage distillation against a chosen measurement.
    AdSim {
        /// Bell weights, comma separated.
        #[arg(long)]
        lambdas: String,
        /// Block length or inclusive range `a..b`.
        #[arg(long)]
        n: String,
        /// xbasis, usd, trivial or family:<beta>.
        #[arg(long, default_value = "xbasis")]
        strategy: String,
        /// Accepted blocks per block length.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, value_enum, default_value_t = Decision::Bayes)]
        decision: Decision,
    },
    /// Random check that security and entanglement verdicts agree.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Random channels to check (defaults to min(samples, 1000)).
        #[arg(long)]
        channels: Option<u64>,
    },
    /// Entanglement-breaking and key analysis of a channel file.
    AnalyzeChannel { input: PathBuf },
    /// Verdicts and exponents over Bell-diagonal weights.
    Sweep {
        #[arg(long, value_enum, default_value_t = SweepMode::Simplex)]
        mode: SweepMode,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Fixed fourth weight for slice mode.
        #[arg(long, default_value_t = 0.1)]
        lambda4: f64,
        /// Weights for point mode.
        #[arg(long)]
        lambdas: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::AnalyzeState { .. } => "analyze-state",
            Command::AdSim { .. } => "ad-sim",
            Command::Verify { .. } => "verify",
            Command::AnalyzeChannel { .. } => "analyze-channel",
            Command::Sweep { .. } => "sweep",
        }
    }
}

struct Plan {
    params: BTreeMap<String, Value>,
    notes: Vec<String>,
    /// Print the CSV on stdout when no --out is given.
    csv_to_stdout: bool,
}

fn execute(cli: &Cli) -> Result<(Outcome, Plan), CliError> {
    let mut params = BTreeMap::new();
    params.insert("tol".into(), json!(cli.tol));
    let mut notes = Vec::new();
    let mut csv_to_stdout = false;
    let outcome = match &cli.command {
        Command::AnalyzeState { input } => {
            params.insert("input".into(), json!(input));
            commands::analyze_state(&read_input(input)?, cli.tol)?
        }
        Command::AnalyzeChannel { input } => {
            params.insert("input".into(), json!(input));
            commands::analyze_channel(&read_input(input)?, cli.tol)?
        }
        Command::AdSim {
            lambdas,
            n,
            strategy,
            trials,
            decision,
        } => {
            let p = AdSimParams {
                lambdas: commands::parse_lambdas(lambdas)?,
                ns: commands::parse_n_range(n)?,
                strategy: strategy.parse::<StrategySpec>()?,
                trials: *trials,
                seed: cli.seed,
                decision: match decision {
                    Decision::Bayes => DecisionRule::Bayes,
                    Decision::Majority => DecisionRule::Majority,
                },
            };
            params.insert("lambdas".into(), json!(p.lambdas));
            params.insert("n".into(), json!(n));
            params.insert("strategy".into(), json!(p.strategy.to_string()));
            params.insert("trials".into(), json!(p.trials));
            params.insert("decision".into(), json!(format!("{decision:?}").to_lowercase()));
            notes.push(
                "eps_en_emp is Eve's error over accepted blocks whose key bits agree (y = x); \
                 eps_en_all is over all accepted blocks"
                    .into(),
            );
            notes.push("eve_bound_exact is zero for odd N (no tie events)".into());
            csv_to_stdout = true;
            commands::ad_sim(&p)?
        }
        Command::Verify { samples, channels } => {
            let channels = channels.unwrap_or((*samples).min(1000));
            params.insert("samples".into(), json!(samples));
            params.insert("channels".into(), json!(channels));
            commands::verify(*samples, channels, cli.seed, cli.tol)?
        }
        Command::Sweep {
            mode,
            steps,
            lambda4,
            lambdas,
        } => {
            let spec = match mode {
                SweepMode::Simplex => SweepSpec::Simplex { steps: *steps },
                SweepMode::Slice => SweepSpec::Slice {
                    steps: *steps,
                    lambda4: *lambda4,
                },
                SweepMode::Point => SweepSpec::Point {
                    lambdas: commands::parse_lambdas(lambdas.as_deref().ok_or_else(|| {
                        CliError::Input("--lambdas is required in point mode".into())
                    })?)?,
                },
            };
            params.insert("spec".into(), json!(format!("{spec:?}")));
            csv_to_stdout = !matches!(spec, SweepSpec::Point { .. });
            commands::sweep(&spec, cli.tol)?
        }
    };
    Ok((
        outcome,
        Plan {
            params,
            notes,
            csv_to_stdout,
        },
    ))
}

fn run_cli(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let (outcome, plan) = execute(cli)?;
    let csv = outcome.table.to_csv();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match &cli.out {
        Some(path) => {
            let manifest = RunManifest {
                command: cli.command.name().into(),
                params: plan.params,
                seed: cli.seed,
                version: env!("CARGO_PKG_VERSION"),
                duration_secs: start.elapsed().as_secs_f64(),
                outputs: Vec::new(),
                notes: plan.notes,
            };
            write_with_manifest(path, &csv, manifest)?;
            let _ = lock.write_all(outcome.report.as_bytes());
        }
        None if plan.csv_to_stdout => {
            let _ = lock.write_all(csv.as_bytes());
        }
        None => {
            let _ = lock.write_all(outcome.report.as_bytes());
        }
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        eprintln!("error: input error: --tol must be a non-negative number");
        return 2;
    }
    let result = match cli.threads {
        Some(0) => Err(CliError::Input("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run_cli(&cli)),
            Err(e) => Err(CliError::Input(format!("--threads: {e}"))),
        },
        None => run_cli(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
