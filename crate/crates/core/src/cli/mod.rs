//! Command line front end: configuration, the verification suites, and
//! artifact output.

pub mod config;
pub mod output;
pub mod suites;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
pub use config::RunConfig;
pub use suites::{Check, SuiteOutcome};

#[derive(Debug, Parser)]
#[command(name = "boltzgain", version, about = "Verification suites and solver runs for the Boltzmann gain operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML configuration file; defaults apply when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides `estimate.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `output.directory`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Collision kinematics, R-map identities, involution and Jacobians.
    SelftestGeometry,
    /// Equilibria, point-mass frequency, positivity and monotonicity.
    SelftestOperators,
    /// Exponent admissibility, minimal r and the delta families.
    Exponents,
    /// Empirical constants of the weighted gain and loss estimates.
    Estimate,
    /// Decay and norm preservation of free transport.
    Transport,
    /// Gain-only and sandwich solves with conservation and moment reports.
    Solve,
    /// Every suite in turn.
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::SelftestGeometry => "selftest-geometry",
            Command::SelftestOperators => "selftest-operators",
            Command::Exponents => "exponents",
            Command::Estimate => "estimate",
            Command::Transport => "transport",
            Command::Solve => "solve",
            Command::All => "all",
        }
    }
}

/// Config file plus flag overrides, validated.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.estimate.seed = seed;
    }
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run_suites(command: Command, cfg: &RunConfig) -> Result<Vec<SuiteOutcome>> {
    let one = |c: Command| -> Result<SuiteOutcome> {
        match c {
            Command::SelftestGeometry => suites::geometry_suite(cfg),
            Command::SelftestOperators => suites::operators_suite(cfg),
            Command::Exponents => suites::exponents_suite(cfg),
            Command::Estimate => suites::estimate_suite(cfg),
            Command::Transport => suites::transport_suite(cfg),
            Command::Solve => suites::solve_suite(cfg),
            Command::All => unreachable!(),
        }
    };
    match command {
        Command::All => [
            Command::SelftestGeometry,
            Command::Exponents,
            Command::SelftestOperators,
            Command::Estimate,
            Command::Transport,
            Command::Solve,
        ]
        .into_iter()
        .map(one)
        .collect(),
        c => Ok(vec![one(c)?]),
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let cfg = resolve_config(cli)?;
    let outcomes = match cli.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(|| run_suites(cli.command, &cfg))?,
        None => run_suites(cli.command, &cfg)?,
    };
    let mut stdout = std::io::stdout().lock();
    for o in &outcomes {
        for c in &o.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            // A closed pipe only loses the echo; the artifacts still get written.
            let _ = writeln!(stdout, "{verdict} {}: {} (value {:.3e}, tolerance {:.3e})", o.suite, c.name, c.value, c.tolerance);
        }
    }
    let written = output::write_outputs(&cfg.output.directory, cli.command.name(), &cfg, &outcomes)?;
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(outcomes.iter().all(SuiteOutcome::passed))
}

/// Parses `args`, runs the subcommand and returns the process exit status:
/// 0 when every check passes, 1 on a failed check or runtime error, 2 on a
/// configuration error.
pub fn main_with_args<I, T>(args: I) -> i32
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
    match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
