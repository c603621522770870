//! `conelab`: run ergodic, wedge and simulation experiments from JSON configs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conelab::lab::{self, ExperimentConfig, LabError, RunOutcome, Scenario, Status, Suite, VerifySection};

#[derive(Parser)]
#[command(name = "conelab", version, about = "Reflected diffusions in wedges and reverse ergodic chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contraction certificate and ergodic limit of a kernel chain.
    Ergodic(Common),
    /// Exponent, auxiliary functions and hitting constants of a wedge.
    Wedge(Common),
    /// Replicated reflected-diffusion runs with exit tables.
    Simulate(Common),
    /// Monte Carlo estimates of the shell-to-shell kernels.
    Kernels(Common),
    /// Acceptance checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Kernel,
    Wedge,
    Sim,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Kernel => Suite::Kernel,
            SuiteArg::Wedge => Suite::Wedge,
            SuiteArg::Sim => Suite::Sim,
            SuiteArg::All => Suite::All,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, common, suite) = match cli.command {
        Command::Ergodic(c) => (Scenario::ErgodicSynthetic, c, None),
        Command::Wedge(c) => (Scenario::WedgeAnalyze, c, None),
        Command::Simulate(c) => (Scenario::Simulate, c, None),
        Command::Kernels(c) => (Scenario::EstimateKernels, c, None),
        Command::Verify { common, suite } => (Scenario::Verify, common, suite),
    };
    match execute(scenario, &common, suite) {
        Ok(outcome) => {
            println!("{}", if outcome.report.passed() { "PASS" } else { "FAIL" });
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(scenario: Scenario, common: &Common, suite: Option<SuiteArg>) -> Result<RunOutcome, LabError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(s) = suite {
        cfg.verify.get_or_insert_with(VerifySection::default).suite = Some(s.into());
    }
    let out = match (&common.out, cfg.resolved_output_dir()) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => o,
        (None, None) => {
            return Err(lab::ConfigError::new("output_dir", "give --out or set output_dir in the config").into())
        }
    };
    let start = Instant::now();
    let outcome = lab::run(&cfg, scenario, &out)?;
    print_checks(&outcome, &out);
    eprintln!("{} finished in {:.2?}", scenario.name(), start.elapsed());
    Ok(outcome)
}

fn print_checks(outcome: &RunOutcome, out: &Path) {
    for c in &outcome.report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let mut line = format!(
            "{tag} {}/{}: measured {:.6e}, bound {:.6e} (tol {:.1e})",
            c.group, c.name, c.measured, c.bound, c.tolerance
        );
        if !c.runtime.is_zero() {
            line.push_str(&format!(" [{:.2?}]", c.runtime));
        }
        eprintln!("{line}");
        if c.status != Status::Pass && !c.detail.is_empty() {
            eprintln!("     {}", c.detail);
        }
    }
    eprintln!("wrote {} artifacts to {}", outcome.manifest.artifacts.len(), out.display());
}
