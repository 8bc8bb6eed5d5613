use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use scg_cli::builtins::{self, Builtin};
use scg_cli::config::{ProblemConfig, ScheduleName};
use scg_cli::report::{all_passed, Check};
use scg_cli::runner::{
    execute, fmt_f64, write_json, write_summary, Failure, Overrides, DEFAULT_OUT_DIR,
};
use scg_cli::verify::{Suite, SuiteReport};
use scg_core::Execution;

/// Split conditional gradient solver.
#[derive(Parser)]
#[command(name = "scg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a TOML or JSON configuration (a run
    /// summary works too).
    Run { config: PathBuf },
    /// Run a diagnostic suite and write a JSON report.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Run one of the built-in experiments.
    Builtin {
        #[arg(value_enum)]
        name: Builtin,
    },
}

#[derive(Args)]
struct Flags {
    /// Override the iteration horizon.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Override the initial penalty parameter.
    #[arg(long, global = true)]
    lambda0: Option<f64>,
    /// Override the schedule.
    #[arg(long, global = true, value_enum)]
    schedule: Option<ScheduleName>,
    /// Output directory.
    #[arg(long, global = true, env = "SCG_OUT_DIR")]
    out: Option<PathBuf>,
    /// Override the seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Record per-iteration wall time in the trace.
    #[arg(long, global = true)]
    timing: bool,
    /// Run block LMOs on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            max_iters: self.max_iters,
            lambda0: self.lambda0,
            schedule: self.schedule,
            seed: self.seed,
            out: self.out.clone(),
            timing: self.timing,
            execution: if self.sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = cli.flags.overrides();
    let outcome = match &cli.command {
        Command::Run { config } => run(config, &overrides),
        Command::Verify { suite } => verify(*suite, &overrides),
        Command::Builtin { name } => builtin(*name, &overrides),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("scg: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(path: &Path, overrides: &Overrides) -> Result<bool, Failure> {
    let mut cfg = ProblemConfig::load(path).map_err(Failure::Validation)?;
    overrides.apply(&mut cfg);
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    let outcome = execute(&cfg, &stem, overrides.execution)?;
    write_summary(&outcome, None)?;
    let last = outcome.result.trace.last().expect("nonempty trace");
    println!(
        "{} iterations ({}); f = {}, penalty = {}, gap = {}",
        outcome.result.trace.len(),
        outcome.result.termination,
        fmt_f64(last.f_value),
        fmt_f64(last.penalty),
        fmt_f64(last.fw_gap)
    );
    println!("trace   {}", outcome.csv_path.display());
    println!("summary {}", outcome.summary_path.display());
    Ok(true)
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("{}", c.line());
    }
}

fn builtin(name: Builtin, overrides: &Overrides) -> Result<bool, Failure> {
    let run = builtins::run(name, overrides)?;
    print_checks(&run.checks);
    println!("trace   {}", run.outcome.csv_path.display());
    println!("summary {}", run.outcome.summary_path.display());
    Ok(all_passed(&run.checks))
}

fn verify(suite: Suite, overrides: &Overrides) -> Result<bool, Failure> {
    let checks = suite.run(overrides.execution);
    print_checks(&checks);
    let dir = overrides
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Solver(e.into()))?;
    let path = dir.join(format!("verify-{}.json", suite.name()));
    write_json(&path, &SuiteReport::new(suite, &checks)).map_err(Failure::Solver)?;
    println!("report  {}", path.display());
    Ok(all_passed(&checks))
}
