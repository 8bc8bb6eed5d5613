//! Runs a configured problem and persists its trace.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use scg_core::solver::{
    scg_solve_observed, vanilla_cg_solve_observed, IterationRecord, SolveOptions, SolveResult,
};
use scg_core::space::dist_diag_sq;
use scg_core::Execution;
use serde::Serialize;

use crate::config::{Problem, ProblemConfig, ScheduleName, SolverKind};
use crate::report::Check;

pub const CSV_HEADER: [&str; 10] = [
    "t",
    "lambda",
    "gamma",
    "f_value",
    "penalty",
    "F_value",
    "fw_gap",
    "avg_fw_gap",
    "rate_envelope",
    "wall_nanos",
];

const FLUSH_EVERY: usize = 1000;

/// Failure classes, mapped to process exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or arguments; nothing was written.
    Validation(anyhow::Error),
    /// The solver or the file system failed during the run.
    Solver(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Solver(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(e) => write!(f, "invalid input: {e:#}"),
            Failure::Solver(e) => write!(f, "run failed: {e:#}"),
        }
    }
}

impl std::error::Error for Failure {}

/// Command-line overrides. Flags win over the environment, which wins over
/// the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub max_iters: Option<usize>,
    pub lambda0: Option<f64>,
    pub schedule: Option<ScheduleName>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub timing: bool,
    pub execution: Execution,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ProblemConfig) {
        if let Some(n) = self.max_iters {
            cfg.max_iters = n;
        }
        if let Some(l) = self.lambda0 {
            cfg.schedule.lambda0 = l;
        }
        if let Some(k) = self.schedule {
            cfg.schedule.kind = k;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = Some(dir.clone());
        }
        if self.timing {
            cfg.output.timing = true;
        }
    }
}

pub const DEFAULT_OUT_DIR: &str = "scg-out";

/// A finished run: the solver result, where it was written, and the resolved
/// configuration.
pub struct RunOutcome {
    pub result: SolveResult,
    pub problem: Problem,
    pub config: ProblemConfig,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Builds, solves and writes the trace CSV. The summary is written separately
/// by [`write_summary`] so callers can attach their checks.
pub fn execute(
    config: &ProblemConfig,
    default_name: &str,
    execution: Execution,
) -> Result<RunOutcome, Failure> {
    let problem = config.build().map_err(Failure::Validation)?;
    let dir = config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let name = config.output.name.clone().unwrap_or_else(|| default_name.to_string());
    let csv_path = dir.join(format!("{name}.csv"));
    let summary_path = dir.join(format!("{name}.json"));

    std::fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(Failure::Solver)?;
    let mut writer = TraceWriter::create(&csv_path).map_err(Failure::Solver)?;

    let opts = SolveOptions {
        max_iters: config.max_iters,
        stop: problem.stop,
        execution,
        record_timing: config.output.timing,
        constants: None,
    };
    let observer = |r: &IterationRecord| writer.push(r);
    let solved = match config.solver {
        SolverKind::Scg => scg_solve_observed(
            problem.objective.as_ref(),
            &problem.constraint,
            &problem.schedule,
            &problem.x0,
            &opts,
            observer,
        ),
        SolverKind::Vanilla => vanilla_cg_solve_observed(
            problem.objective.as_ref(),
            &problem.constraint.sets()[0],
            &problem.schedule,
            problem.x0.block(0),
            &opts,
            observer,
        ),
    };
    let result = match solved.map_err(anyhow::Error::from).and_then(|r| {
        writer.finish()?;
        Ok(r)
    }) {
        Ok(r) => r,
        Err(e) => {
            let _ = std::fs::remove_file(&csv_path);
            return Err(Failure::Solver(e));
        }
    };

    let mut echo = config.clone().with_explicit_start(&problem.x0);
    echo.output.dir = Some(dir);
    echo.output.name = Some(name);
    Ok(RunOutcome {
        result,
        problem,
        config: echo,
        csv_path,
        summary_path,
    })
}

struct TraceWriter {
    inner: csv::Writer<BufWriter<File>>,
    rows: usize,
    error: Option<anyhow::Error>,
    path: PathBuf,
}

impl TraceWriter {
    fn create(path: &Path) -> anyhow::Result<Self> {
        let file =
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut inner = csv::Writer::from_writer(BufWriter::new(file));
        inner.write_record(CSV_HEADER)?;
        Ok(Self {
            inner,
            rows: 0,
            error: None,
            path: path.to_path_buf(),
        })
    }

    fn push(&mut self, r: &IterationRecord) {
        if self.error.is_some() {
            return;
        }
        let envelope = r.rate_envelope.map(fmt_f64).unwrap_or_default();
        let row = [
            r.t.to_string(),
            fmt_f64(r.lambda),
            fmt_f64(r.gamma),
            fmt_f64(r.f_value),
            fmt_f64(r.penalty),
            fmt_f64(r.penalized_value),
            fmt_f64(r.fw_gap),
            fmt_f64(r.avg_fw_gap),
            envelope,
            r.wall_nanos.to_string(),
        ];
        let mut res = self.inner.write_record(&row).map_err(anyhow::Error::from);
        self.rows += 1;
        if res.is_ok() && self.rows.is_multiple_of(FLUSH_EVERY) {
            res = self.inner.flush().map_err(anyhow::Error::from);
        }
        if let Err(e) = res {
            self.error = Some(e.context(format!("writing {}", self.path.display())));
        }
    }

    fn finish(&mut self) -> anyhow::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        self.inner
            .flush()
            .with_context(|| format!("writing {}", self.path.display()))
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Serialize)]
struct Constants {
    lipschitz: f64,
    r_sq: f64,
    r_lin: f64,
    beta_f: Option<f64>,
    b: f64,
}

#[derive(Serialize)]
struct FinalValues {
    /// Values at the returned iterate `x_T` (one step past the last row).
    f_value: f64,
    penalty: f64,
    average: Vec<f64>,
    /// From the last trace row.
    lambda: f64,
    fw_gap: f64,
    avg_fw_gap: f64,
    min_fw_gap: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    version: &'static str,
    solver: SolverKind,
    termination: String,
    iterations: usize,
    #[serde(rename = "final")]
    final_values: FinalValues,
    constants: Constants,
    #[serde(skip_serializing_if = "Option::is_none")]
    checks: Option<&'a [Check]>,
    config: &'a ProblemConfig,
}

/// Writes the JSON summary for `outcome`, including `checks` when given.
pub fn write_summary(outcome: &RunOutcome, checks: Option<&[Check]>) -> Result<(), Failure> {
    let r = &outcome.result;
    let last = r.trace.last().expect("at least one iteration");
    let k = &r.constants;
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        solver: outcome.config.solver,
        termination: r.termination.to_string(),
        iterations: r.trace.len(),
        final_values: FinalValues {
            f_value: outcome.problem.objective.value(&r.average),
            penalty: dist_diag_sq(&r.x, outcome.problem.constraint.weights())
                .map_err(|e| Failure::Solver(e.into()))?,
            average: r.average.clone(),
            lambda: last.lambda,
            fw_gap: last.fw_gap,
            avg_fw_gap: last.avg_fw_gap,
            min_fw_gap: r.trace.iter().map(|t| t.fw_gap).fold(f64::INFINITY, f64::min),
        },
        constants: Constants {
            lipschitz: k.lipschitz,
            r_sq: k.r_sq,
            r_lin: k.r_lin,
            beta_f: k.beta_f,
            b: k.b,
        },
        checks,
        config: &outcome.config,
    };
    write_json(&outcome.summary_path, &summary).map_err(Failure::Solver)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| anyhow!(e))
        .and_then(|_| writeln!(w).map_err(Into::into))
        .and_then(|_| w.flush().map_err(Into::into))
        .with_context(|| format!("writing {}", path.display()))
}
