//! Problem configuration files.
//!
//! A configuration is TOML (or JSON) with an `objective` table, a `sets`
//! array, a `schedule` table and a horizon. Matrices are given inline as rows
//! or as a path to a headerless CSV file, relative to the configuration file.
//! Loading inlines every matrix so the echoed configuration is
//! self-contained.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use scg_core::objective::{IndefiniteQuadratic, LeastSquares, Quadratic, SmoothObjective};
use scg_core::sets::{ConstraintSet, ProductConstraint};
use scg_core::solver::{Schedule, ScheduleKind, StoppingRule};
use scg_core::space::{ProductPoint, Weights};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub objective: ObjectiveSpec,
    pub sets: Vec<SetSpec>,
    /// Uniform when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    pub schedule: ScheduleSpec,
    pub max_iters: usize,
    /// Seeds the default starting point (block `i` uses `seed + i`).
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    /// `½‖x − b‖²`.
    Quadratic { b: Vec<f64> },
    /// `½‖Mx − b‖²`.
    LeastSquares { matrix: MatrixSpec, b: Vec<f64> },
    /// `½xᵀQx + qᵀx` with symmetric `Q`.
    IndefiniteQuadratic { matrix: MatrixSpec, q: Vec<f64> },
    /// Seeded random instance with spectrum spread over `[−1, 1]`.
    RandomIndefinite { n: usize, seed: u64, q_scale: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Csv(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetSpec {
    Singleton {
        point: Vec<f64>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Interval {
        lo: f64,
        hi: f64,
    },
    L1Ball {
        dim: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    Simplex {
        dim: usize,
    },
    Ball {
        dim: usize,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    NuclearBall {
        rows: usize,
        cols: usize,
        radius: f64,
    },
    Spectrahedron {
        n: usize,
    },
    Birkhoff {
        n: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleName {
    Convex,
    Nonconvex,
    Frozen,
}

impl From<ScheduleName> for ScheduleKind {
    fn from(s: ScheduleName) -> Self {
        match s {
            ScheduleName::Convex => ScheduleKind::Convex,
            ScheduleName::Nonconvex => ScheduleKind::Nonconvex,
            ScheduleName::Frozen => ScheduleKind::Frozen,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: ScheduleName,
    pub lambda0: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    #[default]
    Scg,
    /// Classical conditional gradient; needs exactly one set.
    Vanilla,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub gap_tol: f64,
    pub feas_tol: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Record wall-clock time per row (breaks byte-for-byte reproducibility).
    #[serde(default)]
    pub timing: bool,
}

/// Everything needed to call the solver.
pub struct Problem {
    pub objective: Box<dyn SmoothObjective>,
    pub constraint: ProductConstraint,
    pub schedule: Schedule,
    pub x0: ProductPoint,
    pub stop: Option<StoppingRule>,
}

impl ProblemConfig {
    /// Reads a TOML or JSON file. A JSON run summary is accepted too, in which
    /// case its `config` entry is used.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut cfg: ProblemConfig = if is_json {
            let mut value: serde_json::Value = serde_json::from_str(&text)
                .with_context(|| format!("{} is not valid JSON", path.display()))?;
            if let Some(inner) = value.get_mut("config") {
                value = inner.take();
            }
            serde_json::from_value(value)
                .with_context(|| format!("invalid configuration in {}", path.display()))?
        } else {
            toml::from_str(&text)
                .with_context(|| format!("invalid configuration in {}", path.display()))?
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.inline_matrices(base)?;
        Ok(cfg)
    }

    fn inline_matrices(&mut self, base: &Path) -> Result<()> {
        let m = match &mut self.objective {
            ObjectiveSpec::LeastSquares { matrix, .. }
            | ObjectiveSpec::IndefiniteQuadratic { matrix, .. } => matrix,
            _ => return Ok(()),
        };
        if let MatrixSpec::Csv(p) = m {
            let full = base.join(&*p);
            *m = MatrixSpec::Rows(read_csv_matrix(&full)?);
        }
        Ok(())
    }

    /// Validates and assembles the problem. Nothing is written to disk here.
    pub fn build(&self) -> Result<Problem> {
        ensure!(self.max_iters >= 1, "max_iters must be at least 1");
        ensure!(!self.sets.is_empty(), "at least one set is required");
        let objective = self.objective.build().context("objective")?;
        let sets = self
            .sets
            .iter()
            .enumerate()
            .map(|(i, s)| s.build().with_context(|| format!("set {i}")))
            .collect::<Result<Vec<_>>>()?;
        let weights = match &self.weights {
            Some(w) => {
                ensure!(
                    w.len() == sets.len(),
                    "{} weights given for {} sets",
                    w.len(),
                    sets.len()
                );
                Weights::new(w.clone())?
            }
            None => Weights::uniform(sets.len())?,
        };
        let constraint = ProductConstraint::new(sets, weights)?;
        ensure!(
            objective.dim() == constraint.dim(),
            "objective dimension {} differs from set dimension {}",
            objective.dim(),
            constraint.dim()
        );
        if self.solver == SolverKind::Vanilla {
            ensure!(constraint.num_blocks() == 1, "the vanilla solver takes exactly one set");
        }
        let schedule = Schedule::new(self.schedule.kind.into(), self.schedule.lambda0)?;
        let x0 = match &self.initial {
            Some(blocks) => {
                let x = ProductPoint::new(blocks.clone()).context("initial point")?;
                ensure!(
                    x.num_blocks() == constraint.num_blocks() && x.dim() == constraint.dim(),
                    "initial point has {} blocks of dimension {}, expected {} of dimension {}",
                    x.num_blocks(),
                    x.dim(),
                    constraint.num_blocks(),
                    constraint.dim()
                );
                x
            }
            None => self.default_start(&constraint),
        };
        if let Some(i) = constraint
            .sets()
            .iter()
            .zip(x0.blocks())
            .position(|(s, b)| !s.contains(b, scg_core::solver::FEASIBILITY_TOL))
        {
            bail!("initial block {i} is outside its set");
        }
        let stop = match self.stop {
            Some(s) => {
                ensure!(
                    s.gap_tol >= 0.0 && s.feas_tol >= 0.0,
                    "stopping tolerances must be nonnegative"
                );
                Some(StoppingRule {
                    gap_tol: s.gap_tol,
                    feas_tol: s.feas_tol,
                })
            }
            None => None,
        };
        Ok(Problem {
            objective,
            constraint,
            schedule,
            x0,
            stop,
        })
    }

    fn default_start(&self, pc: &ProductConstraint) -> ProductPoint {
        ProductPoint::new(
            pc.sets()
                .iter()
                .enumerate()
                .map(|(i, s)| s.random_feasible(self.seed.wrapping_add(i as u64)))
                .collect(),
        )
        .expect("sets share a dimension")
    }

    /// Pins the starting point so the configuration reproduces the run
    /// without reference to the seed.
    pub fn with_explicit_start(mut self, x0: &ProductPoint) -> Self {
        self.initial = Some(x0.blocks().to_vec());
        self
    }
}

impl ObjectiveSpec {
    fn build(&self) -> Result<Box<dyn SmoothObjective>> {
        Ok(match self {
            ObjectiveSpec::Quadratic { b } => Box::new(Quadratic::new(b.clone())?),
            ObjectiveSpec::LeastSquares { matrix, b } => {
                let (flat, rows, cols) = matrix.flatten()?;
                Box::new(LeastSquares::new(flat, rows, cols, b.clone())?)
            }
            ObjectiveSpec::IndefiniteQuadratic { matrix, q } => {
                let (flat, rows, cols) = matrix.flatten()?;
                ensure!(rows == cols, "quadratic matrix is {rows}×{cols}, not square");
                Box::new(IndefiniteQuadratic::new(flat, q.clone())?)
            }
            ObjectiveSpec::RandomIndefinite { n, seed, q_scale } => {
                Box::new(IndefiniteQuadratic::random(*n, *seed, *q_scale)?)
            }
        })
    }
}

impl MatrixSpec {
    fn flatten(&self) -> Result<(Vec<f64>, usize, usize)> {
        let MatrixSpec::Rows(rows) = self else {
            bail!("matrix file was not loaded");
        };
        ensure!(!rows.is_empty(), "matrix has no rows");
        let cols = rows[0].len();
        ensure!(
            rows.iter().all(|r| r.len() == cols),
            "matrix rows have different lengths"
        );
        Ok((rows.concat(), rows.len(), cols))
    }
}

impl SetSpec {
    fn build(&self) -> Result<ConstraintSet> {
        Ok(match self {
            SetSpec::Singleton { point } => ConstraintSet::singleton(point.clone())?,
            SetSpec::Box { lower, upper } => ConstraintSet::boxed(lower.clone(), upper.clone())?,
            SetSpec::Interval { lo, hi } => ConstraintSet::interval(*lo, *hi)?,
            SetSpec::L1Ball { dim, radius, center } => match center {
                Some(c) => {
                    ensure!(c.len() == *dim, "center has length {}, not {dim}", c.len());
                    ConstraintSet::l1_ball_at(c.clone(), *radius)?
                }
                None => ConstraintSet::l1_ball(*dim, *radius)?,
            },
            SetSpec::Simplex { dim } => ConstraintSet::simplex(*dim)?,
            SetSpec::Ball { dim, radius, center } => match center {
                Some(c) => {
                    ensure!(c.len() == *dim, "center has length {}, not {dim}", c.len());
                    ConstraintSet::ball_at(c.clone(), *radius)?
                }
                None => ConstraintSet::ball(*dim, *radius)?,
            },
            SetSpec::NuclearBall { rows, cols, radius } => {
                ConstraintSet::nuclear_ball(*rows, *cols, *radius)?
            }
            SetSpec::Spectrahedron { n } => ConstraintSet::spectrahedron(*n)?,
            SetSpec::Birkhoff { n } => ConstraintSet::birkhoff(*n)?,
        })
    }
}

/// Headerless CSV of numbers, one matrix row per line.
pub fn read_csv_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot open matrix file {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{} line {}", path.display(), i + 1))?;
        let row = rec
            .iter()
            .map(|field| field.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("{} line {}: not a number", path.display(), i + 1))?;
        rows.push(row);
    }
    Ok(rows)
}
