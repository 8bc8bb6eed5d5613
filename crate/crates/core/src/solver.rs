//! Split conditional gradient and the classical conditional gradient
//! baseline.
//!
//! One SCG iteration evaluates `∇f` once at the averaged iterate and calls
//! one LMO per set:
//!
//! ```text
//! g   = ∇f(x̄)
//! v^i = LMO_i(g + λ_t (x^i − x̄))
//! x^i = (1 − γ_t) x^i + γ_t v^i
//! x̄   = Σ ω_i x^i
//! ```

use std::time::Instant;

use crate::exec::Execution;
use crate::objective::{penalized_directions, PenalizedObjective, SmoothObjective};
use crate::sets::{ConstraintSet, ProductConstraint};
use crate::space::{average_unchecked, dist_diag_sq_with, ProductPoint, Weights};
use crate::{Error, Result};

/// Tolerance used to check that starting points are feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Parameter law for `(λ_t, γ_t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `γ_t = 2/(√t + 2)`, `λ_{t+1} = λ_t + λ₀/(√t + 2)²`.
    Convex,
    /// `γ_t = 1/√(t + 1)`, `λ_t = λ₀ Σ_{k<t} 1/(k + 1)` and `λ_0 = λ₀`.
    Nonconvex,
    /// `γ_t = 2/(t + 2)` with `λ` held at `λ₀`.
    Frozen,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Convex => "convex",
            ScheduleKind::Nonconvex => "nonconvex",
            ScheduleKind::Frozen => "frozen",
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convex" => Ok(ScheduleKind::Convex),
            "nonconvex" => Ok(ScheduleKind::Nonconvex),
            "frozen" => Ok(ScheduleKind::Frozen),
            other => Err(Error::InvalidSchedule(format!("unknown schedule `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    kind: ScheduleKind,
    lambda0: f64,
}

impl Schedule {
    pub fn new(kind: ScheduleKind, lambda0: f64) -> Result<Self> {
        let ok = match kind {
            ScheduleKind::Frozen => lambda0 >= 0.0,
            _ => lambda0 > 0.0,
        };
        if !lambda0.is_finite() || !ok {
            return Err(Error::InvalidSchedule(format!(
                "λ₀ = {lambda0} is not allowed for the {} schedule",
                kind.name()
            )));
        }
        Ok(Self { kind, lambda0 })
    }

    pub fn convex(lambda0: f64) -> Result<Self> {
        Self::new(ScheduleKind::Convex, lambda0)
    }

    pub fn nonconvex(lambda0: f64) -> Result<Self> {
        Self::new(ScheduleKind::Nonconvex, lambda0)
    }

    pub fn frozen(lambda0: f64) -> Result<Self> {
        Self::new(ScheduleKind::Frozen, lambda0)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn gamma(&self, t: usize) -> f64 {
        let tf = t as f64;
        match self.kind {
            ScheduleKind::Convex => 2.0 / (tf.sqrt() + 2.0),
            ScheduleKind::Nonconvex => 1.0 / (tf + 1.0).sqrt(),
            ScheduleKind::Frozen => 2.0 / (tf + 2.0),
        }
    }

    /// Infinite iterator over `(λ_t, γ_t)` for `t = 0, 1, …`.
    pub fn steps(&self) -> Steps {
        Steps {
            schedule: *self,
            t: 0,
            lambda: self.lambda0,
            harmonic: 0.0,
        }
    }

    /// The first `n` penalty parameters.
    pub fn lambdas(&self, n: usize) -> Vec<f64> {
        self.steps().take(n).map(|(l, _)| l).collect()
    }
}

/// Iterator returned by [`Schedule::steps`].
#[derive(Clone, Debug)]
pub struct Steps {
    schedule: Schedule,
    t: usize,
    lambda: f64,
    harmonic: f64,
}

impl Iterator for Steps {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let t = self.t;
        let l0 = self.schedule.lambda0;
        let lambda = match self.schedule.kind {
            ScheduleKind::Convex => {
                let cur = self.lambda;
                let s = (t as f64).sqrt() + 2.0;
                self.lambda = cur + l0 / (s * s);
                cur
            }
            ScheduleKind::Nonconvex => {
                if t == 0 {
                    l0
                } else {
                    self.harmonic += 1.0 / t as f64;
                    l0 * self.harmonic
                }
            }
            ScheduleKind::Frozen => l0,
        };
        self.t += 1;
        Some((lambda, self.schedule.gamma(t)))
    }
}

/// Early termination once both the gap and the penalty are small.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppingRule {
    pub gap_tol: f64,
    pub feas_tol: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            gap_tol: 1e-6,
            feas_tol: 1e-8,
        }
    }
}

/// Constants entering the rate envelopes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateConstants {
    /// `L_f`.
    pub lipschitz: f64,
    /// `R = Σ ω_i R_i²`.
    pub r_sq: f64,
    /// `R_A = Σ ω_i R_i`.
    pub r_lin: f64,
    /// Bound on `‖∇f‖` over the weighted Minkowski sum, if known.
    pub beta_f: Option<f64>,
    /// `B = max{β_p √R, R}` with `β_p ≤ √R`, hence `B = R`.
    pub b: f64,
}

impl RateConstants {
    pub fn for_problem(objective: &dyn SmoothObjective, pc: &ProductConstraint) -> Self {
        let r_sq = pc.r_sq();
        Self {
            lipschitz: objective.lipschitz(),
            r_sq,
            r_lin: pc.r_lin(),
            beta_f: objective.gradient_bound(pc.minkowski_norm_bound()),
            b: r_sq,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub max_iters: usize,
    pub stop: Option<StoppingRule>,
    pub execution: Execution,
    /// Record elapsed wall time per row; otherwise the column stays 0 so that
    /// traces are reproducible byte for byte.
    pub record_timing: bool,
    /// Overrides the constants derived from the problem.
    pub constants: Option<RateConstants>,
}

impl SolveOptions {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            stop: None,
            execution: Execution::default(),
            record_timing: false,
            constants: None,
        }
    }
}

/// One trace row, describing iterate `x_t` and the step taken from it.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub t: usize,
    pub lambda: f64,
    pub gamma: f64,
    /// `f(A x_t)`.
    pub f_value: f64,
    /// `dist²_D(x_t)`.
    pub penalty: f64,
    /// `F_{λ_t}(x_t)`.
    pub penalized_value: f64,
    /// `⟨∇F_{λ_t}(x_t), x_t − v_t⟩`.
    pub fw_gap: f64,
    /// Mean of the gaps recorded so far, this row included.
    pub avg_fw_gap: f64,
    /// Convex schedule: bound on the primal gap `H_t`. Nonconvex schedule:
    /// bound on `avg_fw_gap`. Frozen schedule: none.
    pub rate_envelope: Option<f64>,
    pub wall_nanos: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    MaxIters,
    /// The stopping rule fired at this iteration.
    Converged { t: usize },
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::MaxIters => write!(f, "max_iters"),
            Termination::Converged { t } => write!(f, "converged at t={t}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    /// Final product iterate.
    pub x: ProductPoint,
    /// `A x`, the approximate solution.
    pub average: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    pub termination: Termination,
    pub constants: RateConstants,
}

/// Bound on the primal gap `H_t` under the convex schedule.
pub fn rate_envelope_convex(t: usize, lambda0: f64, lipschitz: f64, r_sq: f64) -> f64 {
    let s = (t as f64).sqrt() + 2.0;
    2.0 * r_sq * ((lambda0 * (2.0 * s.ln() + 0.25) + lipschitz) / s + 4.0 * lambda0 / (s * s))
}

/// Bound on the mean of the first `t ≥ 1` gaps under the nonconvex schedule.
pub fn rate_envelope_nonconvex(
    t: usize,
    lambda0: f64,
    lipschitz: f64,
    beta_f: f64,
    r_sq: f64,
    r_lin: f64,
    b: f64,
) -> f64 {
    let tf = t as f64;
    let st = tf.sqrt();
    (beta_f * r_lin + (lipschitz + lambda0) * r_sq + lambda0 * b) / st
        + (tf + 1.0).ln() / st * lambda0 * (r_sq + b)
}

fn envelope(schedule: &Schedule, k: &RateConstants, t: usize) -> Option<f64> {
    match schedule.kind() {
        ScheduleKind::Convex => Some(rate_envelope_convex(
            t,
            schedule.lambda0(),
            k.lipschitz,
            k.r_sq,
        )),
        ScheduleKind::Nonconvex => k.beta_f.map(|beta| {
            rate_envelope_nonconvex(
                t + 1,
                schedule.lambda0(),
                k.lipschitz,
                beta,
                k.r_sq,
                k.r_lin,
                k.b,
            )
        }),
        ScheduleKind::Frozen => None,
    }
}

/// Frank-Wolfe gap of `F_λ` over `⨉ C_i` at `x`, and the LMO output.
pub fn fw_gap_subproblem(
    f: &PenalizedObjective<'_>,
    pc: &ProductConstraint,
    x: &ProductPoint,
) -> Result<(f64, ProductPoint)> {
    pc.check_shape(x)?;
    let d = f.gradient(x)?;
    let v = pc.lmo_blocks(d.blocks(), Execution::Sequential);
    let gap = gap_from(pc.weights().as_slice(), d.blocks(), x.blocks(), &v);
    Ok((gap, ProductPoint::from_blocks(v)))
}

fn gap_from(w: &[f64], d: &[Vec<f64>], x: &[Vec<f64>], v: &[Vec<f64>]) -> f64 {
    d.iter()
        .zip(x)
        .zip(v)
        .zip(w)
        .map(|(((di, xi), vi), wi)| {
            wi * di
                .iter()
                .zip(xi)
                .zip(vi)
                .map(|((a, b), c)| a * (b - c))
                .sum::<f64>()
        })
        .sum()
}

fn step(x: &mut [f64], v: &[f64], gamma: f64) {
    for (a, b) in x.iter_mut().zip(v) {
        *a = (1.0 - gamma) * *a + gamma * b;
    }
}

fn check_objective(objective: &dyn SmoothObjective, n: usize) -> Result<()> {
    if objective.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: objective.dim(),
        });
    }
    Ok(())
}

/// Runs SCG for `opts.max_iters` iterations (or until the stopping rule
/// fires). `x0` must be blockwise feasible.
pub fn scg_solve(
    objective: &dyn SmoothObjective,
    pc: &ProductConstraint,
    schedule: &Schedule,
    x0: &ProductPoint,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    scg_solve_observed(objective, pc, schedule, x0, opts, |_| {})
}

/// [`scg_solve`] with a callback invoked on every trace row as it is produced.
pub fn scg_solve_observed<F>(
    objective: &dyn SmoothObjective,
    pc: &ProductConstraint,
    schedule: &Schedule,
    x0: &ProductPoint,
    opts: &SolveOptions,
    mut observer: F,
) -> Result<SolveResult>
where
    F: FnMut(&IterationRecord),
{
    pc.check_shape(x0)?;
    check_objective(objective, pc.dim())?;
    if let Some(block) = pc.first_infeasible(x0, FEASIBILITY_TOL) {
        return Err(Error::Infeasible { block });
    }
    if opts.max_iters == 0 {
        return Err(Error::Refused("max_iters must be at least 1".into()));
    }
    let constants = opts
        .constants
        .unwrap_or_else(|| RateConstants::for_problem(objective, pc));
    let w = pc.weights().as_slice();
    let start = Instant::now();

    let mut x = x0.blocks().to_vec();
    let mut avg = average_unchecked(&x, w);
    let mut trace = Vec::with_capacity(opts.max_iters);
    let mut gap_sum = 0.0;
    let mut termination = Termination::MaxIters;

    for (t, (lambda, gamma)) in schedule.steps().take(opts.max_iters).enumerate() {
        let g = objective.gradient(&avg);
        let d = penalized_directions(&x, &avg, &g, lambda);
        let v = pc.lmo_blocks(&d, opts.execution);
        let gap = gap_from(w, &d, &x, &v);
        let f_value = objective.value(&avg);
        let penalty = dist_diag_sq_with(&x, &avg, w);
        gap_sum += gap;

        let rec = IterationRecord {
            t,
            lambda,
            gamma,
            f_value,
            penalty,
            penalized_value: f_value + 0.5 * lambda * penalty,
            fw_gap: gap,
            avg_fw_gap: gap_sum / (t + 1) as f64,
            rate_envelope: envelope(schedule, &constants, t),
            wall_nanos: if opts.record_timing {
                start.elapsed().as_nanos() as u64
            } else {
                0
            },
        };
        observer(&rec);
        trace.push(rec);

        if let Some(rule) = opts.stop {
            if gap <= rule.gap_tol && penalty <= rule.feas_tol {
                termination = Termination::Converged { t };
                break;
            }
        }

        for (xi, vi) in x.iter_mut().zip(&v) {
            step(xi, vi, gamma);
        }
        avg = average_unchecked(&x, w);
    }

    Ok(SolveResult {
        x: ProductPoint::from_blocks(x),
        average: avg,
        trace,
        termination,
        constants,
    })
}

/// Classical conditional gradient over a single set, with the step sizes of
/// `schedule` (its `λ` values are recorded but play no role).
pub fn vanilla_cg_solve(
    objective: &dyn SmoothObjective,
    set: &ConstraintSet,
    schedule: &Schedule,
    x0: &[f64],
    opts: &SolveOptions,
) -> Result<SolveResult> {
    vanilla_cg_solve_observed(objective, set, schedule, x0, opts, |_| {})
}

/// [`vanilla_cg_solve`] with a per-row callback.
pub fn vanilla_cg_solve_observed<F>(
    objective: &dyn SmoothObjective,
    set: &ConstraintSet,
    schedule: &Schedule,
    x0: &[f64],
    opts: &SolveOptions,
    mut observer: F,
) -> Result<SolveResult>
where
    F: FnMut(&IterationRecord),
{
    check_objective(objective, set.dim())?;
    if x0.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: x0.len(),
        });
    }
    if !set.contains(x0, FEASIBILITY_TOL) {
        return Err(Error::Infeasible { block: 0 });
    }
    if opts.max_iters == 0 {
        return Err(Error::Refused("max_iters must be at least 1".into()));
    }
    let weights = Weights::uniform(1)?;
    let pc = ProductConstraint::new(vec![set.clone()], weights)?;
    let constants = opts
        .constants
        .unwrap_or_else(|| RateConstants::for_problem(objective, &pc));
    let start = Instant::now();

    let mut x = x0.to_vec();
    let mut trace = Vec::with_capacity(opts.max_iters);
    let mut gap_sum = 0.0;
    let mut termination = Termination::MaxIters;

    for (t, (lambda, gamma)) in schedule.steps().take(opts.max_iters).enumerate() {
        let g = objective.gradient(&x);
        let v = set.lmo_unchecked(&g);
        let gap: f64 = g.iter().zip(&x).zip(&v).map(|((a, b), c)| a * (b - c)).sum();
        let f_value = objective.value(&x);
        gap_sum += gap;
        let rec = IterationRecord {
            t,
            lambda,
            gamma,
            f_value,
            penalty: 0.0,
            penalized_value: f_value,
            fw_gap: gap,
            avg_fw_gap: gap_sum / (t + 1) as f64,
            rate_envelope: envelope(schedule, &constants, t),
            wall_nanos: if opts.record_timing {
                start.elapsed().as_nanos() as u64
            } else {
                0
            },
        };
        observer(&rec);
        trace.push(rec);
        if let Some(rule) = opts.stop {
            if gap <= rule.gap_tol {
                termination = Termination::Converged { t };
                break;
            }
        }
        step(&mut x, &v, gamma);
    }

    Ok(SolveResult {
        x: ProductPoint::from_blocks(vec![x.clone()]),
        average: x,
        trace,
        termination,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Quadratic;

    fn interval() -> (Quadratic, ProductConstraint) {
        let pc = ProductConstraint::new(
            vec![
                ConstraintSet::singleton(vec![1.0]).unwrap(),
                ConstraintSet::interval(-2.0, 2.0).unwrap(),
            ],
            Weights::uniform(2).unwrap(),
        )
        .unwrap();
        (Quadratic::centered(1).unwrap(), pc)
    }

    #[test]
    fn first_iteration_by_hand() {
        let (f, pc) = interval();
        let x0 = ProductPoint::new(vec![vec![1.0], vec![1.0]]).unwrap();
        let s = Schedule::convex(1.0).unwrap();
        let r = scg_solve(&f, &pc, &s, &x0, &SolveOptions::new(1)).unwrap();
        assert_eq!(r.x.blocks(), &[vec![1.0], vec![-2.0]]);
        assert_eq!(r.average, vec![-0.5]);
        let row = &r.trace[0];
        assert_eq!((row.lambda, row.gamma), (1.0, 1.0));
        // d = (1, 1), x − v = (0, 3)
        assert_eq!(row.fw_gap, 1.5);
    }

    #[test]
    fn schedule_values() {
        let c = Schedule::convex(1.0).unwrap();
        let l = c.lambdas(3);
        assert_eq!(l[0], 1.0);
        assert_eq!(l[1], 1.25);
        assert!((l[2] - (1.25 + 1.0 / 9.0)).abs() < 1e-15);
        let n = Schedule::nonconvex(2.0).unwrap();
        assert_eq!(n.lambdas(4), vec![2.0, 2.0, 3.0, 2.0 * (1.0 + 0.5 + 1.0 / 3.0)]);
        assert_eq!(n.gamma(3), 0.5);
        let z = Schedule::frozen(0.0).unwrap();
        assert_eq!(z.lambdas(2), vec![0.0, 0.0]);
        assert_eq!(z.gamma(2), 0.5);
        assert!(Schedule::convex(0.0).is_err());
        assert!(Schedule::nonconvex(f64::NAN).is_err());
        assert_eq!("frozen".parse::<ScheduleKind>().unwrap(), ScheduleKind::Frozen);
    }

    #[test]
    fn convex_envelope_value() {
        let want = 2.0 * 8.0 * ((2.0 * 2f64.ln() + 0.25 + 1.0) / 2.0 + 1.0);
        assert!((rate_envelope_convex(0, 1.0, 1.0, 8.0) - want).abs() < 1e-12);
        assert!((want - 37.09).abs() < 0.01);
        assert_eq!(rate_envelope_convex(10, 1.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let (f, pc) = interval();
        let x0 = ProductPoint::new(vec![vec![0.0], vec![1.0]]).unwrap();
        let s = Schedule::convex(1.0).unwrap();
        assert_eq!(
            scg_solve(&f, &pc, &s, &x0, &SolveOptions::new(5)).unwrap_err(),
            Error::Infeasible { block: 0 }
        );
    }

    #[test]
    fn stopping_rule_fires_at_stationary_start() {
        let f = Quadratic::centered(1).unwrap();
        let pc = ProductConstraint::new(
            vec![
                ConstraintSet::interval(-1.0, 1.0).unwrap(),
                ConstraintSet::interval(-2.0, 2.0).unwrap(),
            ],
            Weights::uniform(2).unwrap(),
        )
        .unwrap();
        let x0 = ProductPoint::new(vec![vec![0.0], vec![0.0]]).unwrap();
        let mut opts = SolveOptions::new(100);
        opts.stop = Some(StoppingRule::default());
        let r = scg_solve(&f, &pc, &Schedule::convex(1.0).unwrap(), &x0, &opts).unwrap();
        assert_eq!(r.termination, Termination::Converged { t: 0 });
        assert_eq!(r.trace.len(), 1);
    }
}
