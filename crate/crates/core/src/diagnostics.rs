//! Checkable forms of the penalty geometry, the interpolation results and the
//! rate analysis, plus brute-force grid oracles for tiny instances.

use crate::exec::Execution;
use crate::objective::{PenalizedObjective, SmoothObjective};
use crate::sets::{ConstraintSet, ProductConstraint};
use crate::solver::{rate_envelope_convex, IterationRecord};
use crate::objective::Quadratic;
use crate::space::{average, dist_diag_sq, dist_sq, dot, inner, lift, ProductPoint, Weights};
use crate::{Error, Result};

/// The intersection `∩ C_i` as a catalog set, when every `C_i` is a box or a
/// singleton. `Ok(None)` means the intersection is not available in closed
/// form; an empty intersection is an error.
pub fn intersection_set(pc: &ProductConstraint) -> Result<Option<ConstraintSet>> {
    let n = pc.dim();
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    for s in pc.sets() {
        let Some((l, u)) = s.as_box() else {
            return Ok(None);
        };
        for k in 0..n {
            lo[k] = lo[k].max(l[k]);
            hi[k] = hi[k].min(u[k]);
        }
    }
    if (0..n).any(|k| lo[k] > hi[k]) {
        return Err(Error::Refused("the sets have empty intersection".into()));
    }
    if lo == hi {
        return ConstraintSet::singleton(lo).map(Some);
    }
    ConstraintSet::boxed(lo, hi).map(Some)
}

/// `d(x) = Σ ω_i dist²_{C_i}(A x)`.
pub fn penalty_d(x: &ProductPoint, pc: &ProductConstraint) -> Result<f64> {
    let avg = average(x, pc.weights())?;
    let mut d = 0.0;
    for (s, w) in pc.sets().iter().zip(pc.weights().iter()) {
        let p = s.project(&avg)?;
        d += w * dist_sq(&avg, &p);
    }
    Ok(d)
}

/// The penalty `dist²_D`, the set-distance penalty `d` and, when the
/// intersection has a closed form, `g(x) = ‖Ax − Proj_∩(Ax)‖²` together with
/// the residual of `Σ ω_i ‖x^i − p‖² = g(x) + dist²_D(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyReport {
    pub dist_sq: f64,
    pub d_value: f64,
    pub g_value: Option<f64>,
    pub orthogonal_decomposition_residual: Option<f64>,
}

impl PenaltyReport {
    /// `0 ≤ d ≤ dist²_D` up to `tol`.
    pub fn d_sandwiched(&self, tol: f64) -> bool {
        self.d_value >= -tol && self.d_value <= self.dist_sq + tol
    }
}

pub fn penalty_report(x: &ProductPoint, pc: &ProductConstraint) -> Result<PenaltyReport> {
    let w = pc.weights();
    let dist = dist_diag_sq(x, w)?;
    let d_value = penalty_d(x, pc)?;
    let (g_value, residual) = match intersection_set(pc)? {
        Some(cap) => {
            let avg = average(x, w)?;
            let p = cap.project(&avg)?;
            let g = dist_sq(&avg, &p);
            let lhs: f64 = x
                .blocks()
                .iter()
                .zip(w.iter())
                .map(|(b, wi)| wi * dist_sq(b, &p))
                .sum();
            (Some(g), Some((lhs - g - dist).abs()))
        }
        None => (None, None),
    };
    Ok(PenaltyReport {
        dist_sq: dist,
        d_value,
        g_value,
        orthogonal_decomposition_residual: residual,
    })
}

/// Both sides of `d(x) = dist²_D(x) − ‖x − p‖² + 2⟨x − p, y − p⟩` with
/// `y = Proj_D x` and `p` the blockwise projection of `y`, and the value of
/// `⟨x − p, y − p⟩`, which is nonpositive for `x ∈ ⨉ C_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub d_value: f64,
    pub rhs: f64,
    pub residual: f64,
    pub cross_term: f64,
}

pub fn decomposition_identity(x: &ProductPoint, pc: &ProductConstraint) -> Result<DecompositionCheck> {
    let w = pc.weights();
    let avg = average(x, w)?;
    let y = lift(&avg, x.num_blocks())?;
    let p = pc.project(&y)?;
    let x_p = x.sub(&p)?;
    let y_p = y.sub(&p)?;
    let d_value = penalty_d(x, pc)?;
    let cross = inner(&x_p, &y_p, w)?;
    let rhs = dist_diag_sq(x, w)? - inner(&x_p, &x_p, w)? + 2.0 * cross;
    Ok(DecompositionCheck {
        d_value,
        rhs,
        residual: (d_value - rhs).abs(),
        cross_term: cross,
    })
}

/// The three equivalent statements: `d(x) = 0`, `Ax ∈ ∩ C_i`, and
/// `Proj_D x ∈ ⨉ C_i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub d_zero: bool,
    pub avg_in_intersection: bool,
    pub proj_in_product: bool,
}

impl Equivalence {
    pub fn agree(&self) -> bool {
        self.d_zero == self.avg_in_intersection && self.avg_in_intersection == self.proj_in_product
    }
}

/// Evaluates the three statements at tolerance `tol` (on `d` directly, on
/// membership through each set's defining inequalities).
pub fn prop2_equivalence(x: &ProductPoint, pc: &ProductConstraint, tol: f64) -> Result<Equivalence> {
    let w = pc.weights();
    let avg = average(x, w)?;
    let d = penalty_d(x, pc)?;
    let y = lift(&avg, x.num_blocks())?;
    Ok(Equivalence {
        d_zero: d <= tol * tol,
        avg_in_intersection: pc.sets().iter().all(|s| s.contains(&avg, tol)),
        proj_in_product: pc.contains(&y, tol),
    })
}

/// `dist²_D(x) ≤ R` and `‖x − y‖² ≤ R` with `R = Σ ω_i R_i²`.
#[derive(Clone, Debug, PartialEq)]
pub struct GBound {
    pub dist_sq: f64,
    pub pair_sq: f64,
    pub bound: f64,
}

impl GBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.dist_sq <= self.bound + tol && self.pair_sq <= self.bound + tol
    }
}

pub fn gbound_check(x: &ProductPoint, y: &ProductPoint, pc: &ProductConstraint) -> Result<GBound> {
    let w = pc.weights();
    let diff = x.sub(y)?;
    Ok(GBound {
        dist_sq: dist_diag_sq(x, w)?,
        pair_sq: inner(&diff, &diff, w)?,
        bound: pc.r_sq(),
    })
}

/// The gap chain
/// `G_sub(x) ≥ G_∩(Ax) + λ dist²_D(x) ≥ −β_f R_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapBound {
    pub subproblem_gap: f64,
    pub inner_gap: f64,
    pub penalty: f64,
    pub floor: f64,
}

impl GapBound {
    pub fn middle(&self, lambda: f64) -> f64 {
        self.inner_gap + lambda * self.penalty
    }

    pub fn holds(&self, lambda: f64, tol: f64) -> bool {
        let mid = self.middle(lambda);
        self.subproblem_gap >= mid - tol && mid >= self.floor - tol
    }
}

/// Needs the intersection in closed form to evaluate the inner gap.
pub fn gap_bound_check(
    x: &ProductPoint,
    objective: &dyn SmoothObjective,
    pc: &ProductConstraint,
    lambda: f64,
    beta_f: f64,
) -> Result<GapBound> {
    let cap = intersection_set(pc)?.ok_or(Error::Unsupported {
        kind: "intersection",
        operation: "linear minimization",
    })?;
    let w = pc.weights();
    let pf = PenalizedObjective::new(objective, lambda, w)?;
    let (sub, _) = crate::solver::fw_gap_subproblem(&pf, pc, x)?;
    let avg = average(x, w)?;
    let g = objective.gradient(&avg);
    let v = cap.lmo(&g)?;
    let inner_gap = dot(&g, &avg) - dot(&g, &v);
    Ok(GapBound {
        subproblem_gap: sub,
        inner_gap,
        penalty: dist_diag_sq(x, w)?,
        floor: -beta_f * pc.r_lin(),
    })
}

/// Per-step slack of the primal-gap recurrence
/// `H_{t+1} ≤ (1 − γ_t) H_t + (λ_{t+1} − λ_t) R/2 + γ_t² (λ_t + L_f) R/2`
/// and of the convex envelope `H_t ≤ envelope(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrenceReport {
    /// `rhs − H_{t+1}` for `t = 0 … T−2`.
    pub recurrence_slack: Vec<f64>,
    /// `envelope(t) − H_t` for `t = 0 … T−1`.
    pub envelope_slack: Vec<f64>,
}

impl RecurrenceReport {
    pub fn min_recurrence_slack(&self) -> f64 {
        self.recurrence_slack.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_envelope_slack(&self) -> f64 {
        self.envelope_slack.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Primal gaps `H_t = F_{λ_t}(x_t) − min F_{λ_t}` from a trace, given the
/// optimal value of the subproblem as a function of `λ`.
pub fn primal_gaps(trace: &[IterationRecord], optimal_value: impl Fn(f64) -> f64) -> Vec<f64> {
    trace
        .iter()
        .map(|r| r.penalized_value - optimal_value(r.lambda))
        .collect()
}

/// Replays a convex-schedule trace. Refuses nonconvex objectives.
pub fn recurrence_check(
    objective: &dyn SmoothObjective,
    trace: &[IterationRecord],
    h: &[f64],
    lambda0: f64,
    r_sq: f64,
) -> Result<RecurrenceReport> {
    if !objective.is_convex() {
        return Err(Error::Refused(
            "the primal-gap recurrence needs a convex objective".into(),
        ));
    }
    if h.len() != trace.len() {
        return Err(Error::DimensionMismatch {
            expected: trace.len(),
            found: h.len(),
        });
    }
    let lf = objective.lipschitz();
    let recurrence_slack = trace
        .windows(2)
        .zip(h.windows(2))
        .map(|(r, hh)| {
            let (cur, next) = (&r[0], &r[1]);
            let g = cur.gamma;
            let rhs = (1.0 - g) * hh[0]
                + 0.5 * (next.lambda - cur.lambda) * r_sq
                + 0.5 * g * g * (cur.lambda + lf) * r_sq;
            rhs - hh[1]
        })
        .collect();
    let envelope_slack = trace
        .iter()
        .zip(h)
        .map(|(r, ht)| rate_envelope_convex(r.t, lambda0, lf, r_sq) - ht)
        .collect();
    Ok(RecurrenceReport {
        recurrence_slack,
        envelope_slack,
    })
}

/// The interval instance: `f = ½x²`, `C₁ = {z}`, `C₂ = [−z−1, z+1]` and
/// equal weights.
#[derive(Clone, Debug)]
pub struct IntervalExample {
    pub z: f64,
    pub objective: Quadratic,
    pub constraint: ProductConstraint,
}

impl IntervalExample {
    pub fn new(z: f64) -> Result<Self> {
        if !(z.is_finite() && z >= 0.0) {
            return Err(Error::Refused(format!("interval example needs z ≥ 0, got {z}")));
        }
        let constraint = ProductConstraint::new(
            vec![
                ConstraintSet::singleton(vec![z])?,
                ConstraintSet::interval(-z - 1.0, z + 1.0)?,
            ],
            Weights::uniform(2)?,
        )?;
        Ok(Self {
            z,
            objective: Quadratic::centered(1)?,
            constraint,
        })
    }

    /// `min F_λ = λ z² / (2(1 + λ))`.
    pub fn optimal_value(&self, lambda: f64) -> f64 {
        lambda * self.z * self.z / (2.0 * (1.0 + lambda))
    }

    /// `sup |∇f|` over the Minkowski sum `[−½, z + ½]`.
    pub fn beta_f(&self) -> f64 {
        self.z + 0.5
    }
}

/// Minimizer of `F_λ` on the interval instance: the `C₁` block is `z`, the
/// `C₂` block is `(λ − 1) z / (1 + λ)`, and the average is `λ z / (1 + λ)`.
pub fn interval_analytic_minimizer(z: f64, lambda: f64) -> Result<(ProductPoint, f64)> {
    if !(z.is_finite() && z >= 0.0 && lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Refused(format!(
            "closed form needs z ≥ 0 and λ ≥ 0, got z = {z}, λ = {lambda}"
        )));
    }
    let b = (lambda - 1.0) * z / (1.0 + lambda);
    let x = ProductPoint::new(vec![vec![z], vec![b]])?;
    Ok((x, lambda * z / (1.0 + lambda)))
}

/// Dense-grid brute force over tiny instances (dimension ≤ 3, at most three
/// blocks). Each axis of a bounding box is sampled at `points_per_axis`
/// equispaced points including both ends, and points outside the set are
/// discarded.
#[derive(Clone, Copy, Debug)]
pub struct GridOracle {
    pub points_per_axis: usize,
    pub max_points: usize,
    pub execution: Execution,
}

impl Default for GridOracle {
    fn default() -> Self {
        Self {
            points_per_axis: 10_001,
            max_points: 10_000_000,
            execution: Execution::default(),
        }
    }
}

/// A grid minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct GridMin {
    pub value: f64,
    pub point: ProductPoint,
}

/// The three infima `inf_∩ f ≥ inf F_λ ≥ inf_{Σ ω_i C_i} f`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sandwich {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    /// Resolution times `β_f + λ · max diameter`.
    pub grid_tol: f64,
}

impl Sandwich {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs >= self.mid - tol && self.mid >= self.rhs - tol
    }
}

const GRID_MEMBERSHIP_TOL: f64 = 1e-12;

impl GridOracle {
    pub fn with_points(points_per_axis: usize) -> Self {
        Self {
            points_per_axis,
            ..Self::default()
        }
    }

    fn axis(&self, lo: f64, hi: f64) -> Vec<f64> {
        if lo == hi || self.points_per_axis < 2 {
            return vec![lo];
        }
        let n = self.points_per_axis - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / n as f64
                }
            })
            .collect()
    }

    fn check_size(&self, pc: &ProductConstraint) -> Result<()> {
        if pc.dim() > 3 || pc.num_blocks() > 3 {
            return Err(Error::TooLarge(format!(
                "dimension {} with {} blocks exceeds 3 × 3",
                pc.dim(),
                pc.num_blocks()
            )));
        }
        Ok(())
    }

    fn box_grid(&self, lo: &[f64], hi: &[f64], keep: impl Fn(&[f64]) -> bool) -> Result<Vec<Vec<f64>>> {
        let axes: Vec<Vec<f64>> = lo.iter().zip(hi).map(|(l, h)| self.axis(*l, *h)).collect();
        let total = axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
            .filter(|&t| t <= self.max_points)
            .ok_or_else(|| Error::TooLarge("per-block grid exceeds the point budget".into()))?;
        let mut out = Vec::new();
        let mut p = vec![0.0; lo.len()];
        for mut k in 0..total {
            for (j, a) in axes.iter().enumerate() {
                p[j] = a[k % a.len()];
                k /= a.len();
            }
            if keep(&p) {
                out.push(p.clone());
            }
        }
        Ok(out)
    }

    fn block_grid(&self, s: &ConstraintSet) -> Result<Vec<Vec<f64>>> {
        if s.is_singleton() {
            return Ok(vec![s.bounding_box().0]);
        }
        let (lo, hi) = s.bounding_box();
        self.box_grid(&lo, &hi, |p| s.contains(p, GRID_MEMBERSHIP_TOL))
    }

    /// Largest grid spacing over the sets of `pc`.
    pub fn resolution(&self, pc: &ProductConstraint) -> f64 {
        let steps = (self.points_per_axis.max(2) - 1) as f64;
        pc.sets()
            .iter()
            .flat_map(|s| {
                let (lo, hi) = s.bounding_box();
                lo.into_iter().zip(hi).map(|(l, h)| (h - l) / steps).collect::<Vec<_>>()
            })
            .fold(0.0, f64::max)
    }

    /// Grid minimum of `F_λ` over `⨉ C_i`.
    pub fn inf_penalized(
        &self,
        objective: &dyn SmoothObjective,
        pc: &ProductConstraint,
        lambda: f64,
    ) -> Result<GridMin> {
        self.check_size(pc)?;
        let grids = pc
            .sets()
            .iter()
            .map(|s| self.block_grid(s))
            .collect::<Result<Vec<_>>>()?;
        if grids.iter().any(|g| g.is_empty()) {
            return Err(Error::Refused("a block grid is empty".into()));
        }
        let total = grids
            .iter()
            .try_fold(1usize, |acc, g| acc.checked_mul(g.len()))
            .filter(|&t| t <= self.max_points)
            .ok_or_else(|| Error::TooLarge("product grid exceeds the point budget".into()))?;
        let w = pc.weights().as_slice();
        let n = pc.dim();
        let m = grids.len();
        let eval = |mut k: usize| {
            let mut avg = [0.0f64; 3];
            let mut idx = [0usize; 3];
            for (i, g) in grids.iter().enumerate() {
                idx[i] = k % g.len();
                k /= g.len();
                for j in 0..n {
                    avg[j] += w[i] * g[idx[i]][j];
                }
            }
            let mut dist = 0.0;
            for i in 0..m {
                let b = &grids[i][idx[i]];
                dist += w[i] * (0..n).map(|j| (b[j] - avg[j]).powi(2)).sum::<f64>();
            }
            objective.value(&avg[..n]) + 0.5 * lambda * dist
        };
        let (k, value) = self
            .execution
            .argmin_range(total, eval)
            .ok_or_else(|| Error::Refused("objective is NaN on the whole grid".into()))?;
        let mut k = k;
        let mut blocks = Vec::with_capacity(m);
        for g in &grids {
            blocks.push(g[k % g.len()].clone());
            k /= g.len();
        }
        Ok(GridMin {
            value,
            point: ProductPoint::new(blocks)?,
        })
    }

    /// Grid minimum of `f` over `∩ C_i`; the point is returned lifted to the
    /// diagonal.
    pub fn inf_intersection(
        &self,
        objective: &dyn SmoothObjective,
        pc: &ProductConstraint,
    ) -> Result<GridMin> {
        self.check_size(pc)?;
        let n = pc.dim();
        let mut lo = vec![f64::NEG_INFINITY; n];
        let mut hi = vec![f64::INFINITY; n];
        for s in pc.sets() {
            let (l, h) = s.bounding_box();
            for k in 0..n {
                lo[k] = lo[k].max(l[k]);
                hi[k] = hi[k].min(h[k]);
            }
        }
        if (0..n).any(|k| lo[k] > hi[k]) {
            return Err(Error::Refused("the sets have empty intersection".into()));
        }
        let pts = self.box_grid(&lo, &hi, |p| {
            pc.sets().iter().all(|s| s.contains(p, GRID_MEMBERSHIP_TOL))
        })?;
        let (k, value) = self
            .execution
            .argmin_range(pts.len(), |k| objective.value(&pts[k]))
            .ok_or_else(|| Error::Refused("no grid point lies in the intersection".into()))?;
        Ok(GridMin {
            value,
            point: lift(&pts[k], pc.num_blocks())?,
        })
    }

    /// Grid minimum of `f` over the Minkowski sum `Σ ω_i C_i`, i.e. of `F_0`.
    pub fn inf_minkowski(&self, objective: &dyn SmoothObjective, pc: &ProductConstraint) -> Result<GridMin> {
        self.inf_penalized(objective, pc, 0.0)
    }

    pub fn sandwich_check(
        &self,
        objective: &dyn SmoothObjective,
        pc: &ProductConstraint,
        lambda: f64,
    ) -> Result<Sandwich> {
        let lhs = self.inf_intersection(objective, pc)?.value;
        let mid = self.inf_penalized(objective, pc, lambda)?.value;
        let rhs = self.inf_minkowski(objective, pc)?.value;
        let beta = objective
            .gradient_bound(pc.minkowski_norm_bound())
            .unwrap_or(f64::INFINITY);
        let diam = pc.sets().iter().map(|s| s.diameter()).fold(0.0, f64::max);
        Ok(Sandwich {
            lhs,
            mid,
            rhs,
            grid_tol: self.resolution(pc) * (beta + lambda * diam),
        })
    }

    /// `inf F_λ` along an increasing sequence of penalty parameters.
    pub fn limit_of_infima(
        &self,
        objective: &dyn SmoothObjective,
        pc: &ProductConstraint,
        lambdas: &[f64],
    ) -> Result<Vec<f64>> {
        if lambdas.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::Refused("penalty parameters must be nondecreasing".into()));
        }
        lambdas
            .iter()
            .map(|&l| self.inf_penalized(objective, pc, l).map(|g| g.value))
            .collect()
    }
}
