//! Diagnostic suites behind `scg verify`.

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scg_core::diagnostics::{
    decomposition_identity, gap_bound_check, gbound_check, interval_analytic_minimizer,
    penalty_report, primal_gaps, prop2_equivalence, recurrence_check, GridOracle, IntervalExample,
};
use scg_core::objective::{IndefiniteQuadratic, PenalizedObjective, SmoothObjective};
use scg_core::sets::{ConstraintSet, ProductConstraint};
use scg_core::solver::{scg_solve, Schedule, SolveOptions};
use scg_core::space::{average, dist_diag_sq, lift, ProductPoint, Weights};
use scg_core::{Execution, Result};
use serde::Serialize;

use crate::report::{all_passed, Check};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Geometry,
    Interpolation,
    Rates,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Interpolation => "interpolation",
            Suite::Rates => "rates",
            Suite::All => "all",
        }
    }

    pub fn run(self, execution: Execution) -> Vec<Check> {
        self.checks(execution)
            .unwrap_or_else(|e| vec![Check::new(self.name(), false, e.to_string())])
    }

    fn checks(self, execution: Execution) -> Result<Vec<Check>> {
        match self {
            Suite::Geometry => geometry(),
            Suite::Interpolation => interpolation(execution),
            Suite::Rates => rates(execution),
            Suite::All => {
                let mut all = geometry()?;
                all.extend(interpolation(execution)?);
                all.extend(rates(execution)?);
                Ok(all)
            }
        }
    }
}

#[derive(Serialize)]
pub struct SuiteReport<'a> {
    pub suite: &'static str,
    pub passed: bool,
    pub checks: &'a [Check],
}

impl<'a> SuiteReport<'a> {
    pub fn new(suite: Suite, checks: &'a [Check]) -> Self {
        Self {
            suite: suite.name(),
            passed: all_passed(checks),
            checks,
        }
    }
}

const SAMPLE_SEEDS: u64 = 100;
const SAMPLES_PER_SEED: usize = 10;

fn samples(pc: &ProductConstraint) -> Vec<ProductPoint> {
    (0..SAMPLE_SEEDS)
        .flat_map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..SAMPLES_PER_SEED).map(move |_| pc.sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

fn box_pair() -> Result<ProductConstraint> {
    ProductConstraint::new(
        vec![
            ConstraintSet::boxed(vec![-1.0, -1.0, 0.0], vec![1.0, 1.0, 2.0])?,
            ConstraintSet::boxed(vec![0.0, -2.0, 1.0], vec![2.0, 0.5, 1.5])?,
        ],
        Weights::new(vec![0.35, 0.65])?,
    )
}

fn max_of(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(f64::NEG_INFINITY, f64::max)
}

fn geometry() -> Result<Vec<Check>> {
    let pc = box_pair()?;
    let pts = samples(&pc);
    let mut checks = Vec::new();

    let mut disagreements = 0;
    for x in &pts {
        if !prop2_equivalence(x, &pc, 1e-9)?.agree() {
            disagreements += 1;
        }
    }
    // off-diagonal witness whose average is feasible
    let witness_pc = ProductConstraint::new(
        vec![
            ConstraintSet::boxed(vec![-1.0; 2], vec![1.0; 2])?,
            ConstraintSet::boxed(vec![0.0; 2], vec![2.0; 2])?,
        ],
        Weights::uniform(2)?,
    )?;
    let strict = ProductPoint::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]])?;
    let e = prop2_equivalence(&strict, &witness_pc, 1e-9)?;
    let strict_ok = e.d_zero
        && e.avg_in_intersection
        && e.proj_in_product
        && dist_diag_sq(&strict, witness_pc.weights())? > 0.0;
    checks.push(Check::new(
        "equivalence",
        disagreements == 0 && strict_ok,
        format!(
            "{disagreements} of {} samples disagree; off-diagonal witness {}",
            pts.len(),
            if strict_ok { "holds" } else { "fails" }
        ),
    ));

    let reports = pts
        .iter()
        .map(|x| penalty_report(x, &pc))
        .collect::<Result<Vec<_>>>()?;
    let sandwiched = reports.iter().filter(|r| r.d_sandwiched(1e-12)).count();
    checks.push(Check::new(
        "d-between-zero-and-dist",
        sandwiched == reports.len(),
        format!("{sandwiched} of {} samples", reports.len()),
    ));
    let orth = max_of(
        reports
            .iter()
            .map(|r| r.orthogonal_decomposition_residual.unwrap_or(f64::INFINITY)),
    );
    checks.push(Check::at_most("orthogonal-decomposition", orth, 1e-9));

    let decs = pts
        .iter()
        .map(|x| decomposition_identity(x, &pc))
        .collect::<Result<Vec<_>>>()?;
    checks.push(Check::at_most(
        "decomposition-identity",
        max_of(decs.iter().map(|d| d.residual)),
        1e-9,
    ));
    checks.push(Check::at_most(
        "decomposition-sign",
        max_of(decs.iter().map(|d| d.cross_term)),
        1e-9,
    ));

    let ex = IntervalExample::new(1.0)?;
    let ipts = samples(&ex.constraint);
    let mut worst = f64::NEG_INFINITY;
    for pair in ipts.windows(2) {
        let g = gbound_check(&pair[0], &pair[1], &ex.constraint)?;
        worst = worst.max(g.dist_sq - g.bound).max(g.pair_sq - g.bound);
    }
    checks.push(Check::at_most("diameter-bound", worst, 1e-9));
    Ok(checks)
}

fn interpolation(execution: Execution) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let ex = IntervalExample::new(1.0)?;
    let w = ex.constraint.weights();

    let mut worst: f64 = 0.0;
    for x in samples(&ex.constraint) {
        for &(lambda, delta) in &[(0.0, 1.0), (1.0, 10.0), (10.0, 1e3)] {
            let pen = PenalizedObjective::new(&ex.objective, lambda, w)?;
            let (lhs, rhs) = pen.shifted_identity(delta, &x)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    checks.push(Check::at_most("shifted-identity", worst, 1e-12));

    let grid = GridOracle {
        execution,
        ..GridOracle::default()
    };
    let tol = 1e-3;
    let mut sandwich_ok = true;
    let mut detail = Vec::new();
    for &lambda in &[0.0, 1.0, 1e6] {
        let s = grid.sandwich_check(&ex.objective, &ex.constraint, lambda)?;
        sandwich_ok &= s.holds(tol);
        detail.push(format!("λ={lambda}: {:.4} ≥ {:.4} ≥ {:.4}", s.lhs, s.mid, s.rhs));
    }
    checks.push(Check::new("sandwich", sandwich_ok, detail.join("; ")));

    let lambdas = [0.0, 1.0, 10.0, 100.0, 1e4];
    let inf = grid.limit_of_infima(&ex.objective, &ex.constraint, &lambdas)?;
    let lhs = grid.inf_intersection(&ex.objective, &ex.constraint)?.value;
    let monotone = inf.windows(2).all(|p| p[1] >= p[0]);
    let last = *inf.last().unwrap_or(&f64::NAN);
    checks.push(Check::new(
        "limit-of-infima",
        monotone && (last - lhs).abs() <= tol,
        format!(
            "infima {:?}, target {lhs}",
            inf.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>()
        ),
    ));

    let step = grid.resolution(&ex.constraint);
    let mut worst_arg: f64 = 0.0;
    for &lambda in &[0.0, 0.5, 1.0, 3.0, 10.0] {
        let (x, _) = interval_analytic_minimizer(ex.z, lambda)?;
        let g = grid.inf_penalized(&ex.objective, &ex.constraint, lambda)?;
        for (a, b) in g.point.blocks().iter().flatten().zip(x.blocks().iter().flatten()) {
            worst_arg = worst_arg.max((a - b).abs());
        }
    }
    checks.push(Check::at_most("closed-form-argmin", worst_arg, step));

    checks.push(regularization_order(&ex)?);
    Ok(checks)
}

/// Closed-form minimizers along increasing λ: `f(Ax*)` must not fall and
/// `dist²_D(x*)` must not rise.
pub fn regularization_order(ex: &IntervalExample) -> Result<Check> {
    let w = ex.constraint.weights();
    let mut values = Vec::new();
    for &lambda in &[0.0, 1.0, 10.0, 100.0] {
        let (x, _) = interval_analytic_minimizer(ex.z, lambda)?;
        values.push((ex.objective.value(&average(&x, w)?), dist_diag_sq(&x, w)?));
    }
    let ok = values
        .windows(2)
        .all(|p| p[1].0 >= p[0].0 - 1e-12 && p[1].1 <= p[0].1 + 1e-12);
    Ok(Check::new(
        "regularization-order",
        ok,
        format!("(f, dist²) along λ = 0, 1, 10, 100: {values:?}"),
    ))
}

fn rates(execution: Execution) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let ex = IntervalExample::new(1.0)?;
    let mut opts = SolveOptions::new(10_000);
    opts.execution = execution;
    let res = scg_solve(
        &ex.objective,
        &ex.constraint,
        &Schedule::convex(1.0)?,
        &lift(&[ex.z], 2)?,
        &opts,
    )?;
    let h = primal_gaps(&res.trace, |l| ex.optimal_value(l));
    let rep = recurrence_check(&ex.objective, &res.trace, &h, 1.0, ex.constraint.r_sq())?;
    checks.push(Check::at_least("recurrence", rep.min_recurrence_slack(), -1e-9));
    checks.push(Check::at_least("convex-envelope", rep.min_envelope_slack(), 0.0));

    let beta = ex.beta_f();
    let mut chain_ok = true;
    for &lambda in &[0.0, 1.0, 10.0] {
        for x in samples(&ex.constraint) {
            chain_ok &= gap_bound_check(&x, &ex.objective, &ex.constraint, lambda, beta)?
                .holds(lambda, 1e-9);
        }
    }
    checks.push(Check::new("gap-chain", chain_ok, "λ ∈ {0, 1, 10} on 1000 samples"));

    let n = 10;
    let f = IndefiniteQuadratic::random(n, 2, 0.5)?;
    let pc = ProductConstraint::new(
        vec![
            ConstraintSet::boxed(vec![0.0; n], vec![1.0; n])?,
            ConstraintSet::l1_ball(n, 1.0)?,
        ],
        Weights::uniform(2)?,
    )?;
    let res = scg_solve(
        &f,
        &pc,
        &Schedule::nonconvex(1.0)?,
        &ProductPoint::new(vec![vec![0.0; n]; 2])?,
        &opts,
    )?;
    let above = res
        .trace
        .iter()
        .filter(|t| t.rate_envelope.is_none_or(|e| t.avg_fw_gap > e))
        .count();
    checks.push(Check::new(
        "nonconvex-envelope",
        above == 0 && !f.is_convex(),
        format!("{above} of {} rows above the envelope", res.trace.len()),
    ));
    Ok(checks)
}
