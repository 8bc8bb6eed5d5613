//! Canned experiments with fixed seeds and their pass/fail checks.

use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scg_core::diagnostics::{primal_gaps, recurrence_check, IntervalExample};
use scg_core::solver::{IterationRecord, ScheduleKind};
use scg_core::space::{dist_diag_sq, norm_sq};

use crate::config::{
    ObjectiveSpec, OutputSpec, ProblemConfig, ScheduleName, ScheduleSpec, SetSpec, SolverKind,
};
use crate::report::Check;
use crate::runner::{execute, write_summary, Failure, Overrides, RunOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    /// `½x²` over `{1}` and `[−2, 2]`, convex schedule, 10⁵ iterations.
    Interval,
    /// 20×20 sparse low-rank denoising over an ℓ1 ball and a nuclear-norm ball.
    SparseLowRank,
    /// Weighted Minkowski-sum problem with the penalty frozen at zero.
    Minkowski,
    /// Indefinite quadratic over a box and an ℓ1 ball, nonconvex schedule.
    NonconvexBox,
}

pub const ALL: [Builtin; 4] = [
    Builtin::Interval,
    Builtin::SparseLowRank,
    Builtin::Minkowski,
    Builtin::NonconvexBox,
];

const INTERVAL_Z: f64 = 1.0;
const MINKOWSKI_TARGET: f64 = 3.0;
const MINKOWSKI_WEIGHTS: [f64; 2] = [0.3, 0.7];
const SLR_SIDE: usize = 20;
const SLR_RANK: usize = 2;
const SLR_SUPPORT: usize = 4;
const SLR_NOISE: f64 = 0.05;
const NONCONVEX_DIM: usize = 10;

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Interval => "interval",
            Builtin::SparseLowRank => "sparse-low-rank",
            Builtin::Minkowski => "minkowski",
            Builtin::NonconvexBox => "nonconvex-box",
        }
    }

    pub fn default_seed(self) -> u64 {
        match self {
            Builtin::Interval | Builtin::Minkowski => 0,
            Builtin::SparseLowRank => 7,
            Builtin::NonconvexBox => 2,
        }
    }

    /// The experiment as an ordinary configuration.
    pub fn config(self, seed: Option<u64>) -> ProblemConfig {
        let seed = seed.unwrap_or(self.default_seed());
        let base = |objective, sets, weights, kind, lambda0, max_iters, initial| ProblemConfig {
            objective,
            sets,
            weights,
            schedule: ScheduleSpec { kind, lambda0 },
            max_iters,
            seed,
            initial,
            solver: SolverKind::Scg,
            stop: None,
            output: OutputSpec::default(),
        };
        match self {
            Builtin::Interval => base(
                ObjectiveSpec::Quadratic { b: vec![0.0] },
                vec![
                    SetSpec::Singleton {
                        point: vec![INTERVAL_Z],
                    },
                    SetSpec::Interval {
                        lo: -INTERVAL_Z - 1.0,
                        hi: INTERVAL_Z + 1.0,
                    },
                ],
                Some(vec![0.5, 0.5]),
                ScheduleName::Convex,
                1.0,
                100_000,
                Some(vec![vec![INTERVAL_Z], vec![INTERVAL_Z]]),
            ),
            Builtin::SparseLowRank => {
                let data = SparseLowRank::generate(seed);
                let n = SLR_SIDE * SLR_SIDE;
                base(
                    ObjectiveSpec::Quadratic { b: data.observed },
                    vec![
                        SetSpec::L1Ball {
                            dim: n,
                            radius: data.l1_norm,
                            center: None,
                        },
                        SetSpec::NuclearBall {
                            rows: SLR_SIDE,
                            cols: SLR_SIDE,
                            radius: data.nuclear_norm,
                        },
                    ],
                    Some(vec![0.5, 0.5]),
                    ScheduleName::Convex,
                    1.0,
                    2_000,
                    Some(vec![vec![0.0; n]; 2]),
                )
            }
            Builtin::Minkowski => base(
                ObjectiveSpec::Quadratic {
                    b: vec![MINKOWSKI_TARGET; 2],
                },
                vec![
                    SetSpec::Ball {
                        dim: 2,
                        radius: 1.0,
                        center: None,
                    },
                    SetSpec::Box {
                        lower: vec![0.0; 2],
                        upper: vec![1.0; 2],
                    },
                ],
                Some(MINKOWSKI_WEIGHTS.to_vec()),
                ScheduleName::Frozen,
                0.0,
                10_000,
                None,
            ),
            Builtin::NonconvexBox => base(
                ObjectiveSpec::RandomIndefinite {
                    n: NONCONVEX_DIM,
                    seed,
                    q_scale: 0.5,
                },
                vec![
                    SetSpec::Box {
                        lower: vec![0.0; NONCONVEX_DIM],
                        upper: vec![1.0; NONCONVEX_DIM],
                    },
                    SetSpec::L1Ball {
                        dim: NONCONVEX_DIM,
                        radius: 1.0,
                        center: None,
                    },
                ],
                Some(vec![0.5, 0.5]),
                ScheduleName::Nonconvex,
                1.0,
                100_000,
                Some(vec![vec![0.0; NONCONVEX_DIM]; 2]),
            ),
        }
    }

    /// Checks appropriate to the (possibly overridden) run.
    pub fn checks(self, out: &RunOutcome) -> Vec<Check> {
        let r = &out.result;
        let trace = &r.trace;
        let w = out.problem.constraint.weights();
        let final_penalty = dist_diag_sq(&r.x, w).unwrap_or(f64::NAN);
        let kind = out.problem.schedule.kind();
        let mut checks = vec![Check::new(
            "blockwise-feasible",
            out.problem.constraint.contains(&r.x, 1e-9),
            "final iterate lies in every set",
        )];
        match self {
            Builtin::Interval => {
                let ex = IntervalExample::new(INTERVAL_Z).expect("valid example");
                if kind == ScheduleKind::Convex {
                    let h = primal_gaps(trace, |l| ex.optimal_value(l));
                    match recurrence_check(
                        out.problem.objective.as_ref(),
                        trace,
                        &h,
                        out.problem.schedule.lambda0(),
                        out.problem.constraint.r_sq(),
                    ) {
                        Ok(rep) => {
                            checks.push(Check::at_least(
                                "convex-envelope",
                                rep.min_envelope_slack(),
                                0.0,
                            ));
                            checks.push(Check::at_least(
                                "recurrence",
                                rep.min_recurrence_slack(),
                                -1e-9,
                            ));
                        }
                        Err(e) => checks.push(Check::new("recurrence", false, e.to_string())),
                    }
                }
                checks.push(Check::at_most("final-penalty", final_penalty, 1e-3));
                checks.push(Check::at_most(
                    "average-near-z",
                    (r.average[0] - INTERVAL_Z).abs(),
                    1e-2,
                ));
                checks.push(penalty_tail_shrinks(trace));
            }
            Builtin::SparseLowRank => {
                checks.push(penalty_tail_shrinks(trace));
            }
            Builtin::Minkowski => {
                let untouched = trace.iter().all(|t| t.penalized_value == t.f_value);
                checks.push(Check::new(
                    "no-penalty-contribution",
                    untouched,
                    "F_value equals f_value on every row",
                ));
                if kind == ScheduleKind::Frozen && out.problem.schedule.lambda0() == 0.0 {
                    // nearest point of 0.3·B + 0.7·[0, 1]² to (3, 3)
                    let corner = MINKOWSKI_WEIGHTS[1] + MINKOWSKI_WEIGHTS[0] / 2f64.sqrt();
                    let f_star = (MINKOWSKI_TARGET - corner).powi(2);
                    let f_t = out.problem.objective.value(&r.average);
                    checks.push(Check::at_most("minkowski-optimum", f_t - f_star, 1e-3));
                }
            }
            Builtin::NonconvexBox => {
                let violations = trace
                    .iter()
                    .filter(|t| t.rate_envelope.is_some_and(|e| t.avg_fw_gap > e))
                    .count();
                let has_envelope = trace.iter().all(|t| t.rate_envelope.is_some());
                checks.push(Check::new(
                    "nonconvex-envelope",
                    has_envelope && violations == 0,
                    format!("{violations} rows above the envelope"),
                ));
                let min_gap = trace.iter().map(|t| t.fw_gap).fold(f64::INFINITY, f64::min);
                checks.push(Check::at_least("gaps-nonnegative", min_gap, -1e-9));
                checks.push(Check::at_most("final-penalty", final_penalty, 1e-2));
                checks.push(Check::at_most("min-gap", min_gap, 1e-3));
            }
        }
        checks
    }
}

/// Splits the second half of the trace into five windows and asks that the
/// mean penalty does not increase from one window to the next.
pub fn penalty_tail_shrinks(trace: &[IterationRecord]) -> Check {
    const WINDOWS: usize = 5;
    let tail = &trace[trace.len() / 2..];
    let size = tail.len() / WINDOWS;
    if size == 0 {
        return Check::new("penalty-tail-shrinks", false, "trace too short");
    }
    let means: Vec<f64> = tail
        .chunks_exact(size)
        .take(WINDOWS)
        .map(|c| c.iter().map(|t| t.penalty).sum::<f64>() / c.len() as f64)
        .collect();
    let ok = means.windows(2).all(|p| p[1] <= p[0]);
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.3e}")).collect();
    Check::new("penalty-tail-shrinks", ok, format!("window means {}", shown.join(" ")))
}

/// Ground truth and observation for the denoising builtin. The factors have
/// disjoint supports, so they are orthogonal and the nuclear norm is the sum
/// of the singular values.
struct SparseLowRank {
    observed: Vec<f64>,
    l1_norm: f64,
    nuclear_norm: f64,
}

impl SparseLowRank {
    fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = SLR_SIDE;
        let mut rows: Vec<usize> = (0..n).collect();
        let mut cols: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let mut truth = vec![0.0; n * n];
        let mut nuclear_norm = 0.0;
        for k in 0..SLR_RANK {
            let sigma = 2.0 + k as f64;
            let u = sparse_unit(&mut rng, &rows[k * SLR_SUPPORT..(k + 1) * SLR_SUPPORT], n);
            let v = sparse_unit(&mut rng, &cols[k * SLR_SUPPORT..(k + 1) * SLR_SUPPORT], n);
            for i in 0..n {
                for j in 0..n {
                    truth[i * n + j] += sigma * u[i] * v[j];
                }
            }
            nuclear_norm += sigma;
        }
        let l1_norm = truth.iter().map(|v| v.abs()).sum();
        let observed = truth
            .iter()
            .map(|s| {
                let e: f64 = StandardNormal.sample(&mut rng);
                s + SLR_NOISE * e
            })
            .collect();
        Self {
            observed,
            l1_norm,
            nuclear_norm,
        }
    }
}

fn sparse_unit(rng: &mut ChaCha8Rng, support: &[usize], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &i in support {
        v[i] = StandardNormal.sample(rng);
    }
    let s = norm_sq(&v).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// A builtin run together with its checks.
pub struct BuiltinRun {
    pub outcome: RunOutcome,
    pub checks: Vec<Check>,
}

pub fn run(builtin: Builtin, overrides: &Overrides) -> Result<BuiltinRun, Failure> {
    let mut cfg = builtin.config(overrides.seed);
    overrides.apply(&mut cfg);
    let outcome = execute(&cfg, builtin.name(), overrides.execution)?;
    let checks = builtin.checks(&outcome);
    write_summary(&outcome, Some(&checks))?;
    Ok(BuiltinRun { outcome, checks })
}
