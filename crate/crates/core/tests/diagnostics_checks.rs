use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scg_core::diagnostics::{
    decomposition_identity, gap_bound_check, gbound_check, interval_analytic_minimizer,
    penalty_d, penalty_report, primal_gaps, prop2_equivalence, recurrence_check, GridOracle,
    IntervalExample,
};
use scg_core::objective::{IndefiniteQuadratic, PenalizedObjective, Quadratic};
use scg_core::sets::{ConstraintSet, ProductConstraint};
use scg_core::solver::{scg_solve, Schedule, SolveOptions};
use scg_core::space::{lift, ProductPoint, Weights};
use scg_core::Error;

fn box_pair() -> ProductConstraint {
    ProductConstraint::new(
        vec![
            ConstraintSet::boxed(vec![-1.0, -1.0, 0.0], vec![1.0, 1.0, 2.0]).unwrap(),
            ConstraintSet::boxed(vec![0.0, -2.0, 1.0], vec![2.0, 0.5, 1.5]).unwrap(),
        ],
        Weights::new(vec![0.35, 0.65]).unwrap(),
    )
    .unwrap()
}

/// One sampler per seed 0–99, ten draws each.
fn seeded_samples(pc: &ProductConstraint) -> impl Iterator<Item = ProductPoint> + '_ {
    (0..100u64).flat_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..10).map(move |_| pc.sample(&mut rng)).collect::<Vec<_>>()
    })
}

#[test]
fn penalty_geometry_on_box_pairs() {
    let pc = box_pair();
    let mut count = 0;
    for x in seeded_samples(&pc) {
        let rep = penalty_report(&x, &pc).unwrap();
        assert!(rep.d_sandwiched(1e-12), "{rep:?}");
        assert!(rep.orthogonal_decomposition_residual.unwrap() <= 1e-9);
        assert!(rep.g_value.unwrap() >= 0.0);
        let dec = decomposition_identity(&x, &pc).unwrap();
        assert!(dec.residual <= 1e-9, "{dec:?}");
        assert!(dec.cross_term <= 1e-9, "{dec:?}");
        count += 1;
    }
    assert_eq!(count, 1000);
}

#[test]
fn feasible_diagonal_points_have_zero_penalties() {
    let pc = box_pair();
    // the intersection is [0, 1] × [−1, 0.5] × [1, 1.5]
    let x = lift(&[0.5, 0.0, 1.2], 2).unwrap();
    let rep = penalty_report(&x, &pc).unwrap();
    assert_eq!(rep.dist_sq, 0.0);
    assert_eq!(rep.d_value, 0.0);
    assert_eq!(rep.g_value, Some(0.0));
    let dec = decomposition_identity(&x, &pc).unwrap();
    assert_eq!((dec.d_value, dec.cross_term), (0.0, 0.0));
}

#[test]
fn interval_penalty_by_hand() {
    let ex = IntervalExample::new(1.0).unwrap();
    let x = ProductPoint::new(vec![vec![1.0], vec![-2.0]]).unwrap();
    // Ax = −½: ½(−½ − 1)² + ½·0
    assert_eq!(penalty_d(&x, &ex.constraint).unwrap(), 1.125);
    let dec = decomposition_identity(&x, &ex.constraint).unwrap();
    assert!(dec.residual <= 1e-12);
}

#[test]
fn penalty_needs_projections() {
    let pc = ProductConstraint::new(
        vec![
            ConstraintSet::birkhoff(2).unwrap(),
            ConstraintSet::boxed(vec![0.0; 4], vec![1.0; 4]).unwrap(),
        ],
        Weights::uniform(2).unwrap(),
    )
    .unwrap();
    let x = pc.random_feasible(1);
    assert!(matches!(penalty_d(&x, &pc), Err(Error::Unsupported { .. })));
    // without a closed-form intersection g is skipped rather than approximated
    let ball_pc = ProductConstraint::new(
        vec![ConstraintSet::ball(2, 1.0).unwrap(), ConstraintSet::simplex(2).unwrap()],
        Weights::uniform(2).unwrap(),
    )
    .unwrap();
    let rep = penalty_report(&ball_pc.random_feasible(2), &ball_pc).unwrap();
    assert_eq!(rep.g_value, None);
    assert!(rep.d_sandwiched(1e-12));
}

#[test]
fn equivalence_witnesses() {
    let ex = IntervalExample::new(1.0).unwrap();
    let diag = lift(&[1.0], 2).unwrap();
    let e = prop2_equivalence(&diag, &ex.constraint, 1e-9).unwrap();
    assert!(e.d_zero && e.avg_in_intersection && e.proj_in_product);

    // Ax = −½ lies outside {1}
    let outside = ProductPoint::new(vec![vec![1.0], vec![-2.0]]).unwrap();
    let e = prop2_equivalence(&outside, &ex.constraint, 1e-9).unwrap();
    assert!(!e.d_zero && !e.avg_in_intersection && !e.proj_in_product);

    // Ax = (½, ½) is in both boxes though x is off the diagonal
    let pc = ProductConstraint::new(
        vec![
            ConstraintSet::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
            ConstraintSet::boxed(vec![0.0, 0.0], vec![2.0, 2.0]).unwrap(),
        ],
        Weights::uniform(2).unwrap(),
    )
    .unwrap();
    let strict = ProductPoint::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
    let e = prop2_equivalence(&strict, &pc, 1e-9).unwrap();
    assert!(e.d_zero && e.avg_in_intersection && e.proj_in_product);
    assert!(penalty_report(&strict, &pc).unwrap().dist_sq > 0.0);
}

#[test]
fn equivalence_agrees_on_samples() {
    let pc = box_pair();
    let mut seen_true = false;
    let mut seen_false = false;
    for x in seeded_samples(&pc) {
        let e = prop2_equivalence(&x, &pc, 1e-9).unwrap();
        assert!(e.agree(), "{e:?}");
        seen_true |= e.d_zero;
        seen_false |= !e.d_zero;
    }
    assert!(seen_true && seen_false);
}

#[test]
fn product_diameter_bounds() {
    let ex = IntervalExample::new(1.0).unwrap();
    let pc = &ex.constraint;
    assert_eq!(pc.r_sq(), 8.0);
    assert_eq!(pc.r_lin(), 2.0);
    let samples: Vec<ProductPoint> = seeded_samples(pc).collect();
    for pair in samples.windows(2) {
        assert!(gbound_check(&pair[0], &pair[1], pc).unwrap().holds(1e-9));
    }
    let same = gbound_check(&samples[0], &samples[0], pc).unwrap();
    assert_eq!(same.pair_sq, 0.0);

    // opposite corners of the box pair realize ½·4² = 8 exactly
    let a = ProductPoint::new(vec![vec![1.0], vec![-2.0]]).unwrap();
    let b = ProductPoint::new(vec![vec![1.0], vec![2.0]]).unwrap();
    let g = gbound_check(&a, &b, pc).unwrap();
    assert_eq!(g.pair_sq, 8.0);
    assert!(g.holds(0.0));

    let pc = box_pair();
    let corners = |i: usize| {
        let (lo, hi) = pc.sets()[i].bounding_box();
        (0..8usize)
            .map(|mask| (0..3).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect())
            .collect::<Vec<Vec<f64>>>()
    };
    let (c0, c1) = (corners(0), corners(1));
    let mut tightest: f64 = 0.0;
    for p in &c0 {
        for q in &c1 {
            for p2 in &c0 {
                for q2 in &c1 {
                    let x = ProductPoint::new(vec![p.clone(), q.clone()]).unwrap();
                    let y = ProductPoint::new(vec![p2.clone(), q2.clone()]).unwrap();
                    let g = gbound_check(&x, &y, &pc).unwrap();
                    assert!(g.holds(1e-12));
                    tightest = tightest.max(g.pair_sq);
                }
            }
        }
    }
    // the bound is attained by antipodal corners
    assert!((tightest - pc.r_sq()).abs() <= 1e-12);
}

#[test]
fn gap_chain_on_the_interval() {
    let ex = IntervalExample::new(1.0).unwrap();
    let beta = ex.beta_f();
    for &lambda in &[0.0, 1.0, 10.0] {
        for x in seeded_samples(&ex.constraint) {
            let gb = gap_bound_check(&x, &ex.objective, &ex.constraint, lambda, beta).unwrap();
            assert!(gb.holds(lambda, 1e-9), "λ={lambda}: {gb:?}");
        }
        let diag = lift(&[1.0], 2).unwrap();
        let gb = gap_bound_check(&diag, &ex.objective, &ex.constraint, lambda, beta).unwrap();
        assert!(gb.subproblem_gap >= gb.inner_gap && gb.inner_gap >= 0.0);
    }
}

#[test]
fn gap_chain_with_a_negative_inner_gap() {
    let ex = IntervalExample::new(1.0).unwrap();
    // Ax = ½: the inner gap ½(½ − 1) is negative
    let x = ProductPoint::new(vec![vec![1.0], vec![0.0]]).unwrap();
    for &lambda in &[0.0, 1.0, 10.0] {
        let gb = gap_bound_check(&x, &ex.objective, &ex.constraint, lambda, ex.beta_f()).unwrap();
        assert_eq!(gb.inner_gap, -0.25);
        assert!(gb.holds(lambda, 1e-12), "{gb:?}");
    }
}

#[test]
fn gap_chain_needs_a_closed_form_intersection() {
    let pc = ProductConstraint::new(
        vec![ConstraintSet::ball(2, 1.0).unwrap(), ConstraintSet::simplex(2).unwrap()],
        Weights::uniform(2).unwrap(),
    )
    .unwrap();
    let f = Quadratic::centered(2).unwrap();
    assert!(gap_bound_check(&pc.random_feasible(0), &f, &pc, 1.0, 1.0).is_err());
}

#[test]
fn sandwich_on_the_interval() {
    let ex = IntervalExample::new(1.0).unwrap();
    let grid = GridOracle::default();
    let tol = 1e-3;
    let s = grid.sandwich_check(&ex.objective, &ex.constraint, 1.0).unwrap();
    assert_eq!(s.lhs, 0.5);
    assert_eq!(s.rhs, 0.0);
    assert!(s.holds(tol));
    assert!((s.mid - ex.optimal_value(1.0)).abs() <= tol);

    let s0 = grid.sandwich_check(&ex.objective, &ex.constraint, 0.0).unwrap();
    assert_eq!(s0.mid, s0.rhs);

    let big = grid.sandwich_check(&ex.objective, &ex.constraint, 1e6).unwrap();
    assert!(big.holds(tol));
    assert!((big.lhs - big.mid).abs() <= tol, "{big:?}");
}

#[test]
fn infima_increase_toward_the_constrained_optimum() {
    let ex = IntervalExample::new(1.0).unwrap();
    let grid = GridOracle::default();
    let lambdas = [0.0, 1.0, 10.0, 100.0, 1e4];
    let inf = grid.limit_of_infima(&ex.objective, &ex.constraint, &lambdas).unwrap();
    assert!(inf.windows(2).all(|w| w[1] >= w[0]), "{inf:?}");
    assert!((inf.last().unwrap() - 0.5).abs() <= 1e-3);
    for (l, v) in lambdas.iter().zip(&inf) {
        assert!((v - ex.optimal_value(*l)).abs() <= 1e-3, "λ={l}");
    }
    assert!(grid.limit_of_infima(&ex.objective, &ex.constraint, &[1.0, 0.0]).is_err());
}

#[test]
fn constant_and_singleton_infima() {
    let grid = GridOracle::with_points(31);
    let zero = IndefiniteQuadratic::new(vec![0.0; 4], vec![0.0; 2]).unwrap();
    let pc = ProductConstraint::new(
        vec![
            ConstraintSet::boxed(vec![-1.0, 0.0], vec![1.0, 1.0]).unwrap(),
            ConstraintSet::boxed(vec![0.0, -1.0], vec![2.0, 0.5]).unwrap(),
        ],
        Weights::uniform(2).unwrap(),
    )
    .unwrap();
    let inf = grid.limit_of_infima(&zero, &pc, &[0.0, 1.0, 100.0]).unwrap();
    assert!(inf.iter().all(|&v| v == 0.0));

    let z = vec![0.3, -0.2];
    let single = ProductConstraint::new(
        vec![ConstraintSet::singleton(z.clone()).unwrap(), ConstraintSet::singleton(z.clone()).unwrap()],
        Weights::uniform(2).unwrap(),
    )
    .unwrap();
    let f = Quadratic::new(vec![1.0, 1.0]).unwrap();
    let inf = grid.limit_of_infima(&f, &single, &[0.0, 5.0]).unwrap();
    use scg_core::objective::SmoothObjective;
    assert!(inf.iter().all(|&v| v == f.value(&z)));
}

#[test]
fn closed_form_matches_the_grid_argmin() {
    let grid = GridOracle::default();
    for &z in &[0.5, 1.0, 2.0] {
        let ex = IntervalExample::new(z).unwrap();
        let step = grid.resolution(&ex.constraint);
        for &lambda in &[0.0, 0.5, 1.0, 3.0, 10.0] {
            let (x, avg) = interval_analytic_minimizer(z, lambda).unwrap();
            let g = grid.inf_penalized(&ex.objective, &ex.constraint, lambda).unwrap();
            assert_eq!(g.point.block(0), x.block(0));
            assert!((g.point.block(1)[0] - x.block(1)[0]).abs() <= step, "z={z} λ={lambda}");
            let pen = PenalizedObjective::new(&ex.objective, lambda, ex.constraint.weights()).unwrap();
            assert!((pen.value(&x).unwrap() - ex.optimal_value(lambda)).abs() <= 1e-15);
            assert!((avg - lambda * z / (1.0 + lambda)).abs() <= 1e-15);
        }
    }
    // λ = 0 puts the free block at −z
    let (x, avg) = interval_analytic_minimizer(1.0, 0.0).unwrap();
    assert_eq!((x.block(1)[0], avg), (-1.0, 0.0));
    let (x, avg) = interval_analytic_minimizer(1.0, 1.0).unwrap();
    assert_eq!((x.block(1)[0], avg), (0.0, 0.5));
    let (_, avg) = interval_analytic_minimizer(1.0, 1e12).unwrap();
    assert!((avg - 1.0).abs() < 1e-11);
}

#[test]
fn grid_refuses_large_instances() {
    let pc = ProductConstraint::new(
        vec![ConstraintSet::boxed(vec![0.0; 4], vec![1.0; 4]).unwrap()],
        Weights::uniform(1).unwrap(),
    )
    .unwrap();
    let f = Quadratic::centered(4).unwrap();
    assert!(matches!(
        GridOracle::default().inf_penalized(&f, &pc, 1.0),
        Err(Error::TooLarge(_))
    ));
    let pc = ProductConstraint::new(
        vec![
            ConstraintSet::boxed(vec![0.0; 2], vec![1.0; 2]).unwrap(),
            ConstraintSet::boxed(vec![0.0; 2], vec![1.0; 2]).unwrap(),
        ],
        Weights::uniform(2).unwrap(),
    )
    .unwrap();
    let f = Quadratic::centered(2).unwrap();
    assert!(matches!(
        GridOracle::default().inf_penalized(&f, &pc, 1.0),
        Err(Error::TooLarge(_))
    ));
}

#[test]
fn recurrence_holds_along_the_interval_run() {
    let ex = IntervalExample::new(1.0).unwrap();
    let x0 = lift(&[1.0], 2).unwrap();
    let res = scg_solve(
        &ex.objective,
        &ex.constraint,
        &Schedule::convex(1.0).unwrap(),
        &x0,
        &SolveOptions::new(10_000),
    )
    .unwrap();
    let h = primal_gaps(&res.trace, |l| ex.optimal_value(l));
    assert!(h.iter().all(|&v| v >= -1e-12));
    let rep = recurrence_check(&ex.objective, &res.trace, &h, 1.0, ex.constraint.r_sq()).unwrap();
    assert!(rep.min_recurrence_slack() >= -1e-9, "{}", rep.min_recurrence_slack());
    assert!(rep.min_envelope_slack() >= 0.0);

    // γ₀ = 1 drops the contraction term
    let (r0, r1) = (&res.trace[0], &res.trace[1]);
    assert_eq!(r0.gamma, 1.0);
    let r = ex.constraint.r_sq();
    assert!(h[1] <= 0.5 * (r1.lambda - r0.lambda) * r + 0.5 * (r0.lambda + 1.0) * r);
}

#[test]
fn recurrence_refuses_nonconvex_objectives() {
    let f = IndefiniteQuadratic::random(3, 0, 0.0).unwrap();
    assert!(recurrence_check(&f, &[], &[], 1.0, 1.0).is_err());
}
