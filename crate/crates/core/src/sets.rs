//! Compact convex sets with linear minimization oracles.
//!
//! Every set exposes an LMO, an analytic diameter bound and a membership
//! predicate. Cheap exact projections exist for singletons, boxes, balls,
//! the simplex and the ℓ1 ball; they are only used by diagnostics.
//!
//! Matrix-valued sets store points as row-major flattened vectors.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::assignment::min_cost_assignment;
use crate::exec::Execution;
use crate::linalg::{frobenius, min_eigvec_sym, top_singular_triple};
use crate::space::{norm, ProductPoint, Weights};
use crate::{Error, Result};

/// Stopping tolerance for the power iterations of the spectral oracles.
pub const POWER_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
enum SetKind {
    Singleton { z: Vec<f64> },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    L1Ball { center: Vec<f64>, radius: f64 },
    Simplex,
    Ball { center: Vec<f64>, radius: f64 },
    NuclearBall { rows: usize, cols: usize, radius: f64 },
    Spectrahedron { n: usize },
    Birkhoff { n: usize },
}

/// A nonempty compact convex subset of `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    kind: SetKind,
    dim: usize,
}

fn invalid(kind: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidSet {
        kind,
        reason: reason.into(),
    }
}

fn check_finite(kind: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(invalid(kind, "non-finite parameter"))
    }
}

fn check_radius(kind: &'static str, r: f64) -> Result<()> {
    if r.is_finite() && r >= 0.0 {
        Ok(())
    } else {
        Err(invalid(kind, format!("radius {r} must be finite and nonnegative")))
    }
}

fn check_dim(kind: &'static str, n: usize) -> Result<()> {
    if n == 0 {
        Err(invalid(kind, "dimension must be positive"))
    } else {
        Ok(())
    }
}

impl ConstraintSet {
    pub fn singleton(z: Vec<f64>) -> Result<Self> {
        check_dim("singleton", z.len())?;
        check_finite("singleton", &z)?;
        let dim = z.len();
        Ok(Self {
            kind: SetKind::Singleton { z },
            dim,
        })
    }

    /// The box `[lower, upper]`.
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim("box", lower.len())?;
        if lower.len() != upper.len() {
            return Err(invalid("box", "bounds have different lengths"));
        }
        check_finite("box", &lower)?;
        check_finite("box", &upper)?;
        if let Some(k) = (0..lower.len()).find(|&k| lower[k] > upper[k]) {
            return Err(invalid("box", format!("lower > upper at coordinate {k}")));
        }
        let dim = lower.len();
        Ok(Self {
            kind: SetKind::Box { lower, upper },
            dim,
        })
    }

    /// The interval `[lo, hi]` in one dimension.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo], vec![hi])
    }

    pub fn l1_ball(n: usize, radius: f64) -> Result<Self> {
        Self::l1_ball_at(vec![0.0; n], radius)
    }

    pub fn l1_ball_at(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_dim("l1-ball", center.len())?;
        check_finite("l1-ball", &center)?;
        check_radius("l1-ball", radius)?;
        let dim = center.len();
        Ok(Self {
            kind: SetKind::L1Ball { center, radius },
            dim,
        })
    }

    /// The unit simplex `{x ≥ 0, Σ x_k = 1}`.
    pub fn simplex(n: usize) -> Result<Self> {
        check_dim("simplex", n)?;
        Ok(Self {
            kind: SetKind::Simplex,
            dim: n,
        })
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::ball_at(vec![0.0; n], radius)
    }

    pub fn ball_at(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_dim("ball", center.len())?;
        check_finite("ball", &center)?;
        check_radius("ball", radius)?;
        let dim = center.len();
        Ok(Self {
            kind: SetKind::Ball { center, radius },
            dim,
        })
    }

    /// `{X ∈ R^{rows×cols} : ‖X‖_* ≤ radius}`.
    pub fn nuclear_ball(rows: usize, cols: usize, radius: f64) -> Result<Self> {
        check_dim("nuclear-ball", rows * cols)?;
        check_radius("nuclear-ball", radius)?;
        Ok(Self {
            kind: SetKind::NuclearBall { rows, cols, radius },
            dim: rows * cols,
        })
    }

    /// Symmetric positive semidefinite `n × n` matrices of unit trace.
    pub fn spectrahedron(n: usize) -> Result<Self> {
        check_dim("spectrahedron", n)?;
        Ok(Self {
            kind: SetKind::Spectrahedron { n },
            dim: n * n,
        })
    }

    /// Doubly stochastic `n × n` matrices.
    pub fn birkhoff(n: usize) -> Result<Self> {
        check_dim("birkhoff", n)?;
        Ok(Self {
            kind: SetKind::Birkhoff { n },
            dim: n * n,
        })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SetKind::Singleton { .. } => "singleton",
            SetKind::Box { .. } => "box",
            SetKind::L1Ball { .. } => "l1-ball",
            SetKind::Simplex => "simplex",
            SetKind::Ball { .. } => "ball",
            SetKind::NuclearBall { .. } => "nuclear-ball",
            SetKind::Spectrahedron { .. } => "spectrahedron",
            SetKind::Birkhoff { .. } => "birkhoff",
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix shape for matrix-valued kinds.
    pub fn shape(&self) -> Option<(usize, usize)> {
        match self.kind {
            SetKind::NuclearBall { rows, cols, .. } => Some((rows, cols)),
            SetKind::Spectrahedron { n } | SetKind::Birkhoff { n } => Some((n, n)),
            _ => None,
        }
    }

    /// Upper bound on `sup ‖a − b‖` over the set.
    pub fn diameter(&self) -> f64 {
        match &self.kind {
            SetKind::Singleton { .. } => 0.0,
            SetKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) * (u - l))
                .sum::<f64>()
                .sqrt(),
            SetKind::L1Ball { radius, .. }
            | SetKind::Ball { radius, .. }
            | SetKind::NuclearBall { radius, .. } => 2.0 * radius,
            SetKind::Simplex | SetKind::Spectrahedron { .. } => 2f64.sqrt(),
            SetKind::Birkhoff { n } => (2.0 * *n as f64).sqrt(),
        }
    }

    /// Upper bound on `sup ‖c‖` over the set.
    pub fn norm_bound(&self) -> f64 {
        match &self.kind {
            SetKind::Singleton { z } => norm(z),
            SetKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| {
                    let m = l.abs().max(u.abs());
                    m * m
                })
                .sum::<f64>()
                .sqrt(),
            SetKind::L1Ball { center, radius } | SetKind::Ball { center, radius } => {
                norm(center) + radius
            }
            SetKind::NuclearBall { radius, .. } => *radius,
            SetKind::Simplex | SetKind::Spectrahedron { .. } => 1.0,
            SetKind::Birkhoff { n } => (*n as f64).sqrt(),
        }
    }

    /// Coordinatewise bounds containing the set.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.dim;
        match &self.kind {
            SetKind::Singleton { z } => (z.clone(), z.clone()),
            SetKind::Box { lower, upper } => (lower.clone(), upper.clone()),
            SetKind::L1Ball { center, radius } | SetKind::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            SetKind::Simplex | SetKind::Birkhoff { .. } => (vec![0.0; n], vec![1.0; n]),
            SetKind::NuclearBall { radius, .. } => (vec![-radius; n], vec![*radius; n]),
            SetKind::Spectrahedron { n: k } => {
                let mut lo = vec![-0.5; n];
                let mut hi = vec![0.5; n];
                for i in 0..*k {
                    lo[i * k + i] = 0.0;
                    hi[i * k + i] = 1.0;
                }
                (lo, hi)
            }
        }
    }

    /// Bounds `(l, u)` when the set is a box or a singleton.
    pub(crate) fn as_box(&self) -> Option<(&[f64], &[f64])> {
        match &self.kind {
            SetKind::Singleton { z } => Some((z, z)),
            SetKind::Box { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }

    pub(crate) fn is_singleton(&self) -> bool {
        matches!(self.kind, SetKind::Singleton { .. })
    }

    fn check_point(&self, c: &[f64]) -> Result<()> {
        if c.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: c.len(),
            });
        }
        if !c.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("direction"));
        }
        Ok(())
    }

    /// A minimizer of `⟨c, ·⟩` over the set. Ties are broken towards the
    /// smallest index; a zero direction yields a fixed canonical vertex.
    pub fn lmo(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.check_point(c)?;
        Ok(self.lmo_unchecked(c))
    }

    pub(crate) fn lmo_unchecked(&self, c: &[f64]) -> Vec<f64> {
        match &self.kind {
            SetKind::Singleton { z } => z.clone(),
            SetKind::Box { lower, upper } => c
                .iter()
                .enumerate()
                .map(|(k, &ck)| if ck >= 0.0 { lower[k] } else { upper[k] })
                .collect(),
            SetKind::L1Ball { center, radius } => {
                let mut k_star = 0;
                for (k, ck) in c.iter().enumerate() {
                    if ck.abs() > c[k_star].abs() {
                        k_star = k;
                    }
                }
                let mut z = center.clone();
                let s = if c[k_star] >= 0.0 { 1.0 } else { -1.0 };
                z[k_star] -= radius * s;
                z
            }
            SetKind::Simplex => {
                let mut k_star = 0;
                for (k, ck) in c.iter().enumerate() {
                    if *ck < c[k_star] {
                        k_star = k;
                    }
                }
                let mut z = vec![0.0; self.dim];
                z[k_star] = 1.0;
                z
            }
            SetKind::Ball { center, radius } => {
                let nc = norm(c);
                if nc == 0.0 {
                    let mut z = center.clone();
                    z[0] += radius;
                    z
                } else {
                    center
                        .iter()
                        .zip(c)
                        .map(|(a, ck)| a - radius * ck / nc)
                        .collect()
                }
            }
            SetKind::NuclearBall { rows, cols, radius } => {
                let mut z = vec![0.0; self.dim];
                match top_singular_triple(c, *rows, *cols, POWER_TOL, power_iters(rows + cols)) {
                    Some(t) => {
                        for i in 0..*rows {
                            for j in 0..*cols {
                                z[i * cols + j] = -radius * t.u[i] * t.v[j];
                            }
                        }
                    }
                    None => z[0] = -radius,
                }
                z
            }
            SetKind::Spectrahedron { n } => {
                let n = *n;
                let mut s = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        s[i * n + j] = 0.5 * (c[i * n + j] + c[j * n + i]);
                    }
                }
                let mut z = vec![0.0; n * n];
                let mu = frobenius(c);
                let v = if mu == 0.0 {
                    None
                } else {
                    min_eigvec_sym(&s, n, mu, POWER_TOL, spectral_iters(n))
                };
                match v {
                    Some(v) => {
                        for i in 0..n {
                            for j in 0..n {
                                z[i * n + j] = v[i] * v[j];
                            }
                        }
                    }
                    None => z[0] = 1.0,
                }
                z
            }
            SetKind::Birkhoff { n } => {
                let n = *n;
                let assign = if c.iter().all(|&v| v == 0.0) {
                    (0..n).collect()
                } else {
                    min_cost_assignment(c, n)
                };
                let mut z = vec![0.0; n * n];
                for (i, j) in assign.into_iter().enumerate() {
                    z[i * n + j] = 1.0;
                }
                z
            }
        }
    }

    /// Euclidean projection onto the set, for the kinds where it is cheap.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        match &self.kind {
            SetKind::Singleton { z } => Ok(z.clone()),
            SetKind::Box { lower, upper } => Ok(x
                .iter()
                .enumerate()
                .map(|(k, v)| v.clamp(lower[k], upper[k]))
                .collect()),
            SetKind::Ball { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let nd = norm(&d);
                if nd <= *radius {
                    Ok(x.to_vec())
                } else {
                    let s = radius / nd;
                    Ok(center.iter().zip(&d).map(|(a, dk)| a + s * dk).collect())
                }
            }
            SetKind::Simplex => Ok(project_simplex(x, 1.0)),
            SetKind::L1Ball { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                if d.iter().map(|v| v.abs()).sum::<f64>() <= *radius {
                    return Ok(x.to_vec());
                }
                let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
                let p = project_simplex(&abs, *radius);
                Ok(center
                    .iter()
                    .zip(d.iter().zip(p))
                    .map(|(a, (dk, pk))| a + dk.signum() * pk)
                    .collect())
            }
            _ => Err(Error::Unsupported {
                kind: self.name(),
                operation: "projection",
            }),
        }
    }

    /// True when `x` satisfies every defining inequality of the set up to `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim || !x.iter().all(|v| v.is_finite()) {
            return false;
        }
        match &self.kind {
            SetKind::Singleton { z } => x.iter().zip(z).all(|(a, b)| (a - b).abs() <= tol),
            SetKind::Box { lower, upper } => x
                .iter()
                .enumerate()
                .all(|(k, v)| *v >= lower[k] - tol && *v <= upper[k] + tol),
            SetKind::L1Ball { center, radius } => {
                x.iter().zip(center).map(|(a, b)| (a - b).abs()).sum::<f64>() <= radius + tol
            }
            SetKind::Simplex => {
                x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            SetKind::Ball { center, radius } => {
                let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                norm(&d) <= radius + tol
            }
            SetKind::NuclearBall { rows, cols, radius } => {
                let m = DMatrix::from_row_slice(*rows, *cols, x);
                m.singular_values().sum() <= radius + tol
            }
            SetKind::Spectrahedron { n } => {
                let n = *n;
                let m = DMatrix::from_row_slice(n, n, x);
                if (m.clone() - m.transpose()).amax() > tol {
                    return false;
                }
                if (m.trace() - 1.0).abs() > tol {
                    return false;
                }
                m.symmetric_eigenvalues().min() >= -tol
            }
            SetKind::Birkhoff { n } => {
                let n = *n;
                if x.iter().any(|v| *v < -tol) {
                    return false;
                }
                (0..n).all(|i| {
                    let row: f64 = x[i * n..(i + 1) * n].iter().sum();
                    let col: f64 = (0..n).map(|r| x[r * n + i]).sum();
                    (row - 1.0).abs() <= tol && (col - 1.0).abs() <= tol
                })
            }
        }
    }

    /// A random point of the set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.dim;
        match &self.kind {
            SetKind::Singleton { z } => z.clone(),
            SetKind::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
            SetKind::Simplex => dirichlet(rng, n),
            SetKind::L1Ball { center, radius } => {
                // the last Dirichlet coordinate is slack, so the ℓ1 norm is ≤ 1
                let d = dirichlet(rng, n + 1);
                center
                    .iter()
                    .zip(&d)
                    .map(|(a, dk)| {
                        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        a + radius * s * dk
                    })
                    .collect()
            }
            SetKind::Ball { center, radius } => {
                let dir = gaussian_unit(rng, n);
                let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
                center.iter().zip(&dir).map(|(a, d)| a + r * d).collect()
            }
            SetKind::NuclearBall { rows, cols, radius } => {
                let k = (*rows).min(*cols);
                let mix = dirichlet(rng, k);
                let scale = radius * rng.random::<f64>();
                let mut z = vec![0.0; n];
                for wt in mix {
                    let u = gaussian_unit(rng, *rows);
                    let v = gaussian_unit(rng, *cols);
                    for i in 0..*rows {
                        for j in 0..*cols {
                            z[i * cols + j] += scale * wt * u[i] * v[j];
                        }
                    }
                }
                z
            }
            SetKind::Spectrahedron { n: k } => {
                let k = *k;
                let mix = dirichlet(rng, k);
                let mut z = vec![0.0; n];
                for wt in mix {
                    let v = gaussian_unit(rng, k);
                    for i in 0..k {
                        for j in 0..k {
                            z[i * k + j] += wt * v[i] * v[j];
                        }
                    }
                }
                z
            }
            SetKind::Birkhoff { n: k } => {
                let k = *k;
                let mix = dirichlet(rng, k);
                let mut perm: Vec<usize> = (0..k).collect();
                let mut z = vec![0.0; n];
                for wt in mix {
                    perm.shuffle(rng);
                    for (i, &j) in perm.iter().enumerate() {
                        z[i * k + j] += wt;
                    }
                }
                z
            }
        }
    }

    /// Deterministic random point for a given seed.
    pub fn random_feasible(&self, seed: u64) -> Vec<f64> {
        self.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }
}

// Power iteration converges like (σ₂/σ₁)^k, and random directions often have
// nearly tied leading values, so the cap is generous; the tolerance usually
// stops it far earlier.
const ITERS_PER_DIM: usize = 1000;

fn power_iters(dims: usize) -> usize {
    ITERS_PER_DIM * dims
}

fn spectral_iters(n: usize) -> usize {
    power_iters(2 * n)
}

fn dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    if s > 0.0 {
        e.iter_mut().for_each(|v| *v /= s);
    } else {
        e.iter_mut().for_each(|v| *v = 1.0 / n as f64);
    }
    e
}

fn gaussian_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let s = norm(&v);
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
            return v;
        }
    }
}

/// Projection onto `{x ≥ 0, Σ x = radius}` by sorting.
fn project_simplex(y: &[f64], radius: f64) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - radius) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// The product `⨉ C_i` together with the weights of the product space.
#[derive(Clone, Debug)]
pub struct ProductConstraint {
    sets: Vec<ConstraintSet>,
    weights: Weights,
}

impl ProductConstraint {
    pub fn new(sets: Vec<ConstraintSet>, weights: Weights) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::NoBlocks);
        }
        if sets.len() != weights.len() {
            return Err(Error::BlockCount {
                expected: sets.len(),
                found: weights.len(),
            });
        }
        let n = sets[0].dim();
        if let Some(s) = sets.iter().find(|s| s.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.dim(),
            });
        }
        Ok(Self { sets, weights })
    }

    pub fn sets(&self) -> &[ConstraintSet] {
        &self.sets
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn num_blocks(&self) -> usize {
        self.sets.len()
    }

    pub fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    pub(crate) fn check_shape(&self, x: &ProductPoint) -> Result<()> {
        if x.num_blocks() != self.num_blocks() {
            return Err(Error::BlockCount {
                expected: self.num_blocks(),
                found: x.num_blocks(),
            });
        }
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// Blockwise LMO.
    pub fn lmo(&self, c: &ProductPoint, exec: Execution) -> Result<ProductPoint> {
        self.check_shape(c)?;
        Ok(ProductPoint::from_blocks(self.lmo_blocks(c.blocks(), exec)))
    }

    pub(crate) fn lmo_blocks(&self, c: &[Vec<f64>], exec: Execution) -> Vec<Vec<f64>> {
        exec.map(&self.sets, |i, s| s.lmo_unchecked(&c[i]))
    }

    /// Blockwise projection onto `⨉ C_i`.
    pub fn project(&self, x: &ProductPoint) -> Result<ProductPoint> {
        self.check_shape(x)?;
        let blocks = self
            .sets
            .iter()
            .zip(x.blocks())
            .map(|(s, b)| s.project(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ProductPoint::from_blocks(blocks))
    }

    pub fn contains(&self, x: &ProductPoint, tol: f64) -> bool {
        self.check_shape(x).is_ok()
            && self
                .sets
                .iter()
                .zip(x.blocks())
                .all(|(s, b)| s.contains(b, tol))
    }

    /// Index of the first block lying outside its set.
    pub fn first_infeasible(&self, x: &ProductPoint, tol: f64) -> Option<usize> {
        (0..self.num_blocks()).find(|&i| !self.sets[i].contains(x.block(i), tol))
    }

    /// `Σ ω_i R_i²`.
    pub fn r_sq(&self) -> f64 {
        self.sets
            .iter()
            .zip(self.weights.iter())
            .map(|(s, w)| w * s.diameter() * s.diameter())
            .sum()
    }

    /// `Σ ω_i R_i`.
    pub fn r_lin(&self) -> f64 {
        self.sets
            .iter()
            .zip(self.weights.iter())
            .map(|(s, w)| w * s.diameter())
            .sum()
    }

    /// Upper bound on `‖c‖` over the weighted Minkowski sum `Σ ω_i C_i`.
    pub fn minkowski_norm_bound(&self) -> f64 {
        self.sets
            .iter()
            .zip(self.weights.iter())
            .map(|(s, w)| w * s.norm_bound())
            .sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ProductPoint {
        ProductPoint::from_blocks(self.sets.iter().map(|s| s.sample(rng)).collect())
    }

    pub fn random_feasible(&self, seed: u64) -> ProductPoint {
        self.sample(&mut ChaCha8Rng::seed_from_u64(seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lmo_examples() {
        let l1 = ConstraintSet::l1_ball(2, 2.0).unwrap();
        assert_eq!(l1.lmo(&[3.0, -1.0]).unwrap(), vec![-2.0, 0.0]);
        let b = ConstraintSet::interval(-2.0, 2.0).unwrap();
        assert_eq!(b.lmo(&[1.0]).unwrap(), vec![-2.0]);
        let s = ConstraintSet::simplex(3).unwrap();
        assert_eq!(s.lmo(&[0.5, -0.2, 0.1]).unwrap(), vec![0.0, 1.0, 0.0]);
        let ball = ConstraintSet::ball(2, 1.0).unwrap();
        let z = ball.lmo(&[3.0, 4.0]).unwrap();
        assert!((z[0] + 0.6).abs() < 1e-15 && (z[1] + 0.8).abs() < 1e-15);
        let sp = ConstraintSet::spectrahedron(2).unwrap();
        let z = sp.lmo(&[1.0, 0.0, 0.0, -1.0]).unwrap();
        let want = [0.0, 0.0, 0.0, 1.0];
        for (a, b) in z.iter().zip(want) {
            assert!((a - b).abs() < 1e-9, "{z:?}");
        }
        assert!(sp.contains(&z, 1e-9));
    }

    #[test]
    fn zero_directions_give_canonical_vertices() {
        assert_eq!(ConstraintSet::ball(2, 1.0).unwrap().lmo(&[0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(
            ConstraintSet::l1_ball(2, 1.0).unwrap().lmo(&[0.0, 0.0]).unwrap(),
            vec![-1.0, 0.0]
        );
        assert_eq!(
            ConstraintSet::nuclear_ball(2, 2, 3.0).unwrap().lmo(&[0.0; 4]).unwrap(),
            vec![-3.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            ConstraintSet::spectrahedron(2).unwrap().lmo(&[0.0; 4]).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            ConstraintSet::birkhoff(2).unwrap().lmo(&[0.0; 4]).unwrap(),
            vec![1.0, 0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn box_ties_go_to_lower() {
        let b = ConstraintSet::boxed(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(b.lmo(&[0.0, -2.0]).unwrap(), vec![-1.0, 3.0]);
    }

    #[test]
    fn projection_examples() {
        let b = ConstraintSet::interval(-2.0, 2.0).unwrap();
        assert_eq!(b.project(&[5.0]).unwrap(), vec![2.0]);
        assert_eq!(b.project(&[0.3]).unwrap(), vec![0.3]);
        let s = ConstraintSet::simplex(3).unwrap();
        assert_eq!(s.project(&[2.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let l1 = ConstraintSet::l1_ball(2, 1.0).unwrap();
        assert_eq!(l1.project(&[2.0, -2.0]).unwrap(), vec![0.5, -0.5]);
        assert!(matches!(
            ConstraintSet::birkhoff(2).unwrap().project(&[0.0; 4]),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let l1 = ConstraintSet::l1_ball(2, 1.0).unwrap();
        assert!(!l1.contains(&[0.6, 0.6], 1e-9));
        let bk = ConstraintSet::birkhoff(3).unwrap();
        assert!(bk.contains(&[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0], 1e-9));
        let nuc = ConstraintSet::nuclear_ball(2, 2, 1.0).unwrap();
        assert!(nuc.contains(&[0.5, 0.0, 0.0, 0.5], 1e-9));
        assert!(!nuc.contains(&[0.6, 0.0, 0.0, 0.6], 1e-9));
    }

    #[test]
    fn samples_are_feasible_and_seeded() {
        let sets = [
            ConstraintSet::singleton(vec![1.0, 2.0]).unwrap(),
            ConstraintSet::boxed(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap(),
            ConstraintSet::l1_ball_at(vec![1.0, 1.0], 0.5).unwrap(),
            ConstraintSet::simplex(4).unwrap(),
            ConstraintSet::ball(3, 2.0).unwrap(),
            ConstraintSet::nuclear_ball(2, 3, 1.5).unwrap(),
            ConstraintSet::spectrahedron(3).unwrap(),
            ConstraintSet::birkhoff(3).unwrap(),
        ];
        for s in &sets {
            for seed in 0..20 {
                let x = s.random_feasible(seed);
                assert!(s.contains(&x, 1e-9), "{} {x:?}", s.name());
                assert_eq!(x, s.random_feasible(seed));
            }
        }
        assert_eq!(sets[0].random_feasible(7), vec![1.0, 2.0]);
    }

    #[test]
    fn invalid_sets_are_rejected() {
        assert!(ConstraintSet::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(ConstraintSet::ball(2, -1.0).is_err());
        assert!(ConstraintSet::simplex(0).is_err());
        assert!(ConstraintSet::singleton(vec![f64::NAN]).is_err());
    }

    #[test]
    fn product_constants() {
        let pc = ProductConstraint::new(
            vec![
                ConstraintSet::singleton(vec![1.0]).unwrap(),
                ConstraintSet::interval(-2.0, 2.0).unwrap(),
            ],
            Weights::uniform(2).unwrap(),
        )
        .unwrap();
        assert_eq!(pc.r_sq(), 8.0);
        assert_eq!(pc.r_lin(), 2.0);
        assert_eq!(pc.minkowski_norm_bound(), 1.5);
        let c = ProductPoint::new(vec![vec![5.0], vec![1.0]]).unwrap();
        let v = pc.lmo(&c, Execution::Sequential).unwrap();
        assert_eq!(v.blocks(), &[vec![1.0], vec![-2.0]]);
        assert!(ProductConstraint::new(
            vec![ConstraintSet::simplex(2).unwrap(), ConstraintSet::simplex(3).unwrap()],
            Weights::uniform(2).unwrap()
        )
        .is_err());
    }
}
