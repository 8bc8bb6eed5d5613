//! Smooth objectives and the penalized product-space objective
//! `F_λ(x) = f(Ax) + (λ/2) dist²_D(x)`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{gram_lambda_max, matvec, matvec_t, spectral_radius_sym};
use crate::space::{average_unchecked, dist_diag_sq_with, dot, norm, ProductPoint, Weights};
use crate::{Error, Result};

/// A differentiable `f: R^n → R` with `L_f`-Lipschitz gradient.
pub trait SmoothObjective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Lipschitz constant `L_f` of the gradient.
    fn lipschitz(&self) -> f64;

    /// Whether `f` is convex.
    fn is_convex(&self) -> bool;

    /// Upper bound on `‖∇f(x)‖` over `‖x‖ ≤ radius`, when one is known.
    fn gradient_bound(&self, _radius: f64) -> Option<f64> {
        None
    }
}

fn check_vec(what: &'static str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// `½‖x − b‖²`, with `L_f = 1`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    b: Vec<f64>,
}

impl Quadratic {
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        check_vec("quadratic target", &b)?;
        Ok(Self { b })
    }

    pub fn centered(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }
}

impl SmoothObjective for Quadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.b).map(|(a, b)| a - b).collect()
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn gradient_bound(&self, radius: f64) -> Option<f64> {
        Some(radius + norm(&self.b))
    }
}

/// `½‖Mx − b‖²`, with `L_f = λ_max(MᵀM)`.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    m: Vec<f64>,
    rows: usize,
    cols: usize,
    b: Vec<f64>,
    lipschitz: f64,
    mt_b_norm: f64,
}

impl LeastSquares {
    /// `m` is row-major `rows × cols`; `b` has length `rows`.
    pub fn new(m: Vec<f64>, rows: usize, cols: usize, b: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || m.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: m.len(),
            });
        }
        if b.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: b.len(),
            });
        }
        check_vec("least-squares matrix", &m)?;
        check_vec("least-squares target", &b)?;
        let lipschitz = gram_lambda_max(&m, rows, cols);
        let mt_b_norm = norm(&matvec_t(&m, rows, cols, &b));
        Ok(Self {
            m,
            rows,
            cols,
            b,
            lipschitz,
            mt_b_norm,
        })
    }
}

impl SmoothObjective for LeastSquares {
    fn dim(&self) -> usize {
        self.cols
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = matvec(&self.m, self.rows, self.cols, x);
        0.5 * r
            .iter()
            .zip(&self.b)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut r = matvec(&self.m, self.rows, self.cols, x);
        r.iter_mut().zip(&self.b).for_each(|(a, b)| *a -= b);
        matvec_t(&self.m, self.rows, self.cols, &r)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn is_convex(&self) -> bool {
        true
    }

    fn gradient_bound(&self, radius: f64) -> Option<f64> {
        Some(self.lipschitz * radius + self.mt_b_norm)
    }
}

/// `½ xᵀQx + qᵀx` for symmetric `Q`, with `L_f` the spectral radius of `Q`.
#[derive(Clone, Debug)]
pub struct IndefiniteQuadratic {
    q_mat: Vec<f64>,
    q: Vec<f64>,
    lipschitz: f64,
    convex: bool,
}

impl IndefiniteQuadratic {
    /// `q_mat` is row-major `n × n` and must be symmetric.
    pub fn new(q_mat: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let n = q.len();
        if n == 0 || q_mat.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: q_mat.len(),
            });
        }
        check_vec("quadratic matrix", &q_mat)?;
        check_vec("linear term", &q)?;
        let scale = q_mat.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (q_mat[i * n + j] - q_mat[j * n + i]).abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::Refused(format!(
                        "quadratic matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let lipschitz = spectral_radius_sym(&q_mat, n);
        let min_eig = DMatrix::from_row_slice(n, n, &q_mat)
            .symmetric_eigenvalues()
            .min();
        Ok(Self {
            q_mat,
            q,
            lipschitz,
            convex: min_eig >= 0.0,
        })
    }

    /// `Q = U diag(linspace(−1, 1, n)) Uᵀ` for a random orthogonal `U`, so
    /// `L_f = 1`, and `q` Gaussian scaled by `q_scale`. Needs `n ≥ 2`.
    pub fn random(n: usize, seed: u64, q_scale: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Refused("random indefinite quadratic needs n ≥ 2".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let u = DMatrix::from_row_slice(n, n, &g).qr().q();
        let eig = DVector::from_iterator(n, (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64));
        let q = &u * DMatrix::from_diagonal(&eig) * u.transpose();
        let mut q_mat = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                q_mat[i * n + j] = 0.5 * (q[(i, j)] + q[(j, i)]);
            }
        }
        let lin: Vec<f64> = (0..n)
            .map(|_| {
                let s: f64 = StandardNormal.sample(&mut rng);
                q_scale * s
            })
            .collect();
        Self::new(q_mat, lin)
    }

    pub fn matrix(&self) -> &[f64] {
        &self.q_mat
    }

    pub fn linear(&self) -> &[f64] {
        &self.q
    }
}

impl SmoothObjective for IndefiniteQuadratic {
    fn dim(&self) -> usize {
        self.q.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.q.len();
        0.5 * dot(x, &matvec(&self.q_mat, n, n, x)) + dot(&self.q, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.q.len();
        let mut g = matvec(&self.q_mat, n, n, x);
        g.iter_mut().zip(&self.q).for_each(|(a, b)| *a += b);
        g
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn is_convex(&self) -> bool {
        self.convex
    }

    fn gradient_bound(&self, radius: f64) -> Option<f64> {
        Some(self.lipschitz * radius + norm(&self.q))
    }
}

/// `F_λ(x) = f(Ax) + (λ/2) dist²_D(x)` on the product space.
#[derive(Clone, Copy)]
pub struct PenalizedObjective<'a> {
    base: &'a dyn SmoothObjective,
    lambda: f64,
    weights: &'a Weights,
}

impl<'a> PenalizedObjective<'a> {
    pub fn new(base: &'a dyn SmoothObjective, lambda: f64, weights: &'a Weights) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::Refused(format!("penalty parameter {lambda} must be ≥ 0")));
        }
        Ok(Self {
            base,
            lambda,
            weights,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn weights(&self) -> &Weights {
        self.weights
    }

    pub fn base(&self) -> &dyn SmoothObjective {
        self.base
    }

    /// Gradient Lipschitz constant `L_f + λ`.
    pub fn smoothness(&self) -> f64 {
        self.base.lipschitz() + self.lambda
    }

    fn check(&self, x: &ProductPoint) -> Result<()> {
        if x.num_blocks() != self.weights.len() {
            return Err(Error::BlockCount {
                expected: self.weights.len(),
                found: x.num_blocks(),
            });
        }
        if x.dim() != self.base.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.base.dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    /// `(f(Ax), dist²_D(x))`.
    pub fn parts(&self, x: &ProductPoint) -> Result<(f64, f64)> {
        self.check(x)?;
        let avg = average_unchecked(x.blocks(), self.weights.as_slice());
        Ok((
            self.base.value(&avg),
            dist_diag_sq_with(x.blocks(), &avg, self.weights.as_slice()),
        ))
    }

    pub fn value(&self, x: &ProductPoint) -> Result<f64> {
        let (f, d) = self.parts(x)?;
        Ok(f + 0.5 * self.lambda * d)
    }

    /// Block `i` is `∇f(Ax) + λ(x^i − Ax)`.
    pub fn gradient(&self, x: &ProductPoint) -> Result<ProductPoint> {
        self.check(x)?;
        let avg = average_unchecked(x.blocks(), self.weights.as_slice());
        let g = self.base.gradient(&avg);
        Ok(ProductPoint::from_blocks(penalized_directions(
            x.blocks(),
            &avg,
            &g,
            self.lambda,
        )))
    }

    /// Both sides of `F_λ(x) = F_{λ+Δ}(x) − Δ·½dist²_D(x)`.
    pub fn shifted_identity(&self, delta: f64, x: &ProductPoint) -> Result<(f64, f64)> {
        let (f, d) = self.parts(x)?;
        let lhs = f + 0.5 * self.lambda * d;
        let shifted = f + 0.5 * (self.lambda + delta) * d;
        Ok((lhs, shifted - delta * 0.5 * d))
    }
}

pub(crate) fn penalized_directions(
    blocks: &[Vec<f64>],
    avg: &[f64],
    grad: &[f64],
    lambda: f64,
) -> Vec<Vec<f64>> {
    blocks
        .iter()
        .map(|b| {
            b.iter()
                .zip(avg)
                .zip(grad)
                .map(|((xi, a), g)| g + lambda * (xi - a))
                .collect()
        })
        .collect()
}
