//! Small dense helpers on row-major matrices stored as flat slices, and the
//! power iterations behind the spectral oracles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::space::{dot, norm};

const START_SEED: u64 = 0x5c6_0f1e_1d5e_ed00;

/// `y = A x` for a `rows × cols` matrix.
pub fn matvec(a: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    (0..rows)
        .map(|i| dot(&a[i * cols..(i + 1) * cols], x))
        .collect()
}

/// `x = Aᵀ y` for a `rows × cols` matrix.
pub fn matvec_t(a: &[f64], rows: usize, cols: usize, y: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), rows * cols);
    let mut out = vec![0.0; cols];
    for (i, &yi) in y.iter().enumerate().take(rows) {
        if yi == 0.0 {
            continue;
        }
        for (o, aij) in out.iter_mut().zip(&a[i * cols..(i + 1) * cols]) {
            *o += aij * yi;
        }
    }
    out
}

/// Deterministic pseudo-random unit vector used to start power iterations.
fn start_vector(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED ^ n as u64);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn normalize(v: &mut [f64]) -> f64 {
    let s = norm(v);
    if s > 0.0 {
        v.iter_mut().for_each(|x| *x /= s);
    }
    s
}

/// Leading singular triple `(u, σ, v)` of a matrix, `A v = σ u`.
#[derive(Clone, Debug)]
pub struct SingularTriple {
    pub u: Vec<f64>,
    pub sigma: f64,
    pub v: Vec<f64>,
}

/// Power iteration on `AᵀA`. Stops when successive right vectors differ by at
/// most `tol` in norm or after `max_iter` sweeps. Returns `None` for a matrix
/// that annihilates the start vector (in particular the zero matrix).
pub fn top_singular_triple(
    a: &[f64],
    rows: usize,
    cols: usize,
    tol: f64,
    max_iter: usize,
) -> Option<SingularTriple> {
    let mut v = start_vector(cols);
    for _ in 0..max_iter {
        let av = matvec(a, rows, cols, &v);
        let mut next = matvec_t(a, rows, cols, &av);
        if normalize(&mut next) == 0.0 {
            return None;
        }
        let change = v
            .iter()
            .zip(&next)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        v = next;
        if change <= tol {
            break;
        }
    }
    let mut u = matvec(a, rows, cols, &v);
    let sigma = normalize(&mut u);
    if sigma == 0.0 || !sigma.is_finite() {
        return None;
    }
    Some(SingularTriple { u, sigma, v })
}

/// Unit eigenvector for the smallest eigenvalue of a symmetric `n × n` matrix,
/// by power iteration on `shift·I − S`. `shift` must dominate the spectrum of
/// `S` (any matrix norm of `S` does). Returns `None` when the shifted matrix
/// annihilates the iterate.
pub fn min_eigvec_sym(
    s: &[f64],
    n: usize,
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> Option<Vec<f64>> {
    let mut v = start_vector(n);
    for _ in 0..max_iter {
        let sv = matvec(s, n, n, &v);
        let mut next: Vec<f64> = v.iter().zip(&sv).map(|(x, y)| shift * x - y).collect();
        if normalize(&mut next) == 0.0 {
            return None;
        }
        let change = v
            .iter()
            .zip(&next)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        v = next;
        if change <= tol {
            break;
        }
    }
    Some(v)
}

/// Spectral radius of a symmetric matrix, via the top singular value (which
/// coincides with `max |λ|` for symmetric input).
pub fn spectral_radius_sym(q: &[f64], n: usize) -> f64 {
    top_singular_triple(q, n, n, 1e-13, 20_000).map_or(0.0, |t| t.sigma)
}

/// `λ_max(MᵀM) = σ_max(M)²`.
pub fn gram_lambda_max(m: &[f64], rows: usize, cols: usize) -> f64 {
    top_singular_triple(m, rows, cols, 1e-13, 20_000).map_or(0.0, |t| t.sigma * t.sigma)
}

/// Frobenius norm of a flat matrix.
pub fn frobenius(a: &[f64]) -> f64 {
    norm(a)
}
