//! Product-space algebra.
//!
//! The product space `H^m` carries the weighted inner product
//! `⟨x, y⟩ = Σ ω_i ⟨x^i, y^i⟩`. All gradients in this crate are taken with
//! respect to that inner product. [`weighted_from_euclidean`] converts a
//! gradient computed blockwise in the plain Euclidean metric.

use crate::{Error, Result};

/// Convex weights `ω_i ∈ (0, 1]` summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights(Vec<f64>);

impl Weights {
    /// Absolute tolerance on `Σ ω_i = 1`.
    pub const SUM_TOLERANCE: f64 = 1e-12;

    /// Validates the weights. Weights that do not sum to one are rejected,
    /// never renormalized.
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        for (i, &w) in omega.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 || w > 1.0 {
                return Err(Error::InvalidWeights(format!(
                    "weight {i} = {w} is outside (0, 1]"
                )));
            }
        }
        let sum: f64 = omega.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Weights(omega))
    }

    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidWeights("no weights given".into()));
        }
        Self::new(vec![1.0 / m as f64; m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }
}

/// A point `x = (x^1, …, x^m)` of the product space: `m ≥ 1` dense blocks of
/// one common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPoint {
    blocks: Vec<Vec<f64>>,
}

impl ProductPoint {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        let first = blocks.first().ok_or(Error::NoBlocks)?;
        let n = first.len();
        for b in &blocks {
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: b.len(),
                });
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("product point"));
            }
        }
        Ok(ProductPoint { blocks })
    }

    /// Internal constructor for blocks already known to be well formed.
    pub(crate) fn from_blocks(blocks: Vec<Vec<f64>>) -> Self {
        debug_assert!(!blocks.is_empty());
        debug_assert!(blocks.iter().all(|b| b.len() == blocks[0].len()));
        ProductPoint { blocks }
    }

    pub fn zeros(m: usize, n: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::NoBlocks);
        }
        Ok(ProductPoint::from_blocks(vec![vec![0.0; n]; m]))
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Dimension of each block.
    pub fn dim(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<Vec<f64>> {
        self.blocks
    }

    /// Blockwise `self - other`.
    pub fn sub(&self, other: &ProductPoint) -> Result<ProductPoint> {
        check_same_shape(self, other)?;
        Ok(ProductPoint::from_blocks(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                .collect(),
        ))
    }

    /// Blockwise `self + other`.
    pub fn add(&self, other: &ProductPoint) -> Result<ProductPoint> {
        check_same_shape(self, other)?;
        Ok(ProductPoint::from_blocks(
            self.blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        ))
    }

    pub fn scale(&self, alpha: f64) -> ProductPoint {
        ProductPoint::from_blocks(
            self.blocks
                .iter()
                .map(|b| b.iter().map(|v| alpha * v).collect())
                .collect(),
        )
    }
}

fn check_same_shape(x: &ProductPoint, y: &ProductPoint) -> Result<()> {
    if x.num_blocks() != y.num_blocks() {
        return Err(Error::BlockCount {
            expected: x.num_blocks(),
            found: y.num_blocks(),
        });
    }
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(())
}

fn check_weights(x: &ProductPoint, w: &Weights) -> Result<()> {
    if x.num_blocks() != w.len() {
        return Err(Error::BlockCount {
            expected: w.len(),
            found: x.num_blocks(),
        });
    }
    Ok(())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Squared Euclidean distance between two points of `H`.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Averaging operator `A x = Σ ω_i x^i`.
pub fn average(x: &ProductPoint, w: &Weights) -> Result<Vec<f64>> {
    check_weights(x, w)?;
    Ok(average_unchecked(x.blocks(), w.as_slice()))
}

pub(crate) fn average_unchecked(blocks: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let mut acc = vec![0.0; blocks[0].len()];
    for (b, &wi) in blocks.iter().zip(w) {
        for (a, v) in acc.iter_mut().zip(b) {
            *a += wi * v;
        }
    }
    acc
}

/// Adjoint of the averaging operator: `A* x = (x, …, x)`.
pub fn lift(x: &[f64], m: usize) -> Result<ProductPoint> {
    if m == 0 {
        return Err(Error::NoBlocks);
    }
    Ok(ProductPoint::from_blocks(vec![x.to_vec(); m]))
}

/// Projection onto the diagonal subspace, `A*A x`.
pub fn proj_diag(x: &ProductPoint, w: &Weights) -> Result<ProductPoint> {
    let avg = average(x, w)?;
    lift(&avg, x.num_blocks())
}

/// `dist²_D(x) = Σ ω_i ‖A x − x^i‖²`.
pub fn dist_diag_sq(x: &ProductPoint, w: &Weights) -> Result<f64> {
    let avg = average(x, w)?;
    Ok(dist_diag_sq_with(x.blocks(), &avg, w.as_slice()))
}

pub(crate) fn dist_diag_sq_with(blocks: &[Vec<f64>], avg: &[f64], w: &[f64]) -> f64 {
    blocks
        .iter()
        .zip(w)
        .map(|(b, &wi)| wi * dist_sq(avg, b))
        .sum()
}

/// Gradient of `½ dist²_D` in the weighted metric: block `i` is `x^i − A x`.
pub fn penalty_grad(x: &ProductPoint, w: &Weights) -> Result<ProductPoint> {
    let avg = average(x, w)?;
    Ok(ProductPoint::from_blocks(
        x.blocks()
            .iter()
            .map(|b| b.iter().zip(&avg).map(|(v, a)| v - a).collect())
            .collect(),
    ))
}

/// Weighted inner product `Σ ω_i ⟨x^i, y^i⟩`.
pub fn inner(x: &ProductPoint, y: &ProductPoint, w: &Weights) -> Result<f64> {
    check_same_shape(x, y)?;
    check_weights(x, w)?;
    Ok(x.blocks()
        .iter()
        .zip(y.blocks())
        .zip(w.iter())
        .map(|((a, b), wi)| wi * dot(a, b))
        .sum())
}

/// Weighted squared norm `‖x‖²_H`.
pub fn product_norm_sq(x: &ProductPoint, w: &Weights) -> Result<f64> {
    inner(x, x, w)
}

/// Converts a blockwise Euclidean gradient into the gradient for the weighted
/// inner product by dividing block `i` by `ω_i`.
pub fn weighted_from_euclidean(g: &ProductPoint, w: &Weights) -> Result<ProductPoint> {
    check_weights(g, w)?;
    Ok(ProductPoint::from_blocks(
        g.blocks()
            .iter()
            .zip(w.iter())
            .map(|(b, wi)| b.iter().map(|v| v / wi).collect())
            .collect(),
    ))
}

/// Inverse of [`weighted_from_euclidean`]: multiplies block `i` by `ω_i`.
pub fn euclidean_from_weighted(g: &ProductPoint, w: &Weights) -> Result<ProductPoint> {
    check_weights(g, w)?;
    Ok(ProductPoint::from_blocks(
        g.blocks()
            .iter()
            .zip(w.iter())
            .map(|(b, wi)| b.iter().map(|v| v * wi).collect())
            .collect(),
    ))
}
