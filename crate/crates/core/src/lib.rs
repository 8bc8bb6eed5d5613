//! Split conditional gradient (SCG).
//!
//! Minimizes a smooth, possibly nonconvex `f` over an intersection
//! `C_1 ∩ … ∩ C_m` of compact convex sets while only ever calling the linear
//! minimization oracle of each individual set. The intersection constraint is
//! relaxed into the product space `H^m`: every block lives in its own set and
//! disagreement between blocks is penalized by the squared distance to the
//! diagonal subspace, with a penalty weight that grows over the iterations.
//!
//! - [`space`]: product-space algebra (averaging, lifting, diagonal projection)
//! - [`sets`]: constraint sets with their oracles
//! - [`objective`]: smooth objectives and the penalized product objective
//! - [`solver`]: the SCG loop, vanilla conditional gradient, schedules and rates
//! - [`diagnostics`]: checkable identities, inequalities and brute-force oracles
//!
//! With the default `parallel` feature, per-block oracle calls and the
//! brute-force grid searches run on rayon; [`Execution::Sequential`] forces the
//! single-threaded path, which is also the only path when the feature is off.

mod assignment;
pub mod diagnostics;
mod error;
mod exec;
pub mod linalg;
pub mod objective;
pub mod sets;
pub mod solver;
pub mod space;

pub use error::{Error, Result};
pub use exec::Execution;
