//! Exact and stochastic solvers for the deterministic recombination equation.
//!
//! The forward dynamics `ω̇ = Σ_A ϱ(A) (R_A(ω) - ω)` is solved four ways:
//! by Runge-Kutta integration ([`dynamics::integrate`]), and through the
//! ancestral partitioning process whose transition probabilities are computed
//! by uniformization of its generator, by a coefficient recursion, and (for
//! single crossovers) in closed form. Finite-population Moran and ancestral
//! recombination graph simulators check the large-population limits.
//!
//! The numerical core is generic over [`Real`]; the aliases below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ancestral;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod measure;
pub mod moran;
pub mod partition;
pub mod rates;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use partition::{Partition, PartitionIndex, SiteSet};
pub use scalar::Real;

/// Probability measure on the type space, in double precision.
pub type TypeDistribution = measure::Measure<f64>;
/// Recombination distribution with `f64` rates.
pub type RecombinationDistribution = rates::Recombination<f64>;
/// Square array indexed by partitions, in double precision.
pub type PartitionMatrix = ancestral::PartitionMatrix<f64>;
/// Probability vector `a_t` over partitions, in double precision.
pub type CoefficientVector = ancestral::Coefficients<f64>;
/// Solution of the forward dynamics sampled on a time grid.
pub type Trajectory = dynamics::Trajectory<f64>;
