//! Finite populations: the Moran model with recombination and its genealogy.
//!
//! Populations are stored as type counts. Each of the `N` individuals dies at
//! rate `μ` and is replaced by an offspring whose letters on the blocks of a
//! random partition `A` (drawn with probability `r(A)`) are copied from
//! parents picked uniformly with replacement. Backward in time, the ancestral
//! individuals of one sampled individual form the finite-`N` partitioning
//! process, which splits like `Σ_t` but also coalesces.

mod arg;
mod forward;
mod lln;

pub use arg::{
    ancestry_reconstruct, arg_partition_frequencies, coupled_arg_distance, forward_mean_frequencies,
    reconstructed_distribution, simulate_arg, simulate_arg_with, AncestralState, CoupledArgDistance,
};
pub use forward::{simulate_moran, InitMode, MoranSimulator, PopulationState};
pub use lln::{lln_report, lln_report_with, log_log_slope, LlnReport, LlnRow};
