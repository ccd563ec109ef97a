//! The ancestral partitioning process and its transition probabilities.
//!
//! Starting from the coarsest partition, every block `A` of the current state
//! is replaced by a two-block partition `𝔞` of `A` at rate `ϱ^A(𝔞)`. The
//! probability `a_t(A)` of sitting in state `A` at time `t` gives the convex
//! weights of the solution `ω_t = Σ_A a_t(A) R_A(ω_0)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionIndex};
use crate::scalar::Real;

mod discrete;
mod generator;
mod recursion;
mod semigroup;
mod simulate;
mod single_crossover;

pub use discrete::{build_discrete_matrix, coefficients_discrete};
pub use generator::build_generator;
pub use recursion::{coefficients_recursion, compute_psi_theta, PsiTheta, GENERIC_TOL};
pub use semigroup::{coefficients_semigroup, exp_generator, UNIFORMIZATION_TOL};
pub use simulate::{monte_carlo_coefficients, simulate_partitioning, simulate_partitioning_path, SplitSampler};
pub use single_crossover::coefficients_single_crossover;

/// Square array indexed by the partitions of an index, row-major.
#[derive(Clone, PartialEq)]
pub struct PartitionMatrix<T> {
    index: Arc<PartitionIndex>,
    values: Vec<T>,
}

impl<T: Real> PartitionMatrix<T> {
    pub fn zeros(index: Arc<PartitionIndex>) -> Self {
        let n = index.len();
        PartitionMatrix { index, values: vec![T::zero(); n * n] }
    }

    pub fn identity(index: Arc<PartitionIndex>) -> Self {
        let mut m = Self::zeros(index);
        for i in 0..m.dim() {
            m.set(i, i, T::one());
        }
        m
    }

    #[inline]
    pub fn index(&self) -> &Arc<PartitionIndex> {
        &self.index
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.index.len()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.dim() + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        let d = self.dim();
        self.values[row * d + col] = v;
    }

    #[inline]
    pub(crate) fn add(&mut self, row: usize, col: usize, v: T) {
        let d = self.dim();
        self.values[row * d + col] = self.values[row * d + col] + v;
    }

    pub fn row(&self, row: usize) -> &[T] {
        let d = self.dim();
        &self.values[row * d..(row + 1) * d]
    }

    /// Entry addressed by partitions.
    pub fn entry(&self, from: &Partition, to: &Partition) -> Result<T> {
        Ok(self.get(self.index.require(from)?, self.index.require(to)?))
    }

    /// Nonzero entries of every row, for sparse propagation.
    pub(crate) fn sparse_rows(&self) -> Vec<Vec<(usize, T)>> {
        (0..self.dim())
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect()
    }

    /// Whether every nonzero entry sits on or above the diagonal, i.e. leads
    /// from a partition to one at the same or a later index position.
    pub fn is_triangular(&self) -> bool {
        (0..self.dim()).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    /// Row sums.
    pub fn row_sums(&self) -> Vec<T> {
        (0..self.dim()).map(|i| self.row(i).iter().copied().sum()).collect()
    }

    /// Checks the stochastic-matrix invariants within `tol`.
    pub fn is_stochastic(&self, tol: f64) -> bool {
        let tol = T::of(tol);
        self.values.iter().all(|&v| v >= -tol && v <= T::one() + tol)
            && self.row_sums().iter().all(|&s| (s - T::one()).abs() <= tol)
    }

    /// Checks the generator invariants: nonnegative off-diagonal, zero row sums.
    pub fn is_generator(&self, tol: f64) -> bool {
        let tol = T::of(tol);
        (0..self.dim()).all(|i| {
            (0..self.dim()).all(|j| i == j || self.get(i, j) >= T::zero())
        }) && self.row_sums().iter().all(|&s| s.abs() <= tol)
    }

    pub fn matmul(&self, other: &PartitionMatrix<T>) -> Result<PartitionMatrix<T>> {
        if self.index.partitions() != other.index.partitions() {
            return Err(Error::domain("matrices are indexed by different partition sets"));
        }
        let d = self.dim();
        let mut out = PartitionMatrix::zeros(self.index.clone());
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    out.add(i, j, a * other.get(k, j));
                }
            }
        }
        Ok(out)
    }

    /// `max_{ij} |self - other|`.
    pub fn max_abs_diff(&self, other: &PartitionMatrix<T>) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }
}

impl<T: Real> fmt::Debug for PartitionMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PartitionMatrix({} x {})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            writeln!(f, "  {:>12}: {:?}", self.index.get(i).to_string(), self.row(i))?;
        }
        Ok(())
    }
}

/// Probability vector `a_t` over the partitions of an index.
#[derive(Clone, PartialEq)]
pub struct Coefficients<T> {
    index: Arc<PartitionIndex>,
    values: Vec<T>,
}

impl<T: Real> Coefficients<T> {
    pub fn new(index: Arc<PartitionIndex>, values: Vec<T>) -> Result<Self> {
        if values.len() != index.len() {
            return Err(Error::domain(format!(
                "{} coefficients for {} partitions",
                values.len(),
                index.len()
            )));
        }
        Ok(Coefficients { index, values })
    }

    /// The point mass on `start`.
    pub fn indicator(index: Arc<PartitionIndex>, start: usize) -> Self {
        let mut values = vec![T::zero(); index.len()];
        values[start] = T::one();
        Coefficients { index, values }
    }

    #[inline]
    pub fn index(&self) -> &Arc<PartitionIndex> {
        &self.index
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, a: &Partition) -> Result<T> {
        Ok(self.values[self.index.require(a)?])
    }

    /// `(A, a_t(A))` in index order.
    pub fn iter(&self) -> impl Iterator<Item = (&Partition, T)> + '_ {
        self.index.iter().zip(self.values.iter().copied())
    }

    pub fn sum(&self) -> T {
        self.values.iter().copied().sum()
    }

    /// `max_A |a(A) - b(A)|`, matching entries by partition.
    pub fn max_abs_diff(&self, other: &Coefficients<T>) -> Result<T> {
        if Arc::ptr_eq(&self.index, &other.index) || self.index.partitions() == other.index.partitions() {
            return Ok(self
                .values
                .iter()
                .zip(&other.values)
                .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs())));
        }
        if self.index.ground() != other.index.ground() {
            return Err(Error::domain("coefficient vectors over different ground sets"));
        }
        let mut worst = T::zero();
        for (a, v) in self.iter() {
            worst = worst.max((v - other.get(a)?).abs());
        }
        Ok(worst)
    }

    /// `½ Σ_A |a(A) - b(A)|`.
    pub fn total_variation(&self, other: &Coefficients<T>) -> Result<T> {
        if self.index.ground() != other.index.ground() {
            return Err(Error::domain("coefficient vectors over different ground sets"));
        }
        let mut sum = T::zero();
        for (a, v) in self.iter() {
            sum = sum + (v - other.get(a)?).abs();
        }
        Ok(sum / T::of(2.0))
    }
}

impl<T: Real> fmt::Debug for Coefficients<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (a, v) in self.iter() {
            m.entry(&a.to_string(), &v);
        }
        m.finish()
    }
}

pub(crate) fn check_index<T: Real>(d: &crate::rates::Recombination<T>, idx: &PartitionIndex) -> Result<()> {
    if idx.ground() != d.ground() {
        return Err(Error::domain(format!(
            "partition index over {{{}}} does not match the {} sites of the recombination model",
            idx.ground(),
            d.sites()
        )));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rates::Recombination;

    pub fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    pub fn index(n: usize) -> Arc<PartitionIndex> {
        Arc::new(PartitionIndex::for_sites(n).unwrap())
    }

    /// `{1|2,3: 0.3, 1,2|3: 0.5, 1,3|2: 0.2}` with `μ = 1`.
    pub fn three_site() -> Recombination<f64> {
        Recombination::from_probabilities(
            3,
            1.0,
            vec![(p("1|2,3"), 0.3), (p("1,2|3"), 0.5), (p("1,3|2"), 0.2)],
        )
        .unwrap()
    }

    pub fn two_site(rho: f64) -> Recombination<f64> {
        Recombination::single_crossover(&[rho]).unwrap()
    }
}
