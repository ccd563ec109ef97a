//! Closed exponential form of `a_t` in the generic case,
//! `a_t(A) = Σ_{B ≽ A} θ^S(A, B) e^{-ψ^S(B) t}`.
//!
//! `θ^U` is built bottom-up from singletons: for `A ≼ B ≺ 1`,
//!
//! ```text
//! θ^U(A, B) = Σ_{B ≼ C ≺ 1} ϱ^U(C) / (ψ^U(1) - ψ^U(B)) · Π_i θ^{C_i}(A|C_i, B|C_i)
//! θ^U(A, 1) = -Σ_{A ≼ C ≺ 1} θ^U(A, C),    θ^U(1, 1) = 1.
//! ```
//!
//! Only entries reachable through positive rates are stored; all others vanish
//! identically and need no division.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::ancestral::{check_index, Coefficients};
use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionIndex, SiteSet};
use crate::rates::Recombination;
use crate::scalar::Real;

/// Relative tolerance below which `ψ^U(1) - ψ^U(B)` counts as a collision.
pub const GENERIC_TOL: f64 = 1e-9;

/// Exit rates `ψ^U` and recursion coefficients `θ^U` for every subset `U`
/// reachable from `S` through positive marginal rates.
#[derive(Debug, Clone)]
pub struct PsiTheta<T> {
    index: Arc<PartitionIndex>,
    split_rates: HashMap<SiteSet, T>,
    /// `θ^U` as sorted `(A, B, value)` triples, per subset.
    theta: HashMap<SiteSet, Vec<(Partition, Partition, T)>>,
}

impl<T: Real> PsiTheta<T> {
    /// `ψ^U(1)` for a subset `U` visited by the recursion.
    pub fn psi_one(&self, u: SiteSet) -> Option<T> {
        self.split_rates.get(&u).copied()
    }

    /// `ψ^U(A) = Σ_i ψ^{A_i}(1)`, for a partition `A` of a visited subset.
    pub fn psi(&self, a: &Partition) -> Option<T> {
        a.blocks().iter().map(|b| self.split_rates.get(b).copied()).sum()
    }

    /// `θ^U(A, B)`; zero for pairs the recursion never reaches.
    pub fn theta(&self, a: &Partition, b: &Partition) -> Option<T> {
        let table = self.theta.get(&b.ground())?;
        Some(
            table
                .iter()
                .find(|(x, y, _)| x == a && y == b)
                .map_or_else(T::zero, |e| e.2),
        )
    }

    /// Subsets `U` for which `θ^U` was computed.
    pub fn subsets(&self) -> impl Iterator<Item = SiteSet> + '_ {
        self.theta.keys().copied()
    }

    /// Nonzero entries of `θ^U` as `(A, B, θ^U(A, B))`.
    pub fn theta_entries(&self, u: SiteSet) -> &[(Partition, Partition, T)] {
        self.theta.get(&u).map_or(&[], Vec::as_slice)
    }

    #[inline]
    pub fn index(&self) -> &Arc<PartitionIndex> {
        &self.index
    }
}

/// Computes `ψ` and `θ` for the model, failing on a collision
/// `ψ^U(1) ≈ ψ^U(B)` in any denominator the recursion needs.
pub fn compute_psi_theta<T: Real>(d: &Recombination<T>, idx: &Arc<PartitionIndex>) -> Result<PsiTheta<T>> {
    check_index(d, idx)?;
    // Subsets reachable through positive splits, smallest first.
    let mut reachable = BTreeSet::new();
    let mut stack = vec![d.ground()];
    let mut splits: HashMap<SiteSet, Vec<(Partition, T)>> = HashMap::new();
    while let Some(u) = stack.pop() {
        if !reachable.insert((u.len(), u)) {
            continue;
        }
        let s = d.marginal_splits(u);
        for (c, _) in &s {
            stack.extend(c.blocks().iter().copied());
        }
        splits.insert(u, s);
    }

    let mut split_rates: HashMap<SiteSet, T> = HashMap::new();
    let mut split_rate = |u: SiteSet| *split_rates.entry(u).or_insert_with(|| d.split_rate(u));
    let mut theta: HashMap<SiteSet, Vec<(Partition, Partition, T)>> = HashMap::new();
    for &(_, u) in &reachable {
        let one = Partition::coarsest(u);
        let psi_one = split_rate(u);
        let mut numer: BTreeMap<(Partition, Partition), T> = BTreeMap::new();
        for (c, rate) in &splits[&u] {
            let (c1, c2) = (c.blocks()[0], c.blocks()[1]);
            for (a1, b1, v1) in &theta[&c1] {
                for (a2, b2, v2) in &theta[&c2] {
                    let key = (a1.join_disjoint(a2), b1.join_disjoint(b2));
                    let slot = numer.entry(key).or_insert_with(T::zero);
                    *slot = *slot + *rate * *v1 * *v2;
                }
            }
        }
        let mut table = Vec::with_capacity(numer.len() + 1);
        let mut to_one: BTreeMap<Partition, T> = BTreeMap::new();
        for ((a, b), num) in numer {
            let psi_b: T = b.blocks().iter().map(|&blk| split_rate(blk)).sum();
            let gap = psi_one - psi_b;
            let scale = psi_one.abs().max(psi_b.abs());
            if gap.abs() <= T::of(GENERIC_TOL) * scale {
                return Err(Error::NonGeneric {
                    subset: u.to_string(),
                    partition: b.to_string(),
                    gap: gap.as_f64(),
                });
            }
            let value = num / gap;
            let slot = to_one.entry(a.clone()).or_insert_with(T::zero);
            *slot = *slot - value;
            table.push((a, b, value));
        }
        for (a, value) in to_one {
            table.push((a, one.clone(), value));
        }
        table.push((one.clone(), one, T::one()));
        table.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
        theta.insert(u, table);
    }
    Ok(PsiTheta { index: idx.clone(), split_rates, theta })
}

/// `a_t(A) = Σ_{B ≽ A} θ^S(A, B) e^{-ψ^S(B) t}` for every `A ∈ P(S)`.
pub fn coefficients_recursion<T: Real>(pt: &PsiTheta<T>, t: T) -> Result<Coefficients<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::domain(format!("time t = {t} must be finite and nonnegative")));
    }
    let idx = pt.index();
    let mut values = vec![T::zero(); idx.len()];
    for (a, b, theta) in pt.theta_entries(idx.ground()) {
        let psi = pt.psi(b).expect("blocks of stored partitions have exit rates");
        let i = idx.require(a)?;
        values[i] = values[i] + *theta * (-psi * t).exp();
    }
    Coefficients::new(idx.clone(), values)
}
