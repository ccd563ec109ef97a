//! Recombination distributions and their marginalization to subsets of sites.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::{cut_partition, Partition, SiteSet, MAX_SITES};
use crate::scalar::Real;

/// How the distribution was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Style {
    /// Probabilities `r(A)` together with the event rate `μ`.
    Probability,
    /// Rates `ϱ(A)` plus an explicit residual rate for faithful copying.
    Rate,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry<T> {
    partition: Partition,
    prob: T,
    rate: T,
}

/// Probabilities `r(A)` over two-block partitions of `S`, with event rate `μ`.
///
/// `r(1) = 1 - Σ r(A)` is implicit and `ϱ(A) = μ r(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Recombination<T> {
    n: usize,
    mu: T,
    style: Style,
    /// Positive entries only, sorted by partition.
    entries: Vec<Entry<T>>,
    residual_prob: T,
    residual_rate: T,
}

fn check_two_block(n: usize, a: &Partition) -> Result<()> {
    if a.ground() != SiteSet::full(n) {
        return Err(Error::domain(format!("{a} is not a partition of 1..={n}")));
    }
    if a.len() != 2 {
        return Err(Error::domain(format!("{a} does not have exactly two blocks")));
    }
    Ok(())
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::domain(format!("number of sites {n} outside 1..={MAX_SITES}")));
    }
    Ok(())
}

fn sorted_support<T: Real>(n: usize, entries: Vec<(Partition, T)>) -> Result<BTreeMap<Partition, T>> {
    let mut map = BTreeMap::new();
    for (a, v) in entries {
        check_two_block(n, &a)?;
        if !(v >= T::zero()) || !v.is_finite() {
            return Err(Error::domain(format!("value {v} for {a} is not finite and nonnegative")));
        }
        if map.insert(a.clone(), v).is_some() {
            return Err(Error::domain(format!("partition {a} listed twice")));
        }
    }
    map.retain(|_, v| !v.is_zero());
    Ok(map)
}

impl<T: Real> Recombination<T> {
    /// Probability style: `r(A)` for two-block `A` with `Σ r(A) ≤ 1`.
    pub fn from_probabilities(n: usize, mu: T, entries: Vec<(Partition, T)>) -> Result<Self> {
        check_sites(n)?;
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::domain(format!("event rate mu = {mu} must be positive")));
        }
        let map = sorted_support(n, entries)?;
        let total: T = map.values().copied().sum();
        if total > T::one() + T::tolerance(1e-12) {
            return Err(Error::domain(format!("recombination probabilities sum to {total} > 1")));
        }
        let entries = map
            .into_iter()
            .map(|(partition, prob)| Entry { partition, prob, rate: mu * prob })
            .collect();
        let residual_prob = (T::one() - total).max(T::zero());
        Ok(Recombination {
            n,
            mu,
            style: Style::Probability,
            entries,
            residual_prob,
            residual_rate: mu * residual_prob,
        })
    }

    /// Rate style: `ϱ(A)` for two-block `A`, plus the rate of events without
    /// recombination. `μ` is the total.
    pub fn from_rates(n: usize, entries: Vec<(Partition, T)>, residual: T) -> Result<Self> {
        check_sites(n)?;
        if !(residual >= T::zero()) || !residual.is_finite() {
            return Err(Error::domain(format!("residual rate {residual} must be finite and nonnegative")));
        }
        let map = sorted_support(n, entries)?;
        let mu = map.values().copied().sum::<T>() + residual;
        if !(mu > T::zero()) {
            return Err(Error::domain("total event rate is zero; give a positive residual rate"));
        }
        let entries = map
            .into_iter()
            .map(|(partition, rate)| Entry { partition, prob: rate / mu, rate })
            .collect();
        Ok(Recombination {
            n,
            mu,
            style: Style::Rate,
            entries,
            residual_prob: residual / mu,
            residual_rate: residual,
        })
    }

    /// Single crossovers: `cut_rates[k-1] = ϱ(A_k)` for the cut after site `k`.
    pub fn single_crossover(cut_rates: &[T]) -> Result<Self> {
        let n = cut_rates.len() + 1;
        let entries = cut_rates
            .iter()
            .enumerate()
            .map(|(i, &r)| Ok((cut_partition(n, i + 1)?, r)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rates(n, entries, T::zero())
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ground(&self) -> SiteSet {
        SiteSet::full(self.n)
    }

    #[inline]
    pub fn mu(&self) -> T {
        self.mu
    }

    #[inline]
    pub fn style(&self) -> Style {
        self.style
    }

    /// `(A, r(A), ϱ(A))` for every two-block `A` with positive mass, in partition order.
    pub fn entries(&self) -> impl Iterator<Item = (&Partition, T, T)> + '_ {
        self.entries.iter().map(|e| (&e.partition, e.prob, e.rate))
    }

    /// `r(1)`.
    pub fn residual_probability(&self) -> T {
        self.residual_prob
    }

    fn lookup(&self, a: &Partition) -> Result<Option<&Entry<T>>> {
        if a.ground() != self.ground() {
            return Err(Error::domain(format!("{a} is not a partition of 1..={}", self.n)));
        }
        if a.len() > 2 {
            return Err(Error::domain(format!("{a} has more than two blocks")));
        }
        Ok(self.entries.iter().find(|e| &e.partition == a))
    }

    /// `ϱ(A)`; for the coarsest partition the rate of faithful copying `μ r(1)`.
    pub fn rate(&self, a: &Partition) -> Result<T> {
        if a.is_coarsest() && a.ground() == self.ground() {
            return Ok(self.residual_rate);
        }
        Ok(self.lookup(a)?.map_or_else(T::zero, |e| e.rate))
    }

    /// `r(A)`, including `r(1)`.
    pub fn probability(&self, a: &Partition) -> Result<T> {
        if a.is_coarsest() && a.ground() == self.ground() {
            return Ok(self.residual_prob);
        }
        Ok(self.lookup(a)?.map_or_else(T::zero, |e| e.prob))
    }

    fn check_marginal_args(&self, u: SiteSet, b: &Partition) -> Result<()> {
        if u.is_empty() || !u.is_subset(self.ground()) {
            return Err(Error::domain(format!("{{{u}}} is not a nonempty subset of 1..={}", self.n)));
        }
        if b.ground() != u {
            return Err(Error::domain(format!("{b} is not a partition of {{{u}}}")));
        }
        if b.len() > 2 {
            return Err(Error::domain(format!("{b} has more than two blocks")));
        }
        Ok(())
    }

    /// `ϱ^U(B) = Σ_{A : A|_U = B} ϱ(A)`, summing over `P_{≤2}(S)` including `1`.
    pub fn marginal_rate(&self, u: SiteSet, b: &Partition) -> Result<T> {
        self.check_marginal_args(u, b)?;
        Ok(self.marginal_value(u, b, |e| e.rate, self.mu))
    }

    /// `r^U(B)`: the same sum with `ϱ` replaced by `r`.
    pub fn marginal_probability(&self, u: SiteSet, b: &Partition) -> Result<T> {
        self.check_marginal_args(u, b)?;
        Ok(self.marginal_value(u, b, |e| e.prob, T::one()))
    }

    /// For `B = 1` this is the complement of the splitting mass, so that a
    /// singleton gets exactly the whole of `total`.
    fn marginal_value(&self, u: SiteSet, b: &Partition, value: impl Fn(&Entry<T>) -> T, total: T) -> T {
        if b.is_coarsest() {
            let split: T = self
                .entries
                .iter()
                .filter(|e| e.partition.restricted_len(u) == 2)
                .map(&value)
                .sum();
            return (total - split).max(T::zero());
        }
        self.entries
            .iter()
            .filter(|e| e.partition.restrict_unchecked(u) == *b)
            .map(value)
            .sum()
    }

    /// The two-block marginal rates `ϱ^U(𝔞) > 0`, `𝔞 ∈ P_2(U)`, in partition order.
    pub fn marginal_splits(&self, u: SiteSet) -> Vec<(Partition, T)> {
        self.splits_by(u, |e| e.rate)
    }

    /// The two-block marginal probabilities `r^U(𝔞) > 0`, `𝔞 ∈ P_2(U)`.
    pub fn marginal_split_probabilities(&self, u: SiteSet) -> Vec<(Partition, T)> {
        self.splits_by(u, |e| e.prob)
    }

    fn splits_by(&self, u: SiteSet, value: impl Fn(&Entry<T>) -> T) -> Vec<(Partition, T)> {
        let mut acc: BTreeMap<Partition, T> = BTreeMap::new();
        for e in &self.entries {
            if e.partition.restricted_len(u) == 2 {
                let part = e.partition.restrict_unchecked(u);
                let slot = acc.entry(part).or_insert_with(T::zero);
                *slot = *slot + value(e);
            }
        }
        acc.into_iter().collect()
    }

    /// `ψ^U(1) = Σ_{𝔞 ≠ 1} ϱ^U(𝔞)`: the total rate at which `U` gets split.
    pub fn split_rate(&self, u: SiteSet) -> T {
        self.entries
            .iter()
            .filter(|e| e.partition.restricted_len(u) == 2)
            .map(|e| e.rate)
            .sum()
    }

    /// `ψ^U(A) = Σ_i ψ^{A_i}(1)`: exit rate of state `A` in the partitioning process.
    pub fn exit_rate(&self, a: &Partition) -> T {
        a.blocks().iter().map(|&b| self.split_rate(b)).sum()
    }

    /// Whether every positive entry is a cut partition `A_k`.
    pub fn is_single_crossover(&self) -> bool {
        self.entries.iter().all(|e| e.partition.is_interval())
    }

    /// `(ϱ(A_1), ..., ϱ(A_{n-1}))`, or an error if some positive entry is not a cut.
    pub fn cut_rates(&self) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.n.saturating_sub(1)];
        for e in &self.entries {
            if !e.partition.is_interval() {
                return Err(Error::NotSingleCrossover(e.partition.to_string()));
            }
            let k = e.partition.blocks()[0].last().expect("nonempty block");
            out[k - 1] = e.rate;
        }
        Ok(out)
    }

    /// Adjacent pairs `(i, i+1)` never separated by any recombination event.
    ///
    /// Such sites stay linked forever and the dynamics does not approach the
    /// full product of single-site marginals.
    pub fn unseparated_adjacent_pairs(&self) -> Vec<(usize, usize)> {
        (1..self.n)
            .filter(|&i| {
                let pair = SiteSet::range(i, i + 1);
                self.split_rate(pair).is_zero()
            })
            .map(|i| (i, i + 1))
            .collect()
    }
}
