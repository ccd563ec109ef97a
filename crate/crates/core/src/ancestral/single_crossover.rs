use std::sync::Arc;

use crate::ancestral::{check_index, Coefficients};
use crate::error::{Error, Result};
use crate::partition::{cut_set, PartitionIndex};
use crate::rates::Recombination;
use crate::scalar::Real;

/// Closed form of `a_t` for single crossovers.
///
/// The cut after site `k` appears after an independent exponential time with
/// rate `ϱ(A_k)`, so for an interval partition `C` with cut set `G`,
/// `a_t(C) = Π_{k ∈ G} (1 - e^{-t ϱ(A_k)}) Π_{ℓ ∉ G ∪ {n}} e^{-t ϱ(A_ℓ)}`;
/// non-interval partitions get zero.
pub fn coefficients_single_crossover<T: Real>(
    d: &Recombination<T>,
    idx: &Arc<PartitionIndex>,
    t: T,
) -> Result<Coefficients<T>> {
    check_index(d, idx)?;
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::domain(format!("time t = {t} must be finite and nonnegative")));
    }
    let rates = d.cut_rates()?;
    let survive: Vec<T> = rates.iter().map(|&r| (-t * r).exp()).collect();
    let values = idx
        .iter()
        .map(|c| {
            if !c.is_interval() {
                return T::zero();
            }
            let cuts = cut_set(c).expect("interval partition");
            survive
                .iter()
                .enumerate()
                .map(|(i, &s)| if cuts.contains(i + 1) { T::one() - s } else { s })
                .fold(T::one(), |acc, x| acc * x)
        })
        .collect();
    Coefficients::new(idx.clone(), values)
}
