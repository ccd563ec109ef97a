//! Event-driven simulation of the limiting partitioning process.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::ancestral::{check_index, Coefficients};
use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionIndex, SiteSet};
use crate::rates::Recombination;
use crate::rng::{replicate_rng, run_replicates};
use crate::scalar::Real;

#[derive(Debug, Clone)]
struct SplitTable {
    total: f64,
    /// Running sums of `ϱ^U(𝔞)` and the two blocks of `𝔞`.
    cumulative: Vec<(f64, SiteSet, SiteSet)>,
}

/// Lazily tabulated marginal splitting rates of blocks.
#[derive(Debug, Clone)]
pub struct SplitSampler<'a, T> {
    model: &'a Recombination<T>,
    cache: HashMap<SiteSet, SplitTable>,
}

impl<'a, T: Real> SplitSampler<'a, T> {
    pub fn new(model: &'a Recombination<T>) -> Self {
        SplitSampler { model, cache: HashMap::new() }
    }

    pub fn model(&self) -> &'a Recombination<T> {
        self.model
    }

    fn table(&mut self, block: SiteSet) -> &SplitTable {
        let model = self.model;
        self.cache.entry(block).or_insert_with(|| {
            let mut acc = 0.0;
            let cumulative = model
                .marginal_splits(block)
                .into_iter()
                .map(|(a, r)| {
                    acc += r.as_f64();
                    (acc, a.blocks()[0], a.blocks()[1])
                })
                .collect();
            SplitTable { total: acc, cumulative }
        })
    }

    /// `ψ^U(1)`, the rate at which block `U` splits.
    pub fn split_rate(&mut self, block: SiteSet) -> f64 {
        self.table(block).total
    }

    /// Draws a two-block split of `block` with probability proportional to
    /// its marginal rate. `block` must have a positive split rate.
    pub fn sample_split<R: Rng + ?Sized>(&mut self, block: SiteSet, rng: &mut R) -> (SiteSet, SiteSet) {
        let table = self.table(block);
        let u = rng.random::<f64>() * table.total;
        let k = table.cumulative.partition_point(|e| e.0 <= u).min(table.cumulative.len() - 1);
        (table.cumulative[k].1, table.cumulative[k].2)
    }

    /// The splitting step of the finite population genealogy: `block` stays
    /// whole with probability `r^U(1)`, else splits per `r^U(𝔞)`.
    pub fn sample_split_step<R: Rng + ?Sized>(&mut self, block: SiteSet, rng: &mut R) -> Option<(SiteSet, SiteSet)> {
        let mu = self.model.mu().as_f64();
        let table = self.table(block);
        let u = rng.random::<f64>() * mu;
        if u >= table.total {
            return None;
        }
        let k = table.cumulative.partition_point(|e| e.0 <= u).min(table.cumulative.len() - 1);
        Some((table.cumulative[k].1, table.cumulative[k].2))
    }
}

/// One sample of `Σ_t` started at `start`, with the visited states.
///
/// The returned path lists `(jump time, state)` beginning with `(0, start)`.
pub fn simulate_partitioning_path<T: Real, R: Rng + ?Sized>(
    sampler: &mut SplitSampler<'_, T>,
    start: &Partition,
    t: f64,
    rng: &mut R,
) -> Result<Vec<(f64, Partition)>> {
    check_start(sampler.model(), start, t)?;
    let mut path = vec![(0.0, start.clone())];
    let mut blocks: Vec<SiteSet> = start.blocks().to_vec();
    let mut rates: Vec<f64> = blocks.iter().map(|&b| sampler.split_rate(b)).collect();
    let mut now = 0.0;
    loop {
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            break;
        }
        now += Exp::new(total).expect("positive rate").sample(rng);
        if now > t {
            break;
        }
        let mut u = rng.random::<f64>() * total;
        let mut k = 0;
        while k + 1 < rates.len() && u >= rates[k] {
            u -= rates[k];
            k += 1;
        }
        let (left, right) = sampler.sample_split(blocks[k], rng);
        blocks[k] = left;
        rates[k] = sampler.split_rate(left);
        blocks.push(right);
        rates.push(sampler.split_rate(right));
        path.push((now, Partition::from_blocks_unchecked(start.ground(), blocks.clone())));
    }
    Ok(path)
}

/// One sample of `Σ_t` given `Σ_0 = start`.
pub fn simulate_partitioning<T: Real, R: Rng + ?Sized>(
    sampler: &mut SplitSampler<'_, T>,
    start: &Partition,
    t: f64,
    rng: &mut R,
) -> Result<Partition> {
    Ok(simulate_partitioning_path(sampler, start, t, rng)?
        .pop()
        .expect("path starts with the initial state")
        .1)
}

fn check_start<T: Real>(d: &Recombination<T>, start: &Partition, t: f64) -> Result<()> {
    if start.ground() != d.ground() {
        return Err(Error::domain(format!("start {start} is not a partition of 1..={}", d.sites())));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time t = {t} must be finite and nonnegative")));
    }
    Ok(())
}

/// Empirical `a_t` from `replicates` independent samples of `Σ_t`.
pub fn monte_carlo_coefficients<T: Real>(
    d: &Recombination<T>,
    idx: &Arc<PartitionIndex>,
    start: &Partition,
    t: f64,
    replicates: u64,
    seed: u64,
    jobs: usize,
) -> Result<Coefficients<T>> {
    check_index(d, idx)?;
    check_start(d, start, t)?;
    if replicates == 0 {
        return Err(Error::domain("need at least one replicate"));
    }
    let finals = run_replicates(
        replicates,
        jobs,
        || SplitSampler::new(d),
        |sampler, r| {
            let mut rng = replicate_rng(seed, r);
            let end = simulate_partitioning(sampler, start, t, &mut rng).expect("validated arguments");
            idx.position(&end).expect("states stay in P(S)")
        },
    );
    let mut counts = vec![0u64; idx.len()];
    for i in finals {
        counts[i] += 1;
    }
    let values = counts
        .into_iter()
        .map(|c| T::of(c as f64 / replicates as f64))
        .collect();
    Coefficients::new(idx.clone(), values)
}
