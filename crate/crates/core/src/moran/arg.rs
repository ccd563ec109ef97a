use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::ancestral::{Coefficients, SplitSampler};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::moran::forward::{MoranSimulator, PopulationState};
use crate::partition::{Partition, PartitionIndex, SiteSet};
use crate::rates::Recombination;
use crate::rng::{replicate_rng, run_replicates};

/// Ancestral individuals of one sampled individual, each with the sites it
/// passes on and the parent slot it occupies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AncestralState {
    ground: SiteSet,
    blocks: Vec<(SiteSet, u64)>,
}

impl AncestralState {
    fn start(ground: SiteSet) -> Self {
        AncestralState { ground, blocks: vec![(ground, 0)] }
    }

    /// `(sites, label)` per ancestral individual; labels are distinct.
    pub fn blocks(&self) -> &[(SiteSet, u64)] {
        &self.blocks
    }

    /// Number of ancestral individuals.
    pub fn individuals(&self) -> usize {
        self.blocks.len()
    }

    /// The induced partition `Σ^{(N)}` of the sites.
    pub fn partition(&self) -> Partition {
        Partition::from_blocks_unchecked(self.ground, self.blocks.iter().map(|b| b.0).collect())
    }
}

/// Runs the genealogy backward for time `t_end`. With `population = None`
/// no two lines ever share a parent and the chain is the limiting
/// partitioning process.
///
/// Every event consumes the same random numbers whatever the population
/// size, so runs with one stream and different sizes agree until the first
/// coalescence.
pub fn simulate_arg_with<R: Rng + ?Sized>(
    sampler: &mut SplitSampler<'_, f64>,
    population: Option<u64>,
    t_end: f64,
    rng: &mut R,
) -> Result<AncestralState> {
    if population == Some(0) {
        return Err(Error::domain("population size N must be positive"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::domain(format!("time t = {t_end} must be finite and nonnegative")));
    }
    let mu = sampler.model().mu();
    let mut state = AncestralState::start(sampler.model().ground());
    let mut fresh = 1u64;
    let mut now = 0.0;
    loop {
        let m = state.blocks.len();
        now += Exp::new(m as f64 * mu).expect("positive rate").sample(rng);
        if now > t_end {
            break;
        }
        let j = ((rng.random::<f64>() * m as f64) as usize).min(m - 1);
        let (block, _) = state.blocks.remove(j);
        let pieces = match sampler.sample_split_step(block, rng) {
            None => [Some(block), None],
            Some((a, b)) => [Some(a), Some(b)],
        };
        for piece in pieces.into_iter().flatten() {
            let u = rng.random::<f64>();
            let slot = match population {
                Some(n) => ((u * n as f64) as u64).min(n - 1),
                None => {
                    fresh += 1;
                    fresh - 1
                }
            };
            match state.blocks.iter_mut().find(|b| b.1 == slot) {
                Some(b) => b.0 = b.0.union(piece),
                None => state.blocks.push((piece, slot)),
            }
        }
    }
    Ok(state)
}

/// The genealogy of one individual in a population of size `n_pop`.
pub fn simulate_arg(d: &Recombination<f64>, n_pop: u64, t_end: f64, seed: u64) -> Result<AncestralState> {
    simulate_arg_with(&mut SplitSampler::new(d), Some(n_pop), t_end, &mut replicate_rng(seed, 0))
}

fn check_index(d: &Recombination<f64>, idx: &PartitionIndex) -> Result<()> {
    if idx.ground() != d.ground() {
        return Err(Error::domain("partition index does not match the recombination model"));
    }
    Ok(())
}

fn frequencies(idx: &Arc<PartitionIndex>, states: impl Iterator<Item = Partition>, total: u64) -> Result<Coefficients<f64>> {
    let mut counts = vec![0u64; idx.len()];
    for s in states {
        counts[idx.require(&s)?] += 1;
    }
    Coefficients::new(idx.clone(), counts.into_iter().map(|c| c as f64 / total as f64).collect())
}

/// Empirical law of `Σ_t^{(N)}` over `replicates` genealogies.
pub fn arg_partition_frequencies(
    d: &Recombination<f64>,
    idx: &Arc<PartitionIndex>,
    population: Option<u64>,
    t: f64,
    replicates: u64,
    seed: u64,
    jobs: usize,
) -> Result<Coefficients<f64>> {
    check_index(d, idx)?;
    if replicates == 0 {
        return Err(Error::domain("need at least one replicate"));
    }
    let states = run_replicates(replicates, jobs, || SplitSampler::new(d), |s, r| {
        simulate_arg_with(s, population, t, &mut replicate_rng(seed, r)).map(|a| a.partition())
    });
    let states: Vec<Partition> = states.into_iter().collect::<Result<_>>()?;
    frequencies(idx, states.into_iter(), replicates)
}

/// Finite-`N` genealogies run on the same random streams as the limiting
/// process.
#[derive(Debug, Clone)]
pub struct CoupledArgDistance {
    pub finite: Coefficients<f64>,
    pub limit: Coefficients<f64>,
    /// Replicates whose final partitions differ.
    pub mismatches: u64,
    /// `½ Σ_A |finite(A) - limit(A)|`, which is the total variation distance
    /// of the control-variate estimate `a_t + finite - limit` from `a_t`.
    pub distance: f64,
}

/// Estimates the distance between the laws of `Σ_t^{(N)}` and `Σ_t` with
/// common random numbers, which removes the sampling noise shared by both.
pub fn coupled_arg_distance(
    d: &Recombination<f64>,
    idx: &Arc<PartitionIndex>,
    population: u64,
    t: f64,
    replicates: u64,
    seed: u64,
    jobs: usize,
) -> Result<CoupledArgDistance> {
    check_index(d, idx)?;
    if replicates == 0 {
        return Err(Error::domain("need at least one replicate"));
    }
    let pairs = run_replicates(replicates, jobs, || SplitSampler::new(d), |s, r| -> Result<(Partition, Partition)> {
        let f = simulate_arg_with(s, Some(population), t, &mut replicate_rng(seed, r))?;
        let l = simulate_arg_with(s, None, t, &mut replicate_rng(seed, r))?;
        Ok((f.partition(), l.partition()))
    });
    let pairs: Vec<(Partition, Partition)> = pairs.into_iter().collect::<Result<_>>()?;
    let mismatches = pairs.iter().filter(|(f, l)| f != l).count() as u64;
    let finite = frequencies(idx, pairs.iter().map(|p| p.0.clone()), replicates)?;
    let limit = frequencies(idx, pairs.iter().map(|p| p.1.clone()), replicates)?;
    let distance = finite.total_variation(&limit)?;
    Ok(CoupledArgDistance { finite, limit, mismatches, distance })
}

/// Type of one individual at time `t`, assembled by tracing its ancestry
/// back to `z0` and copying the letters of distinct founders.
pub fn ancestry_reconstruct(d: &Recombination<f64>, z0: &PopulationState, t: f64, seed: u64) -> Result<u64> {
    let mut rng = replicate_rng(seed, 0);
    ancestry_reconstruct_with(&mut SplitSampler::new(d), z0, t, &mut rng)
}

pub(crate) fn ancestry_reconstruct_with<R: Rng + ?Sized>(
    sampler: &mut SplitSampler<'_, f64>,
    z0: &PopulationState,
    t: f64,
    rng: &mut R,
) -> Result<u64> {
    if z0.space().sites() != sampler.model().sites() {
        return Err(Error::domain("population and recombination model have different numbers of sites"));
    }
    let ancestry = simulate_arg_with(sampler, Some(z0.size()), t, rng)?;
    if ancestry.individuals() as u64 > z0.size() {
        return Err(Error::domain(format!(
            "{} ancestors but only {} founders",
            ancestry.individuals(),
            z0.size()
        )));
    }
    // Founders without replacement.
    let mut pool = z0.clone();
    let mut parts = Vec::with_capacity(ancestry.individuals());
    for &(block, _) in ancestry.blocks() {
        let x = pool.sample_type(rng);
        pool.remove_one(x);
        parts.push((block, x));
    }
    Ok(z0.space().compose(&parts))
}

/// Empirical type distribution of `replicates` reconstructed individuals.
pub fn reconstructed_distribution(
    d: &Recombination<f64>,
    z0: &PopulationState,
    t: f64,
    replicates: u64,
    seed: u64,
    jobs: usize,
) -> Result<Measure<f64>> {
    let types = run_replicates(replicates, jobs, || SplitSampler::new(d), |s, r| {
        ancestry_reconstruct_with(s, z0, t, &mut replicate_rng(seed, r))
    });
    let mut m = Measure::zero(z0.space());
    for x in types {
        m.add_at(x?, 1.0 / replicates as f64);
    }
    Ok(m)
}

/// Replicate average of `Z_t / N` from forward simulation.
pub fn forward_mean_frequencies(
    d: &Recombination<f64>,
    z0: &PopulationState,
    t: f64,
    replicates: u64,
    seed: u64,
    jobs: usize,
) -> Result<Measure<f64>> {
    let sim = MoranSimulator::new(d);
    let states = run_replicates(replicates, jobs, || (), |_, r| sim.run(z0, t, &mut replicate_rng(seed, r)));
    let mut m = Measure::zero(z0.space());
    for z in states {
        m.add_scaled(1.0 / replicates as f64, &z?.frequencies())?;
    }
    Ok(m)
}
