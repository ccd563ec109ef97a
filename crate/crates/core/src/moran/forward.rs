use rand::Rng;
use rand_distr::{Binomial, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Measure, TypeSpace};
use crate::partition::SiteSet;
use crate::rates::Recombination;
use crate::rng::replicate_rng;

/// How a population of size `N` is drawn from a type distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// `Z_0 ~ Multinomial(N, ω_0)`.
    #[default]
    Multinomial,
    /// Largest-remainder rounding of `N ω_0`; deterministic.
    Rounding,
}

/// A population of `N` individuals as counts per type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopulationState {
    space: TypeSpace,
    /// Positive counts sorted by type.
    counts: Vec<(u64, u64)>,
    size: u64,
}

impl PopulationState {
    /// Population from `(type index, count)` pairs; repeated types accumulate.
    pub fn new(space: &TypeSpace, counts: impl IntoIterator<Item = (u64, u64)>) -> Result<Self> {
        let mut out = PopulationState { space: space.clone(), counts: Vec::new(), size: 0 };
        for (x, c) in counts {
            if x >= space.cardinality() {
                return Err(Error::domain(format!("type index {x} outside the type space")));
            }
            out.add(x, c);
        }
        if out.size == 0 {
            return Err(Error::domain("population must have at least one individual"));
        }
        Ok(out)
    }

    /// `n` copies of the type `letters`.
    pub fn monomorphic(space: &TypeSpace, letters: &[usize], n: u64) -> Result<Self> {
        Self::new(space, [(space.encode(letters)?, n)])
    }

    /// A population of size `n` drawn from `w` according to `mode`.
    pub fn from_distribution<R: Rng + ?Sized>(w: &Measure<f64>, n: u64, mode: InitMode, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("population size N must be positive"));
        }
        if !w.is_probability(1e-9) {
            return Err(Error::domain("initial distribution is not a probability measure"));
        }
        let support: Vec<(u64, f64)> = w.support().collect();
        let counts = match mode {
            InitMode::Multinomial => {
                // Sequential conditional binomials.
                let mut left = n;
                let mut mass_left = 1.0;
                let mut out = Vec::with_capacity(support.len());
                for (k, &(x, p)) in support.iter().enumerate() {
                    if left == 0 {
                        break;
                    }
                    let c = if k + 1 == support.len() {
                        left
                    } else {
                        let q = (p / mass_left).clamp(0.0, 1.0);
                        Binomial::new(left, q).expect("probability in [0, 1]").sample(rng)
                    };
                    out.push((x, c));
                    left -= c;
                    mass_left -= p;
                }
                out
            }
            InitMode::Rounding => {
                let scaled: Vec<f64> = support.iter().map(|&(_, p)| p * n as f64).collect();
                let mut counts: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
                let mut order: Vec<usize> = (0..support.len()).collect();
                order.sort_by(|&a, &b| {
                    (scaled[b] - scaled[b].floor())
                        .total_cmp(&(scaled[a] - scaled[a].floor()))
                        .then(a.cmp(&b))
                });
                let short = n.saturating_sub(counts.iter().sum());
                for &i in order.iter().cycle().take(short as usize) {
                    counts[i] += 1;
                }
                support.iter().map(|&(x, _)| x).zip(counts).collect()
            }
        };
        Self::new(w.space(), counts)
    }

    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    /// `N = ‖z‖`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn count(&self, x: u64) -> u64 {
        self.counts.binary_search_by_key(&x, |e| e.0).map_or(0, |i| self.counts[i].1)
    }

    /// `(type, count)` for every type present, in type order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().copied()
    }

    /// `Z / N` as a type distribution.
    pub fn frequencies(&self) -> Measure<f64> {
        let mut m = Measure::zero(&self.space);
        let n = self.size as f64;
        for &(x, c) in &self.counts {
            m.add_at(x, c as f64 / n);
        }
        m
    }

    /// Type of an individual drawn uniformly.
    pub fn sample_type<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut k = rng.random_range(0..self.size);
        for &(x, c) in &self.counts {
            if k < c {
                return x;
            }
            k -= c;
        }
        unreachable!("counts sum to the population size")
    }

    fn add(&mut self, x: u64, c: u64) {
        if c == 0 {
            return;
        }
        match self.counts.binary_search_by_key(&x, |e| e.0) {
            Ok(i) => self.counts[i].1 += c,
            Err(i) => self.counts.insert(i, (x, c)),
        }
        self.size += c;
    }

    /// Removes one individual of type `x`, which must be present.
    pub(crate) fn remove_one(&mut self, x: u64) {
        let i = self.counts.binary_search_by_key(&x, |e| e.0).expect("type present");
        self.counts[i].1 -= 1;
        if self.counts[i].1 == 0 {
            self.counts.remove(i);
        }
        self.size -= 1;
    }

    /// `z ↦ z + δ_x - δ_y`.
    fn replace(&mut self, y: u64, x: u64) {
        if x != y {
            self.remove_one(y);
            self.add(x, 1);
        }
        debug_assert_eq!(self.counts.iter().map(|e| e.1).sum::<u64>(), self.size);
    }
}

/// Forward Moran simulation for one recombination model.
#[derive(Debug, Clone)]
pub struct MoranSimulator<'a> {
    model: &'a Recombination<f64>,
    /// Running sums of `r(A)` with the blocks of `A`.
    partitions: Vec<(f64, Vec<SiteSet>)>,
}

impl<'a> MoranSimulator<'a> {
    pub fn new(model: &'a Recombination<f64>) -> Self {
        let mut acc = 0.0;
        let partitions = model
            .entries()
            .map(|(a, prob, _)| {
                acc += prob;
                (acc, a.blocks().to_vec())
            })
            .collect();
        MoranSimulator { model, partitions }
    }

    fn check(&self, z: &PopulationState) -> Result<()> {
        if z.space.sites() != self.model.sites() {
            return Err(Error::domain(format!(
                "population has {} sites but the recombination model has {}",
                z.space.sites(),
                self.model.sites()
            )));
        }
        Ok(())
    }

    /// One reproduction event; returns `(y, x)` for the transition
    /// `z ↦ z + δ_x - δ_y`, silent when `x = y`.
    pub fn event<R: Rng + ?Sized>(&self, z: &mut PopulationState, rng: &mut R) -> (u64, u64) {
        let y = z.sample_type(rng);
        let u = rng.random::<f64>();
        let k = self.partitions.partition_point(|e| e.0 <= u);
        let x = match self.partitions.get(k) {
            None => z.sample_type(rng),
            Some((_, blocks)) => {
                let parts: Vec<(SiteSet, u64)> = blocks.iter().map(|&b| (b, z.sample_type(rng))).collect();
                z.space.compose(&parts)
            }
        };
        z.replace(y, x);
        (y, x)
    }

    /// Runs the chain from `z0` for time `t_end`.
    pub fn run<R: Rng + ?Sized>(&self, z0: &PopulationState, t_end: f64, rng: &mut R) -> Result<PopulationState> {
        Ok(self.run_grid(z0, &[t_end], rng)?.pop().expect("one grid point"))
    }

    /// States at the points of an increasing grid of times.
    pub fn run_grid<R: Rng + ?Sized>(
        &self,
        z0: &PopulationState,
        grid: &[f64],
        rng: &mut R,
    ) -> Result<Vec<PopulationState>> {
        self.check(z0)?;
        if grid.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("time grid must be finite, nonnegative and strictly increasing"));
        }
        let clock = Exp::new(z0.size as f64 * self.model.mu()).expect("positive event rate");
        let mut z = z0.clone();
        let mut out = Vec::with_capacity(grid.len());
        let mut next = clock.sample(rng);
        for &t in grid {
            while next <= t {
                self.event(&mut z, rng);
                next += clock.sample(rng);
            }
            assert_eq!(z.size, z0.size, "population size changed");
            out.push(z.clone());
        }
        Ok(out)
    }
}

/// `Z_{t_end}` from `z0`, reproducible from `seed`.
pub fn simulate_moran(d: &Recombination<f64>, z0: &PopulationState, t_end: f64, seed: u64) -> Result<PopulationState> {
    MoranSimulator::new(d).run(z0, t_end, &mut replicate_rng(seed, 0))
}
