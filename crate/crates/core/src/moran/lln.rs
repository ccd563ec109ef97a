use serde::Serialize;

use crate::dynamics::{integrate_grid, DriftPolicy, ExactMethod, ExactSolver};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::moran::forward::{InitMode, MoranSimulator, PopulationState};
use crate::partition::DEFAULT_LATTICE_CAP;
use crate::rates::Recombination;
use crate::rng::{replicate_rng, run_replicates};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnRow {
    pub population: u64,
    /// Mean over replicates of `TV(Z_t / N, ω_t)`.
    pub mean_tv: f64,
    /// Standard error of `mean_tv`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlnReport {
    pub t: f64,
    pub replicates: u64,
    pub rows: Vec<LlnRow>,
    /// Least-squares slope of `ln mean_tv` against `ln N`.
    pub slope: Option<f64>,
}

impl LlnReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].mean_tv < w[0].mean_tv)
    }

    /// Whether the fitted slope lies in `[lo, hi]`.
    pub fn slope_within(&self, lo: f64, hi: f64) -> bool {
        self.slope.is_some_and(|s| (lo..=hi).contains(&s))
    }
}

/// Least-squares slope of `ln y` against `ln x`; `None` without two
/// distinct positive abscissae or with a nonpositive ordinate.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn deterministic_limit(d: &Recombination<f64>, w0: &Measure<f64>, t: f64) -> Result<Measure<f64>> {
    if d.sites() <= DEFAULT_LATTICE_CAP {
        ExactSolver::new(d, ExactMethod::Semigroup)?.solve(w0, t)
    } else if t == 0.0 {
        Ok(w0.clone())
    } else {
        Ok(integrate_grid(d, w0, &[t], 1e-3, DriftPolicy::Strict)?.states.remove(0))
    }
}

/// Distances of Moran populations from the deterministic solution at time
/// `t`, for each population size, with multinomial initial populations.
pub fn lln_report(
    d: &Recombination<f64>,
    w0: &Measure<f64>,
    t: f64,
    n_list: &[u64],
    replicates: u64,
    seed: u64,
    jobs: usize,
) -> Result<LlnReport> {
    lln_report_with(d, w0, t, n_list, replicates, seed, jobs, InitMode::Multinomial)
}

#[allow(clippy::too_many_arguments)]
pub fn lln_report_with(
    d: &Recombination<f64>,
    w0: &Measure<f64>,
    t: f64,
    n_list: &[u64],
    replicates: u64,
    seed: u64,
    jobs: usize,
    init: InitMode,
) -> Result<LlnReport> {
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::domain("population sizes must be a nonempty list of positive integers"));
    }
    if replicates == 0 {
        return Err(Error::domain("need at least one replicate"));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("time t = {t} must be finite and nonnegative")));
    }
    let limit = deterministic_limit(d, w0, t)?;
    let sim = MoranSimulator::new(d);
    let mut rows = Vec::with_capacity(n_list.len());
    for (k, &n) in n_list.iter().enumerate() {
        let stream = seed ^ ((k as u64) << 40);
        let tvs = run_replicates(replicates, jobs, || (), |_, r| -> Result<f64> {
            let mut rng = replicate_rng(stream, r);
            let z0 = PopulationState::from_distribution(w0, n, init, &mut rng)?;
            let zt = sim.run(&z0, t, &mut rng)?;
            zt.frequencies().total_variation(&limit)
        });
        let tvs: Vec<f64> = tvs.into_iter().collect::<Result<_>>()?;
        let m = tvs.len() as f64;
        let mean = tvs.iter().sum::<f64>() / m;
        let var = if tvs.len() > 1 { tvs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0) } else { 0.0 };
        log::info!("N = {n}: mean TV {mean:.3e} over {replicates} replicates");
        rows.push(LlnRow { population: n, mean_tv: mean, std_error: (var / m).sqrt() });
    }
    let slope = log_log_slope(&rows.iter().map(|r| (r.population as f64, r.mean_tv)).collect::<Vec<_>>());
    Ok(LlnReport { t, replicates, rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::TypeSpace;
    use crate::partition::Partition;

    fn linked_pair() -> Measure<f64> {
        Measure::from_masses(&TypeSpace::binary(2).unwrap(), vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(-0.5))).collect();
        assert!((log_log_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(log_log_slope(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn benchmark_distances_decrease() {
        let d = Recombination::single_crossover(&[1.0]).unwrap();
        let r = lln_report(&d, &linked_pair(), 1.0, &[100, 1000, 10_000], 200, 7, 0).unwrap();
        assert!(r.strictly_decreasing(), "{r:?}");
        assert!(r.slope_within(-0.7, -0.3), "{r:?}");
        assert!(r.rows[2].mean_tv <= 0.01);
    }

    #[test]
    fn mean_frequencies_track_the_solution() {
        let d = Recombination::single_crossover(&[1.0]).unwrap();
        let space = TypeSpace::binary(2).unwrap();
        let z0 = PopulationState::new(&space, [(0, 5000), (3, 5000)]).unwrap();
        let mean = crate::moran::forward_mean_frequencies(&d, &z0, 1.0, 200, 3, 0).unwrap();
        let exact = deterministic_limit(&d, &linked_pair(), 1.0).unwrap();
        assert!(mean.total_variation(&exact).unwrap() <= 0.01);
        // Per-type standard error of the mean over 200 replicates is below 5e-4.
        assert!(mean.sup_distance(&exact).unwrap() <= 2e-3);
    }

    #[test]
    fn equilibrium_start_measures_sampling_noise() {
        let d = Recombination::single_crossover(&[0.7]).unwrap();
        let space = TypeSpace::binary(2).unwrap();
        let marg = Measure::from_masses(&space, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let w0 = marg.recombine(&Partition::finest(crate::partition::SiteSet::full(2))).unwrap();
        let n = 1000u64;
        let r = lln_report(&d, &w0, 0.0, &[n], 2000, 1, 0).unwrap();
        // Mean TV of a multinomial sample: ½ Σ_x E|Z_x/N - p_x| ≈ ½ Σ_x sqrt(2 p_x (1 - p_x) / (π N)).
        let expected: f64 = w0
            .iter()
            .map(|(_, p)| 0.5 * (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n as f64)).sqrt())
            .sum();
        assert!((r.rows[0].mean_tv - expected).abs() < 4.0 * r.rows[0].std_error + 1e-4, "{r:?} vs {expected}");
        // Resampling adds variance 2 μ p (1 - p) / N per unit time on top.
        let moved = lln_report(&d, &w0, 1.0, &[n], 2000, 1, 0).unwrap();
        let drifted = expected * (1.0f64 + 2.0 * 0.7).sqrt();
        assert!((moved.rows[0].mean_tv - drifted).abs() < 0.1 * drifted, "{moved:?} vs {drifted}");
    }

    #[test]
    fn single_replicate_is_reproducible() {
        let d = Recombination::single_crossover(&[1.0]).unwrap();
        let a = lln_report(&d, &linked_pair(), 1.0, &[500], 1, 42, 0).unwrap();
        let b = lln_report(&d, &linked_pair(), 1.0, &[500], 1, 42, 4).unwrap();
        assert_eq!(a, b);
    }
}
