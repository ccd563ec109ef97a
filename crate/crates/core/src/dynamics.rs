//! Forward solutions of the recombination equation.
//!
//! [`integrate`] steps `ω̇ = Σ_A ϱ(A)(R_A(ω) - ω)` with classical RK4;
//! [`solve_exact`] assembles `ω_t = Σ_A a_t(A) R_A(ω_0)` from ancestral
//! coefficients; [`iterate_discrete`] runs the discrete-time map
//! `ω ↦ Σ_A r(A) R_A(ω)`. All sums over partitions follow index order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ancestral::{
    build_discrete_matrix, build_generator, coefficients_discrete, coefficients_recursion, coefficients_semigroup,
    coefficients_single_crossover, compute_psi_theta, Coefficients, PartitionMatrix, PsiTheta,
};
use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::partition::{Partition, PartitionIndex};
use crate::rates::{Recombination, Style};
use crate::scalar::Real;

/// Largest deviation of the total mass from one tolerated along an integration.
pub const MASS_DRIFT_TOL: f64 = 1e-9;

/// States of a solution on an increasing time grid starting at zero.
#[derive(Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<Measure<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(T, &Measure<T>)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, &Measure<T>)> + '_ {
        self.times.iter().copied().zip(&self.states)
    }
}

impl<T: Real> std::fmt::Debug for Trajectory<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.times.iter().zip(&self.states)).finish()
    }
}

/// What to do with recorded states whose mass drifted, but stayed within
/// [`MASS_DRIFT_TOL`]. Larger drift is always an error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftPolicy {
    /// Record states as computed.
    #[default]
    Strict,
    /// Rescale every recorded state to mass one.
    Renormalize,
}

/// How [`solve_exact`] obtains the coefficients `a_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMethod {
    Semigroup,
    Recursion,
    SingleCrossover,
}

impl std::str::FromStr for ExactMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semigroup" => Ok(ExactMethod::Semigroup),
            "recursion" => Ok(ExactMethod::Recursion),
            "single_crossover" | "single-crossover" => Ok(ExactMethod::SingleCrossover),
            _ => Err(Error::domain(format!(
                "unknown method {s:?}; expected semigroup, recursion or single_crossover"
            ))),
        }
    }
}

fn check_model<T: Real>(d: &Recombination<T>, w: &Measure<T>) -> Result<()> {
    if w.space().sites() != d.sites() {
        return Err(Error::domain(format!(
            "type space has {} sites but the recombination model has {}",
            w.space().sites(),
            d.sites()
        )));
    }
    Ok(())
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::domain(format!("time t = {t} must be finite and nonnegative")));
    }
    Ok(())
}

/// Logs adjacent sites no recombination event separates; convergence to
/// linkage equilibrium only holds once they are glued into one site.
pub fn warn_unseparated<T: Real>(d: &Recombination<T>) {
    let pairs = d.unseparated_adjacent_pairs();
    if !pairs.is_empty() {
        let list: Vec<String> = pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
        log::warn!(
            "adjacent sites {} are never separated; they stay linked and only the glued model reaches linkage equilibrium",
            list.join(" ")
        );
    }
}

/// `Σ_A ϱ(A)(R_A(ω) - ω)`, a signed measure of total mass zero.
pub fn rhs<T: Real>(d: &Recombination<T>, w: &Measure<T>) -> Result<Measure<T>> {
    check_model(d, w)?;
    let mut out = Measure::zero(w.space());
    let mut total = T::zero();
    for (a, _, rate) in d.entries() {
        out.add_scaled(rate, &w.recombine_unchecked(a))?;
        total = total + rate;
    }
    out.add_scaled(-total, w)?;
    Ok(out)
}

fn rk4_step<T: Real>(d: &Recombination<T>, w: &Measure<T>, h: T) -> Result<Measure<T>> {
    let half = h / T::of(2.0);
    let k1 = rhs(d, w)?;
    let mut y = w.clone();
    y.add_scaled(half, &k1)?;
    let k2 = rhs(d, &y)?;
    let mut y = w.clone();
    y.add_scaled(half, &k2)?;
    let k3 = rhs(d, &y)?;
    let mut y = w.clone();
    y.add_scaled(h, &k3)?;
    let k4 = rhs(d, &y)?;
    let mut next = w.clone();
    let sixth = h / T::of(6.0);
    next.add_scaled(sixth, &k1)?;
    next.add_scaled(sixth * T::of(2.0), &k2)?;
    next.add_scaled(sixth * T::of(2.0), &k3)?;
    next.add_scaled(sixth, &k4)?;
    Ok(next)
}

fn controlled<T: Real>(w: Measure<T>, t: T, policy: DriftPolicy) -> Result<Measure<T>> {
    let mass = w.total_mass();
    let drift = (mass - T::one()).abs();
    if !(drift <= T::of(MASS_DRIFT_TOL)) {
        return Err(Error::MassDrift { t: t.as_f64(), mass: mass.as_f64(), tolerance: MASS_DRIFT_TOL });
    }
    match policy {
        DriftPolicy::Strict => Ok(w),
        DriftPolicy::Renormalize => w.normalize(),
    }
}

/// Number of equal steps of size at most `dt` covering `span`.
fn step_count<T: Real>(span: T, dt: T) -> usize {
    let ratio = (span / dt).as_f64();
    (ratio * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// RK4 from `0` to `t_end` with equal steps of size at most `dt`, recording
/// every step.
pub fn integrate<T: Real>(d: &Recombination<T>, w0: &Measure<T>, t_end: T, dt: T) -> Result<Trajectory<T>> {
    integrate_with(d, w0, t_end, dt, DriftPolicy::Strict)
}

pub fn integrate_with<T: Real>(
    d: &Recombination<T>,
    w0: &Measure<T>,
    t_end: T,
    dt: T,
    policy: DriftPolicy,
) -> Result<Trajectory<T>> {
    check_model(d, w0)?;
    check_time(t_end)?;
    if t_end.is_zero() {
        return Ok(Trajectory { times: vec![T::zero()], states: vec![w0.clone()] });
    }
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::domain(format!("step size dt = {dt} must be positive")));
    }
    let steps = step_count(t_end, dt);
    let h = t_end / T::of(steps as f64);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(T::zero());
    states.push(w0.clone());
    let mut w = w0.clone();
    for k in 1..=steps {
        let t = if k == steps { t_end } else { h * T::of(k as f64) };
        w = controlled(rk4_step(d, &w, h)?, t, policy)?;
        times.push(t);
        states.push(w.clone());
    }
    Ok(Trajectory { times, states })
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("time grid is empty"));
    }
    for &t in grid {
        check_time(t)?;
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("time grid must be strictly increasing"));
    }
    Ok(())
}

/// RK4 recording only at the points of `grid`; each gap between grid points
/// is split into equal steps of size at most `dt`.
pub fn integrate_grid<T: Real>(
    d: &Recombination<T>,
    w0: &Measure<T>,
    grid: &[T],
    dt: T,
    policy: DriftPolicy,
) -> Result<Trajectory<T>> {
    check_model(d, w0)?;
    check_grid(grid)?;
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::domain(format!("step size dt = {dt} must be positive")));
    }
    let mut states = Vec::with_capacity(grid.len());
    let mut w = w0.clone();
    let mut now = T::zero();
    for &t in grid {
        if t > now {
            let steps = step_count(t - now, dt);
            let h = (t - now) / T::of(steps as f64);
            for k in 1..=steps {
                let at = if k == steps { t } else { now + h * T::of(k as f64) };
                w = controlled(rk4_step(d, &w, h)?, at, policy)?;
            }
            now = t;
        }
        states.push(w.clone());
    }
    Ok(Trajectory { times: grid.to_vec(), states })
}

/// `Σ_A coeffs(A) R_A(ω_0)`.
pub fn combine<T: Real>(coeffs: &Coefficients<T>, w0: &Measure<T>) -> Result<Measure<T>> {
    if coeffs.index().ground().len() != w0.space().sites() {
        return Err(Error::domain("coefficients and type space have different numbers of sites"));
    }
    let mut out = Measure::zero(w0.space());
    for (a, c) in coeffs.iter() {
        if !c.is_zero() {
            out.add_scaled(c, &w0.recombine_unchecked(a))?;
        }
    }
    Ok(out)
}

/// Precomputed data for repeated exact solutions of one model.
#[derive(Clone)]
pub struct ExactSolver<'a, T> {
    model: &'a Recombination<T>,
    index: Arc<PartitionIndex>,
    kind: Prepared<T>,
}

#[derive(Clone)]
enum Prepared<T> {
    Semigroup(PartitionMatrix<T>),
    Recursion(PsiTheta<T>),
    SingleCrossover,
}

impl<'a, T: Real> ExactSolver<'a, T> {
    pub fn new(d: &'a Recombination<T>, method: ExactMethod) -> Result<Self> {
        let index = Arc::new(PartitionIndex::for_sites(d.sites())?);
        Self::with_index(d, index, method)
    }

    pub fn with_index(d: &'a Recombination<T>, index: Arc<PartitionIndex>, method: ExactMethod) -> Result<Self> {
        let kind = match method {
            ExactMethod::Semigroup => Prepared::Semigroup(build_generator(d, &index)?),
            ExactMethod::Recursion => Prepared::Recursion(compute_psi_theta(d, &index)?),
            ExactMethod::SingleCrossover => {
                d.cut_rates()?;
                Prepared::SingleCrossover
            }
        };
        Ok(ExactSolver { model: d, index, kind })
    }

    pub fn index(&self) -> &Arc<PartitionIndex> {
        &self.index
    }

    /// `a_t` started from the coarsest partition.
    pub fn coefficients(&self, t: T) -> Result<Coefficients<T>> {
        check_time(t)?;
        match &self.kind {
            Prepared::Semigroup(q) => coefficients_semigroup(q, t, &Partition::coarsest(self.index.ground())),
            Prepared::Recursion(pt) => coefficients_recursion(pt, t),
            Prepared::SingleCrossover => coefficients_single_crossover(self.model, &self.index, t),
        }
    }

    pub fn solve(&self, w0: &Measure<T>, t: T) -> Result<Measure<T>> {
        check_model(self.model, w0)?;
        combine(&self.coefficients(t)?, w0)
    }

    pub fn solve_grid(&self, w0: &Measure<T>, grid: &[T]) -> Result<Trajectory<T>> {
        check_grid(grid)?;
        let states = grid.iter().map(|&t| self.solve(w0, t)).collect::<Result<_>>()?;
        Ok(Trajectory { times: grid.to_vec(), states })
    }
}

/// `ω_t = Σ_A a_t(A) R_A(ω_0)` with coefficients from `method`.
pub fn solve_exact<T: Real>(d: &Recombination<T>, w0: &Measure<T>, t: T, method: ExactMethod) -> Result<Measure<T>> {
    ExactSolver::new(d, method)?.solve(w0, t)
}

/// `t` steps of `ω ↦ Σ_{A ∈ P≤2(S)} r(A) R_A(ω)`, recording every generation.
pub fn iterate_discrete<T: Real>(d: &Recombination<T>, w0: &Measure<T>, t: u64) -> Result<Trajectory<T>> {
    check_model(d, w0)?;
    if d.style() != Style::Probability {
        return Err(Error::RateStyle);
    }
    let mut times = vec![T::zero()];
    let mut states = vec![w0.clone()];
    let mut w = w0.clone();
    for s in 1..=t {
        let mut next = w.scaled(d.residual_probability());
        for (a, prob, _) in d.entries() {
            next.add_scaled(prob, &w.recombine_unchecked(a))?;
        }
        w = next;
        times.push(T::of(s as f64));
        states.push(w.clone());
    }
    Ok(Trajectory { times, states })
}

/// `Σ_A (M^t)_{1A} R_A(ω_0)` from the discrete partition matrix.
pub fn solve_discrete_exact<T: Real>(d: &Recombination<T>, w0: &Measure<T>, t: u64) -> Result<Measure<T>> {
    check_model(d, w0)?;
    let index = Arc::new(PartitionIndex::for_sites(d.sites())?);
    let m = build_discrete_matrix(d, &index)?;
    combine(&coefficients_discrete(&m, t, &Partition::coarsest(index.ground()))?, w0)
}

/// Outcome of comparing `R_B(ω_t)` with `E(R_{Σ_t}(ω_0) | Σ_0 = B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport<T> {
    pub start: Partition,
    pub t: T,
    /// Sup-norm distance of the two sides.
    pub deviation: T,
}

impl<T: Real> DualityReport<T> {
    pub fn holds(&self) -> bool {
        self.deviation <= T::of(1e-10)
    }
}

/// Computes both sides of the duality relation for the partition `b`.
pub fn check_duality<T: Real>(d: &Recombination<T>, w0: &Measure<T>, b: &Partition, t: T) -> Result<DualityReport<T>> {
    check_model(d, w0)?;
    check_time(t)?;
    let index = Arc::new(PartitionIndex::for_sites(d.sites())?);
    let q = build_generator(d, &index)?;
    let forward = combine(&coefficients_semigroup(&q, t, &Partition::coarsest(index.ground()))?, w0)?;
    let lhs = forward.recombine(b)?;
    let rhs = combine(&coefficients_semigroup(&q, t, b)?, w0)?;
    Ok(DualityReport { start: b.clone(), t, deviation: lhs.sup_distance(&rhs)? })
}

/// Whether every state is a probability measure within `tol`.
pub fn conserves_mass<T: Real>(traj: &Trajectory<T>, tol: f64) -> bool {
    traj.states.iter().all(|w| (w.total_mass() - T::one()).abs() <= T::of(tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ancestral::fixtures::{p, three_site};
    use crate::measure::TypeSpace;
    use crate::partition::SiteSet;
    use proptest::prelude::*;

    fn linked_pair() -> Measure<f64> {
        let space = TypeSpace::binary(2).unwrap();
        Measure::from_masses(&space, vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    fn skewed_three() -> Measure<f64> {
        let space = TypeSpace::binary(3).unwrap();
        Measure::from_masses(&space, vec![0.3, 0.05, 0.1, 0.05, 0.0, 0.2, 0.1, 0.2]).unwrap()
    }

    fn two_site_exact(t: f64) -> Vec<f64> {
        let e = (-t).exp();
        vec![0.5 * e + 0.25 * (1.0 - e), 0.25 * (1.0 - e), 0.25 * (1.0 - e), 0.5 * e + 0.25 * (1.0 - e)]
    }

    fn sup(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn rhs_examples() {
        let d = Recombination::single_crossover(&[1.0]).unwrap();
        let inc = rhs(&d, &linked_pair()).unwrap().to_dense();
        assert_eq!(inc, vec![-0.25, 0.25, 0.25, -0.25]);
        let product = linkage_product(&skewed_three());
        let inc = rhs(&three_site(), &product).unwrap();
        assert!(inc.iter().all(|(_, m)| m.abs() < 1e-16));
        let inc = rhs(&three_site(), &skewed_three()).unwrap();
        assert!(inc.total_mass().abs() < 1e-16);
    }

    fn linkage_product(w: &Measure<f64>) -> Measure<f64> {
        w.linkage_equilibrium()
    }

    #[test]
    fn rhs_rejects_space_mismatch() {
        assert!(rhs(&three_site(), &linked_pair()).is_err());
    }

    #[test]
    fn integrate_zero_time_and_bad_step() {
        let d = Recombination::single_crossover(&[1.0]).unwrap();
        let tr = integrate(&d, &linked_pair(), 0.0, 0.1).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.states[0], linked_pair());
        assert!(integrate(&d, &linked_pair(), 1.0, 0.0).is_err());
        assert!(integrate(&d, &linked_pair(), 1.0, -0.1).is_err());
        assert!(integrate(&d, &linked_pair(), -1.0, 0.1).is_err());
    }

    #[test]
    fn integrate_two_site_benchmark() {
        let d = Recombination::single_crossover(&[1.0]).unwrap();
        let tr = integrate(&d, &linked_pair(), 1.0, 1e-3).unwrap();
        assert_eq!(tr.len(), 1001);
        let (t, w) = tr.last().unwrap();
        assert_eq!(t, 1.0);
        assert!(sup(&w.to_dense(), &two_site_exact(1.0)) < 1e-8);
        assert!(conserves_mass(&tr, 1e-9));
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fourth_order_convergence() {
        let d = Recombination::single_crossover(&[1.0]).unwrap();
        let err = |dt: f64| {
            let tr = integrate(&d, &linked_pair(), 1.0, dt).unwrap();
            sup(&tr.last().unwrap().1.to_dense(), &two_site_exact(1.0))
        };
        let (coarse, fine) = (err(0.1), err(0.05));
        assert!(coarse / fine >= 12.0, "{coarse} / {fine}");
    }

    #[test]
    fn long_time_limit_is_linkage_equilibrium() {
        let w0 = skewed_three();
        let d = Recombination::from_rates(3, vec![(p("1|2,3"), 1.0), (p("1,2|3"), 1.0), (p("1,3|2"), 1.0)], 0.0).unwrap();
        let tr = integrate_grid(&d, &w0, &[40.0], 1e-2, DriftPolicy::Strict).unwrap();
        assert!(tr.states[0].sup_distance(&w0.linkage_equilibrium()).unwrap() < 1e-8);
    }

    #[test]
    fn grid_integration_matches_full_record() {
        let w0 = skewed_three();
        let full = integrate(&three_site(), &w0, 1.0, 0.01).unwrap();
        let grid = integrate_grid(&three_site(), &w0, &[0.0, 0.5, 1.0], 0.01, DriftPolicy::Strict).unwrap();
        assert_eq!(grid.states[0], w0);
        assert!(grid.states[1].sup_distance(&full.states[50]).unwrap() < 1e-15);
        assert!(grid.states[2].sup_distance(&full.states[100]).unwrap() < 1e-15);
        assert!(integrate_grid(&three_site(), &w0, &[0.5, 0.5], 0.01, DriftPolicy::Strict).is_err());
    }

    #[test]
    fn renormalize_policy_keeps_unit_mass() {
        let w0 = skewed_three();
        let tr = integrate_with(&three_site(), &w0, 2.0, 0.1, DriftPolicy::Renormalize).unwrap();
        assert!(conserves_mass(&tr, 1e-15));
    }

    #[test]
    fn exact_solution_examples() {
        let w0 = skewed_three();
        let d = three_site();
        for method in [ExactMethod::Semigroup, ExactMethod::Recursion] {
            let s = ExactSolver::new(&d, method).unwrap();
            assert!(s.solve(&w0, 0.0).unwrap().sup_distance(&w0).unwrap() < 1e-15);
            let product = w0.linkage_equilibrium();
            for t in [0.3, 2.0] {
                assert!(s.solve(&product, t).unwrap().sup_distance(&product).unwrap() < 1e-13);
            }
        }
        let ode = integrate_grid(&d, &w0, &[0.5, 1.0, 5.0], 1e-3, DriftPolicy::Strict).unwrap();
        for (t, w) in ode.iter() {
            let exact = solve_exact(&d, &w0, t, ExactMethod::Semigroup).unwrap();
            assert!(exact.sup_distance(w).unwrap() < 1e-6);
            assert!((exact.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_crossover_method_requires_interval_model() {
        assert!(matches!(
            solve_exact(&three_site(), &skewed_three(), 1.0, ExactMethod::SingleCrossover),
            Err(Error::NotSingleCrossover(_))
        ));
        let d = Recombination::single_crossover(&[0.4, 1.3]).unwrap();
        let a = solve_exact(&d, &skewed_three(), 1.0, ExactMethod::SingleCrossover).unwrap();
        let b = solve_exact(&d, &skewed_three(), 1.0, ExactMethod::Semigroup).unwrap();
        assert!(a.sup_distance(&b).unwrap() < 1e-13);
    }

    #[test]
    fn discrete_examples() {
        let d = Recombination::from_probabilities(2, 1.0, vec![(p("1|2"), 0.5)]).unwrap();
        let tr = iterate_discrete(&d, &linked_pair(), 1).unwrap();
        assert_eq!(tr.len(), 2);
        assert_eq!(tr.states[1].to_dense(), vec![0.375, 0.125, 0.125, 0.375]);
        assert_eq!(iterate_discrete(&d, &linked_pair(), 0).unwrap().len(), 1);
        let rate = Recombination::single_crossover(&[0.5]).unwrap();
        assert!(matches!(iterate_discrete(&rate, &linked_pair(), 1), Err(Error::RateStyle)));
        let tr = iterate_discrete(&three_site(), &skewed_three(), 10).unwrap();
        for (s, w) in tr.iter() {
            let exact = solve_discrete_exact(&three_site(), &skewed_three(), s as u64).unwrap();
            assert!(exact.sup_distance(w).unwrap() < 1e-12);
        }
        assert!(conserves_mass(&tr, 1e-12));
    }

    #[test]
    fn duality_examples() {
        let w0 = skewed_three();
        let d = three_site();
        let one = check_duality(&d, &w0, &p("1,2,3"), 1.0).unwrap();
        assert!(one.holds());
        let r = check_duality(&d, &w0, &p("1,2|3"), 1.0).unwrap();
        assert!(r.deviation <= 1e-10);
        // From the finest partition both sides are the product of the (constant) marginals.
        let fin = Partition::finest(SiteSet::full(3));
        assert!(check_duality(&d, &w0, &fin, 0.7).unwrap().holds());
        let wt = solve_exact(&d, &w0, 0.7, ExactMethod::Semigroup).unwrap();
        assert!(wt.recombine(&fin).unwrap().sup_distance(&w0.linkage_equilibrium()).unwrap() < 1e-14);
    }

    #[test]
    fn tv_to_equilibrium_decreases() {
        let w0 = skewed_three();
        let eq = w0.linkage_equilibrium();
        let tr = integrate(&three_site(), &w0, 20.0, 0.05).unwrap();
        let tv: Vec<f64> = tr.states.iter().map(|w| w.total_variation(&eq).unwrap()).collect();
        assert!(tv.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(*tv.last().unwrap() < 1e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn single_site_marginals_are_invariant(
            raw in proptest::collection::vec(0.0f64..1.0, 8),
            rates in proptest::collection::vec(0.05f64..2.0, 3),
            t in 0.0f64..4.0,
        ) {
            let total: f64 = raw.iter().sum::<f64>() + 1e-9;
            let masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
            let space = TypeSpace::binary(3).unwrap();
            let w0 = Measure::from_masses(&space, masses).unwrap().normalize().unwrap();
            let d = Recombination::from_rates(
                3,
                vec![(p("1|2,3"), rates[0]), (p("1,2|3"), rates[1]), (p("1,3|2"), rates[2])],
                0.0,
            ).unwrap();
            let exact = solve_exact(&d, &w0, t, ExactMethod::Semigroup).unwrap();
            let ode = integrate_grid(&d, &w0, &[t.max(1e-3)], 1e-2, DriftPolicy::Strict).unwrap();
            for i in 1..=3 {
                let site = SiteSet::singleton(i);
                let m0 = w0.marginal(site).unwrap();
                prop_assert!(exact.marginal(site).unwrap().sup_distance(&m0).unwrap() < 1e-12);
                prop_assert!(ode.states[0].marginal(site).unwrap().sup_distance(&m0).unwrap() < 1e-9);
            }
            prop_assert!((exact.total_mass() - 1.0).abs() < 1e-12);
        }
    }
}
