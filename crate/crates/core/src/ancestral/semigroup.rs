use crate::ancestral::{Coefficients, PartitionMatrix};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::scalar::Real;

/// Bound on the total truncation error of the Poisson series over a whole run.
pub const UNIFORMIZATION_TOL: f64 = 1e-13;

/// Largest `λ h` handled in a single Poisson series; longer times are split
/// into substeps so the leading weight `e^{-λ h}` stays well above underflow.
const MAX_POISSON_MEAN: f64 = 20.0;

/// Row `start` of `e^{tQ}` by uniformization.
///
/// With `λ = max_A |Q_AA|` and `P = I + Q / λ`, `e^{tQ} = Σ_k Pois(k; λt) P^k`.
/// `P` is stochastic, so every term is nonnegative.
pub fn coefficients_semigroup<T: Real>(q: &PartitionMatrix<T>, t: T, start: &Partition) -> Result<Coefficients<T>> {
    let start = q.index().require(start)?;
    let rows = UniformizedRows::new(q);
    Ok(Coefficients { index: q.index().clone(), values: rows.propagate(unit(q.dim(), start), t)? })
}

/// The full transition matrix `e^{tQ}`.
pub fn exp_generator<T: Real>(q: &PartitionMatrix<T>, t: T) -> Result<PartitionMatrix<T>> {
    let rows = UniformizedRows::new(q);
    let mut out = PartitionMatrix::zeros(q.index().clone());
    for i in 0..q.dim() {
        let v = rows.propagate(unit(q.dim(), i), t)?;
        for (j, x) in v.into_iter().enumerate() {
            out.set(i, j, x);
        }
    }
    Ok(out)
}

fn unit<T: Real>(n: usize, i: usize) -> Vec<T> {
    let mut v = vec![T::zero(); n];
    v[i] = T::one();
    v
}

struct UniformizedRows<T> {
    lambda: T,
    /// Sparse rows of `P = I + Q / λ`.
    rows: Vec<Vec<(usize, T)>>,
}

impl<T: Real> UniformizedRows<T> {
    fn new(q: &PartitionMatrix<T>) -> Self {
        let lambda = (0..q.dim()).map(|i| -q.get(i, i)).fold(T::zero(), T::max);
        let rows = if lambda > T::zero() {
            q.sparse_rows()
                .into_iter()
                .enumerate()
                .map(|(i, row)| {
                    let mut out: Vec<(usize, T)> = row.into_iter().map(|(j, v)| (j, v / lambda)).collect();
                    match out.iter_mut().find(|(j, _)| *j == i) {
                        Some(diag) => diag.1 = diag.1 + T::one(),
                        None => out.push((i, T::one())),
                    }
                    out.retain(|(_, v)| !v.is_zero());
                    out
                })
                .collect()
        } else {
            Vec::new()
        };
        UniformizedRows { lambda, rows }
    }

    fn step(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); v.len()];
        for (i, &vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for &(j, p) in &self.rows[i] {
                out[j] = out[j] + vi * p;
            }
        }
        out
    }

    fn propagate(&self, mut v: Vec<T>, t: T) -> Result<Vec<T>> {
        if !(t >= T::zero()) || !t.is_finite() {
            return Err(Error::domain(format!("time t = {t} must be finite and nonnegative")));
        }
        if t.is_zero() || self.lambda.is_zero() {
            return Ok(v);
        }
        let mean_total = self.lambda * t;
        let substeps = (mean_total / T::of(MAX_POISSON_MEAN)).ceil().max(T::one());
        let mean = mean_total / substeps;
        let steps = substeps.to_usize().unwrap_or(usize::MAX);
        // Split the error budget over substeps, down to the rounding floor.
        let tol = T::tolerance(UNIFORMIZATION_TOL / (100.0 * steps as f64));
        // Poisson(mean) has negligible mass beyond mean + 40 sqrt(mean) + 60.
        let max_terms = (mean + T::of(40.0) * mean.sqrt() + T::of(60.0)).to_usize().unwrap_or(1000);
        for _ in 0..steps {
            let mut weight = (-mean).exp();
            let mut cumulative = weight;
            let mut term = v.clone();
            let mut acc: Vec<T> = term.iter().map(|&x| x * weight).collect();
            let mut k = 0usize;
            while T::one() - cumulative > tol && k < max_terms {
                k += 1;
                term = self.step(&term);
                weight = weight * mean / T::of(k as f64);
                cumulative = cumulative + weight;
                for (a, x) in acc.iter_mut().zip(&term) {
                    *a = *a + weight * *x;
                }
            }
            v = acc;
        }
        Ok(v)
    }
}
