use std::sync::Arc;

use crate::ancestral::{check_index, Coefficients, PartitionMatrix};
use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionIndex};
use crate::rates::{Recombination, Style};
use crate::scalar::Real;

/// Transition matrix of the discrete-time partitioning process,
/// `M_{AB} = Π_{A ∈ A} r^A(B|_A)` for `B ≼ A`.
///
/// Every block refines independently in one generation, so several blocks
/// may split at once.
pub fn build_discrete_matrix<T: Real>(d: &Recombination<T>, idx: &Arc<PartitionIndex>) -> Result<PartitionMatrix<T>> {
    check_index(d, idx)?;
    if d.style() != Style::Probability {
        return Err(Error::RateStyle);
    }
    let mut m = PartitionMatrix::zeros(idx.clone());
    for (i, a) in idx.iter().enumerate() {
        // Outcomes per block: stay whole, or one of its two-block splits.
        let outcomes: Vec<Vec<(Partition, T)>> = a
            .blocks()
            .iter()
            .map(|&block| {
                let one = Partition::coarsest(block);
                let stay = d.marginal_probability(block, &one).expect("valid block");
                let mut out = vec![(one, stay)];
                out.extend(d.marginal_split_probabilities(block));
                out.retain(|(_, r)| !r.is_zero());
                out
            })
            .collect();
        let mut cursor = vec![0usize; outcomes.len()];
        loop {
            let mut target = outcomes[0][cursor[0]].0.clone();
            let mut prob = outcomes[0][cursor[0]].1;
            for (o, &c) in outcomes.iter().zip(&cursor).skip(1) {
                target = target.join_disjoint(&o[c].0);
                prob = prob * o[c].1;
            }
            m.add(i, idx.require(&target)?, prob);
            let mut k = outcomes.len();
            let done = loop {
                if k == 0 {
                    break true;
                }
                k -= 1;
                cursor[k] += 1;
                if cursor[k] < outcomes[k].len() {
                    break false;
                }
                cursor[k] = 0;
            };
            if done {
                break;
            }
        }
    }
    Ok(m)
}

/// Row `start` of `M^t`, by repeated vector-matrix products.
pub fn coefficients_discrete<T: Real>(m: &PartitionMatrix<T>, t: u64, start: &Partition) -> Result<Coefficients<T>> {
    let start = m.index().require(start)?;
    let rows = m.sparse_rows();
    let mut v = vec![T::zero(); m.dim()];
    v[start] = T::one();
    for _ in 0..t {
        let mut next = vec![T::zero(); v.len()];
        for (i, &vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for &(j, x) in &rows[i] {
                next[j] = next[j] + vi * x;
            }
        }
        v = next;
    }
    Coefficients::new(m.index().clone(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ancestral::fixtures::*;

    fn two_site_prob(prob: f64) -> Recombination<f64> {
        Recombination::from_probabilities(2, 1.0, vec![(p("1|2"), prob)]).unwrap()
    }

    #[test]
    fn two_state_matrix() {
        let idx = index(2);
        let m = build_discrete_matrix(&two_site_prob(0.3), &idx).unwrap();
        assert!((m.get(0, 0) - 0.7).abs() < 1e-15);
        assert_eq!(m.get(0, 1), 0.3);
        assert_eq!(m.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn geometric_waiting_time() {
        let idx = index(2);
        let prob = 0.15;
        let m = build_discrete_matrix(&two_site_prob(prob), &idx).unwrap();
        for t in 0..20u64 {
            let c = coefficients_discrete(&m, t, idx.get(0)).unwrap();
            assert!((c.values()[1] - (1.0 - (1.0 - prob).powi(t as i32))).abs() < 1e-14);
        }
        let c = coefficients_discrete(&build_discrete_matrix(&two_site_prob(0.5), &idx).unwrap(), 2, idx.get(0)).unwrap();
        assert_eq!(c.values(), &[0.25, 0.75]);
    }

    #[test]
    fn stochastic_and_triangular() {
        for n in 1..=5 {
            let idx = index(n);
            let two = crate::partition::two_block_partitions(idx.ground());
            let k = two.len().max(1) as f64;
            let entries = two.into_iter().enumerate().map(|(i, a)| (a, 0.9 * (i + 1) as f64 / (k * (k + 1.0) / 2.0))).collect();
            let d = Recombination::from_probabilities(n, 1.0, entries).unwrap();
            let m = build_discrete_matrix(&d, &idx).unwrap();
            assert!(m.is_stochastic(1e-12), "n={n}");
            assert!(m.is_triangular());
            assert_eq!(m.get(idx.finest(), idx.finest()), 1.0);
            for (i, a) in idx.iter().enumerate() {
                for (j, b) in idx.iter().enumerate() {
                    if m.get(i, j) != 0.0 {
                        assert!(b.refines(a).unwrap());
                    }
                }
            }
            let start = idx.get(0).clone();
            assert_eq!(coefficients_discrete(&m, 0, &start).unwrap(), Coefficients::indicator(idx.clone(), 0));
            for t in [1, 3, 10] {
                assert!((coefficients_discrete(&m, t, &start).unwrap().sum() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rate_style_rejected() {
        let idx = index(2);
        assert!(matches!(build_discrete_matrix(&two_site(0.3), &idx), Err(Error::RateStyle)));
    }
}
