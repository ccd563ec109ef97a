use std::collections::HashMap;
use std::sync::Arc;

use crate::ancestral::{check_index, PartitionMatrix};
use crate::error::Result;
use crate::partition::{Partition, PartitionIndex, SiteSet};
use crate::rates::Recombination;
use crate::scalar::Real;

/// Generator `Q` of the partitioning process.
///
/// `Q_{AB} = ϱ^A(𝔞)` when `B` arises from `A` by replacing one block `A` with
/// a two-block partition `𝔞` of it; the diagonal is `-ψ^S(A)`.
pub fn build_generator<T: Real>(d: &Recombination<T>, idx: &Arc<PartitionIndex>) -> Result<PartitionMatrix<T>> {
    check_index(d, idx)?;
    let mut q = PartitionMatrix::zeros(idx.clone());
    let mut splits: HashMap<SiteSet, Vec<(Partition, T)>> = HashMap::new();
    for (i, a) in idx.iter().enumerate() {
        for (bi, &block) in a.blocks().iter().enumerate() {
            let table = splits.entry(block).or_insert_with(|| d.marginal_splits(block));
            for (frak_a, rate) in table.iter() {
                let b = a.refine_block(bi, frak_a);
                let j = idx.require(&b)?;
                q.add(i, j, *rate);
                q.add(i, i, -*rate);
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ancestral::fixtures::*;
    use crate::partition::partitions_at_most_two;

    #[test]
    fn two_site_generator() {
        let q = build_generator(&two_site(0.7), &index(2)).unwrap();
        assert_eq!(q.row(0), &[-0.7, 0.7]);
        assert_eq!(q.row(1), &[0.0, 0.0]);
    }

    #[test]
    fn finest_row_vanishes_and_three_site_entry() {
        let idx = index(3);
        let d = three_site();
        let q = build_generator(&d, &idx).unwrap();
        assert!(q.row(idx.finest()).iter().all(|v| *v == 0.0));
        let one = Partition::coarsest(idx.ground());
        assert_eq!(q.entry(&one, &p("1|2,3")).unwrap(), 0.3);
        // {1}{2,3} -> finest through the marginal rate on {2,3}: 0.5 + 0.2
        assert!((q.entry(&p("1|2,3"), &p("1|2|3")).unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn index_mismatch_is_rejected() {
        assert!(build_generator(&three_site(), &index(4)).is_err());
    }

    /// Exit rate by brute force over all of `P_{≤2}(S)`.
    fn brute_exit_rate(d: &Recombination<f64>, a: &Partition) -> f64 {
        let mut total = 0.0;
        for block in a.blocks() {
            for big in partitions_at_most_two(d.ground()) {
                if big.restrict(*block).unwrap().len() == 2 {
                    total += d.rate(&big).unwrap();
                }
            }
        }
        total
    }

    #[test]
    fn generator_structure_exhaustive() {
        use rand::{Rng, SeedableRng};
        for n in 1..=5 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7 + n as u64);
            let two = crate::partition::two_block_partitions(SiteSet::full(n));
            let entries = two.into_iter().map(|a| (a, rng.random_range(0.0..1.0))).collect();
            let d = Recombination::<f64>::from_rates(n, entries, 0.5).unwrap();
            let idx = index(n);
            let q = build_generator(&d, &idx).unwrap();
            assert!(q.is_generator(1e-12));
            assert!(q.is_triangular());
            for (i, a) in idx.iter().enumerate() {
                assert!((-q.get(i, i) - d.exit_rate(a)).abs() < 1e-12);
                assert!((d.exit_rate(a) - brute_exit_rate(&d, a)).abs() < 1e-12);
                for (j, b) in idx.iter().enumerate() {
                    if i != j && q.get(i, j) != 0.0 {
                        assert!(b.refines(a).unwrap() && b != a);
                        assert_eq!(b.len(), a.len() + 1);
                        let split_blocks = a.blocks().iter().filter(|x| !b.blocks().contains(x)).count();
                        assert_eq!(split_blocks, 1);
                    }
                }
            }
        }
    }
}
