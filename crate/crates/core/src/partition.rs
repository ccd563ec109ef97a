//! Set partitions of the site set `S = {1, ..., n}` and their lattice algebra.
//!
//! Sites are positive integers up to [`MAX_SITES`]; a [`SiteSet`] is a bit set
//! with bit `i - 1` standing for site `i`. A [`Partition`] is always held in
//! canonical form: blocks sorted by their minimum element.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest site index representable in a [`SiteSet`].
pub const MAX_SITES: usize = 64;

/// Default cap on the number of sites for full lattice enumeration (Bell(8) = 4140).
pub const DEFAULT_LATTICE_CAP: usize = 8;

/// A finite set of sites.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SiteSet(u64);

impl SiteSet {
    pub const EMPTY: SiteSet = SiteSet(0);

    pub fn new<I: IntoIterator<Item = usize>>(sites: I) -> Result<Self> {
        let mut bits = 0u64;
        for s in sites {
            if s == 0 || s > MAX_SITES {
                return Err(Error::domain(format!("site {s} outside 1..={MAX_SITES}")));
            }
            bits |= 1 << (s - 1);
        }
        Ok(SiteSet(bits))
    }

    /// `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_SITES, "at most {MAX_SITES} sites");
        if n == MAX_SITES {
            SiteSet(u64::MAX)
        } else {
            SiteSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(site: usize) -> Self {
        assert!((1..=MAX_SITES).contains(&site));
        SiteSet(1 << (site - 1))
    }

    /// `{lo, ..., hi}`; empty when `lo > hi`.
    pub fn range(lo: usize, hi: usize) -> Self {
        if lo > hi {
            return SiteSet::EMPTY;
        }
        SiteSet(SiteSet::full(hi).0 & !SiteSet::full(lo - 1).0)
    }

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        SiteSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, site: usize) -> bool {
        (1..=MAX_SITES).contains(&site) && self.0 & (1 << (site - 1)) != 0
    }

    pub fn first(self) -> Option<usize> {
        (!self.is_empty()).then(|| self.0.trailing_zeros() as usize + 1)
    }

    pub fn last(self) -> Option<usize> {
        (!self.is_empty()).then(|| MAX_SITES - self.0.leading_zeros() as usize)
    }

    #[inline]
    pub fn is_subset(self, other: SiteSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn union(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: SiteSet) -> SiteSet {
        SiteSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_disjoint(self, other: SiteSet) -> bool {
        self.0 & other.0 == 0
    }

    /// True if the set is `{a, a+1, ..., b}` for some `a <= b`.
    pub fn is_interval(self) -> bool {
        if self.is_empty() {
            return false;
        }
        let shifted = self.0 >> self.0.trailing_zeros();
        shifted & shifted.wrapping_add(1) == 0
    }

    /// Sites in increasing order.
    pub fn iter(self) -> Sites {
        Sites(self.0)
    }
}

/// Iterator over the sites of a [`SiteSet`], ascending.
#[derive(Clone)]
pub struct Sites(u64);

impl Iterator for Sites {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let tz = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(tz as usize + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Sites {}

impl IntoIterator for SiteSet {
    type Item = usize;
    type IntoIter = Sites;

    fn into_iter(self) -> Sites {
        self.iter()
    }
}

/// Lexicographic order of the ascending element lists.
impl Ord for SiteSet {
    fn cmp(&self, other: &Self) -> Ordering {
        let diff = self.0 ^ other.0;
        if diff == 0 {
            return Ordering::Equal;
        }
        let d = diff.trailing_zeros();
        let above = !((1u64 << d) - 1);
        // Elements below d agree; exactly one side has d.
        if self.0 & (1 << d) != 0 {
            if other.0 & above == 0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        } else if self.0 & above == 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for SiteSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// A partition of a ground set into nonempty, pairwise disjoint blocks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    ground: SiteSet,
    blocks: Vec<SiteSet>,
}

impl Partition {
    /// Builds a partition from its blocks, which may be given in any order.
    pub fn new(blocks: impl IntoIterator<Item = SiteSet>) -> Result<Self> {
        let mut ground = SiteSet::EMPTY;
        let mut out = Vec::new();
        for b in blocks {
            if b.is_empty() {
                return Err(Error::domain("partition block is empty"));
            }
            if !b.is_disjoint(ground) {
                return Err(Error::domain(format!("block {{{b}}} overlaps another block")));
            }
            ground = ground.union(b);
            out.push(b);
        }
        if out.is_empty() {
            return Err(Error::domain("partition needs at least one block"));
        }
        Ok(Self::from_blocks_unchecked(ground, out))
    }

    /// Canonicalizes blocks already known to partition `ground`.
    pub(crate) fn from_blocks_unchecked(ground: SiteSet, mut blocks: Vec<SiteSet>) -> Self {
        // Disjoint blocks: ordering by lowest set bit is ordering by minimum.
        blocks.sort_unstable_by_key(|b| b.bits().trailing_zeros());
        debug_assert_eq!(blocks.iter().fold(0u64, |acc, b| acc | b.bits()), ground.bits());
        Partition { ground, blocks }
    }

    /// The one-block partition `{ground}`.
    pub fn coarsest(ground: SiteSet) -> Self {
        assert!(!ground.is_empty());
        Partition { ground, blocks: vec![ground] }
    }

    /// The partition into singletons.
    pub fn finest(ground: SiteSet) -> Self {
        assert!(!ground.is_empty());
        Partition {
            ground,
            blocks: ground.iter().map(SiteSet::singleton).collect(),
        }
    }

    /// `{block, ground \ block}`, or the coarsest partition when `block` is all of ground.
    pub fn split(ground: SiteSet, block: SiteSet) -> Result<Self> {
        if block.is_empty() || !block.is_subset(ground) {
            return Err(Error::domain(format!("{{{block}}} is not a nonempty subset of {{{ground}}}")));
        }
        let rest = ground.difference(block);
        if rest.is_empty() {
            return Ok(Self::coarsest(ground));
        }
        Ok(Self::from_blocks_unchecked(ground, vec![block, rest]))
    }

    #[inline]
    pub fn ground(&self) -> SiteSet {
        self.ground
    }

    #[inline]
    pub fn blocks(&self) -> &[SiteSet] {
        &self.blocks
    }

    /// Number of blocks.
    #[inline]
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    /// Always false; present for API symmetry with `len`.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn is_coarsest(&self) -> bool {
        self.blocks.len() == 1
    }

    #[inline]
    pub fn is_finest(&self) -> bool {
        self.blocks.len() == self.ground.len()
    }

    pub fn block_containing(&self, site: usize) -> Option<SiteSet> {
        self.blocks.iter().copied().find(|b| b.contains(site))
    }

    fn check_ground(&self, other: &Partition) -> Result<()> {
        if self.ground != other.ground {
            return Err(Error::domain(format!(
                "ground sets differ: {{{}}} vs {{{}}}",
                self.ground, other.ground
            )));
        }
        Ok(())
    }

    /// Whether every block of `self` lies in some block of `coarse`.
    pub fn refines(&self, coarse: &Partition) -> Result<bool> {
        self.check_ground(coarse)?;
        Ok(self.refines_unchecked(coarse))
    }

    pub(crate) fn refines_unchecked(&self, coarse: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|b| coarse.blocks.iter().any(|c| b.is_subset(*c)))
    }

    /// Coarsest common refinement `self ∧ other`.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        self.check_ground(other)?;
        let blocks = self
            .blocks
            .iter()
            .flat_map(|a| other.blocks.iter().map(move |b| a.intersection(*b)))
            .filter(|x| !x.is_empty())
            .collect();
        Ok(Self::from_blocks_unchecked(self.ground, blocks))
    }

    /// The partition `{A ∩ u : A ∩ u ≠ ∅}` of `u`.
    pub fn restrict(&self, u: SiteSet) -> Result<Partition> {
        if u.is_empty() || !u.is_subset(self.ground) {
            return Err(Error::domain(format!(
                "{{{u}}} is not a nonempty subset of {{{}}}",
                self.ground
            )));
        }
        Ok(self.restrict_unchecked(u))
    }

    pub(crate) fn restrict_unchecked(&self, u: SiteSet) -> Partition {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.intersection(u))
            .filter(|x| !x.is_empty())
            .collect();
        Self::from_blocks_unchecked(u, blocks)
    }

    /// Number of blocks of `self` meeting `u`, without building the restriction.
    pub(crate) fn restricted_len(&self, u: SiteSet) -> usize {
        self.blocks.iter().filter(|b| !b.is_disjoint(u)).count()
    }

    /// Whether every block is a run of consecutive sites.
    pub fn is_interval(&self) -> bool {
        self.blocks.iter().all(|b| b.is_interval())
    }

    /// Replaces block `index` by the blocks of `refinement`, a partition of that block.
    pub fn refine_block(&self, index: usize, refinement: &Partition) -> Partition {
        debug_assert_eq!(refinement.ground, self.blocks[index]);
        let mut blocks = Vec::with_capacity(self.blocks.len() + refinement.len() - 1);
        blocks.extend(
            self.blocks
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != index)
                .map(|(_, b)| *b),
        );
        blocks.extend_from_slice(&refinement.blocks);
        Self::from_blocks_unchecked(self.ground, blocks)
    }

    /// Disjoint union of two partitions of disjoint ground sets.
    pub(crate) fn join_disjoint(&self, other: &Partition) -> Partition {
        debug_assert!(self.ground.is_disjoint(other.ground));
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&other.blocks);
        Self::from_blocks_unchecked(self.ground.union(other.ground), blocks)
    }
}

/// Order used by [`PartitionIndex`]: block count first, then lexicographic
/// on the canonical block lists. Strict refinement increases the block count,
/// so coarser partitions always come first.
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.blocks
            .len()
            .cmp(&other.blocks.len())
            .then_with(|| self.blocks.cmp(&other.blocks))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Text encoding: blocks separated by `|`, sites by `,`, e.g. `1,2|3,4`.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Partition({self})")
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks = s
            .split('|')
            .map(|block| {
                let sites = block
                    .split(',')
                    .map(|site| {
                        site.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::domain(format!("bad site {site:?} in partition {s:?}")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let set = SiteSet::new(sites.iter().copied())?;
                if set.len() != sites.len() {
                    return Err(Error::domain(format!("repeated site in partition {s:?}")));
                }
                Ok(set)
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(blocks)
    }
}

impl serde::Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Bell numbers, exact up to `n = 25`.
pub fn bell_number(n: usize) -> u64 {
    // Bell triangle.
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &x in &row {
            let last = *next.last().unwrap();
            next.push(last.saturating_add(x));
        }
        row = next;
    }
    row[0]
}

/// All partitions of `ground` in unspecified order (restricted growth strings).
fn all_partitions(ground: SiteSet) -> Vec<Partition> {
    let sites: Vec<usize> = ground.iter().collect();
    let k = sites.len();
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    let mut maxes = vec![0usize; k];
    loop {
        let nblocks = maxes[k - 1] + 1;
        let mut blocks = vec![0u64; nblocks];
        for (i, &label) in rgs.iter().enumerate() {
            blocks[label] |= 1 << (sites[i] - 1);
        }
        // Restricted growth strings list blocks by first occurrence, i.e. by minimum.
        out.push(Partition {
            ground,
            blocks: blocks.into_iter().map(SiteSet::from_bits).collect(),
        });
        // Advance to the next string.
        let mut i = k - 1;
        loop {
            if i == 0 {
                return out;
            }
            let bound = maxes[i - 1] + 1;
            if rgs[i] < bound {
                rgs[i] += 1;
                maxes[i] = maxes[i - 1].max(rgs[i]);
                for j in i + 1..k {
                    rgs[j] = 0;
                    maxes[j] = maxes[i];
                }
                break;
            }
            i -= 1;
        }
    }
}

/// All partitions of `ground` into one or two blocks: the coarsest partition
/// first, then one two-block partition per nonempty proper subset containing
/// the minimal site.
pub fn partitions_at_most_two(ground: SiteSet) -> Vec<Partition> {
    let mut out = vec![Partition::coarsest(ground)];
    out.extend(two_block_partitions(ground));
    out
}

/// Two-block partitions of `ground`, `2^(k-1) - 1` of them for `k` sites.
pub fn two_block_partitions(ground: SiteSet) -> Vec<Partition> {
    let sites: Vec<u64> = ground.iter().map(|s| 1u64 << (s - 1)).collect();
    let k = sites.len();
    if k < 2 {
        return Vec::new();
    }
    let first = sites[0];
    let mut out = Vec::with_capacity((1usize << (k - 1)) - 1);
    // Subsets of the remaining k-1 sites, excluding the full one.
    for mask in 0..(1u64 << (k - 1)) - 1 {
        let mut block = first;
        for (j, bit) in sites[1..].iter().enumerate() {
            if mask & (1 << j) != 0 {
                block |= bit;
            }
        }
        let block = SiteSet::from_bits(block);
        out.push(Partition::from_blocks_unchecked(ground, vec![block, ground.difference(block)]));
    }
    out.sort();
    out
}

/// Every partition of a ground set, in refinement-compatible order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionIndex {
    ground: SiteSet,
    ordering: Vec<Partition>,
    position: HashMap<Partition, usize>,
}

impl PartitionIndex {
    /// Enumerates `P(ground)` with the default cap of [`DEFAULT_LATTICE_CAP`] sites.
    pub fn new(ground: SiteSet) -> Result<Self> {
        Self::with_cap(ground, DEFAULT_LATTICE_CAP)
    }

    pub fn with_cap(ground: SiteSet, cap: usize) -> Result<Self> {
        let k = ground.len();
        if k == 0 {
            return Err(Error::domain("cannot enumerate partitions of the empty set"));
        }
        if k > cap {
            return Err(Error::TooManySites {
                sites: k,
                count: bell_number(k),
                cap,
            });
        }
        let mut ordering = all_partitions(ground);
        ordering.sort();
        let position = ordering
            .iter()
            .enumerate()
            .map(|(i, p)| (p.clone(), i))
            .collect();
        Ok(PartitionIndex { ground, ordering, position })
    }

    /// Index over `P({1, ..., n})`.
    pub fn for_sites(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::domain(format!("number of sites {n} outside 1..={MAX_SITES}")));
        }
        Self::new(SiteSet::full(n))
    }

    #[inline]
    pub fn ground(&self) -> SiteSet {
        self.ground
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ordering.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ordering.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> &Partition {
        &self.ordering[i]
    }

    pub fn position(&self, p: &Partition) -> Option<usize> {
        self.position.get(p).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Partition> {
        self.ordering.iter()
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.ordering
    }

    /// Position of the coarsest partition (always 0).
    pub fn coarsest(&self) -> usize {
        0
    }

    /// Position of the finest partition (always last).
    pub fn finest(&self) -> usize {
        self.ordering.len() - 1
    }

    pub(crate) fn require(&self, p: &Partition) -> Result<usize> {
        self.position(p).ok_or_else(|| {
            Error::domain(format!("partition {p} is not a partition of {{{}}}", self.ground))
        })
    }
}

/// The cut partition `A_k = {{1..k}, {k+1..n}}` for a single crossover after site `k`.
pub fn cut_partition(n: usize, k: usize) -> Result<Partition> {
    if !(2..=MAX_SITES).contains(&n) || k == 0 || k >= n {
        return Err(Error::domain(format!("no crossover after site {k} for {n} sites")));
    }
    Ok(Partition::from_blocks_unchecked(
        SiteSet::full(n),
        vec![SiteSet::range(1, k), SiteSet::range(k + 1, n)],
    ))
}

/// The interval partition `S(G)` of `{1..n}` cutting after every site in `cuts`.
pub fn interval_partition(n: usize, cuts: SiteSet) -> Result<Partition> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::domain(format!("number of sites {n} outside 1..={MAX_SITES}")));
    }
    if let Some(m) = cuts.last() {
        if m >= n {
            return Err(Error::domain(format!("cut after site {m} impossible for {n} sites")));
        }
    }
    let mut blocks = Vec::with_capacity(cuts.len() + 1);
    let mut lo = 1;
    for k in cuts.iter() {
        blocks.push(SiteSet::range(lo, k));
        lo = k + 1;
    }
    blocks.push(SiteSet::range(lo, n));
    Ok(Partition { ground: SiteSet::full(n), blocks })
}

/// Inverse of [`interval_partition`]: the set of sites after which `c` is cut.
pub fn cut_set(c: &Partition) -> Result<SiteSet> {
    if !c.is_interval() {
        return Err(Error::NotInterval(c.to_string()));
    }
    let mut cuts = SiteSet::EMPTY;
    for b in c.blocks() {
        let hi = b.last().expect("blocks are nonempty");
        if Some(hi) != c.ground().last() {
            cuts = cuts.union(SiteSet::singleton(hi));
        }
    }
    Ok(cuts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    /// Bell numbers via B(n+1) = sum_k C(n,k) B(k).
    fn bell_by_recurrence(n: usize) -> u64 {
        let mut bell = vec![1u64];
        for m in 0..n {
            let mut binom = 1u64;
            let mut next = 0;
            for (k, b) in bell.iter().enumerate() {
                next += binom * b;
                binom = binom * (m - k) as u64 / (k + 1) as u64;
            }
            bell.push(next);
        }
        bell[n]
    }

    #[test]
    fn bell_numbers_agree_with_recurrence() {
        for n in 0..=12 {
            assert_eq!(bell_number(n), bell_by_recurrence(n), "n = {n}");
        }
        assert_eq!(bell_by_recurrence(4), 15);
    }

    #[test]
    fn enumerate_small_ground_sets() {
        let one = PartitionIndex::for_sites(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.get(0), &p("1"));

        let two = PartitionIndex::for_sites(2).unwrap();
        assert_eq!(two.partitions(), &[p("1,2"), p("1|2")]);

        for n in 1..=7 {
            let idx = PartitionIndex::for_sites(n).unwrap();
            assert_eq!(idx.len() as u64, bell_by_recurrence(n));
            let intervals = idx.iter().filter(|a| a.is_interval()).count();
            assert_eq!(intervals, 1 << (n - 1));
        }
        assert_eq!(PartitionIndex::for_sites(4).unwrap().len(), 15);
    }

    #[test]
    fn enumeration_is_deterministic_and_canonical() {
        let a = PartitionIndex::for_sites(5).unwrap();
        let b = PartitionIndex::for_sites(5).unwrap();
        assert_eq!(a.partitions(), b.partitions());
        for (i, part) in a.iter().enumerate() {
            assert_eq!(a.position(part), Some(i));
            let reparsed: Partition = part.to_string().parse().unwrap();
            assert_eq!(&reparsed, part);
        }
    }

    #[test]
    fn cap_exceeded_names_bell_growth() {
        let err = PartitionIndex::for_sites(9).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Bell(9) = 21147"), "{msg}");
        assert!(PartitionIndex::with_cap(SiteSet::full(9), 9).is_ok());
    }

    #[test]
    fn refinement_examples() {
        assert!(p("1|2|3").refines(&p("1,2|3")).unwrap());
        assert!(p("1,3|2").refines(&p("1,3|2")).unwrap());
        assert!(!p("1,2|3").refines(&p("1|2,3")).unwrap());
        assert!(p("1|2").refines(&p("1,2,3")).is_err());
    }

    #[test]
    fn meet_examples() {
        let one = Partition::coarsest(SiteSet::full(3));
        assert_eq!(one.meet(&p("1|2,3")).unwrap(), p("1|2,3"));
        assert_eq!(p("1|2,3").meet(&p("1,2|3")).unwrap(), p("1|2|3"));
        assert_eq!(p("1,3|2").meet(&p("1,2,3")).unwrap(), p("1,3|2"));
        assert!(p("1|2").meet(&p("1|3")).is_err());
    }

    #[test]
    fn restrict_examples() {
        let u = SiteSet::new([1, 2]).unwrap();
        assert_eq!(p("1,3|2").restrict(u).unwrap(), p("1|2"));
        let a = p("1,4|2|3");
        assert_eq!(a.restrict(a.ground()).unwrap(), a);
        assert_eq!(p("1,2,3").restrict(SiteSet::singleton(2)).unwrap(), p("2"));
        assert!(p("1,2").restrict(SiteSet::EMPTY).is_err());
        assert!(p("1,2").restrict(SiteSet::singleton(3)).is_err());
    }

    #[test]
    fn interval_partitions_and_cut_sets() {
        assert_eq!(interval_partition(4, SiteSet::EMPTY).unwrap(), p("1,2,3,4"));
        let g = SiteSet::new([1, 3]).unwrap();
        assert_eq!(interval_partition(4, g).unwrap(), p("1|2,3|4"));
        assert_eq!(interval_partition(3, SiteSet::new([1, 2]).unwrap()).unwrap(), p("1|2|3"));
        assert!(interval_partition(3, SiteSet::new([3]).unwrap()).is_err());

        assert_eq!(cut_set(&p("1,2,3,4")).unwrap(), SiteSet::EMPTY);
        assert_eq!(cut_set(&p("1|2,3|4")).unwrap(), g);
        assert!(matches!(cut_set(&p("1,3|2")), Err(Error::NotInterval(_))));

        assert!(p("1,2|3").is_interval());
        assert!(!p("1,3|2").is_interval());
        assert!(Partition::coarsest(SiteSet::full(5)).is_interval());
    }

    #[test]
    fn cut_set_inverts_interval_partition_exhaustively() {
        for n in 1..=8 {
            let mut seen = std::collections::HashSet::new();
            for bits in 0..(1u64 << (n - 1)) {
                let g = SiteSet::from_bits(bits);
                let s = interval_partition(n, g).unwrap();
                assert!(s.is_interval());
                assert_eq!(cut_set(&s).unwrap(), g);
                seen.insert(s.clone());
                for k in 1..n {
                    let with_k = interval_partition(n, g.union(SiteSet::singleton(k))).unwrap();
                    assert_eq!(with_k, s.meet(&cut_partition(n, k).unwrap()).unwrap());
                }
            }
            assert_eq!(seen.len(), 1 << (n - 1));
        }
    }

    #[test]
    fn lattice_laws_exhaustive() {
        for n in 1..=5 {
            let idx = PartitionIndex::for_sites(n).unwrap();
            let parts = idx.partitions();
            let one = Partition::coarsest(idx.ground());
            for a in parts {
                assert!(a.refines_unchecked(a));
                assert_eq!(&a.meet(a).unwrap(), a);
                assert_eq!(&one.meet(a).unwrap(), a);
                for b in parts {
                    let ab = a.meet(b).unwrap();
                    assert!(ab.refines_unchecked(a) && ab.refines_unchecked(b));
                    assert_eq!(ab, b.meet(a).unwrap());
                    if a.refines_unchecked(b) && b.refines_unchecked(a) {
                        assert_eq!(a, b);
                    }
                    if a != b && a.refines_unchecked(b) {
                        assert!(idx.position(b).unwrap() < idx.position(a).unwrap());
                    }
                    if n <= 4 {
                        for c in parts {
                            assert_eq!(ab.meet(c).unwrap(), a.meet(&b.meet(c).unwrap()).unwrap());
                            if a.refines_unchecked(b) && b.refines_unchecked(c) {
                                assert!(a.refines_unchecked(c));
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn restriction_commutes_with_meet() {
        let n = 5;
        let idx = PartitionIndex::for_sites(n).unwrap();
        let subsets: Vec<SiteSet> = (1..(1u64 << n)).map(SiteSet::from_bits).collect();
        for a in idx.iter().step_by(3) {
            for b in idx.iter().step_by(5) {
                let ab = a.meet(b).unwrap();
                for &u in &subsets {
                    let lhs = ab.restrict(u).unwrap();
                    let rhs = a.restrict(u).unwrap().meet(&b.restrict(u).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn two_block_enumeration() {
        for n in 1..=6 {
            let ground = SiteSet::full(n);
            let two = two_block_partitions(ground);
            assert_eq!(two.len(), (1usize << (n - 1)) - 1);
            let idx = PartitionIndex::for_sites(n).unwrap();
            let expected: Vec<_> = idx.iter().filter(|a| a.len() == 2).cloned().collect();
            assert_eq!(two, expected);
            assert_eq!(partitions_at_most_two(ground).len(), 1 << (n - 1));
        }
    }

    #[test]
    fn siteset_order_is_lexicographic() {
        let sets: Vec<SiteSet> = (1..256u64).map(SiteSet::from_bits).collect();
        for a in &sets {
            for b in &sets {
                let la: Vec<_> = a.iter().collect();
                let lb: Vec<_> = b.iter().collect();
                assert_eq!(a.cmp(b), la.cmp(&lb), "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn parse_rejects_overlap_and_garbage() {
        assert!("1,2|2,3".parse::<Partition>().is_err());
        assert!("1,1|2".parse::<Partition>().is_err());
        assert!("1,x".parse::<Partition>().is_err());
        assert!("0|1".parse::<Partition>().is_err());
        assert_eq!("3,4|2,1".parse::<Partition>().unwrap().to_string(), "1,2|3,4");
    }
}
