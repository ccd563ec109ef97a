//! Finite measures on product type spaces `X = X_1 × ... × X_n`.
//!
//! Types are addressed by their mixed-radix index with site 1 as the most
//! significant digit. Small spaces store masses densely; spaces with more than
//! [`DENSE_CAP`] types keep only the support in an ordered map.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::partition::{Partition, SiteSet, MAX_SITES};
use crate::scalar::Real;

/// Largest number of types stored densely.
pub const DENSE_CAP: u64 = 1 << 20;

/// Largest admissible number of types.
pub const STORAGE_CAP: u64 = 1 << 62;

/// Absolute tolerance for identities of the exact methods.
pub const EXACT_TOL: f64 = 1e-12;

/// Product of finite alphabets, one per site.
#[derive(Clone, PartialEq, Eq)]
pub struct TypeSpace {
    sizes: Vec<usize>,
    strides: Vec<u64>,
    cardinality: u64,
}

impl TypeSpace {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > MAX_SITES {
            return Err(Error::domain(format!(
                "type space needs between 1 and {MAX_SITES} sites, got {}",
                sizes.len()
            )));
        }
        if let Some(i) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::domain(format!("alphabet at site {} is empty", i + 1)));
        }
        let mut card: u128 = 1;
        for &s in &sizes {
            card *= s as u128;
            if card > STORAGE_CAP as u128 {
                let full = sizes.iter().fold(1u128, |a, &s| a.saturating_mul(s as u128));
                return Err(Error::TypeSpaceTooLarge { cardinality: full, cap: STORAGE_CAP as u128 });
            }
        }
        let mut strides = vec![1u64; sizes.len()];
        for i in (0..sizes.len() - 1).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1] as u64;
        }
        Ok(TypeSpace { sizes, strides, cardinality: card as u64 })
    }

    /// `n` binary sites.
    pub fn binary(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.sizes
    }

    #[inline]
    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    #[inline]
    pub fn is_dense(&self) -> bool {
        self.cardinality <= DENSE_CAP
    }

    /// Letter at 1-based `site` of the type with index `idx`.
    #[inline]
    pub fn letter(&self, idx: u64, site: usize) -> usize {
        ((idx / self.strides[site - 1]) % self.sizes[site - 1] as u64) as usize
    }

    pub fn encode(&self, letters: &[usize]) -> Result<u64> {
        if letters.len() != self.sizes.len() {
            return Err(Error::domain(format!(
                "type has {} letters, space has {} sites",
                letters.len(),
                self.sizes.len()
            )));
        }
        let mut idx = 0;
        for (i, (&x, &s)) in letters.iter().zip(&self.sizes).enumerate() {
            if x >= s {
                return Err(Error::domain(format!("letter {x} at site {} exceeds alphabet size {s}", i + 1)));
            }
            idx += x as u64 * self.strides[i];
        }
        Ok(idx)
    }

    pub fn decode(&self, idx: u64) -> Vec<usize> {
        (1..=self.sites()).map(|s| self.letter(idx, s)).collect()
    }

    /// Type whose letters on each block come from the paired parent type.
    pub fn compose(&self, parts: &[(SiteSet, u64)]) -> u64 {
        let mut idx = 0;
        for &(block, parent) in parts {
            for s in block.iter() {
                idx += self.letter(parent, s) as u64 * self.strides[s - 1];
            }
        }
        idx
    }

    /// Type label used in table headers, e.g. `0:1:1`.
    pub fn label(&self, idx: u64) -> String {
        let letters: Vec<String> = self.decode(idx).iter().map(|x| x.to_string()).collect();
        letters.join(":")
    }

    /// Projection `π_I` of a type index onto the sub-space of `sites`
    /// (which must be valid sites of this space).
    fn projector(&self, sites: SiteSet) -> Projector {
        let chosen: Vec<usize> = sites.iter().collect();
        let mut sub_strides = vec![1u64; chosen.len()];
        for i in (0..chosen.len().saturating_sub(1)).rev() {
            sub_strides[i] = sub_strides[i + 1] * self.sizes[chosen[i + 1] - 1] as u64;
        }
        Projector {
            digits: chosen
                .iter()
                .zip(sub_strides)
                .map(|(&s, sub)| (self.strides[s - 1], self.sizes[s - 1] as u64, sub))
                .collect(),
        }
    }

    fn sub_space(&self, sites: SiteSet) -> TypeSpace {
        TypeSpace::new(sites.iter().map(|s| self.sizes[s - 1]).collect()).expect("sub-space of a valid space")
    }

    fn check_sites(&self, sites: SiteSet) -> Result<()> {
        if sites.is_empty() || !sites.is_subset(SiteSet::full(self.sites())) {
            return Err(Error::domain(format!(
                "site set {{{sites}}} is not a nonempty subset of 1..={}",
                self.sites()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for TypeSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypeSpace{:?}", self.sizes)
    }
}

/// Maps full type indices to sub-space indices and back.
struct Projector {
    /// (stride in full space, alphabet size, stride in sub-space), per chosen site.
    digits: Vec<(u64, u64, u64)>,
}

impl Projector {
    #[inline]
    fn project(&self, idx: u64) -> u64 {
        self.digits
            .iter()
            .map(|&(full, size, sub)| ((idx / full) % size) * sub)
            .sum()
    }

    #[inline]
    fn embed(&self, sub_idx: u64) -> u64 {
        self.digits
            .iter()
            .map(|&(full, size, sub)| ((sub_idx / sub) % size) * full)
            .sum()
    }
}

#[derive(Clone, PartialEq)]
enum Masses<T> {
    Dense(Vec<T>),
    Sparse(BTreeMap<u64, T>),
}

/// A finite signed measure on a [`TypeSpace`].
///
/// Type distributions are the nonnegative ones with total mass one; the
/// right-hand side of the recombination equation is a signed measure of
/// total mass zero. Operations never renormalize silently.
#[derive(Clone, PartialEq)]
pub struct Measure<T> {
    space: TypeSpace,
    masses: Masses<T>,
}

impl<T: Real> Measure<T> {
    pub fn zero(space: &TypeSpace) -> Self {
        let masses = if space.is_dense() {
            Masses::Dense(vec![T::zero(); space.cardinality() as usize])
        } else {
            Masses::Sparse(BTreeMap::new())
        };
        Measure { space: space.clone(), masses }
    }

    /// Dense construction from masses in mixed-radix order. Masses must be nonnegative.
    pub fn from_masses(space: &TypeSpace, masses: Vec<T>) -> Result<Self> {
        if masses.len() as u64 != space.cardinality() {
            return Err(Error::domain(format!(
                "{} masses given for {} types",
                masses.len(),
                space.cardinality()
            )));
        }
        if let Some(i) = masses.iter().position(|m| !(*m >= T::zero()) || !m.is_finite()) {
            return Err(Error::domain(format!("mass of type {} is not a finite nonnegative number", space.label(i as u64))));
        }
        let mut out = Self::zero(space);
        for (i, m) in masses.into_iter().enumerate() {
            out.add_at(i as u64, m);
        }
        Ok(out)
    }

    /// Nonnegative measure from `(type, mass)` pairs; repeated types accumulate.
    pub fn from_pairs<I>(space: &TypeSpace, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, T)>,
    {
        let mut out = Self::zero(space);
        for (letters, m) in pairs {
            if !(m >= T::zero()) || !m.is_finite() {
                return Err(Error::domain(format!("mass {m} for type {letters:?} is not finite and nonnegative")));
            }
            let idx = space.encode(&letters)?;
            out.add_at(idx, m);
        }
        Ok(out)
    }

    pub fn uniform(space: &TypeSpace) -> Self {
        let m = T::one() / T::of(space.cardinality() as f64);
        let mut out = Self::zero(space);
        if space.is_dense() {
            out.masses = Masses::Dense(vec![m; space.cardinality() as usize]);
        } else {
            // Sparse storage of a fully supported measure; allowed but heavy.
            for i in 0..space.cardinality() {
                out.add_at(i, m);
            }
        }
        out
    }

    pub fn dirac(space: &TypeSpace, letters: &[usize]) -> Result<Self> {
        let idx = space.encode(letters)?;
        let mut out = Self::zero(space);
        out.add_at(idx, T::one());
        Ok(out)
    }

    #[inline]
    pub fn space(&self) -> &TypeSpace {
        &self.space
    }

    pub fn get(&self, idx: u64) -> T {
        match &self.masses {
            Masses::Dense(v) => v.get(idx as usize).copied().unwrap_or_else(T::zero),
            Masses::Sparse(m) => m.get(&idx).copied().unwrap_or_else(T::zero),
        }
    }

    pub fn get_type(&self, letters: &[usize]) -> Result<T> {
        Ok(self.get(self.space.encode(letters)?))
    }

    pub(crate) fn add_at(&mut self, idx: u64, m: T) {
        match &mut self.masses {
            Masses::Dense(v) => v[idx as usize] = v[idx as usize] + m,
            Masses::Sparse(map) => {
                let e = map.entry(idx).or_insert_with(T::zero);
                *e = *e + m;
            }
        }
    }

    /// Entries in increasing type order; dense storage yields every type.
    pub fn iter(&self) -> Box<dyn Iterator<Item = (u64, T)> + '_> {
        match &self.masses {
            Masses::Dense(v) => Box::new(v.iter().enumerate().map(|(i, m)| (i as u64, *m))),
            Masses::Sparse(m) => Box::new(m.iter().map(|(i, m)| (*i, *m))),
        }
    }

    /// Nonzero entries in increasing type order.
    pub fn support(&self) -> impl Iterator<Item = (u64, T)> + '_ {
        self.iter().filter(|(_, m)| !m.is_zero())
    }

    /// Total (signed) mass.
    pub fn total_mass(&self) -> T {
        self.iter().map(|(_, m)| m).sum()
    }

    /// Whether all masses are nonnegative and the total is one within `tol`.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.iter().all(|(_, m)| m >= T::zero()) && (self.total_mass() - T::one()).abs() <= T::of(tol)
    }

    fn check_space(&self, other: &Measure<T>) -> Result<()> {
        if self.space != other.space {
            return Err(Error::domain(format!(
                "type spaces differ: {:?} vs {:?}",
                self.space, other.space
            )));
        }
        Ok(())
    }

    /// Pushforward `ω^I` under the projection onto `sites`.
    pub fn marginal(&self, sites: SiteSet) -> Result<Measure<T>> {
        self.space.check_sites(sites)?;
        if sites == SiteSet::full(self.space.sites()) {
            return Ok(self.clone());
        }
        Ok(self.marginal_unchecked(sites))
    }

    fn marginal_unchecked(&self, sites: SiteSet) -> Measure<T> {
        let proj = self.space.projector(sites);
        let mut out = Measure::zero(&self.space.sub_space(sites));
        for (idx, m) in self.support() {
            out.add_at(proj.project(idx), m);
        }
        out
    }

    /// The recombinator `R_A(ω) = ‖ω‖^{-(m-1)} ⊗_{A ∈ A} ω^A`.
    pub fn recombine(&self, partition: &Partition) -> Result<Measure<T>> {
        if partition.ground() != SiteSet::full(self.space.sites()) {
            return Err(Error::domain(format!(
                "partition {partition} does not partition the {} sites of the type space",
                self.space.sites()
            )));
        }
        Ok(self.recombine_unchecked(partition))
    }

    pub(crate) fn recombine_unchecked(&self, partition: &Partition) -> Measure<T> {
        if partition.is_coarsest() {
            return self.clone();
        }
        let norm = self.total_mass();
        let mut out = Measure::zero(&self.space);
        if norm.is_zero() {
            return out;
        }
        // Per block: embedded full-space offsets with their marginal masses.
        let factors: Vec<Vec<(u64, T)>> = partition
            .blocks()
            .iter()
            .map(|&b| {
                let proj = self.space.projector(b);
                self.marginal_unchecked(b)
                    .support()
                    .map(|(sub, m)| (proj.embed(sub), m))
                    .collect()
            })
            .collect();
        let scale = norm.powi(partition.len() as i32 - 1);
        let mut cursor = vec![0usize; factors.len()];
        if factors.iter().any(|f| f.is_empty()) {
            return out;
        }
        loop {
            let mut idx = 0;
            let mut m = T::one();
            for (f, &c) in factors.iter().zip(&cursor) {
                idx += f[c].0;
                m = m * f[c].1;
            }
            out.add_at(idx, m / scale);
            // Odometer over the cartesian product, last factor fastest.
            let mut k = factors.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                cursor[k] += 1;
                if cursor[k] < factors[k].len() {
                    break;
                }
                cursor[k] = 0;
            }
        }
    }

    /// Product of the single-site marginals, `⊗_i π_i.ω`.
    pub fn linkage_equilibrium(&self) -> Measure<T> {
        self.recombine_unchecked(&Partition::finest(SiteSet::full(self.space.sites())))
    }

    /// `½ Σ_x |ω_1(x) - ω_2(x)|`.
    pub fn total_variation(&self, other: &Measure<T>) -> Result<T> {
        self.check_space(other)?;
        Ok(self.zip_fold(other, T::zero(), |acc, a, b| acc + (a - b).abs()) / T::of(2.0))
    }

    /// `max_x |ω_1(x) - ω_2(x)|`.
    pub fn sup_distance(&self, other: &Measure<T>) -> Result<T> {
        self.check_space(other)?;
        Ok(self.zip_fold(other, T::zero(), |acc, a, b| acc.max((a - b).abs())))
    }

    fn zip_fold<F: Fn(T, T, T) -> T>(&self, other: &Measure<T>, init: T, f: F) -> T {
        match (&self.masses, &other.masses) {
            (Masses::Dense(a), Masses::Dense(b)) => {
                a.iter().zip(b).fold(init, |acc, (x, y)| f(acc, *x, *y))
            }
            _ => {
                let mut keys: Vec<u64> = self.support().map(|(i, _)| i).collect();
                keys.extend(other.support().map(|(i, _)| i));
                keys.sort_unstable();
                keys.dedup();
                keys.into_iter().fold(init, |acc, k| f(acc, self.get(k), other.get(k)))
            }
        }
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: T, other: &Measure<T>) -> Result<()> {
        self.check_space(other)?;
        match (&mut self.masses, &other.masses) {
            (Masses::Dense(x), Masses::Dense(y)) => {
                for (xi, yi) in x.iter_mut().zip(y) {
                    *xi = *xi + a * *yi;
                }
            }
            _ => {
                for (k, m) in other.support().collect::<Vec<_>>() {
                    self.add_at(k, a * m);
                }
            }
        }
        Ok(())
    }

    pub fn scaled(&self, a: T) -> Measure<T> {
        let mut out = self.clone();
        match &mut out.masses {
            Masses::Dense(v) => v.iter_mut().for_each(|m| *m = *m * a),
            Masses::Sparse(map) => map.values_mut().for_each(|m| *m = *m * a),
        }
        out
    }

    /// Explicit renormalization to total mass one.
    pub fn normalize(&self) -> Result<Measure<T>> {
        let mass = self.total_mass();
        if !(mass > T::zero()) {
            return Err(Error::domain("cannot normalize a measure with nonpositive mass"));
        }
        Ok(self.scaled(T::one() / mass))
    }

    /// Masses of every type in mixed-radix order.
    pub fn to_dense(&self) -> Vec<T> {
        match &self.masses {
            Masses::Dense(v) => v.clone(),
            Masses::Sparse(_) => (0..self.space.cardinality()).map(|i| self.get(i)).collect(),
        }
    }
}

impl<T: Real> fmt::Debug for Measure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (idx, m) in self.support() {
            map.entry(&self.space.label(idx), &m);
        }
        map.finish()
    }
}
