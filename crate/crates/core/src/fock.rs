//! Fock-space basis labels and sparse state vectors for bosons that carry an
//! internal level in addition to their spatial mode.
//!
//! A single-particle state is a [`Slot`] `(mode, level)`. A many-particle basis
//! label is an [`OccupationState`]: a multiset of slots stored as sorted
//! `(slot, count)` pairs. A [`FockVector`] is a sparse superposition of such
//! labels. The ladder convention is `a†|n⟩ = √(n+1)|n+1⟩`, so a label with
//! counts `n_s` corresponds to `Π_s (a†_s)^{n_s} / √(n_s!) |0⟩`.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::BuildHasherDefault;

use num_complex::Complex64;

use crate::error::{domain, Result};

pub type C64 = Complex64;

/// Amplitudes with modulus below this are dropped after every operation.
pub const PRUNE_TOL: f64 = 1e-12;

/// Tolerance on `|⟨v|v⟩ - 1|` for a vector to count as normalized.
pub const NORM_TOL: f64 = 1e-10;

/// Hash map with a fixed hasher, so iteration order (and with it the order of
/// floating-point accumulation) is identical from run to run.
pub(crate) type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

/// One single-particle state: a spatial mode together with an internal level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub mode: usize,
    pub level: usize,
}

impl Slot {
    pub const fn new(mode: usize, level: usize) -> Self {
        Slot { mode, level }
    }
}

/// Occupation-number basis label.
///
/// Entries are kept sorted by `(mode, level)` and every stored count is at
/// least one, so derived equality, ordering and hashing are canonical.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState {
    entries: Vec<(Slot, u32)>,
}

impl OccupationState {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Build a label from `(slot, count)` pairs in any order. Repeated slots
    /// are merged and zero counts dropped.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (Slot, u32)>,
    {
        let mut merged: BTreeMap<Slot, u32> = BTreeMap::new();
        for (slot, n) in counts {
            *merged.entry(slot).or_insert(0) += n;
        }
        OccupationState {
            entries: merged.into_iter().filter(|&(_, n)| n > 0).collect(),
        }
    }

    /// One particle in each mode `i`, at internal level `levels[i]`.
    pub fn one_per_mode(levels: &[usize]) -> Self {
        OccupationState {
            entries: levels
                .iter()
                .enumerate()
                .map(|(mode, &level)| (Slot::new(mode, level), 1))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(Slot, u32)] {
        &self.entries
    }

    pub fn is_vacuum(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, slot: Slot) -> u32 {
        match self.entries.binary_search_by(|(s, _)| s.cmp(&slot)) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    pub fn total_particles(&self) -> usize {
        self.entries.iter().map(|&(_, n)| n as usize).sum()
    }

    /// Number of particles in `mode`, summed over internal levels.
    pub fn mode_count(&self, mode: usize) -> usize {
        self.entries
            .iter()
            .filter(|(s, _)| s.mode == mode)
            .map(|&(_, n)| n as usize)
            .sum()
    }

    /// Mode-marginal view: particles per spatial mode for `modes` modes.
    pub fn mode_occupations(&self, modes: usize) -> Vec<usize> {
        let mut r = vec![0; modes];
        for &(s, n) in &self.entries {
            if s.mode < modes {
                r[s.mode] += n as usize;
            }
        }
        r
    }

    /// True if every mode in `modes` holds exactly one particle.
    pub fn singly_occupies<I: IntoIterator<Item = usize>>(&self, modes: I) -> bool {
        modes.into_iter().all(|m| self.mode_count(m) == 1)
    }

    /// Level of the particle in `mode`, if that mode holds exactly one particle.
    pub fn level_in(&self, mode: usize) -> Option<usize> {
        let mut found = None;
        for &(s, n) in &self.entries {
            if s.mode == mode {
                if n != 1 || found.is_some() {
                    return None;
                }
                found = Some(s.level);
            }
        }
        found
    }

    /// Label with one more particle in `slot` (no ladder factor).
    pub fn created(&self, slot: Slot) -> Self {
        let mut entries = self.entries.clone();
        match entries.binary_search_by(|(s, _)| s.cmp(&slot)) {
            Ok(i) => entries[i].1 += 1,
            Err(i) => entries.insert(i, (slot, 1)),
        }
        OccupationState { entries }
    }

    /// Label with the particle(s) in `slot` removed entirely.
    pub fn without_slot(&self, slot: Slot) -> Self {
        OccupationState {
            entries: self.entries.iter().copied().filter(|&(s, _)| s != slot).collect(),
        }
    }

    /// Each occupied slot repeated by its count.
    pub fn particles(&self) -> impl Iterator<Item = Slot> + '_ {
        self.entries
            .iter()
            .flat_map(|&(s, n)| std::iter::repeat_n(s, n as usize))
    }

    /// Relabel every slot through `f`; counts of slots that collide are added.
    pub fn map_slots<F: Fn(Slot) -> Slot>(&self, f: F) -> Self {
        Self::from_counts(self.entries.iter().map(|&(s, n)| (f(s), n)))
    }

    /// `Π_s n_s!`, the squared norm of the unnormalized monomial.
    pub(crate) fn factorial_product(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, n)| (1..=n).map(f64::from).product::<f64>())
            .product()
    }

    fn check_bounds(&self, modes: usize, levels: usize) -> Result<()> {
        for &(s, _) in &self.entries {
            if s.mode >= modes {
                return Err(domain(format!("mode {} out of range (modes = {modes})", s.mode)));
            }
            if s.level >= levels {
                return Err(domain(format!(
                    "level {} out of range (levels = {levels})",
                    s.level
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, &(s, n)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if n == 1 {
                write!(f, "{}:{}", s.mode, s.level)?;
            } else {
                write!(f, "{}:{}^{}", s.mode, s.level, n)?;
            }
        }
        f.write_str("⟩")
    }
}

/// Sparse complex superposition of occupation labels with a fixed number of
/// spatial modes, internal levels and particles.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    modes: usize,
    levels: usize,
    particles: Option<usize>,
    amps: BTreeMap<OccupationState, C64>,
}

impl FockVector {
    pub fn zero(modes: usize, levels: usize) -> Self {
        FockVector { modes, levels, particles: None, amps: BTreeMap::new() }
    }

    pub fn vacuum(modes: usize, levels: usize) -> Self {
        Self::basis_unchecked(modes, levels, OccupationState::vacuum())
    }

    fn basis_unchecked(modes: usize, levels: usize, occ: OccupationState) -> Self {
        let particles = Some(occ.total_particles());
        let mut amps = BTreeMap::new();
        amps.insert(occ, C64::new(1.0, 0.0));
        FockVector { modes, levels, particles, amps }
    }

    /// Basis vector for `occ` with amplitude one.
    pub fn basis(modes: usize, levels: usize, occ: OccupationState) -> Result<Self> {
        occ.check_bounds(modes, levels)?;
        Ok(Self::basis_unchecked(modes, levels, occ))
    }

    /// `|l_0, l_1, …, l_{m-1}⟩`: one particle per mode, `m = levels.len()`.
    pub fn product_state(levels: &[usize], dim: usize) -> Result<Self> {
        if let Some(&bad) = levels.iter().find(|&&l| l >= dim) {
            return Err(domain(format!("level {bad} out of range (levels = {dim})")));
        }
        Ok(Self::basis_unchecked(levels.len(), dim, OccupationState::one_per_mode(levels)))
    }

    /// Accumulate `(label, amplitude)` terms; repeated labels are summed.
    pub fn from_terms<I>(modes: usize, levels: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationState, C64)>,
    {
        let mut v = Self::zero(modes, levels);
        for (occ, amp) in terms {
            occ.check_bounds(modes, levels)?;
            v.check_particles(&occ)?;
            *v.amps.entry(occ).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        v.prune();
        Ok(v)
    }

    fn check_particles(&mut self, occ: &OccupationState) -> Result<()> {
        let n = occ.total_particles();
        match self.particles {
            None => {
                self.particles = Some(n);
                Ok(())
            }
            Some(p) if p == n => Ok(()),
            Some(p) => Err(domain(format!(
                "particle number mismatch: {n} in a {p}-particle vector"
            ))),
        }
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_TOL);
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Particle number shared by all terms; `None` for a vector that was
    /// never given a term.
    pub fn particle_number(&self) -> Option<usize> {
        self.particles
    }

    /// Number of stored terms; [`FockVector::is_zero`] is the emptiness test.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amps.is_empty()
    }

    /// Terms in canonical label order.
    pub fn terms(&self) -> impl Iterator<Item = (&OccupationState, C64)> {
        self.amps.iter().map(|(o, &a)| (o, a))
    }

    pub fn amplitude(&self, occ: &OccupationState) -> C64 {
        self.amps.get(occ).copied().unwrap_or_default()
    }

    /// `a†_{mode,level}` applied to every term.
    pub fn apply_creation(&self, mode: usize, level: usize) -> Result<Self> {
        if mode >= self.modes || level >= self.levels {
            return Err(domain(format!(
                "creation at ({mode}, {level}) outside {} modes x {} levels",
                self.modes, self.levels
            )));
        }
        let slot = Slot::new(mode, level);
        let mut out = Self::zero(self.modes, self.levels);
        out.particles = self.particles.map(|p| p + 1);
        for (occ, &amp) in &self.amps {
            let n = occ.count(slot) as f64;
            out.amps.insert(occ.created(slot), amp * (n + 1.0).sqrt());
        }
        out.prune();
        Ok(out)
    }

    pub fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes || self.levels != other.levels {
            return Err(domain(format!(
                "space mismatch: {}x{} vs {}x{} (modes x levels)",
                self.modes, self.levels, other.modes, other.levels
            )));
        }
        if let (Some(a), Some(b)) = (self.particles, other.particles) {
            if a != b {
                return Err(domain(format!("particle number mismatch: {a} vs {b}")));
            }
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner_product(&self, other: &Self) -> Result<C64> {
        self.check_same_space(other)?;
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = C64::new(0.0, 0.0);
        for (occ, &a) in &small.amps {
            if let Some(&b) = large.amps.get(occ) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < PRUNE_TOL {
            return Err(domain("cannot normalize the zero vector"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// `|⟨a|b⟩|²` for normalized vectors.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        if !self.is_normalized() || !other.is_normalized() {
            return Err(domain(format!(
                "fidelity needs normalized inputs (norms² {:.3e}, {:.3e})",
                self.norm_sqr(),
                other.norm_sqr()
            )));
        }
        Ok(self.inner_product(other)?.norm_sqr().min(1.0))
    }

    pub fn scaled(&self, c: C64) -> Self {
        let mut out = self.clone();
        for a in out.amps.values_mut() {
            *a *= c;
        }
        out.prune();
        out
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Result<Self> {
        self.check_same_space(other)?;
        let mut out = self.scaled(a);
        if out.particles.is_none() {
            out.particles = other.particles;
        }
        for (occ, &amp) in &other.amps {
            *out.amps.entry(occ.clone()).or_insert(C64::new(0.0, 0.0)) += b * amp;
        }
        out.prune();
        Ok(out)
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// Largest amplitude-wise deviation `max |self_k - other_k|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_space(other)?;
        let mut worst: f64 = 0.0;
        for (occ, &a) in &self.amps {
            worst = worst.max((a - other.amplitude(occ)).norm());
        }
        for (occ, &b) in &other.amps {
            if !self.amps.contains_key(occ) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }

    /// Keep only the terms whose label satisfies `keep`.
    pub fn filtered<F: Fn(&OccupationState) -> bool>(&self, keep: F) -> Self {
        let mut out = self.clone();
        out.amps.retain(|occ, _| keep(occ));
        out
    }

    /// Relabel every term through `f` with amplitudes unchanged. Labels that
    /// collide are summed; `f` must keep slots inside the space.
    pub(crate) fn map_labels<F: Fn(&OccupationState) -> OccupationState>(&self, f: F) -> Self {
        let mut out = Self::zero(self.modes, self.levels);
        out.particles = self.particles;
        for (occ, &amp) in &self.amps {
            *out.amps.entry(f(occ)).or_insert(C64::new(0.0, 0.0)) += amp;
        }
        out.prune();
        out
    }

    /// Same terms in a space with a different number of internal levels.
    pub fn with_levels(&self, levels: usize) -> Result<Self> {
        for occ in self.amps.keys() {
            occ.check_bounds(self.modes, levels)?;
        }
        let mut out = self.clone();
        out.levels = levels;
        Ok(out)
    }

    /// Same terms with the mode count raised to `modes` (new modes empty).
    pub fn with_modes(&self, modes: usize) -> Result<Self> {
        for occ in self.amps.keys() {
            occ.check_bounds(modes, self.levels)?;
        }
        let mut out = self.clone();
        out.modes = modes;
        Ok(out)
    }

    /// `|self⟩ ⊗ |other⟩` with the modes of `other` placed after those of
    /// `self`; both must share the number of internal levels.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.levels != other.levels {
            return Err(domain(format!(
                "tensor product of {}-level and {}-level states",
                self.levels, other.levels
            )));
        }
        let shift = self.modes;
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (a, &x) in &self.amps {
            for (b, &y) in &other.amps {
                let shifted = b.entries().iter().map(|&(s, n)| (Slot::new(s.mode + shift, s.level), n));
                terms.push((OccupationState::from_counts(a.entries().iter().copied().chain(shifted)), x * y));
            }
        }
        Self::from_terms(self.modes + other.modes, self.levels, terms)
    }

    /// Linear substitution of creation operators.
    ///
    /// Every term is read as a product of creation operators on the vacuum,
    /// each factor `a†_s` is replaced by `Σ_t c_t a†_t` with `(t, c_t)` taken
    /// from `image(s)`, and the product is re-expanded into occupation labels.
    /// `image` must return slots inside this vector's space.
    pub fn substitute<F>(&self, image: F) -> Self
    where
        F: Fn(Slot) -> Vec<(Slot, C64)>,
    {
        let zero = C64::new(0.0, 0.0);
        let mut images: DetMap<Slot, Vec<(Slot, C64)>> = DetMap::default();
        let mut monomials: DetMap<OccupationState, C64> = DetMap::default();
        for (occ, &amp) in &self.amps {
            let mut partial: DetMap<OccupationState, C64> = DetMap::default();
            partial.insert(OccupationState::vacuum(), amp / occ.factorial_product().sqrt());
            for slot in occ.particles() {
                let img = images.entry(slot).or_insert_with(|| image(slot));
                let mut next: DetMap<OccupationState, C64> = DetMap::default();
                for (mono, &c) in &partial {
                    for &(target, u) in img.iter() {
                        if u != zero {
                            *next.entry(mono.created(target)).or_insert(zero) += c * u;
                        }
                    }
                }
                partial = next;
            }
            for (mono, c) in partial {
                *monomials.entry(mono).or_insert(zero) += c;
            }
        }
        let mut out = Self::zero(self.modes, self.levels);
        out.particles = self.particles;
        for (mono, c) in monomials {
            let amp = c * mono.factorial_product().sqrt();
            if amp.norm() >= PRUNE_TOL {
                out.amps.insert(mono, amp);
            }
        }
        out
    }
}

impl fmt::Display for FockVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amps.is_empty() {
            return f.write_str("0");
        }
        for (i, (occ, a)) in self.amps.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, occ)?;
        }
        Ok(())
    }
}
