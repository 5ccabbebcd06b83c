//! Permutations of spatial modes, the cyclic-eigenspace projectors, the
//! antisymmetrizer, and the totally antisymmetric (generalized singlet)
//! states.
//!
//! Permutations act on states by relabelling modes, `a†_{i,l} → a†_{p(i),l}`,
//! with no sign (bosons). Composition is `(p∘q)(i) = p(q(i))`. Projectors are
//! applied as sums of permuted copies of a vector; no operator is ever stored
//! as a dense matrix.

use itertools::Itertools;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::fock::{FockVector, OccupationState, Slot, C64};
use crate::interferometer::{CMatrix, ModeUnitary};

/// A bijection of `0..m`; `images[i]` is where mode `i` is sent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x >= m || std::mem::replace(&mut seen[x], true) {
                return Err(domain(format!("{images:?} is not a permutation of 0..{m}")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn identity(m: usize) -> Self {
        Permutation { images: (0..m).collect() }
    }

    /// Every permutation of `0..n`, in lexicographic order of image lists.
    pub fn all(n: usize) -> Vec<Permutation> {
        (0..n)
            .permutations(n)
            .map(|images| Permutation { images })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn image(&self, i: usize) -> usize {
        self.images[i]
    }

    /// Cycles including fixed points, each starting from its smallest element
    /// and listed as `c, p(c), p(p(c)), …`; cycles are ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.images[i];
            }
            out.push(cycle);
        }
        out
    }

    /// `+1` or `-1`, from `(-1)^{m - #cycles}`.
    pub fn sign(&self) -> i32 {
        if (self.len() - self.cycles().len()).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(domain(format!(
                "cannot compose permutations of {} and {} elements",
                self.len(),
                other.len()
            )));
        }
        Ok(Permutation { images: other.images.iter().map(|&i| self.images[i]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut images = vec![0; self.len()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p] = i;
        }
        Permutation { images }
    }

    /// The permutation as a mode unitary: entry `(p(i), i)` is one.
    pub fn to_mode_unitary(&self) -> ModeUnitary {
        let m = self.len();
        let mut matrix = CMatrix::zeros(m, m);
        for (i, &p) in self.images.iter().enumerate() {
            matrix[(p, i)] = C64::new(1.0, 0.0);
        }
        ModeUnitary::new(matrix, format!("P{:?}", self.images))
            .expect("permutation matrices are unitary")
    }
}

/// The `j`-cycle `0→1→…→j-1→0` on the first `j` of `m` modes.
pub fn cyclic(j: usize, m: usize) -> Result<Permutation> {
    if j < 2 || j > m {
        return Err(domain(format!("cyclic permutation needs 2 <= j <= m, got j={j}, m={m}")));
    }
    let images = (0..m).map(|i| if i < j { (i + 1) % j } else { i }).collect();
    Ok(Permutation { images })
}

/// Relabel the spatial modes of every term of `v` through `p`.
pub fn permute_modes(v: &FockVector, p: &Permutation) -> Result<FockVector> {
    if p.len() != v.modes() {
        return Err(domain(format!(
            "permutation of {} modes applied to a {}-mode state",
            p.len(),
            v.modes()
        )));
    }
    Ok(v.map_labels(|occ| occ.map_slots(|s| Slot::new(p.images[s.mode], s.level))))
}

/// `(1/j) Σ_{k=1..j} [(-1)^{j-1} π]^k v` with `π = cyclic(j, m)`: projection
/// onto the `(-1)^{j-1}` eigenspace of the cycle on the first `j` modes.
pub fn eigenspace_projector_apply(v: &FockVector, j: usize, m: usize) -> Result<FockVector> {
    if v.modes() != m {
        return Err(domain(format!("{m}-mode projector applied to a {}-mode state", v.modes())));
    }
    let pi = cyclic(j, m)?;
    let sign = if j.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut acc = FockVector::zero(v.modes(), v.levels());
    let mut term = v.clone();
    let mut coeff = 1.0;
    for _ in 1..=j {
        term = permute_modes(&term, &pi)?;
        coeff *= sign;
        acc = acc.combine(C64::new(1.0, 0.0), &term, C64::new(coeff / j as f64, 0.0))?;
    }
    Ok(acc)
}

/// `(1/n!) Σ_{π ∈ S_n} sgn(π) π v` on an `n`-mode state.
pub fn antisymmetrizer_apply(v: &FockVector, n: usize) -> Result<FockVector> {
    if v.modes() != n {
        return Err(domain(format!("S_{n} antisymmetrizer applied to a {}-mode state", v.modes())));
    }
    let perms = Permutation::all(n);
    let weight = 1.0 / perms.len() as f64;
    let mut acc = FockVector::zero(v.modes(), v.levels());
    for p in &perms {
        let c = C64::new(f64::from(p.sign()) * weight, 0.0);
        acc = acc.combine(C64::new(1.0, 0.0), &permute_modes(v, p)?, c)?;
    }
    Ok(acc)
}

/// Normalized totally antisymmetric state of `n` bosons in `n` modes with
/// internal levels `0..n`.
pub fn generalized_singlet(n: usize) -> Result<FockVector> {
    let levels: Vec<usize> = (0..n).collect();
    singlet_over_levels(n, &levels, n)
}

/// `(1/√n!) Σ_π sgn(π) Π_i a†_{i, s_{π(i)}} |0⟩` for the level set `s`
/// (taken in increasing order) inside a `d`-level space.
pub fn singlet_over_levels(n: usize, levels: &[usize], d: usize) -> Result<FockVector> {
    if n < 2 {
        return Err(domain(format!("singlet needs at least two particles, got {n}")));
    }
    let sorted: Vec<usize> = levels.iter().copied().sorted().dedup().collect();
    if sorted.len() != levels.len() || levels.len() != n {
        return Err(domain(format!("need {n} distinct levels, got {levels:?}")));
    }
    if let Some(&bad) = sorted.iter().find(|&&l| l >= d) {
        return Err(domain(format!("level {bad} out of range (levels = {d})")));
    }
    let norm = 1.0 / (Permutation::all(n).len() as f64).sqrt();
    let mut acc = FockVector::zero(n, d);
    for p in Permutation::all(n) {
        let mut term = FockVector::vacuum(n, d);
        for i in 0..n {
            term = term.apply_creation(i, sorted[p.image(i)])?;
        }
        acc = acc.combine(C64::new(1.0, 0.0), &term, C64::new(f64::from(p.sign()) * norm, 0.0))?;
    }
    Ok(acc)
}

/// The singlets `|A_n^S⟩` over every `n`-subset `S` of `0..d`, which together
/// span the antisymmetric one-particle-per-mode sector.
pub fn antisymmetric_basis(n: usize, d: usize) -> Result<Vec<(Vec<usize>, FockVector)>> {
    (0..d)
        .combinations(n)
        .map(|s| {
            let v = singlet_over_levels(n, &s, d)?;
            Ok((s, v))
        })
        .collect()
}

/// Random normalized state of the antisymmetric subspace for `d >= n`, with
/// complex Gaussian coefficients on the `|A_n^S⟩` basis.
pub fn random_antisymmetric_state<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<FockVector> {
    let mut acc = FockVector::zero(n, d);
    for (_, v) in antisymmetric_basis(n, d)? {
        let c = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        acc = acc.combine(C64::new(1.0, 0.0), &v, c)?;
    }
    acc.normalized()
}

/// Basis labels of the one-particle-per-mode sector of `n` modes and `d` levels.
pub fn one_per_mode_labels(n: usize, d: usize) -> Vec<OccupationState> {
    (0..n)
        .map(|_| 0..d)
        .multi_cartesian_product()
        .map(|levels| OccupationState::one_per_mode(&levels))
        .collect()
}

/// Random normalized state of the one-particle-per-mode sector (`n` modes,
/// `d` levels) with complex Gaussian amplitudes on every basis label.
pub fn random_one_per_mode_state<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<FockVector> {
    let terms: Vec<_> = one_per_mode_labels(n, d)
        .into_iter()
        .map(|occ| (occ, C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
        .collect();
    FockVector::from_terms(n, d, terms)?.normalized()
}
