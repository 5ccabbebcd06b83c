//! Suppression law for multiports built from the eigenvectors of a mode
//! permutation, and its cyclic/Fourier specialization.
//!
//! Let `P` be a mode permutation with `P|ψ⟩ = e^{iφ}|ψ⟩` and let `U` be a
//! multiport with `U P U† = diag(λ)`. The amplitude of an output with
//! mode-assignment list `d(s)` is zero unless `Π_α λ_{d_α(s)} = e^{iφ}`.
//! The condition is necessary for an output to appear, not sufficient.
//!
//! With the row = output convention of [`crate::interferometer`], the multiport
//! whose output labels carry the eigenvalues `λ_k` of the columns `a_k` of an
//! eigenvector matrix `A` is `Σ·A†` (see [`law_multiport`]). For
//! [`fourier_matrix`] itself the output eigenvalues are therefore the complex
//! conjugates of [`cyclic_eigenvalues`]; [`output_eigenvalues`] computes them
//! for any multiport in the class.

use std::f64::consts::PI;

use itertools::Itertools;

use crate::channels::Ensemble;
use crate::error::{domain, Result};
use crate::fock::{FockVector, C64};
use crate::interferometer::{apply_mode_unitary, fourier_matrix, CMatrix, ModeUnitary};
use crate::symmetry::{cyclic, eigenspace_projector_apply, one_per_mode_labels, permute_modes, Permutation};

/// Tolerance for comparing unit complex numbers.
pub const PHASE_TOL: f64 = 1e-9;

/// Particles per spatial mode, `r = (r_0, …, r_{n-1})`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeOccupationList(Vec<usize>);

impl ModeOccupationList {
    pub fn new(counts: Vec<usize>) -> Self {
        ModeOccupationList(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn particles(&self) -> usize {
        self.0.iter().sum()
    }

    /// All occupation lists of `particles` particles over `modes` modes,
    /// ordered by their mode-assignment lists.
    pub fn all(particles: usize, modes: usize) -> Vec<ModeOccupationList> {
        (0..modes)
            .combinations_with_replacement(particles)
            .map(|assign| {
                let mut r = vec![0; modes];
                for m in assign {
                    r[m] += 1;
                }
                ModeOccupationList(r)
            })
            .collect()
    }
}

/// Sorted list of the mode occupied by each particle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModeAssignmentList(Vec<usize>);

impl ModeAssignmentList {
    pub fn modes(&self) -> &[usize] {
        &self.0
    }
}

/// Unit-modulus eigenvalues, one per column of an eigenvector matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenvalueVector(Vec<C64>);

impl EigenvalueVector {
    pub fn new(lambdas: Vec<C64>) -> Result<Self> {
        if let Some(z) = lambdas.iter().find(|z| (z.norm() - 1.0).abs() > 1e-10) {
            return Err(domain(format!("eigenvalue {z} does not have unit modulus")));
        }
        Ok(EigenvalueVector(lambdas))
    }

    pub fn values(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn product(&self) -> C64 {
        self.0.iter().product()
    }

    pub fn conj(&self) -> EigenvalueVector {
        EigenvalueVector(self.0.iter().map(|z| z.conj()).collect())
    }
}

/// Mode `i` repeated `r_i` times, ascending.
pub fn mode_assignment(r: &ModeOccupationList) -> ModeAssignmentList {
    ModeAssignmentList(
        r.0.iter()
            .enumerate()
            .flat_map(|(mode, &n)| std::iter::repeat_n(mode, n))
            .collect(),
    )
}

/// `Π_α λ_{d_α(s)}` over the particles of the output `s`.
pub fn output_phase(lambdas: &EigenvalueVector, s: &ModeOccupationList) -> Result<C64> {
    if lambdas.len() != s.modes() {
        return Err(domain(format!(
            "{} eigenvalues for a {}-mode output",
            lambdas.len(),
            s.modes()
        )));
    }
    Ok(mode_assignment(s).0.iter().map(|&m| lambdas.0[m]).product())
}

/// True when the output `s` is forbidden for an input with invariance phase
/// `phi`, i.e. `Π_α λ_{d_α(s)} ≠ e^{iφ}`.
pub fn suppression_predicate(lambdas: &EigenvalueVector, phi: f64, s: &ModeOccupationList) -> Result<bool> {
    let prod = output_phase(lambdas, s)?;
    Ok((prod - C64::from_polar(1.0, phi)).norm() > PHASE_TOL)
}

/// `λ_k = ω^{-k}`, `ω = e^{2πi/n}`, `k = 0…n-1`: eigenvalues of the cycle
/// `0→1→…→n-1→0` on the columns of the Fourier matrix.
pub fn cyclic_eigenvalues(n: usize) -> Result<EigenvalueVector> {
    if n < 2 {
        return Err(domain(format!("cyclic eigenvalues need n >= 2, got {n}")));
    }
    EigenvalueVector::new(
        (0..n)
            .map(|k| C64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect(),
    )
}

/// Eigenvector matrix of a permutation built from one Fourier block per
/// cycle: for the cycle `c_0→c_1→…→c_{L-1}`, column `k` has entries
/// `ω_L^{ik}/√L` on `c_i` and eigenvalue `ω_L^{-k}`. Cycles are taken in the
/// order of [`Permutation::cycles`].
pub fn permutation_eigenbasis(p: &Permutation) -> (CMatrix, EigenvalueVector) {
    let m = p.len();
    let mut a = CMatrix::zeros(m, m);
    let mut lambdas = Vec::with_capacity(m);
    let mut col = 0;
    for cycle in p.cycles() {
        let len = cycle.len();
        let scale = 1.0 / (len as f64).sqrt();
        for k in 0..len {
            for (i, &mode) in cycle.iter().enumerate() {
                a[(mode, col)] = C64::from_polar(scale, 2.0 * PI * ((i * k) % len) as f64 / len as f64);
            }
            lambdas.push(C64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64));
            col += 1;
        }
    }
    (a, EigenvalueVector(lambdas))
}

/// Multiport `Σ·A†` whose output mode `k` carries eigenvalue `λ_k` of the
/// permutation's eigenbasis `A`; `sigma` holds the output phases.
pub fn law_multiport(p: &Permutation, sigma: &[C64]) -> Result<(ModeUnitary, EigenvalueVector)> {
    if sigma.len() != p.len() {
        return Err(domain(format!("{} output phases for {} modes", sigma.len(), p.len())));
    }
    let (a, lambdas) = permutation_eigenbasis(p);
    let adj = a.adjoint();
    let m = p.len();
    let u = CMatrix::from_fn(m, m, |r, c| sigma[r] * adj[(r, c)]);
    Ok((ModeUnitary::new(u, format!("law{:?}", p.images()))?, lambdas))
}

/// Diagonal of `U P U†`, or an error if `U` does not diagonalize `P`.
pub fn output_eigenvalues(u: &ModeUnitary, p: &Permutation) -> Result<EigenvalueVector> {
    if u.dim() != p.len() {
        return Err(domain(format!("{}-mode multiport with {}-mode permutation", u.dim(), p.len())));
    }
    let pm = p.to_mode_unitary();
    let d = u.matrix() * pm.matrix() * u.matrix().adjoint();
    let n = u.dim();
    for r in 0..n {
        for c in 0..n {
            if r != c && d[(r, c)].norm() > PHASE_TOL {
                return Err(domain(format!(
                    "{} does not diagonalize {:?}: off-diagonal entry ({r}, {c}) = {}",
                    u.label(),
                    p.images(),
                    d[(r, c)]
                )));
            }
        }
    }
    EigenvalueVector::new((0..n).map(|k| d[(k, k)]).collect())
}

/// `Tr(ρ P)` for the `(-1)^{j-1}` eigenspace projector of the cycle on the
/// first `j` modes.
pub fn antibunch_weight(ens: &Ensemble, j: usize, m: usize) -> Result<f64> {
    if ens.modes() != m {
        return Err(domain(format!("{m}-mode projector on a {}-mode ensemble", ens.modes())));
    }
    ens.expectation(|v| Ok(v.inner_product(&eigenspace_projector_apply(v, j, m)?)?.re))
}

/// Necessary condition for anti-bunching on a Fourier `j`-port: `Tr(ρP) ≠ 0`.
pub fn antibunch_allowed(ens: &Ensemble, j: usize, m: usize) -> Result<bool> {
    Ok(antibunch_weight(ens, j, m)?.abs() > PHASE_TOL)
}

/// Projection onto the `ω^q` eigenspace of the `n`-cycle on the first `n`
/// modes: `(1/n) Σ_k (ω^{-q} π)^k v`.
pub fn cyclic_class_projection(v: &FockVector, n: usize, q: usize) -> Result<FockVector> {
    let pi = cyclic(n, v.modes())?;
    let step = C64::from_polar(1.0, -2.0 * PI * q as f64 / n as f64);
    let mut acc = FockVector::zero(v.modes(), v.levels());
    let mut term = v.clone();
    let mut coeff = C64::new(1.0 / n as f64, 0.0);
    for _ in 0..n {
        term = permute_modes(&term, &pi)?;
        coeff *= step;
        acc = acc.combine(C64::new(1.0, 0.0), &term, coeff)?;
    }
    Ok(acc)
}

/// Verdict for one (input class, output) pair of the Fourier table.
#[derive(Clone, Debug, PartialEq)]
pub struct SuppressionRow {
    /// Input class: eigenvalue `ω^class` under the cycle.
    pub class: usize,
    pub eigenvalue: C64,
    pub output: ModeOccupationList,
    pub suppressed: bool,
    /// Largest output amplitude over all class states, when cross-checked.
    pub max_amplitude: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuppressionTable {
    pub n: usize,
    pub lambdas: EigenvalueVector,
    pub rows: Vec<SuppressionRow>,
}

impl SuppressionTable {
    /// Rows the law forbids but the exact amplitudes do not.
    pub fn violations(&self, tol: f64) -> Vec<&SuppressionRow> {
        self.rows
            .iter()
            .filter(|r| r.suppressed && r.max_amplitude.is_some_and(|a| a > tol))
            .collect()
    }
}

/// Law verdicts for every `n`-particle output of the Fourier `n`-port and
/// every eigenvalue class of the `n`-cycle. With `cross_check`, each verdict
/// is compared against exact amplitudes of the class states obtained by
/// projecting every product basis state (`d = n`) onto the class.
pub fn suppression_table(n: usize, cross_check: bool) -> Result<SuppressionTable> {
    let f = fourier_matrix(n)?;
    let lambdas = output_eigenvalues(&f, &cyclic(n, n)?)?;
    let outputs = ModeOccupationList::all(n, n);
    let mut rows = Vec::new();
    for q in 0..n {
        let phi = 2.0 * PI * q as f64 / n as f64;
        let amplitudes = if cross_check {
            Some(class_output_amplitudes(n, q, &f, &outputs)?)
        } else {
            None
        };
        for (i, s) in outputs.iter().enumerate() {
            rows.push(SuppressionRow {
                class: q,
                eigenvalue: C64::from_polar(1.0, phi),
                output: s.clone(),
                suppressed: suppression_predicate(&lambdas, phi, s)?,
                max_amplitude: amplitudes.as_ref().map(|a| a[i]),
            });
        }
    }
    Ok(SuppressionTable { n, lambdas, rows })
}

fn class_output_amplitudes(
    n: usize,
    q: usize,
    f: &ModeUnitary,
    outputs: &[ModeOccupationList],
) -> Result<Vec<f64>> {
    let mut worst = vec![0.0f64; outputs.len()];
    for occ in one_per_mode_labels(n, n) {
        let v = FockVector::basis(n, n, occ)?;
        let class_state = cyclic_class_projection(&v, n, q)?;
        if class_state.norm() < 1e-9 {
            continue;
        }
        let out = apply_mode_unitary(&class_state.normalized()?, f)?;
        for (label, amp) in out.terms() {
            let r = ModeOccupationList(label.mode_occupations(n));
            if let Ok(i) = outputs.binary_search_by(|s| mode_assignment(s).0.cmp(&mode_assignment(&r).0)) {
                worst[i] = worst[i].max(amp.norm());
            }
        }
    }
    Ok(worst)
}
