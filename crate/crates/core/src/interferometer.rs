//! Mode unitaries: Fourier multiports, embedding into larger systems, local
//! phase variants, and their action on Fock vectors.
//!
//! Matrix convention: row index = output mode, column index = input mode. A
//! unitary `u` acts on a state by substituting
//! `a†_{ℓ,level} → Σ_k u[k, ℓ] a†_{k,level}`; internal levels are untouched.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::fock::{FockVector, Slot, C64};

pub type CMatrix = DMatrix<C64>;

/// Maximum entry of `|U·U† - 1|` accepted at construction.
pub const UNITARY_TOL: f64 = 1e-10;

/// Largest entry-wise deviation of `m·m†` from the identity.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let prod = m * m.adjoint();
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

/// A unitary on spatial modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeUnitary {
    matrix: CMatrix,
    label: String,
}

impl ModeUnitary {
    pub fn new(matrix: CMatrix, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(domain(format!(
                "mode unitary must be a non-empty square matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > UNITARY_TOL {
            return Err(domain(format!("matrix is not unitary (defect {defect:.3e})")));
        }
        Ok(ModeUnitary { matrix, label: label.into() })
    }

    pub fn identity(n: usize) -> Self {
        ModeUnitary { matrix: CMatrix::identity(n, n), label: format!("I_{n}") }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Amplitude for a particle entering `input` to leave through `output`.
    pub fn entry(&self, output: usize, input: usize) -> C64 {
        self.matrix[(output, input)]
    }

    /// `self · rhs`: `rhs` acts first.
    pub fn compose(&self, rhs: &ModeUnitary) -> Result<ModeUnitary> {
        if self.dim() != rhs.dim() {
            return Err(domain(format!(
                "cannot compose {}x{} with {}x{}",
                self.dim(),
                self.dim(),
                rhs.dim(),
                rhs.dim()
            )));
        }
        Ok(ModeUnitary {
            matrix: &self.matrix * &rhs.matrix,
            label: format!("{}·{}", self.label, rhs.label),
        })
    }

    pub fn adjoint(&self) -> ModeUnitary {
        ModeUnitary { matrix: self.matrix.adjoint(), label: format!("{}†", self.label) }
    }

    pub fn determinant(&self) -> C64 {
        self.matrix.clone().determinant()
    }
}

/// Unitary discrete Fourier multiport: entry `(k, ℓ) = ω^{kℓ}/√n`,
/// `ω = e^{2πi/n}`.
pub fn fourier_matrix(n: usize) -> Result<ModeUnitary> {
    if n == 0 {
        return Err(domain("Fourier multiport needs at least one mode"));
    }
    let scale = 1.0 / (n as f64).sqrt();
    // exponents reduced mod n keep every entry an exactly-evaluated root of unity
    let matrix = CMatrix::from_fn(n, n, |k, l| {
        C64::from_polar(scale, 2.0 * PI * ((k * l) % n) as f64 / n as f64)
    });
    Ok(ModeUnitary { matrix, label: format!("F_{n}") })
}

/// Determinant of [`fourier_matrix`]`(n)` from the eigenvalue multiplicities
/// of the unitary DFT (values `1, -1, i, -i` with counts fixed by `n mod 4`).
pub fn fourier_determinant(n: usize) -> C64 {
    let (q, r) = (n / 4, n % 4);
    // multiplicities of -1, -i, +i for the e^{-2πi/n} kernel (the rest are +1)
    let (minus, neg_i, pos_i) = match r {
        0 => (q, q, q.saturating_sub(1)),
        1 => (q, q, q),
        2 => (q + 1, q, q),
        _ => (q + 1, q + 1, q),
    };
    // ω = e^{+2πi/n} conjugates the spectrum, swapping the ±i counts
    let i = C64::new(0.0, 1.0);
    let sign = if minus % 2 == 0 { 1.0 } else { -1.0 };
    C64::new(sign, 0.0) * i.powu(neg_i as u32) * (-i).powu(pos_i as u32)
}

/// Embed a `j`-mode unitary on the ordered mode subset `modes` of an
/// `m`-mode system; identity elsewhere.
pub fn embed(u: &ModeUnitary, modes: &[usize], m: usize) -> Result<ModeUnitary> {
    if modes.len() != u.dim() {
        return Err(domain(format!(
            "embedding a {}-mode unitary needs {} target modes, got {}",
            u.dim(),
            u.dim(),
            modes.len()
        )));
    }
    let mut seen = vec![false; m];
    for &k in modes {
        if k >= m {
            return Err(domain(format!("target mode {k} out of range (modes = {m})")));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(domain(format!("target mode {k} listed twice")));
        }
    }
    let mut matrix = CMatrix::identity(m, m);
    for (a, &ka) in modes.iter().enumerate() {
        for (b, &kb) in modes.iter().enumerate() {
            matrix[(ka, kb)] = u.matrix[(a, b)];
        }
    }
    Ok(ModeUnitary { matrix, label: format!("{}@{:?}", u.label, modes) })
}

/// Transform a state by the mode unitary `u` (internal levels untouched).
pub fn apply_mode_unitary(v: &FockVector, u: &ModeUnitary) -> Result<FockVector> {
    let m = v.modes();
    if u.dim() != m {
        return Err(domain(format!(
            "{}-mode unitary applied to a {m}-mode state",
            u.dim()
        )));
    }
    let zero = C64::new(0.0, 0.0);
    Ok(v.substitute(|s| {
        (0..m)
            .map(|k| (Slot::new(k, s.level), u.matrix[(k, s.mode)]))
            .filter(|&(_, c)| c != zero)
            .collect()
    }))
}

/// `diag(d_out) · u · diag(d_in)`.
pub fn phase_variant(u: &ModeUnitary, d_in: &[C64], d_out: &[C64]) -> Result<ModeUnitary> {
    let n = u.dim();
    if d_in.len() != n || d_out.len() != n {
        return Err(domain(format!(
            "phase lists must have length {n}, got {} and {}",
            d_in.len(),
            d_out.len()
        )));
    }
    if let Some(z) = d_in.iter().chain(d_out).find(|z| (z.norm() - 1.0).abs() > UNITARY_TOL) {
        return Err(domain(format!("phase {z} does not have unit modulus")));
    }
    let matrix = CMatrix::from_fn(n, n, |k, l| d_out[k] * u.matrix[(k, l)] * d_in[l]);
    Ok(ModeUnitary { matrix, label: format!("D·{}·D'", u.label) })
}

/// Haar-distributed unitary from Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ModeUnitary {
    ModeUnitary { matrix: random_unitary_matrix(n, rng), label: format!("R_{n}") }
}

pub(crate) fn random_unitary_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut q = CMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    for j in 0..n {
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for k in 0..j {
                let proj = q.column(k).dotc(&q.column(j));
                let col_k = q.column(k).clone_owned();
                let mut col_j = q.column_mut(j);
                col_j -= col_k * proj;
            }
        }
        let norm = q.column(j).norm();
        q.column_mut(j).scale_mut(1.0 / norm);
    }
    q
}

/// `n` uniformly random unit phases.
pub fn random_phases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::OccupationState;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn singlet2() -> FockVector {
        let a = FockVector::product_state(&[0, 1], 2).unwrap();
        let b = FockVector::product_state(&[1, 0], 2).unwrap();
        a.minus(&b).unwrap().normalized().unwrap()
    }

    #[test]
    fn fourier_examples() {
        let f1 = fourier_matrix(1).unwrap();
        assert_abs_diff_eq!(f1.entry(0, 0).re, 1.0, epsilon = 1e-15);

        let f2 = fourier_matrix(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        for (k, l, s) in [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)] {
            assert!((f2.entry(k, l) - c(s * h, 0.0)).norm() < 1e-15);
        }

        let f3 = fourier_matrix(3).unwrap();
        let r3 = 1.0 / 3f64.sqrt();
        for i in 0..3 {
            assert!((f3.entry(0, i) - c(r3, 0.0)).norm() < 1e-15);
            assert!((f3.entry(i, 0) - c(r3, 0.0)).norm() < 1e-15);
        }
        let omega = C64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((f3.entry(1, 1) - omega * r3).norm() < 1e-15);

        assert!(fourier_matrix(0).is_err());
        for n in 1..=8 {
            assert!(unitarity_defect(fourier_matrix(n).unwrap().matrix()) < 1e-13);
        }
    }

    #[test]
    fn fourier_determinant_closed_form_matches_lu() {
        for n in 1..=12 {
            let det = fourier_matrix(n).unwrap().determinant();
            assert!((det - fourier_determinant(n)).norm() < 1e-9, "n = {n}: {det}");
        }
    }

    #[test]
    fn embed_examples() {
        let e = embed(&fourier_matrix(2).unwrap(), &[0, 1], 3).unwrap();
        for k in 0..2 {
            assert_eq!(e.entry(2, k), c(0.0, 0.0));
            assert_eq!(e.entry(k, 2), c(0.0, 0.0));
        }
        assert_eq!(e.entry(2, 2), c(1.0, 0.0));

        let id = embed(&ModeUnitary::identity(2), &[0, 1], 2).unwrap();
        assert_eq!(id.matrix(), ModeUnitary::identity(2).matrix());

        let e = embed(&fourier_matrix(2).unwrap(), &[1, 2], 3).unwrap();
        let v = FockVector::vacuum(3, 2).apply_creation(0, 1).unwrap();
        assert!(apply_mode_unitary(&v, &e).unwrap().max_abs_diff(&v).unwrap() < 1e-15);

        assert!(embed(&fourier_matrix(2).unwrap(), &[1, 1], 3).is_err());
        assert!(embed(&fourier_matrix(2).unwrap(), &[0, 3], 3).is_err());
        assert!(embed(&fourier_matrix(2).unwrap(), &[0], 3).is_err());
    }

    #[test]
    fn beam_splitter_on_singlet_flips_sign() {
        let s = singlet2();
        let out = apply_mode_unitary(&s, &fourier_matrix(2).unwrap()).unwrap();
        assert!(out.max_abs_diff(&s.scaled(c(-1.0, 0.0))).unwrap() < 1e-10);
    }

    #[test]
    fn hong_ou_mandel_bunching() {
        let v = FockVector::product_state(&[0, 0], 2).unwrap();
        let out = apply_mode_unitary(&v, &fourier_matrix(2).unwrap()).unwrap();
        let both0 = OccupationState::from_counts([(Slot::new(0, 0), 2)]);
        let both1 = OccupationState::from_counts([(Slot::new(1, 0), 2)]);
        let h = 1.0 / 2f64.sqrt();
        assert!((out.amplitude(&both0) - c(h, 0.0)).norm() < 1e-12);
        assert!((out.amplitude(&both1) - c(-h, 0.0)).norm() < 1e-12);
        assert_eq!(out.amplitude(&OccupationState::one_per_mode(&[0, 0])), c(0.0, 0.0));
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn phase_variant_examples() {
        let f2 = fourier_matrix(2).unwrap();
        let ones = vec![c(1.0, 0.0); 2];
        assert_eq!(phase_variant(&f2, &ones, &ones).unwrap().matrix(), f2.matrix());

        let ii = vec![c(0.0, 1.0); 2];
        let pv = phase_variant(&f2, &ii, &ii).unwrap();
        assert!(unitarity_defect(pv.matrix()) < 1e-14);
        let s = singlet2();
        let out = apply_mode_unitary(&s, &pv).unwrap();
        assert_abs_diff_eq!(out.fidelity(&s).unwrap(), 1.0, epsilon = 1e-12);

        assert!(phase_variant(&f2, &[c(2.0, 0.0), c(1.0, 0.0)], &ones).is_err());
        assert!(phase_variant(&f2, &ones[..1], &ones).is_err());
    }

    #[test]
    fn construction_rejects_non_unitary() {
        let m = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(ModeUnitary::new(m, "ones").is_err());
        assert!(ModeUnitary::new(CMatrix::zeros(2, 3), "rect").is_err());
    }

    #[test]
    fn random_unitaries_are_unitary_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=6 {
            let u = random_unitary(n, &mut rng);
            assert!(unitarity_defect(u.matrix()) < 1e-12);
        }
        let a = random_unitary(3, &mut ChaCha8Rng::seed_from_u64(11));
        let b = random_unitary(3, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn composition_matches_sequential_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u1 = random_unitary(3, &mut rng);
        let u2 = random_unitary(3, &mut rng);
        let v = FockVector::product_state(&[0, 1, 1], 2)
            .unwrap()
            .apply_creation(2, 0)
            .unwrap()
            .normalized()
            .unwrap();
        let seq = apply_mode_unitary(&apply_mode_unitary(&v, &u1).unwrap(), &u2).unwrap();
        let joint = apply_mode_unitary(&v, &u2.compose(&u1).unwrap()).unwrap();
        assert!(seq.max_abs_diff(&joint).unwrap() < 1e-10);
        assert_abs_diff_eq!(seq.norm(), 1.0, epsilon = 1e-10);
    }
}
