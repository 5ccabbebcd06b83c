//! Self-test suite: named invariant checks over every module, at two sizes.
//!
//! `Quick` covers `N <= 3`. `Full` covers `N <= 4` and adds sampled `N = 5`
//! checks. The Fourier multiport is injectable so a deliberately broken
//! implementation can be shown to trip `fourier-eigenphase`.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{apply_level_unitaries, fully_depolarized, random_local_unitaries, Ensemble};
use crate::error::Result;
use crate::fock::FockVector;
use crate::interferometer::{
    apply_mode_unitary, fourier_determinant, fourier_matrix, phase_variant, random_phases, random_unitary,
    unitarity_defect, ModeUnitary,
};
use crate::io;
use crate::protocol::{success_probability_oracle, Pipeline};
use crate::scenario::DEFAULT_SEED;
use crate::suppression::suppression_table;
use crate::symmetry::{
    antisymmetrizer_apply, eigenspace_projector_apply, generalized_singlet, one_per_mode_labels, permute_modes,
    random_one_per_mode_state, Permutation,
};

const AMP_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    fn max_n(self) -> usize {
        match self {
            Level::Quick => 3,
            Level::Full => 4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    /// `None` on success, otherwise what went wrong.
    pub failure: Option<String>,
    pub elapsed: Duration,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

type Provider<'a> = dyn Fn(usize) -> Result<ModeUnitary> + Sync + 'a;
type Check = fn(&Verifier) -> std::result::Result<(), String>;

pub struct Verifier<'a> {
    level: Level,
    seed: u64,
    fourier: Box<Provider<'a>>,
}

/// Order matters: the first failure is the one reported by name.
const CHECKS: &[(&str, Check)] = &[
    ("fock-ladder", check_fock_ladder),
    ("io-round-trip", check_io_round_trip),
    ("permutation-sign", check_permutation_sign),
    ("singlet-antisymmetry", check_singlet_antisymmetry),
    ("projector-product", check_projector_product),
    ("fourier-unitarity", check_fourier_unitarity),
    ("fourier-eigenphase", check_fourier_eigenphase),
    ("unitary-norm-preservation", check_norm_preservation),
    ("unitary-composition", check_composition),
    ("suppression-law", check_suppression_law),
    ("depolarizer-reset", check_depolarizer_reset),
    ("protocol-depolarized", check_protocol_depolarized),
    ("protocol-product", check_protocol_product),
    ("protocol-shortcut", check_protocol_shortcut),
    ("oracle-equivalence", check_oracle_equivalence),
    ("phase-variant-invariance", check_phase_variants),
    ("rotation-invariance", check_rotation_invariance),
];

impl<'a> Verifier<'a> {
    pub fn new(level: Level) -> Self {
        Verifier { level, seed: DEFAULT_SEED, fourier: Box::new(fourier_matrix) }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Replace the Fourier multiport used by every check that builds one.
    pub fn with_fourier<F>(mut self, f: F) -> Self
    where
        F: Fn(usize) -> Result<ModeUnitary> + Sync + 'a,
    {
        self.fourier = Box::new(f);
        self
    }

    pub fn check_names() -> impl Iterator<Item = &'static str> {
        CHECKS.iter().map(|(name, _)| *name)
    }

    /// Run every check in order.
    pub fn run(&self) -> Vec<CheckOutcome> {
        CHECKS
            .iter()
            .map(|&(name, check)| {
                let start = Instant::now();
                let failure = check(self).err();
                CheckOutcome { name, failure, elapsed: start.elapsed() }
            })
            .collect()
    }

    fn sizes(&self) -> std::ops::RangeInclusive<usize> {
        2..=self.level.max_n()
    }

    fn full(&self) -> bool {
        self.level == Level::Full
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn fourier(&self, n: usize) -> std::result::Result<ModeUnitary, String> {
        (self.fourier)(n).map_err(|e| e.to_string())
    }

    fn pipeline(&self, n: usize, start_j: usize) -> std::result::Result<Pipeline, String> {
        let ports = (start_j..=n).map(|j| self.fourier(j)).collect::<std::result::Result<Vec<_>, _>>()?;
        Pipeline::from_multiports(n, start_j, ports).map_err(|e| e.to_string())
    }
}

fn ok<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn close(what: impl FnOnce() -> String, got: f64, want: f64, tol: f64) -> std::result::Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{}: got {got:.12e}, expected {want:.12e}", what()))
    }
}

fn check_fock_ladder(_: &Verifier) -> std::result::Result<(), String> {
    let mut v = ok(FockVector::product_state(&[0], 1))?;
    for n in 1..6u32 {
        v = ok(v.apply_creation(0, 0))?;
        let (_, amp) = v.terms().next().ok_or("creation produced the zero vector")?;
        let want: f64 = (2..=n + 1).map(f64::from).product::<f64>().sqrt();
        close(|| format!("(a†)^{n}|1⟩ amplitude"), amp.re, want, AMP_TOL)?;
    }
    Ok(())
}

fn check_io_round_trip(_: &Verifier) -> std::result::Result<(), String> {
    let a3 = ok(generalized_singlet(3))?;
    let back = ok(io::state_from_json(&io::state_to_json(&a3)))?;
    if ok(back.max_abs_diff(&a3))? > AMP_TOL {
        return Err("state changed on a JSON round trip".into());
    }
    let dep = ok(fully_depolarized(2))?;
    let text = io::ensemble_to_json(&dep);
    if io::ensemble_to_json(&ok(io::ensemble_from_json(&text))?) != text {
        return Err("ensemble JSON is not stable under a round trip".into());
    }
    Ok(())
}

fn check_permutation_sign(v: &Verifier) -> std::result::Result<(), String> {
    for n in v.sizes() {
        let all = Permutation::all(n);
        for p in &all {
            for q in &all {
                let pq = ok(p.compose(q))?;
                if pq.sign() != p.sign() * q.sign() {
                    return Err(format!("sign is not multiplicative for {p:?}, {q:?}"));
                }
            }
        }
    }
    Ok(())
}

fn check_singlet_antisymmetry(v: &Verifier) -> std::result::Result<(), String> {
    for n in v.sizes() {
        let a = ok(generalized_singlet(n))?;
        close(|| format!("‖A_{n}‖²"), a.norm_sqr(), 1.0, AMP_TOL)?;
        for i in 0..n - 1 {
            let mut images: Vec<usize> = (0..n).collect();
            images.swap(i, i + 1);
            let swapped = ok(permute_modes(&a, &ok(Permutation::new(images))?))?;
            if ok(swapped.plus(&a))?.norm() > AMP_TOL {
                return Err(format!("A_{n} is not odd under swapping modes {i} and {}", i + 1));
            }
        }
    }
    Ok(())
}

fn projector_chain(b: &FockVector, n: usize) -> Result<FockVector> {
    (2..=n).try_fold(b.clone(), |acc, j| eigenspace_projector_apply(&acc, j, n))
}

fn check_projector_product(v: &Verifier) -> std::result::Result<(), String> {
    let compare = |b: &FockVector, n: usize| -> std::result::Result<(), String> {
        let lhs = ok(projector_chain(b, n))?;
        let rhs = ok(antisymmetrizer_apply(b, n))?;
        let dev = ok(lhs.max_abs_diff(&rhs))?;
        if dev > AMP_TOL {
            return Err(format!("N = {n}: projector product differs from the antisymmetrizer by {dev:.3e}"));
        }
        Ok(())
    };
    for n in v.sizes() {
        for occ in one_per_mode_labels(n, n) {
            compare(&ok(FockVector::basis(n, n, occ))?, n)?;
        }
    }
    if v.full() {
        let mut rng = v.rng(5);
        for _ in 0..3 {
            compare(&ok(random_one_per_mode_state(5, 5, &mut rng))?, 5)?;
        }
    }
    Ok(())
}

fn check_fourier_unitarity(v: &Verifier) -> std::result::Result<(), String> {
    for n in 2..=v.level.max_n() + 1 {
        let f = v.fourier(n)?;
        let defect = unitarity_defect(f.matrix());
        if f.dim() != n || defect > AMP_TOL {
            return Err(format!("F_{n} has dimension {} and unitarity defect {defect:.3e}", f.dim()));
        }
    }
    Ok(())
}

/// `F_N |A_N⟩ = det(F_N) |A_N⟩` amplitude by amplitude, with the determinant
/// from its closed form rather than from the matrix under test.
fn check_fourier_eigenphase(v: &Verifier) -> std::result::Result<(), String> {
    let mut sizes: Vec<usize> = v.sizes().collect();
    if v.full() {
        sizes.push(5);
    }
    for n in sizes {
        let a = ok(generalized_singlet(n))?;
        let out = ok(apply_mode_unitary(&a, &v.fourier(n)?))?;
        let dev = ok(out.max_abs_diff(&a.scaled(fourier_determinant(n))))?;
        if dev > AMP_TOL {
            return Err(format!("F_{n}|A_{n}⟩ deviates from det(F_{n})|A_{n}⟩ by {dev:.3e}"));
        }
    }
    Ok(())
}

fn check_norm_preservation(v: &Verifier) -> std::result::Result<(), String> {
    let mut rng = v.rng(1);
    for n in v.sizes() {
        for _ in 0..5 {
            let s = ok(random_one_per_mode_state(n, n, &mut rng))?;
            let out = ok(apply_mode_unitary(&s, &random_unitary(n, &mut rng)))?;
            close(|| format!("norm after a random {n}-mode unitary"), out.norm_sqr(), 1.0, AMP_TOL)?;
        }
    }
    Ok(())
}

fn check_composition(v: &Verifier) -> std::result::Result<(), String> {
    let mut rng = v.rng(2);
    for n in v.sizes() {
        let s = ok(random_one_per_mode_state(n, n, &mut rng))?;
        let a = random_unitary(n, &mut rng);
        let b = v.fourier(n)?;
        let seq = ok(apply_mode_unitary(&ok(apply_mode_unitary(&s, &b))?, &a))?;
        let once = ok(apply_mode_unitary(&s, &ok(a.compose(&b))?))?;
        let dev = ok(seq.max_abs_diff(&once))?;
        if dev > AMP_TOL {
            return Err(format!("N = {n}: U(V v) and (UV) v differ by {dev:.3e}"));
        }
    }
    Ok(())
}

fn check_suppression_law(_: &Verifier) -> std::result::Result<(), String> {
    for n in 2..=3 {
        let table = ok(suppression_table(n, true))?;
        if let Some(row) = table.violations(AMP_TOL).first() {
            return Err(format!(
                "N = {n}, class {}, output {:?}: suppressed by the law but amplitude {:.3e}",
                row.class,
                row.output.counts(),
                row.max_amplitude.unwrap_or(f64::NAN)
            ));
        }
    }
    Ok(())
}

fn check_depolarizer_reset(v: &Verifier) -> std::result::Result<(), String> {
    let mut rng = v.rng(3);
    for n in v.sizes() {
        let want = ok(success_probability_oracle(&ok(fully_depolarized(n))?, n))?;
        let s = ok(random_one_per_mode_state(n, n, &mut rng))?;
        let noisy = ok(ok(Ensemble::pure(s))?.apply_local_noise(&random_local_unitaries(n, n, &mut rng)))?;
        let dep = ok(noisy.depolarize_all())?;
        close(|| format!("N = {n} oracle after noise and depolarization"), ok(success_probability_oracle(&dep, n))?, want, PROB_TOL)?;
    }
    Ok(())
}

fn check_protocol_depolarized(v: &Verifier) -> std::result::Result<(), String> {
    for n in v.sizes() {
        let r = ok(v.pipeline(n, 2)?.run(&ok(fully_depolarized(n))?))?;
        close(|| format!("N = {n} depolarized p_s"), r.success_probability, (n as f64).powi(-(n as i32)), PROB_TOL)?;
        close(|| format!("N = {n} depolarized fidelity"), r.fidelity_with_singlet, 1.0, PROB_TOL)?;
    }
    Ok(())
}

fn check_protocol_product(v: &Verifier) -> std::result::Result<(), String> {
    let mut sizes: Vec<usize> = v.sizes().collect();
    if v.full() {
        sizes.push(5);
    }
    for n in sizes {
        let levels: Vec<usize> = (0..n).collect();
        let e = ok(Ensemble::pure(ok(FockVector::product_state(&levels, n))?))?;
        let r = ok(v.pipeline(n, 2)?.run(&e))?;
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        close(|| format!("N = {n} product p_s"), r.success_probability, 1.0 / fact, PROB_TOL)?;
        close(|| format!("N = {n} product fidelity"), r.fidelity_with_singlet, 1.0, PROB_TOL)?;
    }
    Ok(())
}

fn check_protocol_shortcut(v: &Verifier) -> std::result::Result<(), String> {
    let s = ok(ok(ok(generalized_singlet(2))?.with_levels(3))?.tensor(&ok(FockVector::product_state(&[2], 3))?))?;
    let pure = ok(Ensemble::pure(s))?;
    let pipe = v.pipeline(3, 3)?;
    let r = ok(pipe.run(&pure))?;
    close(|| "pure shortcut p_s".into(), r.success_probability, 1.0 / 3.0, PROB_TOL)?;
    close(|| "pure shortcut fidelity".into(), r.fidelity_with_singlet, 1.0, PROB_TOL)?;
    let r = ok(pipe.run(&ok(pure.depolarize_mode(2))?))?;
    close(|| "mixed shortcut p_s".into(), r.success_probability, 1.0 / 9.0, PROB_TOL)
}

fn check_oracle_equivalence(v: &Verifier) -> std::result::Result<(), String> {
    let mut rng = v.rng(4);
    let draws = if v.full() { 50 } else { 10 };
    for n in 2..=3 {
        let pipe = v.pipeline(n, 2)?;
        for k in 0..draws {
            let e = ok(Ensemble::pure(ok(random_one_per_mode_state(n, n, &mut rng))?))?;
            let r = ok(pipe.run(&e))?;
            close(|| format!("N = {n} draw {k}: pipeline vs oracle"), r.success_probability, ok(success_probability_oracle(&e, n))?, PROB_TOL)?;
        }
    }
    if v.full() {
        let e = ok(Ensemble::pure(ok(random_one_per_mode_state(4, 4, &mut rng))?))?;
        let r = ok(v.pipeline(4, 2)?.run(&e))?;
        close(|| "N = 4 pipeline vs oracle".into(), r.success_probability, ok(success_probability_oracle(&e, 4))?, PROB_TOL)?;
    }
    Ok(())
}

fn check_phase_variants(v: &Verifier) -> std::result::Result<(), String> {
    let mut rng = v.rng(6);
    for n in 2..=3 {
        let e = ok(Ensemble::pure(ok(random_one_per_mode_state(n, n, &mut rng))?))?;
        let base = ok(v.pipeline(n, 2)?.run(&e))?;
        for _ in 0..5 {
            let ports = (2..=n)
                .map(|j| {
                    let f = v.fourier(j)?;
                    ok(phase_variant(&f, &random_phases(j, &mut rng), &random_phases(j, &mut rng)))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let r = ok(ok(Pipeline::from_multiports(n, 2, ports))?.run(&e))?;
            close(|| format!("N = {n} phase-variant p_s"), r.success_probability, base.success_probability, PROB_TOL)?;
            close(|| format!("N = {n} phase-variant fidelity"), r.fidelity_with_singlet, base.fidelity_with_singlet, PROB_TOL)?;
        }
    }
    Ok(())
}

fn check_rotation_invariance(v: &Verifier) -> std::result::Result<(), String> {
    let mut rng = v.rng(7);
    for n in v.sizes() {
        let a = ok(generalized_singlet(n))?;
        for _ in 0..5 {
            let u = random_unitary(n, &mut rng).matrix().clone();
            let rotated = apply_level_unitaries(&a, &vec![u; n]);
            close(|| format!("N = {n} fidelity after a global level rotation"), ok(rotated.fidelity(&a))?, 1.0, PROB_TOL)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::C64;

    #[test]
    fn quick_suite_passes() {
        let failures: Vec<_> = Verifier::new(Level::Quick).run().into_iter().filter(|o| !o.passed()).collect();
        assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn broken_fourier_phase_is_caught_by_name() {
        let broken = |n: usize| {
            let f = fourier_matrix(n)?;
            let mut d_out = vec![C64::new(1.0, 0.0); n];
            d_out[0] = C64::from_polar(1.0, 0.3);
            phase_variant(&f, &vec![C64::new(1.0, 0.0); n], &d_out)
        };
        let outcomes = Verifier::new(Level::Quick).with_fourier(broken).run();
        let first = outcomes.iter().find(|o| !o.passed()).expect("a check fails");
        assert_eq!(first.name, "fourier-eigenphase");
    }

    #[test]
    fn names_are_unique() {
        let names: std::collections::BTreeSet<_> = Verifier::check_names().collect();
        assert_eq!(names.len(), CHECKS.len());
    }
}
