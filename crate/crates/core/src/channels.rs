//! Mixed states as weighted ensembles of pure Fock vectors, and the local
//! lossless channels that act on them: per-mode rotations of the internal
//! level and the per-particle depolarizer.

use std::collections::HashMap;

use itertools::Itertools;
use rand::Rng;

use crate::error::{domain, Result};
use crate::fock::{FockVector, OccupationState, Slot, C64, NORM_TOL, PRUNE_TOL};
use crate::interferometer::{random_unitary_matrix, unitarity_defect, CMatrix, UNITARY_TOL};

/// One pure component of an [`Ensemble`].
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub state: FockVector,
}

/// Convex mixture `ρ = Σ_i w_i |v_i⟩⟨v_i|`.
///
/// Decompositions are not unique; two ensembles are the same state when every
/// observable agrees, which is how the rest of the crate compares them.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    modes: usize,
    levels: usize,
    components: Vec<Component>,
}

impl Ensemble {
    /// Checks that weights are positive and sum to one, and that every
    /// component is normalized and lives in the same space.
    pub fn new(modes: usize, levels: usize, components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("ensemble has no components"));
        }
        let mut total = 0.0;
        for (i, c) in components.iter().enumerate() {
            if c.weight.is_nan() || c.weight <= 0.0 {
                return Err(domain(format!("component {i} has non-positive weight {}", c.weight)));
            }
            if c.state.modes() != modes || c.state.levels() != levels {
                return Err(domain(format!(
                    "component {i} lives in {}x{}, ensemble is {modes}x{levels}",
                    c.state.modes(),
                    c.state.levels()
                )));
            }
            if !c.state.is_normalized() {
                return Err(domain(format!(
                    "component {i} is not normalized (norm² {:.6e})",
                    c.state.norm_sqr()
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(domain(format!("weights sum to {total}, not 1")));
        }
        let particles = components[0].state.particle_number();
        if components.iter().any(|c| c.state.particle_number() != particles) {
            return Err(domain("components carry different particle numbers"));
        }
        Ok(Ensemble { modes, levels, components })
    }

    /// Single component with weight one.
    pub fn pure(v: FockVector) -> Result<Self> {
        let (modes, levels) = (v.modes(), v.levels());
        Self::new(modes, levels, vec![Component { weight: 1.0, state: v }])
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// `Σ_i w_i f(v_i)`.
    pub fn expectation<F: Fn(&FockVector) -> Result<f64>>(&self, f: F) -> Result<f64> {
        let mut acc = 0.0;
        for c in &self.components {
            acc += c.weight * f(&c.state)?;
        }
        Ok(acc)
    }

    /// Replace the internal state of the particle in `mode` by the maximally
    /// mixed state over all levels of the ensemble.
    ///
    /// Every term of every component must hold exactly one particle in `mode`.
    /// A component `Σ_k |φ_k⟩|k⟩` splits into `|φ_k⟩|l⟩` with weight
    /// `w·‖φ_k‖²/d` for every level `l`.
    pub fn depolarize_mode(&self, mode: usize) -> Result<Self> {
        if mode >= self.modes {
            return Err(domain(format!("mode {mode} out of range (modes = {})", self.modes)));
        }
        let d = self.levels;
        let mut out: Vec<Component> = Vec::new();
        let mut singletons: HashMap<OccupationState, usize> = HashMap::new();
        for (i, comp) in self.components.iter().enumerate() {
            let mut by_level: Vec<Vec<(OccupationState, C64)>> = vec![Vec::new(); d];
            for (occ, amp) in comp.state.terms() {
                let k = occ.level_in(mode).ok_or_else(|| {
                    domain(format!(
                        "component {i}: mode {mode} is not singly occupied in {occ}"
                    ))
                })?;
                by_level[k].push((occ.without_slot(Slot::new(mode, k)), amp));
            }
            for rest in by_level.into_iter().filter(|r| !r.is_empty()) {
                let q: f64 = rest.iter().map(|(_, a)| a.norm_sqr()).sum();
                if q < PRUNE_TOL * PRUNE_TOL {
                    continue;
                }
                let scale = 1.0 / q.sqrt();
                for l in 0..d {
                    let terms = rest
                        .iter()
                        .map(|(occ, a)| (occ.created(Slot::new(mode, l)), a * scale));
                    let state = FockVector::from_terms(self.modes, d, terms)?;
                    push_merged(&mut out, &mut singletons, comp.weight * q / d as f64, state);
                }
            }
        }
        renormalize_weights(&mut out);
        Ensemble::new(self.modes, d, out)
    }

    /// Depolarize every mode in turn.
    pub fn depolarize_all(&self) -> Result<Self> {
        (0..self.modes).try_fold(self.clone(), |ens, mode| ens.depolarize_mode(mode))
    }

    /// Rotate the internal level of every particle in mode `k` by the `d×d`
    /// unitary `per_mode[k]`; weights and per-mode particle numbers are kept.
    pub fn apply_local_noise(&self, per_mode: &[CMatrix]) -> Result<Self> {
        if per_mode.len() != self.modes {
            return Err(domain(format!(
                "need one level unitary per mode ({}), got {}",
                self.modes,
                per_mode.len()
            )));
        }
        for (k, u) in per_mode.iter().enumerate() {
            if u.nrows() != self.levels || u.ncols() != self.levels {
                return Err(domain(format!(
                    "level unitary for mode {k} is {}x{}, expected {d}x{d}",
                    u.nrows(),
                    u.ncols(),
                    d = self.levels
                )));
            }
            let defect = unitarity_defect(u);
            if defect > UNITARY_TOL {
                return Err(domain(format!(
                    "level map for mode {k} is not unitary (defect {defect:.3e})"
                )));
            }
        }
        let components = self
            .components
            .iter()
            .map(|c| Component { weight: c.weight, state: apply_level_unitaries(&c.state, per_mode) })
            .collect();
        Ok(Ensemble { modes: self.modes, levels: self.levels, components })
    }
}

fn push_merged(
    out: &mut Vec<Component>,
    singletons: &mut HashMap<OccupationState, usize>,
    weight: f64,
    state: FockVector,
) {
    // a single basis label is a pure state regardless of its phase
    if state.len() == 1 {
        let (occ, _) = state.terms().next().expect("one term");
        let occ = occ.clone();
        if let Some(&idx) = singletons.get(&occ) {
            out[idx].weight += weight;
            return;
        }
        singletons.insert(occ.clone(), out.len());
        let state = FockVector::basis(state.modes(), state.levels(), occ).expect("label in range");
        out.push(Component { weight, state });
    } else {
        out.push(Component { weight, state });
    }
}

fn renormalize_weights(components: &mut [Component]) {
    let total: f64 = components.iter().map(|c| c.weight).sum();
    if total > 0.0 {
        for c in components.iter_mut() {
            c.weight /= total;
        }
    }
}

/// `a†_{k,l} → Σ_{l'} u_k[l', l] a†_{k,l'}` for every mode `k`.
pub fn apply_level_unitaries(v: &FockVector, per_mode: &[CMatrix]) -> FockVector {
    let zero = C64::new(0.0, 0.0);
    v.substitute(|s| {
        let u = &per_mode[s.mode];
        (0..u.nrows())
            .map(|l| (Slot::new(s.mode, l), u[(l, s.level)]))
            .filter(|&(_, c)| c != zero)
            .collect()
    })
}

/// Product of single-particle maximally mixed states, one particle per mode:
/// `n^n` equally weighted product basis states, `m = d = n`.
pub fn fully_depolarized(n: usize) -> Result<Ensemble> {
    if n < 2 {
        return Err(domain(format!("depolarized input needs n >= 2, got {n}")));
    }
    let weight = 1.0 / (n as f64).powi(n as i32);
    let components = (0..n)
        .map(|_| 0..n)
        .multi_cartesian_product()
        .map(|levels| Component {
            weight,
            state: FockVector::product_state(&levels, n).expect("levels in range"),
        })
        .collect();
    Ensemble::new(n, n, components)
}

/// Independent Haar-random `d×d` level unitaries for each of `modes` modes.
pub fn random_local_unitaries<R: Rng + ?Sized>(modes: usize, d: usize, rng: &mut R) -> Vec<CMatrix> {
    (0..modes).map(|_| random_unitary_matrix(d, rng)).collect()
}
