//! The distillation pipeline: for `j = start_j, …, N` send the first `j` modes
//! through a Fourier `j`-port and keep only outcomes with exactly one
//! particle in each of those modes.
//!
//! Runs are exact. Each ensemble component is propagated as a pure state and
//! the success probability is the weighted sum of the per-component products
//! of step probabilities. [`success_probability_oracle`] computes the same
//! number from overlaps with the antisymmetric subspace alone.

use rand::Rng;

use crate::channels::{Component, Ensemble};
use crate::error::{domain, Result};
use crate::fock::FockVector;
use crate::interferometer::{apply_mode_unitary, embed, fourier_matrix, phase_variant, random_phases, ModeUnitary};
use crate::symmetry::antisymmetric_basis;

/// Probabilities at or below this count as a failed run.
pub const ZERO_PROB: f64 = 1e-12;

/// Outcome of a coincidence filter.
#[derive(Clone, Debug, PartialEq)]
pub struct Coincidence {
    pub probability: f64,
    /// Renormalized surviving state; `None` when nothing survives.
    pub conditional: Option<FockVector>,
}

/// Keep the terms with exactly one particle (of any level) in each of `modes`.
pub fn coincidence_project(v: &FockVector, modes: &[usize]) -> Coincidence {
    let kept = v.filtered(|occ| occ.singly_occupies(modes.iter().copied()));
    let probability = kept.norm_sqr();
    let conditional = if probability > ZERO_PROB {
        Some(kept.scaled((1.0 / probability.sqrt()).into()))
    } else {
        None
    };
    Coincidence { probability, conditional }
}

/// Fourier `j`-port on modes `0…j-1` of an `m`-mode state, then coincidence
/// on those modes.
pub fn protocol_step(v: &FockVector, j: usize, m: usize) -> Result<Coincidence> {
    let port = embed(&fourier_matrix(j)?, &(0..j).collect::<Vec<_>>(), m)?;
    step_with(v, &port, j)
}

fn step_with(v: &FockVector, port: &ModeUnitary, j: usize) -> Result<Coincidence> {
    let out = apply_mode_unitary(v, port)?;
    let modes: Vec<usize> = (0..j).collect();
    Ok(coincidence_project(&out, &modes))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub j: usize,
    /// Probability of coincidence at this step given success at all earlier
    /// steps (ensemble-averaged).
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolReport {
    pub n: usize,
    pub start_j: usize,
    pub steps: Vec<StepReport>,
    pub success_probability: f64,
    /// Ensemble conditioned on every coincidence; `None` if the run failed.
    pub output: Option<Ensemble>,
    /// Weight of the output inside the antisymmetric subspace (for `d = N`,
    /// the fidelity with the generalized singlet).
    pub fidelity_with_singlet: f64,
}

/// Per-component record of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentTrace {
    pub step_probabilities: Vec<f64>,
    pub conditional: Option<FockVector>,
}

impl ComponentTrace {
    pub fn success_probability(&self) -> f64 {
        if self.conditional.is_none() {
            return 0.0;
        }
        self.step_probabilities.iter().product()
    }
}

/// The multiports for steps `start_j…n`, each embedded on the first `j` modes.
#[derive(Clone, Debug)]
pub struct Pipeline {
    n: usize,
    start_j: usize,
    ports: Vec<ModeUnitary>,
}

impl Pipeline {
    /// Plain Fourier multiports.
    pub fn fourier(n: usize, start_j: usize) -> Result<Self> {
        Self::check_range(n, start_j)?;
        let ports = (start_j..=n).map(fourier_matrix).collect::<Result<Vec<_>>>()?;
        Self::from_multiports(n, start_j, ports)
    }

    /// Fourier multiports dressed with random input and output phases,
    /// `D·U_j·D'`.
    pub fn with_random_phases<R: Rng + ?Sized>(n: usize, start_j: usize, rng: &mut R) -> Result<Self> {
        Self::check_range(n, start_j)?;
        let mut ports = Vec::new();
        for j in start_j..=n {
            let d_in = random_phases(j, rng);
            let d_out = random_phases(j, rng);
            ports.push(phase_variant(&fourier_matrix(j)?, &d_in, &d_out)?);
        }
        Self::from_multiports(n, start_j, ports)
    }

    /// Caller-supplied `j`-mode multiports for `j = start_j…n`, in order.
    pub fn from_multiports(n: usize, start_j: usize, ports: Vec<ModeUnitary>) -> Result<Self> {
        Self::check_range(n, start_j)?;
        if ports.len() != n + 1 - start_j {
            return Err(domain(format!(
                "need {} multiports for steps {start_j}..={n}, got {}",
                n + 1 - start_j,
                ports.len()
            )));
        }
        let mut embedded = Vec::with_capacity(ports.len());
        for (j, port) in (start_j..=n).zip(ports) {
            if port.dim() != j {
                return Err(domain(format!("step {j} needs a {j}-mode multiport, got {}", port.dim())));
            }
            embedded.push(embed(&port, &(0..j).collect::<Vec<_>>(), n)?);
        }
        Ok(Pipeline { n, start_j, ports: embedded })
    }

    fn check_range(n: usize, start_j: usize) -> Result<()> {
        if n < 2 || start_j < 2 || start_j > n {
            return Err(domain(format!("need 2 <= start_j <= N, got start_j={start_j}, N={n}")));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn start_j(&self) -> usize {
        self.start_j
    }

    /// Propagate one pure component through every step.
    pub fn run_component(&self, v: &FockVector) -> Result<ComponentTrace> {
        let mut probs = Vec::with_capacity(self.ports.len());
        let mut state = v.clone();
        for (j, port) in (self.start_j..=self.n).zip(&self.ports) {
            let step = step_with(&state, port, j)?;
            probs.push(step.probability);
            match step.conditional {
                Some(next) => state = next,
                None => {
                    probs.resize(self.ports.len(), 0.0);
                    return Ok(ComponentTrace { step_probabilities: probs, conditional: None });
                }
            }
        }
        Ok(ComponentTrace { step_probabilities: probs, conditional: Some(state) })
    }

    fn check_input(&self, ens: &Ensemble) -> Result<()> {
        if ens.modes() != self.n {
            return Err(domain(format!("{}-mode input for an N = {} pipeline", ens.modes(), self.n)));
        }
        for (i, c) in ens.components().iter().enumerate() {
            if let Some((occ, _)) = c.state.terms().find(|(occ, _)| !occ.singly_occupies(0..self.n)) {
                return Err(domain(format!(
                    "component {i} term {occ} does not have one particle per mode"
                )));
            }
        }
        Ok(())
    }

    pub fn run(&self, ens: &Ensemble) -> Result<ProtocolReport> {
        self.check_input(ens)?;
        let traces = ens
            .components()
            .iter()
            .map(|c| self.run_component(&c.state))
            .collect::<Result<Vec<_>>>()?;
        self.report(ens, traces)
    }

    /// Same as [`Pipeline::run`], with components propagated in parallel.
    /// Results are gathered in component order, so reports are identical.
    #[cfg(feature = "parallel")]
    pub fn run_parallel(&self, ens: &Ensemble) -> Result<ProtocolReport> {
        use rayon::prelude::*;
        self.check_input(ens)?;
        let traces = ens
            .components()
            .par_iter()
            .map(|c| self.run_component(&c.state))
            .collect::<Result<Vec<_>>>()?;
        self.report(ens, traces)
    }

    fn report(&self, ens: &Ensemble, traces: Vec<ComponentTrace>) -> Result<ProtocolReport> {
        let weights: Vec<f64> = ens.components().iter().map(|c| c.weight).collect();
        let mut steps = Vec::with_capacity(self.ports.len());
        let mut surviving: Vec<f64> = weights.clone();
        for (s, j) in (self.start_j..=self.n).enumerate() {
            let before: f64 = surviving.iter().sum();
            for (mass, t) in surviving.iter_mut().zip(&traces) {
                *mass *= t.step_probabilities[s];
            }
            let after: f64 = surviving.iter().sum();
            let probability = if before > 0.0 { after / before } else { 0.0 };
            steps.push(StepReport { j, probability });
        }
        let success_probability: f64 = weights
            .iter()
            .zip(&traces)
            .map(|(w, t)| w * t.success_probability())
            .sum();

        let mut output = None;
        let mut fidelity_with_singlet = 0.0;
        if success_probability > ZERO_PROB {
            let components: Vec<Component> = weights
                .iter()
                .zip(traces)
                .filter_map(|(w, t)| {
                    let p = t.success_probability();
                    let state = t.conditional?;
                    (w * p > 0.0).then(|| Component { weight: w * p / success_probability, state })
                })
                .collect();
            let ens_out = Ensemble::new(ens.modes(), ens.levels(), components)?;
            fidelity_with_singlet = ens_out.expectation(|v| antisymmetric_weight(v, self.n))?;
            output = Some(ens_out);
        }
        Ok(ProtocolReport {
            n: self.n,
            start_j: self.start_j,
            steps,
            success_probability,
            output,
            fidelity_with_singlet,
        })
    }
}

/// Run the Fourier pipeline from `start_j` to `n`.
pub fn run_protocol(ens: &Ensemble, n: usize, start_j: usize) -> Result<ProtocolReport> {
    Pipeline::fourier(n, start_j)?.run(ens)
}

/// `Σ_S |⟨A_N^S|v⟩|²` over all `N`-subsets `S` of the levels: the squared
/// norm of the projection of `v` onto the antisymmetric subspace. For `d = N`
/// this is `|⟨A_N|v⟩|²`; for `d < N` it is zero.
pub fn antisymmetric_weight(v: &FockVector, n: usize) -> Result<f64> {
    if v.modes() != n {
        return Err(domain(format!("{}-mode state, expected {n}", v.modes())));
    }
    let mut acc = 0.0;
    for (_, singlet) in antisymmetric_basis(n, v.levels())? {
        acc += singlet.inner_product(v)?.norm_sqr();
    }
    Ok(acc)
}

/// `Tr(P_A ρ)` from overlaps with the singlet states, without simulating any
/// interferometer.
pub fn success_probability_oracle(ens: &Ensemble, n: usize) -> Result<f64> {
    if ens.modes() != n || ens.levels() < n {
        return Err(domain(format!(
            "oracle needs m = N and d >= N, got m = {}, d = {}, N = {n}",
            ens.modes(),
            ens.levels()
        )));
    }
    ens.expectation(|v| antisymmetric_weight(v, n))
}
