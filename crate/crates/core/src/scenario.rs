//! Named input scenarios shared by the command-line tool and the web demo.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{fully_depolarized, random_local_unitaries, Ensemble};
use crate::error::{domain, Error, Result};
use crate::fock::FockVector;
use crate::interferometer::{fourier_matrix, phase_variant, random_phases, ModeUnitary};
use crate::protocol::{Pipeline, ProtocolReport};
use crate::symmetry::generalized_singlet;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_190_415;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Every mode fully depolarized.
    Depolarized,
    /// `|0, 1, …, N-1⟩`.
    Product,
    /// `|A_2⟩ ⊗ |2⟩`, starting at the three-port.
    ShortcutPure,
    /// `|A_2⟩⟨A_2| ⊗` maximally mixed third particle, starting at the three-port.
    ShortcutMixed,
    /// State or ensemble supplied by the caller.
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Depolarized,
        ScenarioKind::Product,
        ScenarioKind::ShortcutPure,
        ScenarioKind::ShortcutMixed,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Depolarized => "depolarized",
            ScenarioKind::Product => "product",
            ScenarioKind::ShortcutPure => "shortcut-pure",
            ScenarioKind::ShortcutMixed => "shortcut-mixed",
            ScenarioKind::Custom => "custom",
        }
    }

    fn is_shortcut(self) -> bool {
        matches!(self, ScenarioKind::ShortcutPure | ScenarioKind::ShortcutMixed)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| domain(format!("unknown scenario `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    /// Particle and mode number; shortcut scenarios require 3, custom inputs
    /// default to the file's mode count.
    pub n: Option<usize>,
    pub start_j: Option<usize>,
    pub seed: u64,
    /// Random local level unitaries on every mode before any depolarization.
    pub local_noise: bool,
    /// Random input and output phases on every multiport.
    pub random_phases: bool,
    /// Multiports for steps `start_j…N` in order; empty means Fourier.
    pub multiports: Vec<ModeUnitary>,
    pub parallel: bool,
}

impl ScenarioConfig {
    pub fn new(kind: ScenarioKind) -> Self {
        ScenarioConfig {
            kind,
            n: None,
            start_j: None,
            seed: DEFAULT_SEED,
            local_noise: false,
            random_phases: false,
            multiports: Vec::new(),
            parallel: false,
        }
    }
}

/// A built scenario: the input ensemble and where the pipeline starts.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub n: usize,
    pub start_j: usize,
    pub ensemble: Ensemble,
}

fn shortcut_state() -> Result<FockVector> {
    generalized_singlet(2)?
        .with_levels(3)?
        .tensor(&FockVector::product_state(&[2], 3)?)
}

/// Build the input for `config`. `custom` is required exactly when the
/// scenario is [`ScenarioKind::Custom`]. Noise draws come first from the
/// seeded generator, so adding phases never changes the noise.
pub fn build_scenario(config: &ScenarioConfig, custom: Option<Ensemble>, rng: &mut ChaCha8Rng) -> Result<Scenario> {
    let kind = config.kind;
    if kind != ScenarioKind::Custom && custom.is_some() {
        return Err(domain(format!("scenario {kind} takes no input file")));
    }
    let n = match (kind, config.n, &custom) {
        (ScenarioKind::Custom, None, Some(e)) => e.modes(),
        (k, Some(n), _) if k.is_shortcut() && n != 3 => {
            return Err(domain(format!("{k} is defined for N = 3, got N = {n}")));
        }
        (k, None, _) if k.is_shortcut() => 3,
        (_, Some(n), _) => n,
        (_, None, _) => return Err(domain(format!("scenario {kind} needs N"))),
    };
    if n < 2 {
        return Err(domain(format!("N must be at least 2, got {n}")));
    }
    let start_j = config.start_j.unwrap_or(if kind.is_shortcut() { 3 } else { 2 });

    let noisy = |e: Ensemble, rng: &mut ChaCha8Rng| -> Result<Ensemble> {
        if config.local_noise {
            e.apply_local_noise(&random_local_unitaries(e.modes(), e.levels(), rng))
        } else {
            Ok(e)
        }
    };
    let identity: Vec<usize> = (0..n).collect();
    let ensemble = match kind {
        ScenarioKind::Depolarized if !config.local_noise => fully_depolarized(n)?,
        ScenarioKind::Depolarized => {
            noisy(Ensemble::pure(FockVector::product_state(&identity, n)?)?, rng)?.depolarize_all()?
        }
        ScenarioKind::Product => noisy(Ensemble::pure(FockVector::product_state(&identity, n)?)?, rng)?,
        ScenarioKind::ShortcutPure => noisy(Ensemble::pure(shortcut_state()?)?, rng)?,
        ScenarioKind::ShortcutMixed => noisy(Ensemble::pure(shortcut_state()?)?, rng)?.depolarize_mode(2)?,
        ScenarioKind::Custom => {
            let e = custom.ok_or_else(|| domain("custom scenario needs an input file"))?;
            if e.modes() != n {
                return Err(domain(format!("input has {} modes, N = {n}", e.modes())));
            }
            noisy(e, rng)?
        }
    };
    Ok(Scenario { n, start_j, ensemble })
}

/// Build and run a scenario with the seeded generator from `config.seed`.
pub fn run_scenario(config: &ScenarioConfig, custom: Option<Ensemble>) -> Result<ProtocolReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sc = build_scenario(config, custom, &mut rng)?;
    let mut ports = if config.multiports.is_empty() {
        (sc.start_j..=sc.n).map(fourier_matrix).collect::<Result<Vec<_>>>()?
    } else {
        config.multiports.clone()
    };
    if config.random_phases {
        for p in &mut ports {
            let (d_in, d_out) = (random_phases(p.dim(), &mut rng), random_phases(p.dim(), &mut rng));
            *p = phase_variant(p, &d_in, &d_out)?;
        }
    }
    let pipeline = Pipeline::from_multiports(sc.n, sc.start_j, ports)?;
    run_pipeline(&pipeline, &sc.ensemble, config.parallel)
}

#[cfg(feature = "parallel")]
fn run_pipeline(p: &Pipeline, e: &Ensemble, parallel: bool) -> Result<ProtocolReport> {
    if parallel {
        p.run_parallel(e)
    } else {
        p.run(e)
    }
}

#[cfg(not(feature = "parallel"))]
fn run_pipeline(p: &Pipeline, e: &Ensemble, _parallel: bool) -> Result<ProtocolReport> {
    p.run(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn run(kind: ScenarioKind, n: Option<usize>) -> ProtocolReport {
        let mut c = ScenarioConfig::new(kind);
        c.n = n;
        run_scenario(&c, None).unwrap()
    }

    #[test]
    fn named_scenarios() {
        assert_abs_diff_eq!(run(ScenarioKind::Depolarized, Some(3)).success_probability, 1.0 / 27.0, epsilon = 1e-9);
        assert_abs_diff_eq!(run(ScenarioKind::Product, Some(4)).success_probability, 1.0 / 24.0, epsilon = 1e-9);
        let r = run(ScenarioKind::ShortcutPure, None);
        assert_abs_diff_eq!(r.success_probability, 1.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.fidelity_with_singlet, 1.0, epsilon = 1e-9);
        assert_eq!(r.start_j, 3);
        assert_abs_diff_eq!(run(ScenarioKind::ShortcutMixed, None).success_probability, 1.0 / 9.0, epsilon = 1e-9);
    }

    #[test]
    fn noise_and_phases_keep_the_depolarized_result() {
        let mut c = ScenarioConfig::new(ScenarioKind::Depolarized);
        c.n = Some(3);
        c.local_noise = true;
        c.random_phases = true;
        c.seed = 7;
        let r = run_scenario(&c, None).unwrap();
        assert_abs_diff_eq!(r.success_probability, 1.0 / 27.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.fidelity_with_singlet, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn config_errors() {
        let mut c = ScenarioConfig::new(ScenarioKind::ShortcutPure);
        c.n = Some(4);
        assert!(run_scenario(&c, None).is_err());
        assert!(run_scenario(&ScenarioConfig::new(ScenarioKind::Custom), None).is_err());
        assert!(run_scenario(&ScenarioConfig::new(ScenarioKind::Product), None).is_err());
        assert_eq!("shortcut-mixed".parse::<ScenarioKind>().unwrap(), ScenarioKind::ShortcutMixed);
        assert!("werner".parse::<ScenarioKind>().is_err());
    }

    #[test]
    fn custom_input() {
        let mut c = ScenarioConfig::new(ScenarioKind::Custom);
        c.start_j = Some(3);
        let e = Ensemble::pure(shortcut_state().unwrap()).unwrap();
        let r = run_scenario(&c, Some(e.clone())).unwrap();
        assert_abs_diff_eq!(r.success_probability, 1.0 / 3.0, epsilon = 1e-9);

        // through an identity port every term coincides and nothing is filtered
        c.multiports = vec![ModeUnitary::identity(3)];
        let r = run_scenario(&c, Some(e.clone())).unwrap();
        assert_abs_diff_eq!(r.success_probability, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.fidelity_with_singlet, 1.0 / 3.0, epsilon = 1e-9);

        c.multiports = vec![ModeUnitary::identity(2)];
        assert!(run_scenario(&c, Some(e)).is_err());
    }
}
