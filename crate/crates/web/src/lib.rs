//! WebAssembly bindings for the browser demo.
//!
//! Each export takes plain arguments and returns a JSON string. The `*_json`
//! functions hold the logic and are ordinary Rust, so they are tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use singlet_core::fock::FockVector;
use singlet_core::interferometer::{apply_mode_unitary, fourier_matrix};
use singlet_core::io;
use singlet_core::scenario::{self, ScenarioConfig, ScenarioKind};
use singlet_core::suppression;

/// Largest N the page offers; keeps every call well under a second.
pub const MAX_N: usize = 4;

fn check_n(n: usize) -> Result<(), String> {
    if (2..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(format!("N must be between 2 and {MAX_N}, got {n}"))
    }
}

/// Run a named scenario and return the protocol report.
pub fn run_scenario_json(name: &str, n: usize, noise: bool, phases: bool, seed: u64) -> Result<String, String> {
    let kind: ScenarioKind = name.parse().map_err(|e: singlet_core::error::Error| e.to_string())?;
    if kind == ScenarioKind::Custom {
        return Err("the demo runs named scenarios only".into());
    }
    let mut config = ScenarioConfig::new(kind);
    if matches!(kind, ScenarioKind::Depolarized | ScenarioKind::Product) {
        check_n(n)?;
        config.n = Some(n);
    }
    config.seed = seed;
    config.local_noise = noise;
    config.random_phases = phases;
    let report = scenario::run_scenario(&config, None).map_err(|e| e.to_string())?;
    Ok(io::report_to_json(&report))
}

#[derive(Serialize)]
struct Row {
    class: usize,
    output: Vec<usize>,
    suppressed: bool,
    max_amplitude: Option<f64>,
}

#[derive(Serialize)]
struct Table {
    n: usize,
    rows: Vec<Row>,
}

/// Law verdicts for the Fourier `n`-port, cross-checked for `n <= 3`.
pub fn suppression_table_json(n: usize) -> Result<String, String> {
    check_n(n)?;
    let t = suppression::suppression_table(n, n <= 3).map_err(|e| e.to_string())?;
    let rows = t
        .rows
        .iter()
        .map(|r| Row {
            class: r.class,
            output: r.output.counts().to_vec(),
            suppressed: r.suppressed,
            max_amplitude: r.max_amplitude.map(io::round12),
        })
        .collect();
    serde_json::to_string(&Table { n, rows }).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Outcome {
    output: Vec<usize>,
    probability: f64,
}

/// Output mode-occupation distribution of `|l_0, …, l_{n-1}⟩` through the
/// Fourier `n`-port, where `levels` is a comma-separated list of internal
/// levels (one per mode). Probabilities are summed over internal levels.
pub fn fourier_distribution_json(levels: &str) -> Result<String, String> {
    let levels: Vec<usize> = levels
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| format!("`{}` is not a level", s.trim())))
        .collect::<Result<_, _>>()?;
    let n = levels.len();
    check_n(n)?;
    let d = levels.iter().max().map_or(1, |&l| l + 1);
    let v = FockVector::product_state(&levels, d).map_err(|e| e.to_string())?;
    let out = apply_mode_unitary(&v, &fourier_matrix(n).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut dist = std::collections::BTreeMap::<Vec<usize>, f64>::new();
    for (occ, amp) in out.terms() {
        *dist.entry(occ.mode_occupations(n)).or_insert(0.0) += amp.norm_sqr();
    }
    let outcomes: Vec<Outcome> = dist
        .into_iter()
        .rev()
        .map(|(output, p)| Outcome { output, probability: io::round12(p) })
        .filter(|o| o.probability > 0.0)
        .collect();
    serde_json::to_string(&outcomes).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn run_scenario(name: &str, n: usize, noise: bool, phases: bool, seed: u32) -> Result<String, JsError> {
    run_scenario_json(name, n, noise, phases, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn suppression_table(n: usize) -> Result<String, JsError> {
    suppression_table_json(n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fourier_distribution(levels: &str) -> Result<String, JsError> {
    fourier_distribution_json(levels).map_err(|e| JsError::new(&e))
}
