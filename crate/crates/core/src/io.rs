//! JSON and CSV formats for states, unitaries, ensembles and protocol reports.
//!
//! Writers emit canonical term order and round every number to 12
//! significant digits, so output is byte-stable. Readers accept terms and
//! occupation entries in any order and report problems by field path, e.g.
//! `components[3].state.terms[0].amp`.

use serde::Serialize;
use serde_json::Value;

use crate::channels::{Component, Ensemble};
use crate::error::{field, Error, Result};
use crate::fock::{FockVector, OccupationState, Slot, C64, NORM_TOL};
use crate::interferometer::{CMatrix, ModeUnitary};
use crate::protocol::ProtocolReport;

/// Round to 12 significant digits. Negative zero is folded to zero.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Shortest text that reads back as `round12(x)`; shared by JSON and CSV.
pub fn format_number(x: f64) -> String {
    serde_json::to_string(&round12(x)).expect("finite float serializes")
}

#[derive(Serialize)]
struct StateOut {
    modes: usize,
    levels: usize,
    terms: Vec<TermOut>,
}

#[derive(Serialize)]
struct TermOut {
    occ: Vec<[usize; 3]>,
    amp: [f64; 2],
}

#[derive(Serialize)]
struct EnsembleOut {
    modes: usize,
    levels: usize,
    components: Vec<ComponentOut>,
}

#[derive(Serialize)]
struct ComponentOut {
    weight: f64,
    state: StateOut,
}

#[derive(Serialize)]
struct UnitaryOut {
    dim: usize,
    rows: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct StepOut {
    j: usize,
    p: f64,
}

#[derive(Serialize)]
struct ReportOut {
    #[serde(rename = "N")]
    n: usize,
    steps: Vec<StepOut>,
    p_success: f64,
    fidelity: f64,
    output: Option<EnsembleOut>,
}

fn occ_out(occ: &OccupationState) -> Vec<[usize; 3]> {
    occ.entries().iter().map(|&(s, c)| [s.mode, s.level, c as usize]).collect()
}

fn state_out(v: &FockVector) -> StateOut {
    StateOut {
        modes: v.modes(),
        levels: v.levels(),
        terms: v
            .terms()
            .map(|(occ, a)| TermOut { occ: occ_out(occ), amp: [round12(a.re), round12(a.im)] })
            .collect(),
    }
}

fn ensemble_out(e: &Ensemble) -> EnsembleOut {
    EnsembleOut {
        modes: e.modes(),
        levels: e.levels(),
        components: e
            .components()
            .iter()
            .map(|c| ComponentOut { weight: round12(c.weight), state: state_out(&c.state) })
            .collect(),
    }
}

fn report_out(r: &ProtocolReport) -> ReportOut {
    ReportOut {
        n: r.n,
        steps: r.steps.iter().map(|s| StepOut { j: s.j, p: round12(s.probability) }).collect(),
        p_success: round12(r.success_probability),
        fidelity: round12(r.fidelity_with_singlet),
        output: r.output.as_ref().map(ensemble_out),
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn state_to_json(v: &FockVector) -> String {
    pretty(&state_out(v))
}

pub fn ensemble_to_json(e: &Ensemble) -> String {
    pretty(&ensemble_out(e))
}

pub fn unitary_to_json(u: &ModeUnitary) -> String {
    let m = u.matrix();
    let rows = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [round12(m[(r, c)].re), round12(m[(r, c)].im)]).collect())
        .collect();
    pretty(&UnitaryOut { dim: u.dim(), rows })
}

pub fn report_to_json(r: &ProtocolReport) -> String {
    pretty(&report_out(r))
}

/// Flat CSV view of a report with columns `field,j,component,occ,re,im`.
///
/// Scalars (`N`, `p_success`, `fidelity`, `modes`, `levels`) and step
/// probabilities put their value in `re`. Each output component contributes a
/// `weight` row and one `amp` row per term, with `occ` written as
/// space-separated `mode:level:count` triples.
pub fn report_to_csv(r: &ProtocolReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut row = |f: &str, j: &str, comp: &str, occ: &str, re: &str, im: &str| {
        w.write_record([f, j, comp, occ, re, im]).expect("in-memory write");
    };
    row("field", "j", "component", "occ", "re", "im");
    row("N", "", "", "", &r.n.to_string(), "");
    for s in &r.steps {
        row("step", &s.j.to_string(), "", "", &format_number(s.probability), "");
    }
    row("p_success", "", "", "", &format_number(r.success_probability), "");
    row("fidelity", "", "", "", &format_number(r.fidelity_with_singlet), "");
    if let Some(out) = &r.output {
        row("modes", "", "", "", &out.modes().to_string(), "");
        row("levels", "", "", "", &out.levels().to_string(), "");
        for (i, c) in out.components().iter().enumerate() {
            let idx = i.to_string();
            row("weight", "", &idx, "", &format_number(c.weight), "");
            for (occ, a) in c.state.terms() {
                let label = occ
                    .entries()
                    .iter()
                    .map(|(s, n)| format!("{}:{}:{}", s.mode, s.level, n))
                    .collect::<Vec<_>>()
                    .join(" ");
                row("amp", "", &idx, &label, &format_number(a.re), &format_number(a.im));
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// A JSON value together with its path from the document root.
struct At<'a> {
    v: &'a Value,
    path: String,
}

impl<'a> At<'a> {
    fn root(v: &'a Value) -> Self {
        At { v, path: String::new() }
    }

    fn fail(&self, reason: impl Into<String>) -> Error {
        let path = if self.path.is_empty() { "<root>" } else { &self.path };
        field(path, reason)
    }

    fn child_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn has(&self, key: &str) -> bool {
        self.v.get(key).is_some()
    }

    fn get(&self, key: &str) -> Result<At<'a>> {
        if !self.v.is_object() {
            return Err(self.fail("expected an object"));
        }
        match self.v.get(key) {
            Some(v) => Ok(At { v, path: self.child_path(key) }),
            None => Err(field(self.child_path(key), "missing")),
        }
    }

    fn items(&self) -> Result<Vec<At<'a>>> {
        let arr = self.v.as_array().ok_or_else(|| self.fail("expected an array"))?;
        Ok(arr
            .iter()
            .enumerate()
            .map(|(i, v)| At { v, path: format!("{}[{i}]", self.path) })
            .collect())
    }

    fn items_of_len(&self, n: usize) -> Result<Vec<At<'a>>> {
        let items = self.items()?;
        if items.len() != n {
            return Err(self.fail(format!("expected {n} entries, found {}", items.len())));
        }
        Ok(items)
    }

    fn uint(&self) -> Result<usize> {
        self.v
            .as_u64()
            .map(|x| x as usize)
            .ok_or_else(|| self.fail("expected a non-negative integer"))
    }

    fn positive(&self) -> Result<usize> {
        match self.uint()? {
            0 => Err(self.fail("must be at least 1")),
            n => Ok(n),
        }
    }

    fn real(&self) -> Result<f64> {
        match self.v.as_f64() {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(self.fail("expected a finite number")),
        }
    }

    fn complex(&self) -> Result<C64> {
        let parts = self.items_of_len(2)?;
        Ok(C64::new(parts[0].real()?, parts[1].real()?))
    }
}

fn parse(text: &str) -> Result<Value> {
    Ok(serde_json::from_str(text)?)
}

fn state_at(at: &At) -> Result<FockVector> {
    let modes = at.get("modes")?.positive()?;
    let levels = at.get("levels")?.positive()?;
    let terms_at = at.get("terms")?;
    let items = terms_at.items()?;
    if items.is_empty() {
        return Err(terms_at.fail("state has no terms"));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut particles = None;
    let mut terms = Vec::with_capacity(items.len());
    for t in &items {
        let occ_at = t.get("occ")?;
        let mut counts = Vec::new();
        let mut slots = std::collections::BTreeSet::new();
        for e in occ_at.items()? {
            let triple = e.items_of_len(3)?;
            let mode = triple[0].uint()?;
            let level = triple[1].uint()?;
            let count = triple[2].positive()?;
            if mode >= modes {
                return Err(triple[0].fail(format!("mode {mode} out of range (modes = {modes})")));
            }
            if level >= levels {
                return Err(triple[1].fail(format!("level {level} out of range (levels = {levels})")));
            }
            let count = u32::try_from(count).map_err(|_| triple[2].fail("count too large"))?;
            if !slots.insert((mode, level)) {
                return Err(e.fail(format!("slot ({mode}, {level}) listed twice")));
            }
            counts.push((Slot::new(mode, level), count));
        }
        let occ = OccupationState::from_counts(counts);
        let n = occ.total_particles();
        match particles {
            None => particles = Some(n),
            Some(p) if p != n => {
                return Err(occ_at.fail(format!("{n} particles, earlier terms have {p}")));
            }
            _ => {}
        }
        if !seen.insert(occ.clone()) {
            return Err(occ_at.fail(format!("label {occ} appears in more than one term")));
        }
        terms.push((occ, t.get("amp")?.complex()?));
    }
    FockVector::from_terms(modes, levels, terms)
}

fn ensemble_at(at: &At) -> Result<Ensemble> {
    let modes = at.get("modes")?.positive()?;
    let levels = at.get("levels")?.positive()?;
    let comps_at = at.get("components")?;
    let items = comps_at.items()?;
    if items.is_empty() {
        return Err(comps_at.fail("ensemble has no components"));
    }
    let mut components = Vec::with_capacity(items.len());
    let mut total = 0.0;
    for c in &items {
        let w_at = c.get("weight")?;
        let weight = w_at.real()?;
        if weight <= 0.0 {
            return Err(w_at.fail("weight must be positive"));
        }
        total += weight;
        let s_at = c.get("state")?;
        let state = state_at(&s_at)?;
        if state.modes() != modes {
            return Err(s_at.get("modes")?.fail(format!("{} does not match ensemble modes {modes}", state.modes())));
        }
        if state.levels() != levels {
            return Err(s_at.get("levels")?.fail(format!("{} does not match ensemble levels {levels}", state.levels())));
        }
        check_normalized(&s_at, &state)?;
        components.push(Component { weight, state });
    }
    if (total - 1.0).abs() > NORM_TOL {
        return Err(comps_at.fail(format!("weights sum to {total}, not 1")));
    }
    Ensemble::new(modes, levels, components)
}

fn check_normalized(at: &At, v: &FockVector) -> Result<()> {
    if v.is_normalized() {
        Ok(())
    } else {
        Err(at.get("terms")?.fail(format!("state is not normalized (norm² = {})", v.norm_sqr())))
    }
}

pub fn state_from_json(text: &str) -> Result<FockVector> {
    state_at(&At::root(&parse(text)?))
}

pub fn ensemble_from_json(text: &str) -> Result<Ensemble> {
    ensemble_at(&At::root(&parse(text)?))
}

/// Accept either an ensemble file or a single normalized state file.
pub fn input_from_json(text: &str) -> Result<Ensemble> {
    let v = parse(text)?;
    let at = At::root(&v);
    if at.has("components") {
        ensemble_at(&at)
    } else if at.has("terms") {
        let state = state_at(&at)?;
        check_normalized(&at, &state)?;
        Ensemble::pure(state)
    } else {
        Err(at.fail("expected a state (`terms`) or an ensemble (`components`)"))
    }
}

pub fn unitary_from_json(text: &str) -> Result<ModeUnitary> {
    let v = parse(text)?;
    let at = At::root(&v);
    let dim = at.get("dim")?.positive()?;
    let rows_at = at.get("rows")?;
    let mut m = CMatrix::zeros(dim, dim);
    for (r, row) in rows_at.items_of_len(dim)?.iter().enumerate() {
        for (c, entry) in row.items_of_len(dim)?.iter().enumerate() {
            m[(r, c)] = entry.complex()?;
        }
    }
    ModeUnitary::new(m, "custom").map_err(|e| rows_at.fail(e.to_string()))
}
