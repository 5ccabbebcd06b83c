use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn singlet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singlet")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = singlet(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn p_success(v: &Value) -> f64 {
    v["p_success"].as_f64().unwrap()
}

#[test]
fn run_named_scenarios() {
    let r = report(&["run", "--scenario", "depolarized", "--n", "3"]);
    assert!((p_success(&r) - 0.037037).abs() < 1e-6);
    assert_eq!(r["N"], 3);
    assert_eq!(r["steps"].as_array().unwrap().len(), 2);

    let r = report(&["run", "--scenario", "product", "--n", "4"]);
    assert!((p_success(&r) - 0.0416667).abs() < 1e-6);

    let r = report(&["run", "--scenario", "shortcut-pure"]);
    assert!((p_success(&r) - 0.333333).abs() < 1e-6);
    assert!((r["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r["steps"][0]["j"], 3);

    let r = report(&["run", "--scenario", "shortcut-mixed"]);
    assert!((p_success(&r) - 1.0 / 9.0).abs() < 1e-9);
}

#[test]
fn reports_are_byte_stable() {
    let args = ["run", "--scenario", "depolarized", "--n", "3", "--noise", "random-local", "--phases", "random", "--seed", "11"];
    let a = singlet(&args);
    let b = singlet(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let mut par = args.to_vec();
    par.push("--parallel");
    assert_eq!(singlet(&par).stdout, a.stdout);
}

#[test]
fn csv_matches_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("r.csv");
    let out = singlet(&["run", "--scenario", "product", "--n", "3", "--format", "csv", "--out", csv_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(csv_path).unwrap();
    let json = report(&["run", "--scenario", "product", "--n", "3"]);

    let value = |field: &str| -> String {
        csv.lines().find(|l| l.starts_with(&format!("{field},"))).unwrap().split(',').nth(4).unwrap().to_string()
    };
    assert_eq!(value("p_success"), json["p_success"].to_string());
    assert_eq!(value("fidelity"), json["fidelity"].to_string());
    let steps: Vec<String> = csv.lines().filter(|l| l.starts_with("step,")).map(|l| l.split(',').nth(4).unwrap().to_string()).collect();
    let json_steps: Vec<String> = json["steps"].as_array().unwrap().iter().map(|s| s["p"].to_string()).collect();
    assert_eq!(steps, json_steps);
}

#[test]
fn custom_input_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };

    // |0,0⟩ in two levels is symmetric: the two-port never gives a coincidence
    let sym = write("sym.json", r#"{"modes":2,"levels":2,"terms":[{"occ":[[1,0,1],[0,0,1]],"amp":[1,0]}]}"#);
    let out = singlet(&["run", "--scenario", "custom", "--input", &sym]);
    assert_eq!(out.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["output"].is_null());

    let ok = write("ok.json", r#"{"modes":2,"levels":2,"terms":[{"occ":[[0,0,1],[1,1,1]],"amp":[1,0]}]}"#);
    let r = report(&["run", "--scenario", "custom", "--input", &ok]);
    assert!((p_success(&r) - 0.5).abs() < 1e-9);

    let bad = write("bad.json", r#"{"modes":2,"levels":2,"terms":[{"occ":[[0,0,1],[1,1,1]],"amp":[1,"zero"]}]}"#);
    let out = singlet(&["run", "--scenario", "custom", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("terms[0].amp[1]"));

    let bad = write("bad2.json", r#"{"modes":2,"terms":[]}"#);
    let out = singlet(&["run", "--scenario", "custom", "--input", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`levels`"));

    let out = singlet(&["run", "--scenario", "custom"]);
    assert_eq!(out.status.code(), Some(1));
    let out = singlet(&["run", "--scenario", "shortcut-pure", "--n", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn custom_unitary_files() {
    let dir = tempfile::tempdir().unwrap();
    let identity = dir.path().join("id.json");
    fs::write(&identity, r#"{"dim":2,"rows":[[[1,0],[0,0]],[[0,0],[1,0]]]}"#).unwrap();
    let r = report(&["run", "--scenario", "product", "--n", "2", "--unitary", identity.to_str().unwrap()]);
    assert!((p_success(&r) - 1.0).abs() < 1e-12);

    let broken = dir.path().join("b.json");
    fs::write(&broken, r#"{"dim":2,"rows":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#).unwrap();
    let out = singlet(&["run", "--scenario", "product", "--n", "2", "--unitary", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`rows`"));
}

#[test]
fn suppress_table() {
    let out = singlet(&["suppress", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().find(|l| l.starts_with("0 ") && l.contains("(1,1)")).unwrap();
    assert!(row.contains("suppressed"), "{row}");

    let text = String::from_utf8(singlet(&["suppress", "--n", "3"]).stdout).unwrap();
    let allowed = text.lines().find(|l| l.starts_with("0 ") && l.contains("(1,1,1)")).unwrap();
    assert!(allowed.contains("allowed"));
    let omega = text.lines().find(|l| l.starts_with("1 ") && l.contains("(1,1,1)")).unwrap();
    assert!(omega.contains("suppressed"));
    let amp: f64 = omega.split_whitespace().last().unwrap().parse().unwrap();
    assert!(amp <= 1e-10);

    assert_eq!(singlet(&["suppress", "--n", "6"]).status.code(), Some(1));
    assert_eq!(singlet(&["suppress", "--n", "6", "--max-n", "6"]).status.code(), Some(0));
}

#[test]
fn verify_quick() {
    let out = singlet(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fourier-eigenphase"));
}
