use serde_json::Value;
use singlet_web::{fourier_distribution_json, run_scenario_json, suppression_table_json};

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn scenarios() {
    let r = parse(run_scenario_json("depolarized", 3, false, false, 1).unwrap());
    assert_eq!(r["p_success"].as_f64(), Some(0.037037037037));
    let r = parse(run_scenario_json("shortcut-mixed", 0, true, true, 5).unwrap());
    assert_eq!(r["N"], 3);
    assert!(run_scenario_json("custom", 3, false, false, 1).is_err());
    assert!(run_scenario_json("depolarized", 7, false, false, 1).is_err());
    assert!(run_scenario_json("bogus", 3, false, false, 1).is_err());
}

#[test]
fn table() {
    let t = parse(suppression_table_json(2).unwrap());
    let rows = t["rows"].as_array().unwrap();
    let hom = rows.iter().find(|r| r["class"] == 0 && r["output"] == serde_json::json!([1, 1])).unwrap();
    assert_eq!(hom["suppressed"], true);
    assert_eq!(hom["max_amplitude"].as_f64(), Some(0.0));
}

#[test]
fn distribution() {
    // identical particles: Hong-Ou-Mandel bunching
    let d = parse(fourier_distribution_json("0,0").unwrap());
    let outs: Vec<&Value> = d.as_array().unwrap().iter().map(|o| &o["output"]).collect();
    assert_eq!(outs, [&serde_json::json!([2, 0]), &serde_json::json!([0, 2])]);

    let d = parse(fourier_distribution_json("0, 1, 2").unwrap());
    let total: f64 = d.as_array().unwrap().iter().map(|o| o["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
    let coinc = d.as_array().unwrap().iter().find(|o| o["output"] == serde_json::json!([1, 1, 1])).unwrap();
    assert!((coinc["probability"].as_f64().unwrap() - 6.0 / 27.0).abs() < 1e-11);

    assert!(fourier_distribution_json("0,x").is_err());
    assert!(fourier_distribution_json("0").is_err());
}
