use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn superrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superrep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const ONE_STEP_BAD_PROBS: &str = r#"{
    "times": [0, 1],
    "nodes": [
        {"id": "0", "time_index": 0, "parent": null, "pi12": 2, "pi21": 1},
        {"id": "a", "time_index": 1, "parent": "0", "cond_prob": 0.7, "pi12": 2, "pi21": 1},
        {"id": "b", "time_index": 1, "parent": "0", "cond_prob": 0.7, "pi12": 2, "pi21": 1}
    ]
}"#;

#[test]
fn validate_accepts_desk1() {
    let out = superrep(&["validate", "--format", "json", path(&data("desk1.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["valid"], Value::Bool(true));
    assert_eq!(r["violations"], Value::Array(vec![]));
}

#[test]
fn validate_lists_violations_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, ONE_STEP_BAD_PROBS).unwrap();
    let out = superrep(&["validate", "--format", "json", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    assert_eq!(r["valid"], Value::Bool(false));
    assert!(!r["violations"].as_array().unwrap().is_empty());

    let out = superrep(&["price", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreadable_and_malformed_input_exit_1_with_one_line() {
    let out = superrep(&["validate", "/nonexistent/tree.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        String::from_utf8_lossy(&out.stderr).trim().lines().count(),
        1
    );

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.json");
    std::fs::write(&file, "{\"times\": [0], \"nodes\": [").unwrap();
    let out = superrep(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        String::from_utf8_lossy(&out.stderr).trim().lines().count(),
        1
    );

    std::fs::write(&file, "{\"times\": [0], \"nodes\": [], \"extra\": 1}").unwrap();
    let out = superrep(&["validate", path(&file)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flags_are_rejected() {
    let desk1 = data("desk1.json");
    for args in [
        vec!["price", "--eps", "0.01", path(&desk1)],
        vec!["price", "--eps", "0", path(&desk1)],
        vec![
            "price",
            "--contract",
            "power-futures",
            "--power",
            "-1",
            path(&desk1),
        ],
        vec!["price", "--contract", "power-futures", path(&desk1)],
    ] {
        assert_eq!(superrep(&args).status.code(), Some(1), "{args:?}");
    }
    // desk-1 has no plant
    let out = superrep(&["price", "--production", "on", path(&desk1)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn price_desk1_reports_primal_dual_and_gap() {
    let out = superrep(&["price", "--format", "json", path(&data("desk1.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let primal = r["primal"].as_f64().unwrap();
    let dual = r["dual"].as_f64().unwrap();
    assert!((primal - 2.0).abs() < 1e-9);
    assert!((dual - 2.0).abs() < 1e-9);
    assert!(r["gap"].as_f64().unwrap() <= 1e-9);
    // the interior dual sits below by at most eps times the fuel traded
    let interior = r["interior"]["dual"].as_f64().unwrap();
    assert!(interior <= primal + 1e-9 && primal - interior < 1e-5);
}

#[test]
fn power_futures_on_desk2_closes_the_gap() {
    let out = superrep(&[
        "price",
        "--contract",
        "power-futures",
        "--power",
        "1",
        "--format",
        "json",
        path(&data("desk2.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["production"], Value::Bool(true));
    assert!(r["primal"].is_number() && r["dual"].is_number());
    assert!(r["gap"].as_f64().unwrap() <= 1e-6);

    // without the plant the contract pays 2 x 8 at every leaf
    let out = superrep(&[
        "price",
        "--contract",
        "power-futures",
        "--power",
        "1",
        "--production",
        "off",
        "--format",
        "json",
        path(&data("desk2.json")),
    ]);
    let r = json(&out);
    assert!((r["primal"].as_f64().unwrap() - 16.0).abs() < 1e-9);
}

#[test]
fn json_reports_are_byte_identical() {
    let desk2 = data("desk2.json");
    let args = [
        "price",
        "--contract",
        "power-futures",
        "--power",
        "2",
        "--format",
        "json",
        path(&desk2),
    ];
    let a = superrep(&args);
    let b = superrep(&args);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn check_csp_p50_is_unbounded_with_witness() {
    let out = superrep(&[
        "check-csp",
        "--format",
        "json",
        path(&data("desk2-P50.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let r = json(&out);
    assert_eq!(r["status"], "unbounded");
    let node = r["witness"]["node"].as_str().unwrap();
    assert!(r["witness"]["ray"][node].as_f64().unwrap() > 0.0);
    for v in r["nodes"].as_object().unwrap().values() {
        assert_eq!(v["status"], "unbounded");
    }
}

#[test]
fn check_csp_without_plant_is_bounded() {
    let out = superrep(&["check-csp", "--format", "json", path(&data("desk1.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["status"], "bounded");
    assert_eq!(r["c_star"].as_f64(), Some(0.0));
}

#[test]
fn check_assumptions_passes_for_plant_e() {
    let out = superrep(&[
        "check-assumptions",
        "--samples",
        "2000",
        "--format",
        "json",
        path(&data("desk2.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["passed"], Value::Bool(true));
    let nodes = r["nodes"].as_object().unwrap();
    assert_eq!(nodes.len(), 6);
    for v in nodes.values() {
        assert_eq!(v["bound"], serde_json::json!([45.0, 100.0]));
    }
}

#[test]
fn emitted_files_are_keyed_by_node_id() {
    let dir = tempfile::tempdir().unwrap();
    let cps = dir.path().join("cps.json");
    let strategy = dir.path().join("strategy.json");
    let lp = dir.path().join("lp.txt");
    let out = superrep(&[
        "price",
        "--contract",
        "power-futures",
        "--power",
        "1",
        "--emit-cps",
        path(&cps),
        "--emit-strategy",
        path(&strategy),
        "--dump-lp",
        path(&lp),
        path(&data("desk2.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let z: Value = serde_json::from_str(&std::fs::read_to_string(&cps).unwrap()).unwrap();
    let z = z.as_object().unwrap();
    assert_eq!(z.len(), 7);
    assert_eq!(z["0"][0].as_f64(), Some(1.0));
    for (id, v) in z {
        let [z1, z2] = [v[0].as_f64().unwrap(), v[1].as_f64().unwrap()];
        assert!(z1 > 0.0 && z2 > 0.0, "{id}");
    }

    let s: Value = serde_json::from_str(&std::fs::read_to_string(&strategy).unwrap()).unwrap();
    let nodes = s["nodes"].as_object().unwrap();
    assert_eq!(nodes.keys().collect::<Vec<_>>(), ["0", "d", "u"]);
    assert!(nodes["0"]["beta"].as_f64().unwrap() >= 0.0);
    assert_eq!(s["surplus"].as_object().unwrap().len(), 4);

    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("# primal\n"));
    assert!(text.contains("# dual\n"));
}

#[test]
fn hedge_desk1_buys_one_unit_of_fuel() {
    let out = superrep(&["hedge", "--format", "json", path(&data("desk1.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!((r["price"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    let trade = &r["strategy"]["nodes"]["0"]["trade"];
    assert!((trade[0].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert!((trade[1].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn text_format_is_line_per_field() {
    let out = superrep(&["price", path(&data("desk1.json"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "primal: 2.0"));
    assert!(text.lines().any(|l| l.starts_with("gap: ")));
}
