//! Hand-built desk trees with known answers.

use std::path::PathBuf;

use superrep::csp::{check_csp_tree, check_tree_node, NodeVerdict};
use superrep::dual::{
    dual_price_with, power_futures_claim, power_futures_price, DualError, Margins,
};
use superrep::hedge::{brute_force_price, superreplication_price, HedgeError};
use superrep::tree::{parse_tree, ContingentClaim, ScenarioTree};

fn load(name: &str) -> ScenarioTree {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name);
    parse_tree(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn desk1_price_is_the_root_ask() {
    // one unit of fuel bought at the root ask of 2 covers every leaf
    let tree = load("desk1.json");
    let claim = tree.claim().unwrap().clone();
    let primal = superreplication_price(&tree, &claim, false).unwrap();
    assert!((primal.price - 2.0).abs() < 1e-9);
    let dual = dual_price_with(&tree, &claim, false, Margins::closure()).unwrap();
    assert!((dual.value - 2.0).abs() < 1e-9);
    let bf = brute_force_price(&tree, &claim, false, 0.01).unwrap();
    assert!((bf - 2.0).abs() < 0.02);
}

#[test]
fn desk2_brute_force_agrees_with_the_lp() {
    let tree = load("desk2.json");
    let claim = tree.claim().unwrap().clone();
    for production in [false, true] {
        let lp = superreplication_price(&tree, &claim, production)
            .unwrap()
            .price;
        let bf = brute_force_price(&tree, &claim, production, 0.05).unwrap();
        assert!(bf >= lp - 1e-9, "{bf} < {lp}");
        assert!(bf - lp < 0.2, "production {production}: {bf} vs {lp}");
    }
}

#[test]
fn power_futures_dual_matches_primal() {
    let tree = load("desk2.json");
    let mut last: Option<(f64, f64)> = None;
    let mut values = Vec::new();
    for x in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let claim = power_futures_claim(&tree, x).unwrap();
        let primal = superreplication_price(&tree, &claim, true).unwrap().price;
        let closure = dual_price_with(&tree, &claim, true, Margins::closure())
            .unwrap()
            .value;
        assert!((primal - closure).abs() <= 1e-6 * (1.0 + primal.abs()));
        let interior = power_futures_price(&tree, x, true, 1e-6).unwrap().value;
        assert!(interior <= primal + 1e-9 && primal - interior < 1e-3);
        if let Some((x0, f0)) = last {
            assert!(primal >= f0 - 1e-9, "F({x}) < F({x0})");
        }
        last = Some((x, primal));
        values.push((x, primal));
    }
    for w in values.windows(3) {
        let [(x0, f0), (x1, f1), (x2, f2)] = [w[0], w[1], w[2]];
        let chord = f0 + (f2 - f0) * (x1 - x0) / (x2 - x0);
        assert!(f1 <= chord + 1e-9, "F not convex at {x1}");
    }
}

#[test]
fn futures_need_spot_prices() {
    let tree = load("desk1.json");
    assert!(matches!(
        power_futures_claim(&tree, 1.0),
        Err(DualError::MissingSpot(_))
    ));
}

#[test]
fn node_checks_follow_the_spot_price() {
    let low = load("desk2.json");
    let high = load("desk2-P50.json");
    for i in 1..low.len() {
        assert_eq!(
            check_tree_node(&low, i).unwrap(),
            NodeVerdict::Bounded { sup: 0.0 }
        );
        assert!(!check_tree_node(&high, i).unwrap().is_bounded());
    }
    let verdict = check_csp_tree(&high, 0).unwrap();
    assert!(!verdict.is_bounded());
    assert!(verdict.nodes.iter().all(|d| !d.verdict.is_bounded()));
}

#[test]
fn trees_without_plant_are_bounded_at_zero() {
    let verdict = check_csp_tree(&load("desk1.json"), 0).unwrap();
    assert_eq!(verdict.c_star(), Some(0.0));
}

#[test]
fn brute_force_refuses_deep_trees() {
    let tree = load("desk2.json");
    let mut doc = tree.to_document();
    let mut leaf = doc.nodes.last().unwrap().clone();
    let parent = leaf.id.clone();
    leaf.id = "ddd".into();
    leaf.parent = Some(parent);
    leaf.time_index = 3;
    leaf.cond_prob = Some(1.0);
    doc.times.push(3.0);
    doc.nodes.push(leaf);
    doc.claim = None;
    // every leaf must sit at the horizon; extend the other leaves too
    let extra: Vec<_> = doc
        .nodes
        .iter()
        .filter(|n| n.time_index == 2 && n.id.as_string() != "dd")
        .map(|n| {
            let mut c = n.clone();
            c.id = format!("{}x", n.id.as_string()).as_str().into();
            c.parent = Some(n.id.clone());
            c.time_index = 3;
            c.cond_prob = Some(1.0);
            c
        })
        .collect();
    doc.nodes.extend(extra);
    let deep = ScenarioTree::from_document(&doc).unwrap();
    assert_eq!(
        brute_force_price(&deep, &ContingentClaim::zero(&deep), false, 0.1),
        Err(HedgeError::InstanceTooLarge)
    );
    assert_eq!(
        brute_force_price(&tree, tree.claim().unwrap(), false, 0.0),
        Err(HedgeError::BadGrid)
    );
}
