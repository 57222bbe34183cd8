//! Acceptance criteria for the pricing engine. Each check returns an
//! [`Outcome`]; tolerances are pinned below. The `acceptance` test target
//! prints one line per criterion.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use superrep::csp::{check_csp_tree, check_tree_node, CspStatus, NodeVerdict};
use superrep::dual::{dual_price, dual_price_with, power_futures_claim, Margins, DEFAULT_EPS};
use superrep::hedge::{brute_force_price, superreplication_price};
use superrep::production::{check_assumptions, production_bound, ProductionFunction, ThermalStep};
use superrep::sample::{plant_e, random_instance, reweight, Instance, Shape};
use superrep::tree::{parse_tree, ScenarioTree};

const DUALITY_REL_TOL: f64 = 1e-6;
const DUALITY_BUDGET: Duration = Duration::from_secs(10);
const DESK1_TOL: f64 = 1e-6;
const BRUTE_FORCE_STEP: f64 = 0.01;
const BRUTE_FORCE_TOL: f64 = 0.02;
const ASSUMPTION_SAMPLES: usize = 10_000;
const REWEIGHT_PRIMAL_TOL: f64 = 1e-9;
const REWEIGHT_DUAL_TOL: f64 = 1e-6;
const MONOTONE_TOL: f64 = 1e-9;
const EPS_GRID: [f64; 3] = [1e-4, 1e-5, 1e-6];
const EPS_SPREAD_TOL: f64 = 1e-3;

const SUITE_SIZE: usize = 50;
const SUITE_SEED: u64 = 20_240_601;

pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Desk instance shipped with the core crate.
pub fn load(name: &str) -> ScenarioTree {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name);
    let bytes = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_tree(&bytes).expect("valid desk instance")
}

/// The seeded randomized suite shared by criteria 1, 5, 6 and 7.
pub fn suite() -> Vec<Instance> {
    let mut r = rng(SUITE_SEED);
    (0..SUITE_SIZE)
        .map(|_| random_instance(&mut r, Shape::default()))
        .collect()
}

/// Primal and closure-dual values agree on the randomized suite.
///
/// The dual is solved over the closure of the price-system set (no margins):
/// that LP value is the supremum over consistent price systems, because the
/// supremum of a continuous concave objective over a nonempty relatively
/// open convex set equals its supremum over the closure. The gap of the
/// default-margin LP is reported alongside; it is the first-order margin
/// bias examined by criterion 7.
pub fn duality(instances: &[Instance]) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_default = 0.0f64;
    let mut failures = 0;
    for inst in instances {
        let production = inst.tree.has_plant();
        let p = match superreplication_price(&inst.tree, &inst.claim, production) {
            Ok(r) => r.price,
            Err(e) => return outcome(false, format!("primal error: {e}")),
        };
        let d = match dual_price_with(&inst.tree, &inst.claim, production, Margins::closure()) {
            Ok(r) => r.value,
            Err(e) => return outcome(false, format!("dual error: {e}")),
        };
        let rel = (p - d).abs() / (1.0 + p.abs());
        worst = worst.max(rel);
        if rel > DUALITY_REL_TOL {
            failures += 1;
        }
        if let Ok(r) = dual_price(&inst.tree, &inst.claim, production, DEFAULT_EPS) {
            worst_default = worst_default.max((p - r.value).abs() / (1.0 + p.abs()));
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < DUALITY_BUDGET,
        format!(
            "{} instances, {} over tolerance, max relative gap {:.2e} (margin {:.0e}: {:.2e}), {:.2?}",
            instances.len(),
            failures,
            worst,
            DEFAULT_EPS,
            worst_default,
            elapsed
        ),
    )
}

pub fn desk1_oracle() -> Outcome {
    let tree = load("desk1.json");
    let claim = tree.claim().expect("desk-1 claim").clone();
    let p = match superreplication_price(&tree, &claim, false) {
        Ok(r) => r.price,
        Err(e) => return outcome(false, format!("primal error: {e}")),
    };
    let bf = match brute_force_price(&tree, &claim, false, BRUTE_FORCE_STEP) {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("brute force error: {e}")),
    };
    outcome(
        (p - 2.0).abs() <= DESK1_TOL && (bf - p).abs() <= BRUTE_FORCE_TOL,
        format!("primal {p:.9}, brute force {bf:.6}"),
    )
}

pub fn plant_regularity() -> Outcome {
    let plant = plant_e();
    let spot = 8.0;
    let report = check_assumptions(&plant, spot, ASSUMPTION_SAMPLES, &mut rng(7));
    let bound = production_bound(&plant, spot);
    let step = ThermalStep::new(&plant, spot);
    let mut r = rng(11);
    let dominated = (0..ASSUMPTION_SAMPLES).all(|_| {
        let beta = r.gen_range(0.0..40.0);
        let out = step.output(beta);
        out[0].abs() <= bound[0] && (out[1] - beta).abs() <= bound[1]
    });
    let violations =
        report.concavity.violations + report.boundedness.violations + report.continuity.violations;
    outcome(
        report.all_passed() && violations == 0 && bound == [45.0, 100.0] && dominated,
        format!(
            "violations {violations}, bound ({}, {}), max sampled |R - beta| ({}, {})",
            bound[0], bound[1], report.max_deviation[0], report.max_deviation[1]
        ),
    )
}

/// Node-level verdicts at every production node of a tree.
fn node_verdicts(tree: &ScenarioTree) -> Vec<(usize, NodeVerdict)> {
    (0..tree.len())
        .filter(|&i| {
            tree.node(i)
                .parent
                .is_some_and(|p| tree.is_production_node(p))
        })
        .map(|i| (i, check_tree_node(tree, i).expect("plant data")))
        .collect()
}

pub fn csp_agreement() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let low = load("desk2.json");
    let nodes_bounded_zero = node_verdicts(&low)
        .iter()
        .all(|(_, v)| *v == NodeVerdict::Bounded { sup: 0.0 });
    ok &= nodes_bounded_zero;
    notes.push(format!("P=8 nodes Bounded(0): {nodes_bounded_zero}"));
    match check_csp_tree(&low, 0) {
        Ok(v) => {
            let agree = v.c_star() == Some(0.0);
            ok &= agree;
            notes.push(format!(
                "P=8 tree LP: {}",
                match &v.status {
                    CspStatus::Bounded { c_star } => format!("Bounded({c_star})"),
                    CspStatus::Unbounded { witness } =>
                        format!("Unbounded at {}", witness.main_node().unwrap_or("?")),
                }
            ));
        }
        Err(e) => {
            ok = false;
            notes.push(format!("P=8 tree LP error: {e}"));
        }
    }

    let high = load("desk2-P50.json");
    let verdicts = node_verdicts(&high);
    let nodes_unbounded = verdicts.iter().all(|(_, v)| !v.is_bounded());
    ok &= nodes_unbounded;
    notes.push(format!("P=50 nodes Unbounded: {nodes_unbounded}"));
    match check_csp_tree(&high, 0) {
        Ok(v) => match &v.status {
            CspStatus::Unbounded { witness } => {
                // the witness must grow a regime at a node whose production
                // children fail the closed-form check
                let consistent = witness.ray.iter().any(|(id, ray)| {
                    let n = high.find(id).expect("witness node");
                    *ray > 0.0
                        && high
                            .node(n)
                            .children()
                            .iter()
                            .any(|c| verdicts.iter().any(|(i, v)| i == c && !v.is_bounded()))
                });
                ok &= consistent;
                notes.push(format!(
                    "P=50 tree LP Unbounded at {} (consistent: {consistent})",
                    witness.main_node().unwrap_or("?")
                ));
            }
            CspStatus::Bounded { c_star } => {
                ok = false;
                notes.push(format!("P=50 tree LP Bounded({c_star})"));
            }
        },
        Err(e) => {
            ok = false;
            notes.push(format!("P=50 tree LP error: {e}"));
        }
    }
    outcome(ok, notes.join("; "))
}

pub fn probability_independence(instances: &[Instance]) -> Outcome {
    let desk2 = load("desk2.json");
    let desk2_claim = desk2.claim().expect("desk-2 claim").clone();
    let mut cases = vec![(desk2, desk2_claim)];
    cases.extend(
        instances
            .iter()
            .take(4)
            .map(|i| (i.tree.clone(), i.claim.clone())),
    );
    let mut worst_primal = 0.0f64;
    let mut worst_dual = 0.0f64;
    let mut worst_default = 0.0f64;
    for (k, (tree, claim)) in cases.iter().enumerate() {
        let production = tree.has_plant();
        let base = superreplication_price(tree, claim, production).map(|r| r.price);
        let Ok(base) = base else {
            return outcome(false, format!("case {k}: primal error"));
        };
        for s in 0..10 {
            let t = reweight(tree, &mut rng(1000 * k as u64 + s));
            let p = superreplication_price(&t, claim, production).map(|r| r.price);
            let d = dual_price_with(&t, claim, production, Margins::closure()).map(|r| r.value);
            let d_default = dual_price(&t, claim, production, DEFAULT_EPS).map(|r| r.value);
            match (p, d, d_default) {
                (Ok(p), Ok(d), Ok(dd)) => {
                    worst_primal = worst_primal.max((p - base).abs());
                    worst_dual = worst_dual.max((d - p).abs());
                    worst_default = worst_default.max((dd - p).abs());
                }
                _ => return outcome(false, format!("case {k}, reweighting {s}: solver error")),
            }
        }
    }
    outcome(
        worst_primal <= REWEIGHT_PRIMAL_TOL && worst_dual <= REWEIGHT_DUAL_TOL,
        format!(
            "{} trees x 10 reweightings, max primal drift {:.2e}, max |dual - primal| {:.2e} (margin {:.0e}: {:.2e})",
            cases.len(),
            worst_primal,
            worst_dual,
            DEFAULT_EPS,
            worst_default
        ),
    )
}

pub fn monotonicity(instances: &[Instance]) -> Outcome {
    let xs = [0.0, 0.5, 1.0, 2.0, 4.0];
    let mut violations = Vec::new();
    for (k, inst) in instances.iter().take(20).enumerate() {
        let tree = &inst.tree;
        let production = tree.has_plant();
        let base = match superreplication_price(tree, &inst.claim, production) {
            Ok(r) => r.price,
            Err(e) => return outcome(false, format!("instance {k}: {e}")),
        };
        let tol = MONOTONE_TOL * (1.0 + base.abs());

        // (a) wider ask at one node
        let mut r = rng(500 + k as u64);
        let target = r.gen_range(0..tree.len());
        let factor = 1.0 + r.gen_range(0.01..0.3);
        let mut doc = tree.to_document();
        doc.nodes[target].pi12 *= factor;
        let wider = ScenarioTree::from_document(&doc).expect("wider spread stays valid");
        match superreplication_price(&wider, &inst.claim, production) {
            Ok(w) if w.price < base - tol => violations.push(format!("a{k}")),
            Ok(_) => {}
            Err(e) => violations.push(format!("a{k}: {e}")),
        }

        // (b) production never raises the price
        if production {
            match superreplication_price(tree, &inst.claim, false) {
                Ok(off) if base > off.price + tol => violations.push(format!("b{k}")),
                Ok(_) => {}
                Err(e) => violations.push(format!("b{k}: {e}")),
            }
        }

        // (c) F convex and nondecreasing on the grid
        let mut f = Vec::new();
        for &x in &xs {
            let claim = power_futures_claim(tree, x).expect("spot everywhere");
            match dual_price(tree, &claim, production, DEFAULT_EPS) {
                Ok(d) => f.push(d.value),
                Err(e) => {
                    violations.push(format!("c{k}: {e}"));
                    break;
                }
            }
        }
        if f.len() == xs.len() {
            let ftol = MONOTONE_TOL * (1.0 + f.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let nondecreasing = f.windows(2).all(|w| w[1] >= w[0] - ftol);
            let convex = (1..xs.len() - 1).all(|i| {
                let left = (f[i] - f[i - 1]) / (xs[i] - xs[i - 1]);
                let right = (f[i + 1] - f[i]) / (xs[i + 1] - xs[i]);
                right >= left - ftol
            });
            if !(nondecreasing && convex) {
                violations.push(format!("c{k}"));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!("20 instances, violations: [{}]", violations.join(", ")),
    )
}

pub fn eps_sensitivity(instances: &[Instance]) -> Outcome {
    let mut worst_spread = 0.0f64;
    let mut non_monotone = 0;
    for (k, inst) in instances.iter().enumerate() {
        let production = inst.tree.has_plant();
        let mut values = Vec::new();
        for eps in EPS_GRID {
            match dual_price(&inst.tree, &inst.claim, production, eps) {
                Ok(d) => values.push(d.value),
                Err(e) => return outcome(false, format!("instance {k}, eps {eps:e}: {e}")),
            }
        }
        let tol = MONOTONE_TOL * (1.0 + values[2].abs());
        if values.windows(2).any(|w| w[1] < w[0] - tol) {
            non_monotone += 1;
        }
        worst_spread = worst_spread.max((values[2] - values[1]).abs());
    }
    outcome(
        non_monotone == 0 && worst_spread < EPS_SPREAD_TOL,
        format!(
            "{} instances, non-monotone {}, max |v(1e-6) - v(1e-5)| {:.2e}",
            instances.len(),
            non_monotone,
            worst_spread
        ),
    )
}

/// Every criterion, in order, with its label.
pub fn criteria() -> Vec<(&'static str, Outcome)> {
    let instances = suite();
    vec![
        ("1 duality", duality(&instances)),
        ("2 desk-1 oracle", desk1_oracle()),
        ("3 plant regularity", plant_regularity()),
        ("4 CSP agreement", csp_agreement()),
        (
            "5 probability independence",
            probability_independence(&instances),
        ),
        ("6 monotonicity", monotonicity(&instances)),
        ("7 margin sensitivity", eps_sensitivity(&instances)),
    ]
}
