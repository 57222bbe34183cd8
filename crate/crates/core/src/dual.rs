//! Dual pricing over consistent price systems.
//!
//! A price system is a positive `(cash, fuel)` martingale whose fuel shadow
//! price `Z2 / Z1` stays inside each node's bid-ask interval. The seller's
//! price of a claim `H` is
//!
//! ```text
//! sup_Z  E[Z_T . H] - alpha(Z),
//! alpha(Z) = sup_beta E[ sum Z1 (P q min(b, D) - gamma) + Z2 (c(min(b, D)) - min(b, D)) ],
//! ```
//!
//! with `Z1` normalized to one at the root. The inner supremum decouples per
//! decision node and is attained at a breakpoint of the children's output
//! curves, so the whole problem is a single LP with one epigraph variable
//! per decision node.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::cones::Vec2;
use crate::hedge::child_lines;
use crate::lp::{solve_lp, LpError, LpProblem, LpSolution, Relation, Sense};
use crate::production::{ProductionFunction, ThermalStep};
use crate::tree::{ContingentClaim, ScenarioTree};

/// Default margin on the fuel shadow price.
pub const DEFAULT_EPS: f64 = 1e-6;
/// Lower bound on every price-system component.
pub const EPS_POS: f64 = 1e-8;
/// Tolerance used when validating a given price system.
pub const CPS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DualError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("invalid price system: {0}")]
    InvalidPriceSystem(String),
    #[error("no price system with margin {eps} exists: frictions too tight")]
    Infeasible { eps: f64 },
    #[error("dual LP unbounded (internal error)")]
    Unbounded,
    #[error("production requested but the tree carries no plant data")]
    MissingPlant,
    #[error("production at node {0} is not concave")]
    NonConcaveProduction(String),
    #[error("node {0} has no spot price")]
    MissingSpot(String),
    #[error("margin must lie in [0, 1e-3], got {0}")]
    BadEps(f64),
}

/// Per-node `(Z1, Z2)`, indexed like the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSystem {
    pub z: Vec<Vec2>,
}

impl PriceSystem {
    /// Violated invariants for margin `eps`, empty if valid.
    pub fn violations(&self, tree: &ScenarioTree, eps: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.z.len() != tree.len() {
            out.push(format!(
                "expected {} nodes, got {}",
                tree.len(),
                self.z.len()
            ));
            return out;
        }
        let root = self.z[tree.root()];
        if (root[0] - 1.0).abs() > CPS_TOL {
            out.push(format!("root cash component is {} instead of 1", root[0]));
        }
        for (i, node) in tree.nodes().iter().enumerate() {
            let z = self.z[i];
            if !(z[0] > 0.0 && z[1] > 0.0) {
                out.push(format!("node {}: components must be positive", node.id));
                continue;
            }
            let tol = CPS_TOL * (1.0 + z[0]);
            if z[1] < (1.0 / node.pi21 + eps) * z[0] - tol || z[1] > (node.pi12 - eps) * z[0] + tol
            {
                out.push(format!(
                    "node {}: shadow price {} outside [{}, {}]",
                    node.id,
                    z[1] / z[0],
                    1.0 / node.pi21 + eps,
                    node.pi12 - eps
                ));
            }
            if node.children().is_empty() {
                continue;
            }
            for k in 0..2 {
                let mean: f64 = node
                    .children()
                    .iter()
                    .map(|&c| tree.node(c).cond_prob * self.z[c][k])
                    .sum();
                if (mean - z[k]).abs() > CPS_TOL * (1.0 + z[k].abs()) {
                    out.push(format!(
                        "node {}: component {} is not a martingale ({} vs {})",
                        node.id,
                        k + 1,
                        z[k],
                        mean
                    ));
                }
            }
        }
        out
    }

    /// `E[Z_T . H]`.
    pub fn expectation(&self, tree: &ScenarioTree, claim: &ContingentClaim) -> f64 {
        tree.leaves()
            .iter()
            .map(|&l| {
                let h = claim.payoff(l);
                tree.probability(l) * (self.z[l][0] * h[0] + self.z[l][1] * h[1])
            })
            .sum()
    }

    /// Components keyed by node id.
    pub fn by_id(&self, tree: &ScenarioTree) -> BTreeMap<String, Vec2> {
        tree.nodes()
            .iter()
            .zip(&self.z)
            .map(|(n, z)| (n.id.clone(), *z))
            .collect()
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &PriceSystem, lambda: f64) -> PriceSystem {
        PriceSystem {
            z: self
                .z
                .iter()
                .zip(&other.z)
                .map(|(a, b)| {
                    [
                        lambda * a[0] + (1.0 - lambda) * b[0],
                        lambda * a[1] + (1.0 - lambda) * b[1],
                    ]
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportValue {
    pub alpha: f64,
    /// Maximizing regime per decision node.
    pub regimes: Vec<(String, f64)>,
}

/// One breakpoint cut: at regime `beta`, each production child `c`
/// contributes `a_c Z1_c + d_c Z2_c` (before probability weighting).
struct Cut {
    beta: f64,
    terms: Vec<(usize, f64, f64)>,
}

/// Candidate regimes and their per-child coefficients at decision node `n`.
fn node_cuts(tree: &ScenarioTree, n: usize) -> Result<Vec<Cut>, DualError> {
    let children = tree.node(n).children();
    let mut candidates = vec![0.0];
    for &c in children {
        let node = tree.node(c);
        // concavity is required for the breakpoint argument
        child_lines(tree, c).map_err(|_| match (&node.plant, node.spot_power) {
            (Some(_), Some(_)) => DualError::NonConcaveProduction(node.id.clone()),
            _ => DualError::MissingPlant,
        })?;
        let plant = node.plant.as_ref().expect("plant");
        candidates.extend(plant.maintenance.breakpoints().iter().map(|p| p.0));
        candidates.push(plant.capacity);
    }
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    Ok(candidates
        .into_iter()
        .map(|beta| Cut {
            beta,
            terms: children
                .iter()
                .map(|&c| {
                    let node = tree.node(c);
                    let plant = node.plant.as_ref().expect("plant");
                    let r = ThermalStep::new(plant, node.spot_power.expect("spot")).output(beta);
                    (c, r[0], r[1] - beta)
                })
                .collect(),
        })
        .collect())
}

fn check_production(tree: &ScenarioTree, production: bool) -> Result<(), DualError> {
    if production && !tree.has_plant() {
        return Err(DualError::MissingPlant);
    }
    Ok(())
}

/// `alpha(Z)` by evaluating every candidate breakpoint.
pub fn alpha_support(
    tree: &ScenarioTree,
    z: &PriceSystem,
    production: bool,
) -> Result<SupportValue, DualError> {
    let v = z.violations(tree, 0.0);
    if !v.is_empty() {
        return Err(DualError::InvalidPriceSystem(v.join("; ")));
    }
    check_production(tree, production)?;
    let mut alpha = 0.0;
    let mut regimes = Vec::new();
    if !production {
        return Ok(SupportValue { alpha, regimes });
    }
    for n in (0..tree.len()).filter(|&n| tree.is_production_node(n)) {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for cut in node_cuts(tree, n)? {
            let value: f64 = cut
                .terms
                .iter()
                .map(|&(c, a, d)| tree.probability(c) * (a * z.z[c][0] + d * z.z[c][1]))
                .sum();
            if value > best.0 {
                best = (value, cut.beta);
            }
        }
        alpha += best.0;
        regimes.push((tree.node(n).id.clone(), best.1));
    }
    Ok(SupportValue { alpha, regimes })
}

/// Margins defining the closed set of price systems the dual LP searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margins {
    /// Distance kept between the fuel shadow price and the bid and ask.
    pub ratio: f64,
    /// Lower bound on every component.
    pub positivity: f64,
}

impl Margins {
    /// The default interior approximation with ratio margin `eps`.
    pub fn interior(eps: f64) -> Self {
        Margins {
            ratio: eps,
            positivity: EPS_POS,
        }
    }

    /// No margins: the closure of the set of consistent price systems. Its
    /// LP value is the supremum over the strict set whenever that set is
    /// nonempty.
    pub fn closure() -> Self {
        Margins {
            ratio: 0.0,
            positivity: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualResult {
    pub value: f64,
    pub price_system: PriceSystem,
    pub iterations: usize,
}

/// Builds the dual LP. Columns: `(Z1, Z2)` per node at `2i, 2i + 1`, then one
/// epigraph variable per decision node.
pub fn build_dual_lp(
    tree: &ScenarioTree,
    claim: &ContingentClaim,
    production: bool,
    margins: Margins,
) -> Result<LpProblem, DualError> {
    let eps = margins.ratio;
    if !(0.0..=1e-3).contains(&eps) {
        return Err(DualError::BadEps(eps));
    }
    check_production(tree, production)?;
    let n = tree.len();
    let deciders: Vec<usize> = if production {
        (0..n).filter(|&i| tree.is_production_node(i)).collect()
    } else {
        Vec::new()
    };
    let mut lp = LpProblem::new(Sense::Maximize, 2 * n + deciders.len());
    for i in 0..2 * n {
        lp.set_bounds(i, margins.positivity, f64::INFINITY);
    }
    for &leaf in tree.leaves() {
        let p = tree.probability(leaf);
        let h = claim.payoff(leaf);
        lp.objective[2 * leaf] += p * h[0];
        lp.objective[2 * leaf + 1] += p * h[1];
    }
    lp.add_sparse(&[(2 * tree.root(), 1.0)], Relation::Eq, 1.0);
    for (i, node) in tree.nodes().iter().enumerate() {
        let (z1, z2) = (2 * i, 2 * i + 1);
        lp.add_sparse(
            &[(z2, 1.0), (z1, -(1.0 / node.pi21 + eps))],
            Relation::Ge,
            0.0,
        );
        lp.add_sparse(&[(z2, 1.0), (z1, -(node.pi12 - eps))], Relation::Le, 0.0);
        if node.children().is_empty() {
            continue;
        }
        for k in 0..2 {
            let mut terms = vec![(2 * i + k, 1.0)];
            terms.extend(
                node.children()
                    .iter()
                    .map(|&c| (2 * c + k, -tree.node(c).cond_prob)),
            );
            lp.add_sparse(&terms, Relation::Eq, 0.0);
        }
    }
    for (j, &d) in deciders.iter().enumerate() {
        let s = 2 * n + j;
        lp.set_bounds(s, f64::NEG_INFINITY, f64::INFINITY);
        lp.objective[s] = -1.0;
        for cut in node_cuts(tree, d)? {
            let mut terms = vec![(s, 1.0)];
            for &(c, a, dd) in &cut.terms {
                let p = tree.probability(c);
                terms.push((2 * c, -p * a));
                terms.push((2 * c + 1, -p * dd));
            }
            lp.add_sparse(&terms, Relation::Ge, 0.0);
        }
    }
    Ok(lp)
}

/// Dual price of `claim` with margin `eps` on the fuel shadow price.
pub fn dual_price(
    tree: &ScenarioTree,
    claim: &ContingentClaim,
    production: bool,
    eps: f64,
) -> Result<DualResult, DualError> {
    dual_price_with(tree, claim, production, Margins::interior(eps))
}

pub fn dual_price_with(
    tree: &ScenarioTree,
    claim: &ContingentClaim,
    production: bool,
    margins: Margins,
) -> Result<DualResult, DualError> {
    let eps = margins.ratio;
    let lp = build_dual_lp(tree, claim, production, margins)?;
    match solve_lp(&lp)? {
        LpSolution::Optimal(o) => Ok(DualResult {
            value: o.value,
            price_system: PriceSystem {
                z: (0..tree.len())
                    .map(|i| [o.x[2 * i], o.x[2 * i + 1]])
                    .collect(),
            },
            iterations: o.iterations,
        }),
        LpSolution::Infeasible { .. } => Err(DualError::Infeasible { eps }),
        LpSolution::Unbounded { .. } => Err(DualError::Unbounded),
    }
}

/// Cash claim paying `x` times the spot price at every node after the root,
/// accumulated at zero interest to the leaves.
pub fn power_futures_claim(tree: &ScenarioTree, x: f64) -> Result<ContingentClaim, DualError> {
    if let Some(n) = tree
        .nodes()
        .iter()
        .find(|n| n.parent.is_some() && n.spot_power.is_none())
    {
        return Err(DualError::MissingSpot(n.id.clone()));
    }
    Ok(ContingentClaim::from_leaves(tree, |leaf| {
        let total: f64 = tree
            .path(leaf)
            .into_iter()
            .filter_map(|a| tree.node(a).parent.and(tree.node(a).spot_power))
            .sum();
        [total * x, 0.0]
    }))
}

/// Power-futures price `F(x)` for `x` MW.
pub fn power_futures_price(
    tree: &ScenarioTree,
    x: f64,
    production: bool,
    eps: f64,
) -> Result<DualResult, DualError> {
    let claim = power_futures_claim(tree, x)?;
    dual_price(tree, &claim, production, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree;

    const ONE_STEP: &str = r#"{
        "times": [0, 1],
        "nodes": [
            {"id": "0", "time_index": 0, "parent": null, "pi12": 2.0, "pi21": 2.0},
            {"id": "1", "time_index": 1, "parent": "0", "cond_prob": 1.0, "pi12": 2.0, "pi21": 2.0,
             "spot_power": 8.0,
             "plant": {"heat_rate": 0.5, "capacity": 10.0, "fixed_cost": 5.0,
                       "maintenance": [[0, -100], [5, -10], [10, -2]]}}
        ]
    }"#;

    fn one_step() -> ScenarioTree {
        parse_tree(ONE_STEP.as_bytes()).unwrap()
    }

    #[test]
    fn alpha_at_constant_price_system() {
        let t = one_step();
        let z = PriceSystem {
            z: vec![[1.0, 0.6]; 2],
        };
        let s = alpha_support(&t, &z, true).unwrap();
        assert!((s.alpha - 27.8).abs() < 1e-12);
        assert_eq!(s.regimes, vec![("0".to_string(), 10.0)]);
        assert_eq!(alpha_support(&t, &z, false).unwrap().alpha, 0.0);
    }

    #[test]
    fn invalid_price_system_rejected() {
        let t = one_step();
        let z = PriceSystem {
            z: vec![[1.0, 0.6], [1.0, 0.7]],
        };
        assert!(matches!(
            alpha_support(&t, &z, true),
            Err(DualError::InvalidPriceSystem(_))
        ));
    }

    #[test]
    fn futures_without_production_is_spot_sum() {
        let t = one_step();
        let f = power_futures_price(&t, 3.0, false, DEFAULT_EPS).unwrap();
        assert!((f.value - 24.0).abs() < 1e-9);
    }

    #[test]
    fn zero_claim_without_production_is_free() {
        let t = one_step();
        let r = dual_price(&t, &ContingentClaim::zero(&t), false, DEFAULT_EPS).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!(r.price_system.violations(&t, DEFAULT_EPS).is_empty());
    }

    #[test]
    fn eps_out_of_range() {
        let t = one_step();
        assert!(matches!(
            dual_price(&t, &ContingentClaim::zero(&t), false, 0.01),
            Err(DualError::BadEps(_))
        ));
    }
}
