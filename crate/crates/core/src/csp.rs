//! Conditional sure profits of the production side.
//!
//! Two checks: a closed-form per-node test of the thermal-plant condition
//!
//! ```text
//! R1(b) + gamma >= (R2(b) - b - c(0)) / pi12   must force   b <= C
//! ```
//!
//! and a tree LP that maximizes the total regime `sum b` over strategies
//! started at a given time index whose terminal position, production
//! included, dominates the do-nothing outcome `sum R(0)`.

use serde::Serialize;
use thiserror::Error;

use crate::hedge::child_lines;
use crate::lp::{solve_lp, LpError, LpProblem, LpSolution, Relation, Sense};
use crate::production::{PlantStepData, ProductionFunction, ThermalStep};
use crate::tree::ScenarioTree;

/// Tolerance on the sign of the closed-form inequality.
const NODE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CspError {
    #[error("node {0} carries no plant data or spot price")]
    MissingPlantData(String),
    #[error("production at node {0} is not concave")]
    NonConcaveProduction(String),
    #[error("start index {0} is beyond the horizon")]
    BadStartIndex(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("CSP LP infeasible (internal error)")]
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NodeVerdict {
    /// The inequality only holds for regimes up to `sup`.
    Bounded { sup: f64 },
    /// The inequality holds for every regime beyond capacity; the two sides
    /// are constant there.
    Unbounded {
        lhs_tail: f64,
        rhs_tail: f64,
        degenerate: bool,
    },
}

impl NodeVerdict {
    pub fn is_bounded(&self) -> bool {
        matches!(self, NodeVerdict::Bounded { .. })
    }
}

/// Closed-form node check for a plant at spot price `spot` with ask `pi12`.
pub fn check_node_arbitrage(plant: &PlantStepData, spot: f64, pi12: f64) -> NodeVerdict {
    let step = ThermalStep::new(plant, spot);
    let c0 = plant.maintenance.at_zero();
    let lhs = |b: f64| step.output(b)[0] + plant.fixed_cost;
    let rhs = |b: f64| (step.output(b)[1] - b - c0) / pi12;
    let d = |b: f64| lhs(b) - rhs(b);

    let cap = plant.capacity.max(0.0);
    if d(cap) >= -NODE_TOL {
        return NodeVerdict::Unbounded {
            lhs_tail: lhs(cap),
            rhs_tail: rhs(cap),
            degenerate: cap == 0.0,
        };
    }
    // d is linear between consecutive breakpoints of the maintenance curve;
    // find the last point where it is nonnegative.
    let mut knots: Vec<f64> = plant
        .maintenance
        .breakpoints()
        .iter()
        .map(|p| p.0.min(cap))
        .collect();
    knots.push(0.0);
    knots.push(cap);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut sup = 0.0;
    for w in knots.windows(2).rev() {
        let (a, b) = (w[0], w[1]);
        let (da, db) = (d(a), d(b));
        if db >= -NODE_TOL {
            sup = b;
            break;
        }
        if da >= -NODE_TOL {
            // crossing inside [a, b)
            sup = if da <= NODE_TOL {
                a
            } else {
                a + (b - a) * da / (da - db)
            };
            break;
        }
    }
    NodeVerdict::Bounded { sup }
}

/// Node check at tree node `node`, which must carry plant data and a spot.
pub fn check_tree_node(tree: &ScenarioTree, node: usize) -> Result<NodeVerdict, CspError> {
    let n = tree.node(node);
    match (&n.plant, n.spot_power) {
        (Some(plant), Some(spot)) => Ok(check_node_arbitrage(plant, spot, n.pi12)),
        _ => Err(CspError::MissingPlantData(n.id.clone())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDetail {
    pub node: String,
    pub verdict: NodeVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CspWitness {
    /// Regime ray per decision node: growing along it keeps domination.
    pub ray: Vec<(String, f64)>,
}

impl CspWitness {
    /// Decision node with the largest ray component.
    pub fn main_node(&self) -> Option<&str> {
        self.ray
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(n, _)| n.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CspStatus {
    Bounded { c_star: f64 },
    Unbounded { witness: CspWitness },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CspVerdict {
    pub start_index: usize,
    #[serde(flatten)]
    pub status: CspStatus,
    /// Closed-form check at every production node after the start index.
    pub nodes: Vec<NodeDetail>,
}

impl CspVerdict {
    pub fn is_bounded(&self) -> bool {
        matches!(self.status, CspStatus::Bounded { .. })
    }

    pub fn c_star(&self) -> Option<f64> {
        match self.status {
            CspStatus::Bounded { c_star } => Some(c_star),
            CspStatus::Unbounded { .. } => None,
        }
    }
}

/// Builds the regime-maximization LP for strategies started at
/// `start_index`. Returns the problem and the regime column of each decision
/// node.
pub fn build_csp_lp(
    tree: &ScenarioTree,
    start_index: usize,
) -> Result<(LpProblem, Vec<Option<usize>>), CspError> {
    if start_index > tree.horizon() {
        return Err(CspError::BadStartIndex(start_index));
    }
    let n = tree.len();
    let active = |i: usize| tree.node(i).time_index >= start_index;
    let mut next = 0;
    let mut trade = vec![None; n];
    let mut surplus = vec![None; n];
    let mut beta = vec![None; n];
    let mut output = vec![None; n];
    for i in (0..n).filter(|&i| active(i)) {
        if tree.node(i).children().is_empty() {
            surplus[i] = Some(next);
            next += 4;
        } else {
            trade[i] = Some(next);
            next += 4;
            if tree.is_production_node(i) {
                beta[i] = Some(next);
                next += 1;
                for &c in tree.node(i).children() {
                    output[c] = Some(next);
                    next += 2;
                }
            }
        }
    }
    let mut lp = LpProblem::new(Sense::Maximize, next);
    let mut zero_output = vec![[0.0; 2]; n];
    for i in 0..n {
        let Some(o) = output[i] else { continue };
        let node = tree.node(i);
        let b = beta[node.parent.expect("child")].expect("regime");
        lp.set_bounds(o, f64::NEG_INFINITY, f64::INFINITY);
        lp.set_bounds(o + 1, f64::NEG_INFINITY, f64::INFINITY);
        let (cash, fuel) = child_lines(tree, i).map_err(|_| {
            if node.plant.is_none() || node.spot_power.is_none() {
                CspError::MissingPlantData(node.id.clone())
            } else {
                CspError::NonConcaveProduction(node.id.clone())
            }
        })?;
        for line in cash {
            lp.add_sparse(&[(o, 1.0), (b, -line.slope)], Relation::Le, line.intercept);
        }
        for line in fuel {
            lp.add_sparse(
                &[(o + 1, 1.0), (b, -line.slope)],
                Relation::Le,
                line.intercept,
            );
        }
        let plant = node.plant.as_ref().expect("plant");
        zero_output[i] = ThermalStep::new(plant, node.spot_power.expect("spot")).output(0.0);
    }
    for i in 0..n {
        if let Some(b) = beta[i] {
            lp.objective[b] = 1.0;
        }
    }
    for &leaf in tree.leaves() {
        let path: Vec<usize> = tree.path(leaf).into_iter().filter(|&a| active(a)).collect();
        for k in 0..2 {
            let mut terms = Vec::new();
            let mut rhs = 0.0;
            for &a in &path {
                if let Some(t) = trade[a] {
                    for (gi, g) in tree.node(a).cone().generators().iter().enumerate() {
                        terms.push((t + gi, -g[k]));
                    }
                }
                if let (Some(b), 1) = (beta[a], k) {
                    terms.push((b, -1.0));
                }
                if let Some(o) = output[a] {
                    terms.push((o + k, 1.0));
                    rhs += zero_output[a][k];
                }
            }
            let s = surplus[leaf].expect("leaf");
            for (gi, g) in tree.node(leaf).cone().generators().iter().enumerate() {
                terms.push((s + gi, -g[k]));
            }
            lp.add_sparse(&terms, Relation::Eq, rhs);
        }
    }
    Ok((lp, beta))
}

/// Decides CSP for strategies started at `start_index`.
pub fn check_csp_tree(tree: &ScenarioTree, start_index: usize) -> Result<CspVerdict, CspError> {
    let (lp, beta) = build_csp_lp(tree, start_index)?;
    let nodes = (0..tree.len())
        .filter(|&i| {
            tree.node(i).time_index > start_index
                && tree
                    .node(i)
                    .parent
                    .is_some_and(|p| tree.is_production_node(p))
        })
        .map(|i| {
            Ok(NodeDetail {
                node: tree.node(i).id.clone(),
                verdict: check_tree_node(tree, i)?,
            })
        })
        .collect::<Result<Vec<_>, CspError>>()?;
    let status = match solve_lp(&lp)? {
        LpSolution::Optimal(o) => CspStatus::Bounded {
            c_star: o.value.max(0.0),
        },
        LpSolution::Unbounded { ray } => CspStatus::Unbounded {
            witness: CspWitness {
                ray: (0..tree.len())
                    .filter_map(|i| beta[i].map(|b| (tree.node(i).id.clone(), ray[b])))
                    .collect(),
            },
        },
        // the zero strategy is always feasible
        LpSolution::Infeasible { .. } => return Err(CspError::Infeasible),
    };
    Ok(CspVerdict {
        start_index,
        status,
        nodes,
    })
}
