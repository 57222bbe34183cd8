//! Super-replication by linear programming.
//!
//! The seller starts with `w` units of cash at the root, trades along the
//! tree (each trade lies in the negated solvency cone of its node, written as
//! nonnegative weights on the negated generators), injects fuel into the
//! plant at production nodes and must end, at every leaf, with a position
//! whose difference with the claim is solvent. The price is the least such
//! `w`.
//!
//! Concave production outputs enter through hypograph variables `r <= R(beta)`,
//! one inequality per linear piece. Since `-e1` and `-e2` are trade
//! directions, surplus output can always be thrown away, so the relaxation is
//! exact.

use serde::Serialize;
use thiserror::Error;

use crate::cones::Vec2;
use crate::lp::{solve_lp, LpError, LpProblem, LpSolution, Relation, Sense};
use crate::production::{ProductionFunction, ThermalStep};
use crate::tree::{ContingentClaim, ScenarioTree};

/// Tolerance of the independent strategy replay.
pub const REPLAY_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HedgeError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("production requested but the tree carries no plant data")]
    MissingPlant,
    #[error("production at node {0} is not concave (negative spot revenue or bad maintenance)")]
    NonConcaveProduction(String),
    #[error("super-replication LP infeasible (internal error)")]
    Infeasible,
    #[error("super-replication LP unbounded: the instance admits arbitrage")]
    Unbounded,
    #[error("replayed strategy misses the claim at leaf {leaf} by {shortfall}")]
    ReplayFailed { leaf: String, shortfall: f64 },
    #[error("brute force limited to 2 periods and 3 branches per node")]
    InstanceTooLarge,
    #[error("grid step must be positive")]
    BadGrid,
}

/// Column indices of the hedging LP.
#[derive(Debug, Clone)]
pub struct HedgeLayout {
    pub endowment: usize,
    /// First of four generator weights for the trade at each non-leaf node.
    pub trade: Vec<Option<usize>>,
    /// First of four generator weights of the terminal surplus at each leaf.
    pub surplus: Vec<Option<usize>>,
    /// Fuel injected at each production node.
    pub beta: Vec<Option<usize>>,
    /// First of two hypograph variables `(r1, r2)` at each child of a
    /// production node.
    pub output: Vec<Option<usize>>,
    pub num_vars: usize,
}

impl HedgeLayout {
    fn new(tree: &ScenarioTree, production: bool) -> Self {
        let n = tree.len();
        let mut next = 1;
        let mut take = |k: usize| {
            let i = next;
            next += k;
            i
        };
        let mut trade = vec![None; n];
        let mut surplus = vec![None; n];
        let mut beta = vec![None; n];
        let mut output = vec![None; n];
        for i in 0..n {
            if tree.node(i).children().is_empty() {
                surplus[i] = Some(take(4));
            } else {
                trade[i] = Some(take(4));
                if production && tree.is_production_node(i) {
                    beta[i] = Some(take(1));
                }
            }
        }
        for i in 0..n {
            if beta[i].is_some() {
                for &c in tree.node(i).children() {
                    output[c] = Some(take(2));
                }
            }
        }
        HedgeLayout {
            endowment: 0,
            trade,
            surplus,
            beta,
            output,
            num_vars: next,
        }
    }
}

fn check_production(tree: &ScenarioTree, production: bool) -> Result<(), HedgeError> {
    if production && !tree.has_plant() {
        return Err(HedgeError::MissingPlant);
    }
    Ok(())
}

/// Hypograph lines of the plant at production child `child`.
pub(crate) fn child_lines(
    tree: &ScenarioTree,
    child: usize,
) -> Result<(Vec<crate::production::Line>, Vec<crate::production::Line>), HedgeError> {
    let node = tree.node(child);
    let plant = node.plant.as_ref().ok_or(HedgeError::MissingPlant)?;
    let spot = node.spot_power.ok_or(HedgeError::MissingPlant)?;
    ThermalStep::new(plant, spot)
        .hypograph_lines()
        .ok_or_else(|| HedgeError::NonConcaveProduction(node.id.clone()))
}

/// Builds the super-replication LP: minimize the initial cash endowment.
pub fn build_hedge_lp(
    tree: &ScenarioTree,
    claim: &ContingentClaim,
    production: bool,
) -> Result<(LpProblem, HedgeLayout), HedgeError> {
    check_production(tree, production)?;
    let layout = HedgeLayout::new(tree, production);
    let mut lp = LpProblem::new(Sense::Minimize, layout.num_vars);
    lp.objective[layout.endowment] = 1.0;
    lp.set_bounds(layout.endowment, f64::NEG_INFINITY, f64::INFINITY);

    for i in 0..tree.len() {
        if let Some(o) = layout.output[i] {
            lp.set_bounds(o, f64::NEG_INFINITY, f64::INFINITY);
            lp.set_bounds(o + 1, f64::NEG_INFINITY, f64::INFINITY);
            let parent = tree.node(i).parent.expect("production child has a parent");
            let b = layout.beta[parent].expect("parent has a regime");
            let (cash, fuel) = child_lines(tree, i)?;
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
        }
    }

    for &leaf in tree.leaves() {
        let path = tree.path(leaf);
        let h = claim.payoff(leaf);
        for k in 0..2 {
            let mut terms: Vec<(usize, f64)> = Vec::new();
            if k == 0 {
                terms.push((layout.endowment, 1.0));
            }
            for &a in &path {
                if let Some(t) = layout.trade[a] {
                    let g = tree.node(a).cone().generators();
                    for (gi, gen) in g.iter().enumerate() {
                        terms.push((t + gi, -gen[k]));
                    }
                }
                if let Some(b) = layout.beta[a] {
                    if k == 1 {
                        terms.push((b, -1.0));
                    }
                }
                if let Some(o) = layout.output[a] {
                    terms.push((o + k, 1.0));
                }
            }
            let s = layout.surplus[leaf].expect("leaf surplus");
            let g = tree.node(leaf).cone().generators();
            for (gi, gen) in g.iter().enumerate() {
                terms.push((s + gi, -gen[k]));
            }
            lp.add_sparse(&terms, Relation::Eq, h[k]);
        }
    }
    Ok((lp, layout))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeAction {
    pub node: String,
    /// Generator weights `(e1, e2, pi12 e1 - e2, pi21 e2 - e1)`; the trade is
    /// minus their combination.
    pub weights: [f64; 4],
    /// Net trade vector, disposal included.
    pub trade: Vec2,
    /// Fuel injected into the plant, at production nodes.
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HedgeStrategy {
    pub endowment: f64,
    /// One entry per non-leaf node, in tree order.
    pub actions: Vec<NodeAction>,
    /// Terminal position minus claim, per leaf.
    pub surplus: Vec<(String, Vec2)>,
}

impl HedgeStrategy {
    pub fn action(&self, node: &str) -> Option<&NodeAction> {
        self.actions.iter().find(|a| a.node == node)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceResult {
    pub price: f64,
    pub strategy: HedgeStrategy,
    pub iterations: usize,
    /// Largest primal residual of the LP solution.
    pub residual: f64,
    /// LP duality gap at the returned solution.
    pub lp_gap: f64,
}

fn extract(tree: &ScenarioTree, layout: &HedgeLayout, x: &[f64]) -> HedgeStrategy {
    let mut actions = Vec::new();
    let mut surplus = Vec::new();
    for i in 0..tree.len() {
        let node = tree.node(i);
        if let Some(t) = layout.trade[i] {
            let weights = [x[t], x[t + 1], x[t + 2], x[t + 3]];
            let g = node.cone().generators();
            let trade = [
                -(0..4).map(|k| weights[k] * g[k][0]).sum::<f64>(),
                -(0..4).map(|k| weights[k] * g[k][1]).sum::<f64>(),
            ];
            actions.push(NodeAction {
                node: node.id.clone(),
                weights,
                trade,
                beta: layout.beta[i].map(|b| x[b].max(0.0)),
            });
        }
        if let Some(s) = layout.surplus[i] {
            let g = node.cone().generators();
            let v = [
                (0..4).map(|k| x[s + k] * g[k][0]).sum::<f64>(),
                (0..4).map(|k| x[s + k] * g[k][1]).sum::<f64>(),
            ];
            surplus.push((node.id.clone(), v));
        }
    }
    HedgeStrategy {
        endowment: x[layout.endowment],
        actions,
        surplus,
    }
}

/// Forward simulation of a strategy using the true production map. Returns
/// the terminal positions per leaf (before the claim is paid).
pub fn replay(tree: &ScenarioTree, strategy: &HedgeStrategy) -> Vec<(usize, Vec2)> {
    let mut position = vec![[0.0; 2]; tree.len()];
    let mut order: Vec<usize> = (0..tree.len()).collect();
    order.sort_by_key(|&i| tree.node(i).time_index);
    for i in order {
        let node = tree.node(i);
        let mut v = match node.parent {
            None => [strategy.endowment, 0.0],
            Some(p) => {
                let mut v = position[p];
                let parent_beta = strategy.action(&tree.node(p).id).and_then(|a| a.beta);
                if let (Some(beta), Some(plant), Some(spot)) =
                    (parent_beta, node.plant.as_ref(), node.spot_power)
                {
                    let r = ThermalStep::new(plant, spot).output(beta);
                    v[0] += r[0];
                    v[1] += r[1];
                }
                v
            }
        };
        if let Some(a) = strategy.action(&node.id) {
            v[0] += a.trade[0];
            v[1] += a.trade[1] - a.beta.unwrap_or(0.0);
        }
        position[i] = v;
    }
    tree.leaves().iter().map(|&l| (l, position[l])).collect()
}

/// Checks terminal domination of a replayed strategy; returns the worst
/// liquidation shortfall (nonpositive when the claim is covered).
pub fn replay_shortfall(
    tree: &ScenarioTree,
    claim: &ContingentClaim,
    strategy: &HedgeStrategy,
) -> (usize, f64) {
    replay(tree, strategy)
        .into_iter()
        .map(|(leaf, v)| {
            let h = claim.payoff(leaf);
            let lv = tree
                .node(leaf)
                .cone()
                .liquidation_value([v[0] - h[0], v[1] - h[1]]);
            (leaf, -lv)
        })
        .fold((tree.root(), f64::NEG_INFINITY), |acc, x| {
            if x.1 > acc.1 {
                x
            } else {
                acc
            }
        })
}

/// Least initial cash super-replicating `claim`, with a replayed strategy.
pub fn superreplication_price(
    tree: &ScenarioTree,
    claim: &ContingentClaim,
    production: bool,
) -> Result<PriceResult, HedgeError> {
    let (lp, layout) = build_hedge_lp(tree, claim, production)?;
    let opt = match solve_lp(&lp)? {
        LpSolution::Optimal(o) => o,
        LpSolution::Infeasible { .. } => return Err(HedgeError::Infeasible),
        LpSolution::Unbounded { .. } => return Err(HedgeError::Unbounded),
    };
    let strategy = extract(tree, &layout, &opt.x);
    let (leaf, shortfall) = replay_shortfall(tree, claim, &strategy);
    if shortfall > REPLAY_TOL * (1.0 + opt.value.abs()) {
        return Err(HedgeError::ReplayFailed {
            leaf: tree.node(leaf).id.clone(),
            shortfall,
        });
    }
    Ok(PriceResult {
        price: opt.value,
        residual: lp.max_violation(&opt.x),
        lp_gap: (opt.value - opt.dual_value).abs(),
        iterations: opt.iterations,
        strategy,
    })
}

/// Exhaustive search over gridded fuel holdings and regimes.
///
/// Backward induction over value functions `V_n(g)`: the least cash needed
/// at node `n`, before trading, when holding `g` units of fuel. After-trade
/// holdings and regimes are restricted to grids of width `grid_step`, but
/// each value function is evaluated exactly off the grid, so every candidate
/// corresponds to a feasible strategy and the result bounds the LP price from
/// above.
pub fn brute_force_price(
    tree: &ScenarioTree,
    claim: &ContingentClaim,
    production: bool,
    grid_step: f64,
) -> Result<f64, HedgeError> {
    if !(grid_step > 0.0) {
        return Err(HedgeError::BadGrid);
    }
    if tree.horizon() > 2 || tree.nodes().iter().any(|n| n.children().len() > 3) {
        return Err(HedgeError::InstanceTooLarge);
    }
    check_production(tree, production)?;

    let mut reach = tree
        .leaves()
        .iter()
        .map(|&l| claim.payoff(l)[1].abs())
        .fold(0.0, f64::max);
    let mut beta_max = 0.0f64;
    if production {
        for t in 1..=tree.horizon() {
            if !tree.production_enabled(t) {
                continue;
            }
            let mut step = 0.0f64;
            for i in tree.nodes_at(t) {
                let n = tree.node(i);
                let plant = n.plant.as_ref().expect("production step");
                let k = crate::production::production_bound(plant, n.spot_power.unwrap_or(0.0));
                step = step.max(plant.capacity + k[1]);
                beta_max = beta_max.max(plant.capacity);
            }
            reach += step;
        }
    }
    let half = (reach / grid_step).ceil() as i64 + 1;
    let holdings: Vec<f64> = (-half..=half).map(|k| k as f64 * grid_step).collect();
    let nb = (beta_max / grid_step).ceil() as usize;
    let regimes: Vec<f64> = (0..=nb)
        .map(|k| (k as f64 * grid_step).min(beta_max))
        .collect();

    let value = ValueFn::build(tree, claim, production, tree.root(), &holdings, &regimes);
    Ok(value.eval(0.0))
}

/// Value function of a node, exact at any holding.
enum ValueFn {
    Leaf {
        claim: Vec2,
        ask: f64,
        bid: f64,
    },
    Inner {
        holdings: Vec<f64>,
        /// `min_{j >= i} (ask * h_j + phi_j)`
        suffix_buy: Vec<f64>,
        /// `min_{j <= i} (bid * h_j + phi_j)`
        prefix_sell: Vec<f64>,
        ask: f64,
        bid: f64,
    },
}

impl ValueFn {
    fn build(
        tree: &ScenarioTree,
        claim: &ContingentClaim,
        production: bool,
        node: usize,
        holdings: &[f64],
        regimes: &[f64],
    ) -> Self {
        let n = tree.node(node);
        let (ask, bid) = (n.pi12, 1.0 / n.pi21);
        if n.children().is_empty() {
            return ValueFn::Leaf {
                claim: claim.payoff(node),
                ask,
                bid,
            };
        }
        let children: Vec<(ValueFn, Option<ThermalStep<'_>>)> = n
            .children()
            .iter()
            .map(|&c| {
                let cn = tree.node(c);
                let step = if production && tree.is_production_node(node) {
                    Some(ThermalStep::new(
                        cn.plant.as_ref().expect("plant"),
                        cn.spot_power.expect("spot"),
                    ))
                } else {
                    None
                };
                (
                    ValueFn::build(tree, claim, production, c, holdings, regimes),
                    step,
                )
            })
            .collect();
        let zero = [0.0];
        let betas: &[f64] = if children.iter().any(|c| c.1.is_some()) {
            regimes
        } else {
            &zero
        };
        let phi: Vec<f64> = holdings
            .iter()
            .map(|&h| {
                betas
                    .iter()
                    .map(|&b| {
                        children
                            .iter()
                            .map(|(v, step)| {
                                let r = step.map_or([0.0, 0.0], |s| s.output(b));
                                v.eval(h - b + r[1]) - r[0]
                            })
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let m = holdings.len();
        let mut suffix_buy = vec![0.0; m];
        let mut prefix_sell = vec![0.0; m];
        let mut acc = f64::INFINITY;
        for i in (0..m).rev() {
            acc = acc.min(ask * holdings[i] + phi[i]);
            suffix_buy[i] = acc;
        }
        acc = f64::INFINITY;
        for i in 0..m {
            acc = acc.min(bid * holdings[i] + phi[i]);
            prefix_sell[i] = acc;
        }
        ValueFn::Inner {
            holdings: holdings.to_vec(),
            suffix_buy,
            prefix_sell,
            ask,
            bid,
        }
    }

    fn eval(&self, g: f64) -> f64 {
        match self {
            ValueFn::Leaf { claim, ask, bid } => {
                let d = g - claim[1];
                if d >= 0.0 {
                    claim[0] - d * bid
                } else {
                    claim[0] - d * ask
                }
            }
            ValueFn::Inner {
                holdings,
                suffix_buy,
                prefix_sell,
                ask,
                bid,
            } => {
                // buy up to a grid holding at or above g, or sell down to one at or below
                let i = holdings.partition_point(|&h| h < g);
                let buy = suffix_buy.get(i).map_or(f64::INFINITY, |s| s - ask * g);
                let j = holdings.partition_point(|&h| h <= g);
                let sell = if j > 0 {
                    prefix_sell[j - 1] - bid * g
                } else {
                    f64::INFINITY
                };
                buy.min(sell)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree;

    const DESK1: &str = r#"{
        "times": [0, 1],
        "nodes": [
            {"id": "0", "time_index": 0, "parent": null, "pi12": 2.0, "pi21": 1.0},
            {"id": "lo", "time_index": 1, "parent": "0", "cond_prob": 0.5, "pi12": 1.8, "pi21": 1.0},
            {"id": "hi", "time_index": 1, "parent": "0", "cond_prob": 0.5, "pi12": 2.4, "pi21": 1.0}
        ],
        "claim": {"payoffs": {"lo": [0, 1], "hi": [0, 1]}, "kappa": [2.4, 0]}
    }"#;

    fn desk1() -> ScenarioTree {
        parse_tree(DESK1.as_bytes()).unwrap()
    }

    #[test]
    fn desk1_price_is_root_purchase() {
        let t = desk1();
        let r = superreplication_price(&t, t.claim().unwrap(), false).unwrap();
        assert!((r.price - 2.0).abs() < 1e-9);
        let root = r.strategy.action("0").unwrap();
        assert!((root.trade[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_claim_costs_nothing() {
        let t = desk1();
        let r = superreplication_price(&t, &ContingentClaim::zero(&t), false).unwrap();
        assert!(r.price.abs() < 1e-12);
    }

    #[test]
    fn received_cash_lowers_price() {
        let t = desk1();
        let claim = ContingentClaim::from_leaves(&t, |_| [-1.0, 0.0]);
        let r = superreplication_price(&t, &claim, false).unwrap();
        assert!((r.price + 1.0).abs() < 1e-9);
    }

    #[test]
    fn production_without_plant_rejected() {
        let t = desk1();
        assert!(matches!(
            build_hedge_lp(&t, t.claim().unwrap(), true),
            Err(HedgeError::MissingPlant)
        ));
    }

    #[test]
    fn brute_force_on_desk1() {
        let t = desk1();
        let bf = brute_force_price(&t, t.claim().unwrap(), false, 0.01).unwrap();
        assert!((bf - 2.0).abs() <= 0.01);
        let zero = brute_force_price(&t, &ContingentClaim::zero(&t), false, 0.01).unwrap();
        assert!(zero.abs() < 1e-12);
        assert!(matches!(
            brute_force_price(&t, &ContingentClaim::zero(&t), false, 0.0),
            Err(HedgeError::BadGrid)
        ));
    }

    #[test]
    fn layout_sizes_on_desk1() {
        let t = desk1();
        let (lp, layout) = build_hedge_lp(&t, t.claim().unwrap(), false).unwrap();
        // endowment + one root trade + two leaf surpluses
        assert_eq!(layout.num_vars, 1 + 4 + 2 * 4);
        assert_eq!(lp.constraints.len(), 4);
    }
}
