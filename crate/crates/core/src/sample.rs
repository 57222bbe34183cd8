//! Random valid instances for stress tests and duality checks.

use rand::Rng;

use crate::production::{PiecewiseConcave, PlantStepData};
use crate::tree::{ContingentClaim, NodeDocument, NodeIdDoc, ScenarioTree, TreeDocument};

/// The reference plant: `q = 0.5`, capacity 10, fixed cost 5 and maintenance
/// `[(0, -100), (5, -10), (10, -2)]`.
pub fn plant_e() -> PlantStepData {
    PlantStepData {
        heat_rate: 0.5,
        capacity: 10.0,
        fixed_cost: 5.0,
        maintenance: PiecewiseConcave::new(vec![(0.0, -100.0), (5.0, -10.0), (10.0, -2.0)])
            .expect("valid breakpoints"),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_periods: usize,
    pub max_branches: usize,
    /// Chance that a given step produces.
    pub production: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_periods: 3,
            max_branches: 3,
            production: 0.6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub tree: ScenarioTree,
    pub claim: ContingentClaim,
}

/// Plant with concave increasing maintenance, final slope at least one and
/// nonpositive values.
pub fn random_plant<R: Rng>(rng: &mut R) -> PlantStepData {
    let capacity = rng.gen_range(5.0..15.0);
    let pieces = rng.gen_range(2..=3);
    let mut cuts: Vec<f64> = (1..pieces)
        .map(|_| rng.gen_range(0.1..0.9) * capacity)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut knots = vec![0.0];
    knots.extend(cuts);
    knots.push(capacity);
    let mut slopes = vec![rng.gen_range(1.0..2.0)];
    for _ in 1..knots.len() - 1 {
        let last = *slopes.last().expect("nonempty");
        slopes.push(last + rng.gen_range(0.0..10.0));
    }
    slopes.reverse();
    let rise: f64 = slopes
        .iter()
        .zip(knots.windows(2))
        .map(|(s, w)| s * (w[1] - w[0]))
        .sum();
    let c0 = -rise - rng.gen_range(0.0..30.0);
    let mut points = vec![(0.0, c0)];
    let mut v = c0;
    for (s, w) in slopes.iter().zip(knots.windows(2)) {
        v += s * (w[1] - w[0]);
        points.push((w[1], v.min(0.0)));
    }
    PlantStepData {
        heat_rate: rng.gen_range(0.3..0.7),
        capacity,
        fixed_cost: rng.gen_range(0.0..10.0),
        maintenance: PiecewiseConcave::new(points).expect("increasing knots"),
    }
}

/// Random valid instance with a random leaf claim. Mid fuel prices follow a
/// martingale under the conditional probabilities and every bid-ask spread
/// brackets its mid, so a consistent price system exists. Spot prices are
/// nonnegative; each step produces with probability `shape.production`,
/// with one plant shared by all nodes of the step.
pub fn random_instance<R: Rng>(rng: &mut R, shape: Shape) -> Instance {
    let periods = rng.gen_range(1..=shape.max_periods);
    let produce: Vec<bool> = (0..=periods)
        .map(|t| t > 0 && rng.gen_bool(shape.production))
        .collect();
    let plants: Vec<Option<PlantStepData>> = (0..=periods)
        .map(|t| produce[t].then(|| random_plant(rng)))
        .collect();

    let mut nodes = Vec::new();
    let mut push =
        |rng: &mut R, id: usize, t: usize, parent: Option<usize>, prob: f64, mid: f64| {
            let bid = mid * (1.0 - rng.gen_range(0.01..0.2));
            let ask = mid * (1.0 + rng.gen_range(0.01..0.2));
            nodes.push(NodeDocument {
                id: NodeIdDoc::Text(format!("n{id}")),
                time_index: t,
                parent: parent.map(|p| NodeIdDoc::Text(format!("n{p}"))),
                cond_prob: parent.map(|_| prob),
                pi12: ask,
                pi21: 1.0 / bid,
                spot_power: (t > 0).then(|| rng.gen_range(0.0..60.0)),
                plant: plants[t].clone(),
            });
        };
    let root_mid = rng.gen_range(1.5..3.0);
    push(rng, 0, 0, None, 1.0, root_mid);
    let mut level = vec![(0usize, root_mid)];
    let mut next = 1;
    for t in 1..=periods {
        let mut new_level = Vec::new();
        for &(parent, mid) in &level {
            let k = rng.gen_range(1..=shape.max_branches);
            let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = weights.iter().sum();
            let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
            let shocks: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let mean: f64 = shocks.iter().zip(&probs).map(|(s, p)| s * p).sum();
            for (s, p) in shocks.iter().zip(&probs) {
                let child_mid = mid * (1.0 + s - mean);
                push(rng, next, t, Some(parent), *p, child_mid);
                new_level.push((next, child_mid));
                next += 1;
            }
        }
        level = new_level;
    }
    let doc = TreeDocument {
        times: (0..=periods).map(|t| t as f64).collect(),
        nodes,
        claim: None,
    };
    let tree = ScenarioTree::from_document(&doc).expect("generated instance is valid");
    let payoffs: Vec<[f64; 2]> = (0..tree.len())
        .map(|_| [rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..3.0)])
        .collect();
    let claim = ContingentClaim::from_leaves(&tree, |leaf| payoffs[leaf]);
    Instance { tree, claim }
}

/// Copy of `tree` with conditional probabilities drawn afresh (strictly
/// positive, normalized per parent).
pub fn reweight<R: Rng>(tree: &ScenarioTree, rng: &mut R) -> ScenarioTree {
    let weights: Vec<f64> = (0..tree.len()).map(|_| rng.gen_range(0.05..1.0)).collect();
    let totals: Vec<f64> = (0..tree.len())
        .map(|i| tree.node(i).children().iter().map(|&c| weights[c]).sum())
        .collect();
    tree.with_probabilities(|i, _| {
        let parent = tree.node(i).parent.expect("non-root");
        weights[i] / totals[parent]
    })
}
