//! Finite scenario trees carrying bid-ask quotes, spot prices, plant data
//! and an optional contingent claim.
//!
//! A tree is read from a JSON document, checked against its invariants and
//! then kept immutable. Node ancestry plays the role of the filtration: a
//! quantity chosen at a node may depend on that node only.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{make_solvency_cone, SolvencyCone, Vec2};
use crate::production::PlantStepData;

/// Tolerance on the sum of conditional probabilities below a node.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invariant violated ({}): {}", .0.invariant, .0)]
    Invariant(Violation),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
}

/// Node ids may be written as JSON strings or integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeIdDoc {
    Text(String),
    Number(u64),
}

impl NodeIdDoc {
    pub fn as_string(&self) -> String {
        match self {
            NodeIdDoc::Text(s) => s.clone(),
            NodeIdDoc::Number(n) => n.to_string(),
        }
    }
}

impl From<&str> for NodeIdDoc {
    fn from(s: &str) -> Self {
        NodeIdDoc::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: NodeIdDoc,
    pub time_index: usize,
    pub parent: Option<NodeIdDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_prob: Option<f64>,
    pub pi12: f64,
    pub pi21: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spot_power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<PlantStepData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimDocument {
    pub payoffs: BTreeMap<String, Vec2>,
    pub kappa: Vec2,
}

/// The JSON layout of a tree file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub times: Vec<f64>,
    pub nodes: Vec<NodeDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<ClaimDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: Option<String>,
    pub invariant: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.node {
            Some(id) => write!(f, "node {id}: {}", self.detail),
            None => write!(f, "{}", self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, node: Option<&str>, invariant: &'static str, detail: String) {
        self.violations.push(Violation {
            node: node.map(str::to_string),
            invariant,
            detail,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub time_index: usize,
    pub parent: Option<usize>,
    pub cond_prob: f64,
    pub pi12: f64,
    pub pi21: f64,
    pub spot_power: Option<f64>,
    pub plant: Option<PlantStepData>,
    children: Vec<usize>,
}

impl Node {
    pub fn children(&self) -> &[usize] {
        &self.children
    }

    pub fn cone(&self) -> SolvencyCone {
        make_solvency_cone(self.pi12, self.pi21).expect("validated quotes")
    }
}

/// Leaf-indexed payoff `(cash, fuel)` with a credit line `kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingentClaim {
    /// One entry per tree node; only leaf entries are meaningful.
    payoffs: Vec<Vec2>,
    pub kappa: Vec2,
}

impl ContingentClaim {
    /// Builds a claim from a payoff function on leaves. The credit line is
    /// the smallest `(k, 0)` making every payoff solvent.
    pub fn from_leaves(tree: &ScenarioTree, payoff: impl Fn(usize) -> Vec2) -> Self {
        let mut payoffs = vec![[0.0; 2]; tree.len()];
        let mut k = 0.0f64;
        for &leaf in tree.leaves() {
            let h = payoff(leaf);
            payoffs[leaf] = h;
            k = k.max(-tree.node(leaf).cone().liquidation_value(h));
        }
        ContingentClaim {
            payoffs,
            kappa: [k, 0.0],
        }
    }

    pub fn zero(tree: &ScenarioTree) -> Self {
        Self::from_leaves(tree, |_| [0.0, 0.0])
    }

    pub fn payoff(&self, node: usize) -> Vec2 {
        self.payoffs[node]
    }

    /// Same claim with every payoff multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ContingentClaim {
            payoffs: self
                .payoffs
                .iter()
                .map(|p| [p[0] * factor, p[1] * factor])
                .collect(),
            kappa: [self.kappa[0] * factor.abs(), self.kappa[1] * factor.abs()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTree {
    times: Vec<f64>,
    nodes: Vec<Node>,
    root: usize,
    index: HashMap<String, usize>,
    leaves: Vec<usize>,
    claim: Option<ContingentClaim>,
}

/// Parses and validates a tree document. Errors name the first violated
/// invariant.
pub fn parse_tree(document: &[u8]) -> Result<ScenarioTree, TreeError> {
    let doc = parse_document(document)?;
    ScenarioTree::from_document(&doc)
}

/// Parses the JSON layout without checking tree invariants.
pub fn parse_document(document: &[u8]) -> Result<TreeDocument, TreeError> {
    serde_json::from_slice(document).map_err(|e| match e.classify() {
        serde_json::error::Category::Data => TreeError::Schema(e.to_string()),
        _ => TreeError::Syntax(e.to_string()),
    })
}

/// Checks every invariant of a document and lists all violations.
pub fn validate_document(doc: &TreeDocument) -> ValidationReport {
    let mut report = ValidationReport::default();
    if doc.times.is_empty() {
        report.push(None, "time grid", "times must not be empty".into());
    }
    if doc.times.iter().any(|t| !t.is_finite()) {
        report.push(None, "time grid", "times must be finite".into());
    }
    if doc.times.windows(2).any(|w| w[1] <= w[0]) {
        report.push(
            None,
            "time grid",
            "times must be strictly increasing".into(),
        );
    }
    let horizon = doc.times.len().saturating_sub(1);

    let mut ids: HashMap<String, usize> = HashMap::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        let id = n.id.as_string();
        if ids.insert(id.clone(), i).is_some() {
            report.push(Some(&id), "unique ids", format!("duplicate id {id}"));
        }
    }

    let roots: Vec<&NodeDocument> = doc.nodes.iter().filter(|n| n.parent.is_none()).collect();
    if roots.len() != 1 {
        report.push(
            None,
            "single root",
            format!("expected exactly one root, found {}", roots.len()),
        );
    }

    let mut children: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        let id = n.id.as_string();
        let id = id.as_str();
        if n.time_index > horizon {
            report.push(
                Some(id),
                "time index",
                format!("time index {} beyond horizon {horizon}", n.time_index),
            );
        }
        match &n.parent {
            None => {
                if n.time_index != 0 {
                    report.push(
                        Some(id),
                        "single root",
                        "root must have time index 0".into(),
                    );
                }
                if let Some(p) = n.cond_prob {
                    if (p - 1.0).abs() > PROB_SUM_TOL {
                        report.push(
                            Some(id),
                            "probabilities",
                            format!("root probability {p} must be 1"),
                        );
                    }
                }
            }
            Some(parent) => {
                let pid = parent.as_string();
                match ids.get(&pid) {
                    None => report.push(Some(id), "parent", format!("unknown parent {pid}")),
                    Some(&pi) => {
                        if doc.nodes[pi].time_index + 1 != n.time_index {
                            report.push(
                                Some(id),
                                "parent",
                                format!("parent {pid} is not at the previous time index"),
                            );
                        }
                        children.entry(pid).or_default().push(i);
                    }
                }
                match n.cond_prob {
                    Some(p) if p > 0.0 && p <= 1.0 => {}
                    Some(p) => report.push(
                        Some(id),
                        "probabilities",
                        format!("conditional probability {p} must lie in (0, 1]"),
                    ),
                    None => report.push(
                        Some(id),
                        "probabilities",
                        "missing conditional probability".into(),
                    ),
                }
            }
        }
        if !(n.pi12.is_finite() && n.pi21.is_finite() && n.pi12 > 0.0 && n.pi21 > 0.0) {
            report.push(
                Some(id),
                "positive quotes",
                format!("quotes ({}, {}) must be positive", n.pi12, n.pi21),
            );
        } else if n.pi12 * n.pi21 <= 1.0 {
            report.push(
                Some(id),
                "efficient frictions",
                format!(
                    "efficient frictions violated: pi12 * pi21 = {} <= 1",
                    n.pi12 * n.pi21
                ),
            );
        }
        if let Some(s) = n.spot_power {
            if !s.is_finite() {
                report.push(Some(id), "bounded spot", "spot price must be finite".into());
            }
        }
        if let Some(plant) = &n.plant {
            if n.time_index == 0 {
                report.push(
                    Some(id),
                    "plant",
                    "plant data at the root has no production step".into(),
                );
            }
            if n.spot_power.is_none() {
                report.push(Some(id), "plant", "plant data requires a spot price".into());
            }
            for v in plant.violations() {
                let invariant = if v.contains("concave") {
                    "maintenance concavity"
                } else {
                    "plant data"
                };
                report.push(Some(id), invariant, v);
            }
        }
    }

    for (i, n) in doc.nodes.iter().enumerate() {
        let id = n.id.as_string();
        let kids = children.get(&id).map(Vec::as_slice).unwrap_or(&[]);
        if n.time_index < horizon && kids.is_empty() {
            report.push(
                Some(&id),
                "leaves at horizon",
                "node before the horizon has no children".into(),
            );
        }
        if !kids.is_empty() {
            let total: f64 = kids.iter().filter_map(|&k| doc.nodes[k].cond_prob).sum();
            if (total - 1.0).abs() > PROB_SUM_TOL {
                report.push(
                    Some(&id),
                    "probabilities",
                    format!("children probabilities sum to {total}, not 1"),
                );
            }
        }
        let _ = i;
    }

    for step in 1..=horizon {
        let at: Vec<&NodeDocument> = doc.nodes.iter().filter(|n| n.time_index == step).collect();
        let with_plant = at.iter().filter(|n| n.plant.is_some()).count();
        if with_plant != 0 && with_plant != at.len() {
            report.push(
                None,
                "production step",
                format!(
                    "plant data present on {with_plant} of {} nodes at time index {step}",
                    at.len()
                ),
            );
        }
    }

    if let Some(claim) = &doc.claim {
        if claim.kappa.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            report.push(None, "claim", "credit line must be nonnegative".into());
        }
        for (id, payoff) in &claim.payoffs {
            match ids.get(id) {
                Some(&i) if doc.nodes[i].time_index == horizon => {
                    let n = &doc.nodes[i];
                    if payoff.iter().any(|v| !v.is_finite()) {
                        report.push(Some(id), "claim", "payoff must be finite".into());
                    } else if let Ok(cone) = make_solvency_cone(n.pi12, n.pi21) {
                        let shifted = [payoff[0] + claim.kappa[0], payoff[1] + claim.kappa[1]];
                        if cone.liquidation_value(shifted) < -1e-9 {
                            report.push(
                                Some(id),
                                "claim lower bound",
                                "payoff + kappa is not solvent".into(),
                            );
                        }
                    }
                }
                _ => report.push(
                    Some(id),
                    "claim",
                    "payoff keyed by a non-leaf or unknown node".into(),
                ),
            }
        }
        for n in doc.nodes.iter().filter(|n| n.time_index == horizon) {
            let id = n.id.as_string();
            if !claim.payoffs.contains_key(&id) {
                report.push(Some(&id), "claim", "missing payoff for leaf".into());
            }
        }
    }
    report
}

impl ScenarioTree {
    pub fn from_document(doc: &TreeDocument) -> Result<Self, TreeError> {
        let report = validate_document(doc);
        if let Some(v) = report.violations.into_iter().next() {
            return Err(TreeError::Invariant(v));
        }
        let index: HashMap<String, usize> = doc
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.as_string(), i))
            .collect();
        let mut nodes: Vec<Node> = doc
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id.as_string(),
                time_index: n.time_index,
                parent: n.parent.as_ref().map(|p| index[&p.as_string()]),
                cond_prob: if n.parent.is_none() {
                    1.0
                } else {
                    n.cond_prob.unwrap_or(1.0)
                },
                pi12: n.pi12,
                pi21: n.pi21,
                spot_power: n.spot_power,
                plant: n.plant.clone(),
                children: Vec::new(),
            })
            .collect();
        for i in 0..nodes.len() {
            if let Some(p) = nodes[i].parent {
                nodes[p].children.push(i);
            }
        }
        let root = nodes
            .iter()
            .position(|n| n.parent.is_none())
            .expect("validated root");
        let horizon = doc.times.len() - 1;
        let leaves = (0..nodes.len())
            .filter(|&i| nodes[i].time_index == horizon)
            .collect();
        let mut tree = ScenarioTree {
            times: doc.times.clone(),
            nodes,
            root,
            index,
            leaves,
            claim: None,
        };
        if let Some(c) = &doc.claim {
            let mut payoffs = vec![[0.0; 2]; tree.len()];
            for (id, p) in &c.payoffs {
                payoffs[tree.index[id]] = *p;
            }
            tree.claim = Some(ContingentClaim {
                payoffs,
                kappa: c.kappa,
            });
        }
        Ok(tree)
    }

    pub fn to_document(&self) -> TreeDocument {
        TreeDocument {
            times: self.times.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDocument {
                    id: NodeIdDoc::Text(n.id.clone()),
                    time_index: n.time_index,
                    parent: n.parent.map(|p| NodeIdDoc::Text(self.nodes[p].id.clone())),
                    cond_prob: Some(n.cond_prob),
                    pi12: n.pi12,
                    pi21: n.pi21,
                    spot_power: n.spot_power,
                    plant: n.plant.clone(),
                })
                .collect(),
            claim: self.claim.as_ref().map(|c| ClaimDocument {
                payoffs: self
                    .leaves
                    .iter()
                    .map(|&l| (self.nodes[l].id.clone(), c.payoff(l)))
                    .collect(),
                kappa: c.kappa,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("tree serializes")
    }

    /// Re-runs every invariant check; empty for trees built by this module.
    pub fn validate(&self) -> ValidationReport {
        validate_document(&self.to_document())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of periods `N`.
    pub fn horizon(&self) -> usize {
        self.times.len() - 1
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaves(&self) -> &[usize] {
        &self.leaves
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn claim(&self) -> Option<&ContingentClaim> {
        self.claim.as_ref()
    }

    pub fn set_claim(&mut self, claim: Option<ContingentClaim>) {
        self.claim = claim;
    }

    pub fn nodes_at(&self, time_index: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.nodes[i].time_index == time_index)
    }

    /// Node indices from the root down to `node`, inclusive.
    pub fn path(&self, node: usize) -> Vec<usize> {
        let mut out = vec![node];
        let mut cur = node;
        while let Some(p) = self.nodes[cur].parent {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Unconditional probability of reaching `node`.
    pub fn probability(&self, node: usize) -> f64 {
        self.path(node)
            .iter()
            .map(|&i| self.nodes[i].cond_prob)
            .product()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.len()];
        // parents precede children in time order
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&i| self.nodes[i].time_index);
        for i in order {
            p[i] = match self.nodes[i].parent {
                None => 1.0,
                Some(par) => p[par] * self.nodes[i].cond_prob,
            };
        }
        p
    }

    /// Whether the step ending at `time_index` produces (plant data on every
    /// node at that index).
    pub fn production_enabled(&self, time_index: usize) -> bool {
        time_index >= 1
            && time_index <= self.horizon()
            && self
                .nodes_at(time_index)
                .all(|i| self.nodes[i].plant.is_some())
    }

    /// Whether a regime is chosen at `node`, i.e. its children carry plant
    /// data.
    pub fn is_production_node(&self, node: usize) -> bool {
        let n = &self.nodes[node];
        !n.children.is_empty() && self.production_enabled(n.time_index + 1)
    }

    pub fn has_plant(&self) -> bool {
        (1..=self.horizon()).any(|t| self.production_enabled(t))
    }

    /// Copy with conditional probabilities replaced by `f(node, old)`;
    /// the caller keeps them normalized.
    pub fn with_probabilities(&self, f: impl Fn(usize, f64) -> f64) -> Self {
        let mut t = self.clone();
        for i in 0..t.nodes.len() {
            if t.nodes[i].parent.is_some() {
                t.nodes[i].cond_prob = f(i, t.nodes[i].cond_prob);
            }
        }
        t
    }
}

pub fn node_probability(tree: &ScenarioTree, id: &str) -> Result<f64, TreeError> {
    tree.find(id)
        .map(|i| tree.probability(i))
        .ok_or_else(|| TreeError::UnknownNode(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "times": [0, 1],
        "nodes": [
            {"id": "r", "time_index": 0, "parent": null, "pi12": 2, "pi21": 1},
            {"id": "a", "time_index": 1, "parent": "r", "cond_prob": 1, "pi12": 2, "pi21": 1}
        ]
    }"#;

    fn two_level() -> String {
        r#"{
            "times": [0, 1, 2],
            "nodes": [
                {"id": "r", "time_index": 0, "parent": null, "pi12": 2, "pi21": 1},
                {"id": "u", "time_index": 1, "parent": "r", "cond_prob": 0.5, "pi12": 2, "pi21": 1, "spot_power": 8},
                {"id": "d", "time_index": 1, "parent": "r", "cond_prob": 0.5, "pi12": 2, "pi21": 1, "spot_power": 8},
                {"id": "uu", "time_index": 2, "parent": "u", "cond_prob": 0.5, "pi12": 2, "pi21": 1},
                {"id": "ud", "time_index": 2, "parent": "u", "cond_prob": 0.5, "pi12": 2, "pi21": 1},
                {"id": "du", "time_index": 2, "parent": "d", "cond_prob": 0.25, "pi12": 2, "pi21": 1},
                {"id": "dd", "time_index": 2, "parent": "d", "cond_prob": 0.75, "pi12": 2, "pi21": 1}
            ]
        }"#
        .to_string()
    }

    #[test]
    fn minimal_document_parses() {
        let t = parse_tree(MINIMAL.as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.leaves().len(), 1);
        assert!(t.validate().is_valid());
    }

    #[test]
    fn friction_boundary_is_invariant_error() {
        let doc = MINIMAL.replacen("\"pi12\": 2", "\"pi12\": 1", 1);
        match parse_tree(doc.as_bytes()) {
            Err(TreeError::Invariant(v)) => {
                assert_eq!(v.invariant, "efficient frictions");
                assert_eq!(v.node.as_deref(), Some("r"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let doc = two_level().replace("\"cond_prob\": 0.75", "\"cond_prob\": 0.65");
        match parse_tree(doc.as_bytes()) {
            Err(TreeError::Invariant(v)) => {
                assert_eq!(v.invariant, "probabilities");
                assert_eq!(v.node.as_deref(), Some("d"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn syntax_and_schema_errors() {
        assert!(matches!(
            parse_tree(b"{\"times\": [0,"),
            Err(TreeError::Syntax(_))
        ));
        assert!(matches!(
            parse_tree(b"{\"times\": [0, 1]}"),
            Err(TreeError::Schema(_))
        ));
        let bad_type = MINIMAL.replace("\"pi21\": 1}", "\"pi21\": \"one\"}");
        assert!(matches!(
            parse_tree(bad_type.as_bytes()),
            Err(TreeError::Schema(_))
        ));
        assert!(matches!(
            parse_tree(b"{\"times\": [NaN]}"),
            Err(TreeError::Syntax(_))
        ));
    }

    #[test]
    fn node_probabilities() {
        let t = parse_tree(two_level().as_bytes()).unwrap();
        assert_eq!(node_probability(&t, "r").unwrap(), 1.0);
        assert_eq!(node_probability(&t, "uu").unwrap(), 0.25);
        assert!(matches!(
            node_probability(&t, "zz"),
            Err(TreeError::UnknownNode(_))
        ));
        let p = t.probabilities();
        for level in 0..=2 {
            let s: f64 = t.nodes_at(level).map(|i| p[i]).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn negative_capacity_single_violation() {
        let doc = MINIMAL.replace(
            "\"cond_prob\": 1,",
            r#""cond_prob": 1, "spot_power": 8, "plant": {"heat_rate": 0.5, "capacity": -1, "fixed_cost": 5, "maintenance": [[0, -100], [5, -10], [10, -2]]},"#,
        );
        let doc: TreeDocument = serde_json::from_str(&doc).unwrap();
        let report = validate_document(&doc);
        assert_eq!(report.violations.len(), 1, "{report:?}");
    }

    #[test]
    fn increasing_slopes_single_violation() {
        let doc = MINIMAL.replace(
            "\"cond_prob\": 1,",
            r#""cond_prob": 1, "spot_power": 8, "plant": {"heat_rate": 0.5, "capacity": 10, "fixed_cost": 5, "maintenance": [[0, -100], [5, -90], [10, -2]]},"#,
        );
        let doc: TreeDocument = serde_json::from_str(&doc).unwrap();
        let report = validate_document(&doc);
        assert_eq!(report.violations.len(), 1, "{report:?}");
        assert_eq!(report.violations[0].invariant, "maintenance concavity");
    }

    #[test]
    fn claim_checks() {
        let with_claim = MINIMAL.trim_end().trim_end_matches('}').to_string()
            + r#", "claim": {"payoffs": {"a": [0, 1]}, "kappa": [2, 0]}}"#;
        let t = parse_tree(with_claim.as_bytes()).unwrap();
        assert_eq!(t.claim().unwrap().payoff(t.find("a").unwrap()), [0.0, 1.0]);

        let short_kappa = with_claim.replace("\"kappa\": [2, 0]", "\"kappa\": [0, 0]");
        // payoff (0, 1) is already solvent
        assert!(parse_tree(short_kappa.as_bytes()).is_ok());
        let liability = short_kappa.replace("[0, 1]", "[0, -1]");
        assert!(matches!(
            parse_tree(liability.as_bytes()),
            Err(TreeError::Invariant(_))
        ));
    }

    #[test]
    fn structural_errors_reported() {
        let orphan = MINIMAL.replace("\"parent\": \"r\"", "\"parent\": \"q\"");
        let doc: TreeDocument = serde_json::from_str(&orphan).unwrap();
        let report = validate_document(&doc);
        assert!(report.violations.iter().any(|v| v.invariant == "parent"));
        assert!(report
            .violations
            .iter()
            .any(|v| v.invariant == "leaves at horizon"));
    }
}
