//! `superrep`: validation, assumption checks, CSP audit, pricing and hedging
//! of a scenario-tree document.
//!
//! Exit codes: 0 success, 1 I/O, schema or solver failure, 2 validation or
//! assumption failure, 3 CSP unbounded.

mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde_json::{json, Map, Value};
use superrep::csp::{check_csp_tree, CspError, CspStatus};
use superrep::dual::{
    build_dual_lp, dual_price, dual_price_with, power_futures_claim, DualError, Margins,
    DEFAULT_EPS,
};
use superrep::hedge::{build_hedge_lp, superreplication_price, HedgeError, HedgeStrategy};
use superrep::production::{check_assumptions, production_bound};
use superrep::tree::{
    parse_document, validate_document, ContingentClaim, ScenarioTree, TreeDocument,
};

#[derive(Parser, Debug)]
#[command(
    name = "superrep",
    version,
    about = "Super-replication prices and hedges on scenario trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every tree invariant and list the violations.
    Validate(Common),
    /// Sample the regularity of each node's production function.
    CheckAssumptions {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decide the CSP no-arbitrage condition.
    CheckCsp {
        #[command(flatten)]
        common: Common,
        /// Time index at which strategies start.
        #[arg(long, default_value_t = 0)]
        start: usize,
    },
    /// Primal and dual super-replication price of a contract.
    Price {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        contract: ContractArgs,
        /// Margin kept inside the bid-ask band by the interior dual.
        #[arg(long, value_parser = parse_eps)]
        eps: Option<f64>,
        /// Write the interior consistent price system, keyed by node id.
        #[arg(long, value_name = "PATH")]
        emit_cps: Option<PathBuf>,
        /// Write the super-replicating strategy, keyed by node id.
        #[arg(long, value_name = "PATH")]
        emit_strategy: Option<PathBuf>,
        /// Write both LPs in a plain-text debug layout.
        #[arg(long, value_name = "PATH")]
        dump_lp: Option<PathBuf>,
    },
    /// Super-replicating strategy of a contract.
    Hedge {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        contract: ContractArgs,
        #[arg(long, value_name = "PATH")]
        emit_strategy: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        dump_lp: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Tree document (JSON).
    tree: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct ContractArgs {
    #[arg(long, value_enum, default_value_t = Contract::Claim)]
    contract: Contract,
    /// Power volume `x` of a power-futures contract.
    #[arg(long, value_parser = parse_power)]
    power: Option<f64>,
    /// Defaults to `on` when the tree carries plant data.
    #[arg(long, value_enum)]
    production: Option<Switch>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Contract {
    /// The claim stored in the tree document.
    Claim,
    PowerFutures,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Switch {
    On,
    Off,
}

fn parse_eps(s: &str) -> Result<f64, String> {
    let eps: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if eps > 0.0 && eps <= 1e-3 {
        Ok(eps)
    } else {
        Err(format!("eps must lie in (0, 1e-3], got {eps}"))
    }
}

fn parse_power(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("power must be finite and nonnegative, got {x}"))
    }
}

#[derive(Debug)]
enum Failure {
    /// Exit 1.
    Input(String),
    /// Exit 2.
    Rejected(String),
}

struct Outcome {
    report: Value,
    code: u8,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let format = match &cli.command {
        Command::Validate(c)
        | Command::CheckAssumptions { common: c, .. }
        | Command::CheckCsp { common: c, .. }
        | Command::Price { common: c, .. }
        | Command::Hedge { common: c, .. } => c.format,
    };
    match run(cli.command) {
        Ok(outcome) => {
            match format {
                Format::Json => print!("{}", report::to_json(outcome.report)),
                Format::Text => print!("{}", report::to_text(outcome.report)),
            }
            ExitCode::from(outcome.code)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("rejected: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome, Failure> {
    match command {
        Command::Validate(common) => validate(&load(&common.tree)?),
        Command::CheckAssumptions {
            common,
            samples,
            seed,
        } => assumptions(&build(&load(&common.tree)?)?, samples, seed),
        Command::CheckCsp { common, start } => csp(&build(&load(&common.tree)?)?, start),
        Command::Price {
            common,
            contract,
            eps,
            emit_cps,
            emit_strategy,
            dump_lp,
        } => {
            let tree = build(&load(&common.tree)?)?;
            let job = Job::new(&tree, &contract)?;
            price(
                &job,
                eps.unwrap_or(DEFAULT_EPS),
                emit_cps.as_deref(),
                emit_strategy.as_deref(),
                dump_lp.as_deref(),
            )
        }
        Command::Hedge {
            common,
            contract,
            emit_strategy,
            dump_lp,
        } => {
            let tree = build(&load(&common.tree)?)?;
            let job = Job::new(&tree, &contract)?;
            hedge(&job, emit_strategy.as_deref(), dump_lp.as_deref())
        }
    }
}

fn load(path: &Path) -> Result<TreeDocument, Failure> {
    let bytes = fs::read(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_document(&bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn build(doc: &TreeDocument) -> Result<ScenarioTree, Failure> {
    ScenarioTree::from_document(doc).map_err(|e| Failure::Rejected(e.to_string()))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn validate(doc: &TreeDocument) -> Result<Outcome, Failure> {
    let report = validate_document(doc);
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| json!({"node": v.node, "invariant": v.invariant, "detail": v.detail}))
        .collect();
    Ok(Outcome {
        code: if report.is_valid() { 0 } else { 2 },
        report: json!({
            "command": "validate",
            "valid": report.is_valid(),
            "violations": violations,
        }),
    })
}

fn assumptions(tree: &ScenarioTree, samples: usize, seed: u64) -> Result<Outcome, Failure> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut nodes = Map::new();
    let mut all_passed = true;
    for node in tree.nodes() {
        let (Some(plant), Some(spot)) = (&node.plant, node.spot_power) else {
            continue;
        };
        let r = check_assumptions(plant, spot, samples, &mut rng);
        all_passed &= r.all_passed();
        nodes.insert(
            node.id.clone(),
            json!({
                "passed": r.all_passed(),
                "concavity": r.concavity,
                "boundedness": r.boundedness,
                "continuity": r.continuity,
                "symbolic": r.symbolic.map(|[c, b]| json!({"concavity": c, "boundedness": b})),
                "bound": production_bound(plant, spot),
                "max_deviation": r.max_deviation,
            }),
        );
    }
    Ok(Outcome {
        code: if all_passed { 0 } else { 2 },
        report: json!({
            "command": "check-assumptions",
            "passed": all_passed,
            "samples": samples,
            "seed": seed,
            "nodes": nodes,
        }),
    })
}

fn csp(tree: &ScenarioTree, start: usize) -> Result<Outcome, Failure> {
    let verdict = check_csp_tree(tree, start).map_err(|e| match e {
        CspError::Lp(_) | CspError::Infeasible => Failure::Input(format!("CSP solver: {e}")),
        other => Failure::Rejected(other.to_string()),
    })?;
    let nodes: BTreeMap<&str, Value> = verdict
        .nodes
        .iter()
        .map(|d| (d.node.as_str(), json!(d.verdict)))
        .collect();
    let mut report = json!({
        "command": "check-csp",
        "start_index": verdict.start_index,
        "nodes": nodes,
    });
    match &verdict.status {
        CspStatus::Bounded { c_star } => {
            report["status"] = json!("bounded");
            report["c_star"] = json!(c_star);
        }
        CspStatus::Unbounded { witness } => {
            let ray: BTreeMap<&str, f64> =
                witness.ray.iter().map(|(n, v)| (n.as_str(), *v)).collect();
            report["status"] = json!("unbounded");
            report["witness"] = json!({"node": witness.main_node(), "ray": ray});
        }
    }
    Ok(Outcome {
        code: if verdict.is_bounded() { 0 } else { 3 },
        report,
    })
}

/// A resolved contract on a validated tree.
struct Job<'a> {
    tree: &'a ScenarioTree,
    claim: ContingentClaim,
    production: bool,
    contract: Value,
}

impl<'a> Job<'a> {
    fn new(tree: &'a ScenarioTree, args: &ContractArgs) -> Result<Self, Failure> {
        let production = match args.production {
            None => tree.has_plant(),
            Some(Switch::Off) => false,
            Some(Switch::On) if tree.has_plant() => true,
            Some(Switch::On) => {
                return Err(Failure::Rejected(
                    "production is on but no step carries plant data".into(),
                ))
            }
        };
        let (claim, contract) = match args.contract {
            Contract::Claim => {
                if args.power.is_some() {
                    return Err(Failure::Input(
                        "--power applies to --contract power-futures only".into(),
                    ));
                }
                let claim = tree
                    .claim()
                    .cloned()
                    .ok_or_else(|| Failure::Rejected("the tree document has no claim".into()))?;
                (claim, json!({"kind": "claim"}))
            }
            Contract::PowerFutures => {
                let x = args.power.ok_or_else(|| {
                    Failure::Input("--contract power-futures needs --power".into())
                })?;
                let claim = power_futures_claim(tree, x).map_err(dual_failure)?;
                (claim, json!({"kind": "power-futures", "power": x}))
            }
        };
        Ok(Job {
            tree,
            claim,
            production,
            contract,
        })
    }
}

fn hedge_failure(e: HedgeError) -> Failure {
    match e {
        HedgeError::Lp(_) | HedgeError::ReplayFailed { .. } => {
            Failure::Input(format!("primal solver: {e}"))
        }
        other => Failure::Rejected(other.to_string()),
    }
}

fn dual_failure(e: DualError) -> Failure {
    match e {
        DualError::Lp(_) => Failure::Input(format!("dual solver: {e}")),
        other => Failure::Rejected(other.to_string()),
    }
}

fn strategy_json(s: &HedgeStrategy) -> Value {
    let nodes: BTreeMap<&str, Value> = s
        .actions
        .iter()
        .map(|a| {
            (
                a.node.as_str(),
                json!({"weights": a.weights, "trade": a.trade, "beta": a.beta}),
            )
        })
        .collect();
    let surplus: BTreeMap<&str, Value> = s
        .surplus
        .iter()
        .map(|(n, v)| (n.as_str(), json!(v)))
        .collect();
    json!({
        "endowment": s.endowment,
        "nodes": nodes,
        "surplus": surplus,
    })
}

fn price(
    job: &Job,
    eps: f64,
    emit_cps: Option<&Path>,
    emit_strategy: Option<&Path>,
    dump_lp: Option<&Path>,
) -> Result<Outcome, Failure> {
    let (tree, claim, production) = (job.tree, &job.claim, job.production);
    if let Some(path) = dump_lp {
        let (primal, _) = build_hedge_lp(tree, claim, production).map_err(hedge_failure)?;
        let dual =
            build_dual_lp(tree, claim, production, Margins::interior(eps)).map_err(dual_failure)?;
        write(
            path,
            &format!("# primal\n{}# dual\n{}", primal.to_text(), dual.to_text()),
        )?;
    }
    let primal = superreplication_price(tree, claim, production).map_err(hedge_failure)?;
    let dual =
        dual_price_with(tree, claim, production, Margins::closure()).map_err(dual_failure)?;
    let interior = dual_price(tree, claim, production, eps).map_err(dual_failure)?;
    if let Some(path) = emit_cps {
        let cps = json!(interior.price_system.by_id(tree));
        write(path, &report::to_json(cps))?;
    }
    if let Some(path) = emit_strategy {
        write(path, &report::to_json(strategy_json(&primal.strategy)))?;
    }
    Ok(Outcome {
        code: 0,
        report: json!({
            "command": "price",
            "contract": job.contract,
            "production": production,
            "primal": primal.price,
            "dual": dual.value,
            "gap": (primal.price - dual.value).abs(),
            "interior": {
                "eps": eps,
                "dual": interior.value,
                "gap": (primal.price - interior.value).abs(),
            },
        }),
    })
}

fn hedge(
    job: &Job,
    emit_strategy: Option<&Path>,
    dump_lp: Option<&Path>,
) -> Result<Outcome, Failure> {
    let (tree, claim, production) = (job.tree, &job.claim, job.production);
    if let Some(path) = dump_lp {
        let (primal, _) = build_hedge_lp(tree, claim, production).map_err(hedge_failure)?;
        write(path, &format!("# primal\n{}", primal.to_text()))?;
    }
    let result = superreplication_price(tree, claim, production).map_err(hedge_failure)?;
    let strategy = strategy_json(&result.strategy);
    if let Some(path) = emit_strategy {
        write(path, &report::to_json(strategy.clone()))?;
    }
    Ok(Outcome {
        code: 0,
        report: json!({
            "command": "hedge",
            "contract": job.contract,
            "production": production,
            "price": result.price,
            "residual": result.residual,
            "strategy": strategy,
        }),
    })
}
