use clap::{Args, Parser, Subcommand};
use oran_orchestrator::branching::{cluster_instance, decompose, root_shares};
use oran_orchestrator::engine::plan::instance_hash;
use oran_orchestrator::engine::{
    build_plan, export_csv, export_json, orchestrate, run_experiment, ExperimentGrid, Outcome, RunMode, SolveMode,
};
use oran_orchestrator::formulation::{check_policy, FeasibilityReport, Instance, InstanceBundle, PolicyDoc};
use oran_orchestrator::reduction::PruneMode;
use oran_orchestrator::scenario::{generate_instance, NodeClassCase, ScenarioConfig, TimescaleCase};
use oran_orchestrator::solver::SolveOptions;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "oran-orch", version, about = "Place AI/ML model instances over an O-RAN tree")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random instance and write it as a JSON bundle.
    Generate(GenerateArgs),
    /// Solve an instance bundle.
    Solve(SolveArgs),
    /// Check a policy against an instance and list every violated constraint.
    Validate(ValidateArgs),
    /// Run a seeded experiment grid and export per-run records and reports.
    Experiment(ExperimentArgs),
    /// Solve an instance (or take a given policy) and emit the deployment plan.
    Plan(PlanArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario config as JSON; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<NodeClassCase>,
    #[arg(long)]
    timescale: Option<TimescaleCase>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    requests: Option<usize>,
    /// Approximate total node count, keeping the default proportions.
    #[arg(long)]
    nodes: Option<usize>,
    /// Mark the instance as not allowing shared model instances.
    #[arg(long)]
    no_sharing: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, default_value = "exact")]
    mode: SolveMode,
    #[arg(long, default_value = "fp+ap")]
    prune: PruneMode,
    #[arg(long)]
    no_sharing: bool,
    /// Seconds; the best policy found so far is returned when it expires.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
}

impl SolverFlags {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            sharing: !self.no_sharing,
            prune: self.prune,
            time_limit_s: self.time_limit,
            node_limit: self.node_limit,
            seed: 0,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance bundle produced by `generate`.
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    /// A `solve` output, a solve result or a bare policy document.
    policy: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment grid as JSON; missing fields take their defaults.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated total node counts.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    cases: Option<Vec<NodeClassCase>>,
    #[arg(long, value_delimiter = ',')]
    timescales: Option<Vec<TimescaleCase>>,
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<RunMode>>,
    #[arg(long)]
    requests: Option<usize>,
    #[arg(long)]
    time_limit: Option<f64>,
    /// `.csv` writes one row per grid cell; anything else writes the full
    /// JSON output. Without it a summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    instance: PathBuf,
    /// Build the plan from this policy instead of solving.
    #[arg(long)]
    policy: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn load_instance(path: &Path) -> CliResult<Instance> {
    let bundle: InstanceBundle = serde_json::from_value(read_json(path)?)?;
    Ok(bundle.into_instance()?)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
            _ => {}
        },
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> CliResult<()> {
    let mut cfg: ScenarioConfig = match &a.config {
        Some(p) => serde_json::from_value(read_json(p)?)?,
        None => ScenarioConfig::default(),
    };
    if let Some(n) = a.nodes {
        cfg = cfg.with_total_nodes(n);
    }
    cfg.case = a.case.unwrap_or(cfg.case);
    cfg.timescale = a.timescale.unwrap_or(cfg.timescale);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.requests = a.requests.unwrap_or(cfg.requests);
    let inst = generate_instance(&cfg, !a.no_sharing)?;
    emit(&InstanceBundle::from_instance(&inst), a.out.as_deref())
}

fn solve(a: SolveArgs) -> CliResult<()> {
    let inst = load_instance(&a.instance)?;
    let o = orchestrate(&inst, a.solver.mode, &a.solver.options())?;
    let result = match &o.outcome {
        Outcome::Exact(r) => serde_json::to_value(r.to_doc(&inst))?,
        Outcome::Branched(b) => serde_json::to_value(b.to_doc())?,
    };
    let doc = json!({
        "mode": a.solver.mode,
        "options": a.solver.options(),
        "instance_hash": instance_hash(&inst),
        "hit_limit": o.outcome.hit_limit(),
        "result": result,
    });
    emit(&doc, a.out.as_deref())
}

/// The object holding the policy: `result` of a `solve` output, then a
/// document with a `policy` field, then the value itself.
fn policy_part(v: &Value) -> &Value {
    let v = v.get("result").unwrap_or(v);
    v.get("policy").unwrap_or(v)
}

fn validate(a: ValidateArgs) -> CliResult<bool> {
    let inst = load_instance(&a.instance)?;
    let v = read_json(&a.policy)?;
    let result = v.get("result").unwrap_or(&v);
    let reports: Vec<(String, FeasibilityReport)> = if let Some(clusters) = result.get("clusters") {
        // branched output: each cluster policy is checked on its sub-instance
        let cs = decompose(inst.topology())?;
        let shares = root_shares(inst.requests(), &cs);
        let mut out = Vec::new();
        for doc in clusters.as_array().ok_or("`clusters` must be an array")? {
            let id = doc.get("id").and_then(Value::as_str).ok_or("cluster without an id")?;
            let ix = cs.iter().position(|c| c.id == id).ok_or(format!("unknown cluster `{id}`"))?;
            let sub = cluster_instance(&inst, &cs[ix], shares[ix])?;
            let policy: PolicyDoc = serde_json::from_value(policy_part(doc).clone())?;
            out.push((id.to_string(), check_policy(&sub, &sub.policy_from_doc(&policy)?)));
        }
        out
    } else {
        let policy: PolicyDoc = serde_json::from_value(policy_part(&v).clone())?;
        vec![("monolithic".into(), check_policy(&inst, &inst.policy_from_doc(&policy)?))]
    };
    let ok = reports.iter().all(|(_, r)| r.is_ok());
    let doc = json!({
        "feasible": ok,
        "reports": reports
            .iter()
            .map(|(scope, r)| json!({ "scope": scope, "objective": r.objective, "violations": r.violations }))
            .collect::<Vec<_>>(),
    });
    emit(&doc, a.out.as_deref())?;
    Ok(ok)
}

fn experiment(a: ExperimentArgs) -> CliResult<()> {
    let mut grid: ExperimentGrid = match &a.grid {
        Some(p) => serde_json::from_value(read_json(p)?)?,
        None => ExperimentGrid::default(),
    };
    grid.runs = a.runs.unwrap_or(grid.runs);
    grid.seed = a.seed.unwrap_or(grid.seed);
    grid.sizes = a.sizes.unwrap_or(grid.sizes);
    grid.cases = a.cases.unwrap_or(grid.cases);
    grid.timescales = a.timescales.unwrap_or(grid.timescales);
    grid.modes = a.modes.unwrap_or(grid.modes);
    grid.base.requests = a.requests.unwrap_or(grid.base.requests);
    if a.time_limit.is_some() {
        grid.time_limit_s = a.time_limit;
    }
    let out = run_experiment(&grid)?;
    match &a.out {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => export_csv(&out.reports, p)?,
        Some(p) => export_json(&out, p)?,
        None => {
            println!(
                "{:>5} {:>4} {:>4} {:<20} {:>6} {:>8} {:>8} {:>8} {:>10}",
                "nodes", "case", "ts", "mode", "runs", "accept", "partial", "saving", "time_s"
            );
            for r in &out.reports {
                println!(
                    "{:>5} {:>4} {:>4} {:<20} {:>6} {:>8.3} {:>8.3} {:>8} {:>10.4}",
                    r.nodes,
                    r.case.as_str(),
                    r.timescale.as_str(),
                    r.mode.as_str(),
                    r.runs,
                    r.acceptance_ratio,
                    r.partial_acceptance_ratio,
                    r.sharing_saving_ratio.map_or("-".into(), |s| format!("{s:.3}")),
                    r.wall_time_mean_s
                );
            }
        }
    }
    let failed = out.records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} of {} runs failed; see the `error` field of their records", out.records.len());
    }
    Ok(())
}

fn plan(a: PlanArgs) -> CliResult<()> {
    let inst = load_instance(&a.instance)?;
    let plan = match &a.policy {
        Some(p) => {
            let doc: PolicyDoc = serde_json::from_value(policy_part(&read_json(p)?).clone())?;
            build_plan(&inst, &inst.policy_from_doc(&doc)?)
        }
        None => orchestrate(&inst, a.solver.mode, &a.solver.options())?.plan,
    };
    emit(&plan, a.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Solve(a) => solve(a).map(|_| true),
        Command::Validate(a) => validate(a),
        Command::Experiment(a) => experiment(a).map(|_| true),
        Command::Plan(a) => plan(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
