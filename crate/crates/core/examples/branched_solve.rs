//! Splits a generated scenario into one cluster per near-RT RIC and solves
//! each cluster on its own.

use oran_orchestrator::branching::solve_branched;
use oran_orchestrator::scenario::{generate_instance, ScenarioConfig};
use oran_orchestrator::solver::SolveOptions;

/// Returns `(clusters, fully satisfied, partially satisfied, rejected)`.
pub fn run() -> (usize, usize, usize, usize) {
    let cfg = ScenarioConfig {
        requests: 10,
        seed: 3,
        ..ScenarioConfig::default().with_total_nodes(60)
    };
    let inst = generate_instance(&cfg, true).expect("scenario is valid");
    let b = solve_branched(&inst, &SolveOptions::default()).expect("no limits are set");
    for c in &b.per_cluster {
        println!(
            "{:<6} {:>3} nodes {:>2} requests objective {:.1} |x| {}",
            c.cluster.id,
            c.cluster.members.len(),
            c.instance.num_requests(),
            c.result.objective,
            c.result.stats.variables
        );
    }
    println!(
        "fully {} partially {} rejected {}",
        b.fully_satisfied.len(),
        b.partially_satisfied.len(),
        b.rejected.len()
    );
    (b.per_cluster.len(), b.fully_satisfied.len(), b.partially_satisfied.len(), b.rejected.len())
}

fn main() {
    run();
}
