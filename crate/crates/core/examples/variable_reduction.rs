//! Counts assignment variables of a generated scenario before and after
//! pruning.
//!
//! `fp` drops tuples nobody asked for and `ap` drops hosts that cannot
//! reach the target.

use oran_orchestrator::formulation::count_variables;
use oran_orchestrator::reduction::PruneMode;
use oran_orchestrator::scenario::{generate_instance, ScenarioConfig};

pub fn run() -> Vec<(PruneMode, u64)> {
    let cfg = ScenarioConfig::default().with_total_nodes(60);
    let inst = generate_instance(&cfg, true).expect("default scenario is valid");
    let modes = [PruneMode::None, PruneMode::Fp, PruneMode::Ap, PruneMode::FpAp];
    let counts: Vec<(PruneMode, u64)> = modes.iter().map(|&m| (m, count_variables(&inst, m).x)).collect();
    for (m, x) in &counts {
        println!("{:<5} |x| = {x}", m.as_str());
    }
    counts
}

fn main() {
    run();
}
