//! A small seeded sweep over node-class cases, with and without sharing,
//! written to a CSV in the system temp directory.

use oran_orchestrator::engine::{export_csv, run_experiment, ExperimentGrid, MetricsReport, RunMode};
use oran_orchestrator::scenario::{NodeClassCase, ScenarioConfig};

pub fn run() -> Vec<MetricsReport> {
    let grid = ExperimentGrid {
        base: ScenarioConfig {
            requests: 8,
            ..ScenarioConfig::default().with_total_nodes(30)
        },
        cases: NodeClassCase::ALL.to_vec(),
        modes: vec![RunMode::Exact, RunMode::ExactNoSharing],
        runs: 5,
        ..ExperimentGrid::default()
    };
    let out = run_experiment(&grid).expect("grid is valid");
    for r in &out.reports {
        println!(
            "{:<4} {:<16} acceptance {:.2} saving {}",
            r.case.as_str(),
            r.mode.as_str(),
            r.acceptance_ratio,
            r.sharing_saving_ratio.map_or("-".into(), |s| format!("{s:.2}"))
        );
    }
    let path = std::env::temp_dir().join("oran_sweep.csv");
    export_csv(&out.reports, &path).expect("temp dir is writable");
    println!("wrote {}", path.display());
    out.reports
}

fn main() {
    run();
}
