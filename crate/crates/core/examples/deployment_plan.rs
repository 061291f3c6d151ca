//! Turns a solved policy into app descriptors and compares the E2 traffic of
//! the plan with the same plan hosted entirely on near-RT RICs.

use oran_orchestrator::engine::{
    estimate_control_traffic, orchestrate, rehost_to_near_rt, SolveMode, TrafficParams,
};
use oran_orchestrator::scenario::{generate_instance, NodeClassCase, ScenarioConfig, TimescaleCase};
use oran_orchestrator::solver::SolveOptions;

/// E2 bytes of the solved plan and of its RIC-only variant.
pub fn run() -> (u64, u64) {
    let cfg = ScenarioConfig {
        case: NodeClassCase::Er,
        timescale: TimescaleCase::Ull,
        requests: 10,
        seed: 1,
        ..ScenarioConfig::default().with_total_nodes(60)
    };
    let inst = generate_instance(&cfg, true).expect("scenario is valid");
    let o = orchestrate(&inst, SolveMode::Exact, &SolveOptions::default()).expect("solve succeeds");
    for app in &o.plan.apps {
        println!(
            "{:<12} {:?} on {:<8} serves {} requirement(s)",
            app.app_id,
            app.app_kind,
            app.host,
            app.serves.len()
        );
    }
    println!("{:?}", o.plan.count_by_kind());

    let params = TrafficParams::default();
    let t = inst.topology();
    let here = estimate_control_traffic(&o.plan, t, &params).expect("plan nodes exist");
    let ric = estimate_control_traffic(&rehost_to_near_rt(&o.plan, t), t, &params).expect("plan nodes exist");
    println!("E2 bytes: {} as planned, {} with every app on a near-RT RIC", here.e2_bytes, ric.e2_bytes);
    (here.e2_bytes, ric.e2_bytes)
}

fn main() {
    run();
}
