//! Runs every example's `run()` and checks its headline result.

#[allow(dead_code)]
#[path = "../examples/topology_paths.rs"]
mod topology_paths;
#[allow(dead_code)]
#[path = "../examples/catalog_queries.rs"]
mod catalog_queries;
#[allow(dead_code)]
#[path = "../examples/variable_reduction.rs"]
mod variable_reduction;
#[allow(dead_code)]
#[path = "../examples/exact_solve.rs"]
mod exact_solve;
#[allow(dead_code)]
#[path = "../examples/branched_solve.rs"]
mod branched_solve;
#[allow(dead_code)]
#[path = "../examples/deployment_plan.rs"]
mod deployment_plan;
#[allow(dead_code)]
#[path = "../examples/experiment_sweep.rs"]
mod experiment_sweep;

use oran_orchestrator::reduction::PruneMode;

#[test]
fn sibling_dus_cannot_reach_each_other() {
    // 16 ordered pairs minus D1/D2 in both directions
    assert_eq!(topology_paths::run(), 14);
}

#[test]
fn capacities_follow_cores() {
    let caps = catalog_queries::run();
    assert_eq!(caps.len(), 8);
    assert!(caps.contains(&("m1".into(), "R0".into(), 3)));
    assert!(caps.contains(&("m2".into(), "D2".into(), 1)));
}

#[test]
fn pruning_shrinks_in_order() {
    let counts = variable_reduction::run();
    let x = |m: PruneMode| counts.iter().find(|(k, _)| *k == m).unwrap().1;
    assert!(x(PruneMode::FpAp) < x(PruneMode::Fp));
    assert!(x(PruneMode::FpAp) < x(PruneMode::Ap));
    assert!(x(PruneMode::Fp) < x(PruneMode::None));
    assert!(x(PruneMode::Ap) < x(PruneMode::None));
}

#[test]
fn sharing_serves_both_requests() {
    assert_eq!(exact_solve::run(), (2.0, 1.0));
}

#[test]
fn branched_accounts_for_every_request() {
    let (clusters, fully, partially, rejected) = branched_solve::run();
    assert_eq!(clusters, 2);
    assert_eq!(fully + partially + rejected, 10);
}

#[test]
fn ric_only_plan_costs_more_e2() {
    let (here, ric) = deployment_plan::run();
    assert!(ric > here);
}

#[test]
fn sweep_reports_one_row_per_cell() {
    let reports = experiment_sweep::run();
    assert_eq!(reports.len(), 6);
    assert!(reports.iter().all(|r| r.runs == 5 && r.failures == 0));
}
