//! Solves the one-core fixture with and without sharing.
//!
//! Only `N1` has a core, so without sharing one of the two requests must be
//! rejected.

use oran_orchestrator::fixtures::t1a;
use oran_orchestrator::formulation::check_policy;
use oran_orchestrator::solver::{solve_exact, SolveOptions};

/// Objectives with sharing on and off.
pub fn run() -> (f64, f64) {
    let mut objectives = [0.0; 2];
    for (slot, sharing) in [true, false].into_iter().enumerate() {
        let inst = t1a(sharing);
        let r = solve_exact(&inst, &SolveOptions::default()).expect("no limits are set");
        assert!(check_policy(&inst, &r.policy).is_ok());
        println!("sharing {sharing}: objective {} ({:?})", r.objective, r.status);
        for v in &r.policy.active {
            println!("  {}", inst.var_label(v));
        }
        objectives[slot] = r.objective;
    }
    (objectives[0], objectives[1])
}

fn main() {
    run();
}
