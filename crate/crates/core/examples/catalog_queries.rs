//! Lists which models offer each functionality and how many instances of
//! each model fit on every node of the fixture tree.

use oran_orchestrator::fixtures::{t1_catalog, t1_topology};

/// Returns `(model, node, capacity)` for every pair.
pub fn run() -> Vec<(String, String, u32)> {
    let catalog = t1_catalog();
    let topology = t1_topology();
    for f in catalog.functionalities() {
        let offering: Vec<&str> = catalog.offering(f).map(|m| catalog.model(m).id.as_str()).collect();
        println!("{f}: {}", offering.join(", "));
    }
    let mut out = Vec::new();
    for m in catalog.models() {
        for node in topology.nodes() {
            let c = m.capacity(node, Some(3)).expect("fixture resources are valid");
            out.push((m.id.clone(), node.id.clone(), c));
        }
    }
    for (m, d, c) in &out {
        println!("{m} on {d}: {c}");
    }
    out
}

fn main() {
    run();
}
