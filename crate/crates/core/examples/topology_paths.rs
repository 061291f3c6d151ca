//! Builds the four-node fixture tree and prints which node pairs can talk,
//! along with the bottleneck bandwidth and delay of each path.
//!
//! ```bash
//! cargo run --example topology_paths
//! ```

use oran_orchestrator::fixtures::t1_topology;

/// Returns the number of reachable ordered pairs.
pub fn run() -> usize {
    let t = t1_topology();
    let ids: Vec<&str> = t.nodes().iter().map(|n| n.id.as_str()).collect();
    let mut reachable = 0;
    for a in &ids {
        for b in &ids {
            match t.path_metrics(a, b) {
                Ok(m) => {
                    reachable += 1;
                    println!("{a:>3} -> {b:<3} {:>8.0} bps  {:.3} s", m.bandwidth_bps, m.delay_s);
                }
                Err(_) => println!("{a:>3} -> {b:<3} not on a common root path"),
            }
        }
    }
    reachable
}

fn main() {
    let n = run();
    println!("{n} reachable pairs");
}
