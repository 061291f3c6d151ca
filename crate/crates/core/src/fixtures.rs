//! Small hand-built instances used by tests and the runnable examples.
//!
//! `T1` is a four-node tree: `R0` (non-RT RIC, 4 cores) above `N1`
//! (near-RT RIC, 2 cores) above two sibling DUs `D1` and `D2` (1 core each).
//! Two models offer `f1` (`m2` also offers `f2`), and two unit-value
//! requests each need `f1` on one DU. `T1a` removes all cores except one at
//! `N1`, so both requests can only be served by sharing one instance.

use crate::catalog::{Catalog, InputType, ModelSpec};
use crate::formulation::{Instance, InstanceOptions};
use crate::ids::NodeIx;
use crate::netmodel::{Link, Node, NodeKind, ResourceVector, Topology};
use crate::requests::{Request, RequestSet, Requirement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CPU: &str = "cpu_cores";

fn cpu(c: f64) -> ResourceVector {
    ResourceVector::new().with(CPU, c)
}

fn tree(cores: [f64; 4]) -> Topology {
    Topology::build(
        vec![
            Node::new("R0", NodeKind::NonRtRic, cpu(cores[0]), None),
            Node::new("N1", NodeKind::NearRtRic, cpu(cores[1]), Some("R0")),
            Node::new("D1", NodeKind::Du, cpu(cores[2]), Some("N1")),
            Node::new("D2", NodeKind::Du, cpu(cores[3]), Some("N1")),
        ],
        vec![
            Link::new("R0", "N1", 1e6, 0.010),
            Link::new("N1", "D1", 1e6, 0.001),
            Link::new("N1", "D2", 1e6, 0.001),
        ],
    )
    .expect("fixture topology is valid")
}

pub fn t1_topology() -> Topology {
    tree([4.0, 2.0, 1.0, 1.0])
}

pub fn t1a_topology() -> Topology {
    tree([0.0, 1.0, 0.0, 0.0])
}

pub fn metrics_input() -> InputType {
    InputType {
        id: "metrics".into(),
        size_bytes: 100,
    }
}

pub fn t1_catalog() -> Catalog {
    Catalog::new(
        vec!["f1".into(), "f2".into()],
        vec![
            ModelSpec::uniform("m1", &[("f1", 0.9)], metrics_input(), cpu(1.0), 1.0, 0.001),
            ModelSpec::uniform(
                "m2",
                &[("f1", 0.8), ("f2", 0.8)],
                metrics_input(),
                cpu(1.0),
                1.0,
                0.001,
            ),
        ],
    )
    .expect("fixture catalog is valid")
}

pub fn t1_requests() -> RequestSet {
    RequestSet::new(vec![
        Request::new("i1", 1.0, vec![Requirement::new("f1", "D1", 0.5, 0.1, &["D1"])]),
        Request::new("i2", 1.0, vec![Requirement::new("f1", "D2", 0.5, 0.1, &["D2"])]),
    ])
    .expect("fixture requests are valid")
}

pub fn t1(sharing: bool) -> Instance {
    Instance::new(
        t1_topology(),
        t1_catalog(),
        t1_requests(),
        InstanceOptions {
            sharing,
            ..InstanceOptions::default()
        },
    )
    .expect("T1 is a valid instance")
}

pub fn t1a(sharing: bool) -> Instance {
    Instance::new(
        t1a_topology(),
        t1_catalog(),
        t1_requests(),
        InstanceOptions {
            sharing,
            ..InstanceOptions::default()
        },
    )
    .expect("T1a is a valid instance")
}

/// A random instance with at most 6 nodes, 3 models and 3 requests, small
/// enough for [`brute_force_oracle`](crate::solver::brute_force_oracle) to
/// enumerate in at most `max_combinations` steps. Draws are repeated until
/// the size fits.
pub fn random_small(seed: u64, sharing: bool, max_combinations: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let inst = random_small_once(&mut rng, sharing);
        if crate::solver::oracle_combinations(&inst) <= max_combinations {
            return inst;
        }
    }
}

fn random_small_once(rng: &mut ChaCha8Rng, sharing: bool) -> Instance {
    let n = rng.random_range(2..=6usize);
    let mut parent = vec![None];
    let mut depth = vec![0usize];
    for i in 1..n {
        let open: Vec<usize> = (0..i).filter(|&p| depth[p] < 4).collect();
        let p = open[rng.random_range(0..open.len())];
        parent.push(Some(p));
        depth.push(depth[p] + 1);
    }
    let name = |i: usize| format!("n{i}");
    let nodes = (0..n)
        .map(|i| {
            let kind = NodeKind::ALL[depth[i]];
            let cores = if rng.random_bool(0.2) { 0.0 } else { rng.random_range(1..=2) as f64 };
            Node::new(&name(i), kind, cpu(cores), parent[i].map(name).as_deref())
        })
        .collect();
    let links = (1..n)
        .map(|i| {
            let bw = [1e5, 1e6, 1e7][rng.random_range(0..3)];
            let delay = [0.001, 0.005, 0.01][rng.random_range(0..3)];
            Link::new(&name(parent[i].unwrap()), &name(i), bw, delay)
        })
        .collect();
    let topology = Topology::build(nodes, links).expect("generated tree is valid");

    let funcs: Vec<String> = (0..rng.random_range(2..=3)).map(|f| format!("f{f}")).collect();
    let num_models = rng.random_range(1..=3);
    let models = (0..num_models)
        .map(|m| {
            let mut offers: Vec<(&str, f64)> = Vec::new();
            for (j, f) in funcs.iter().enumerate() {
                // model j % M always offers f_j, so every functionality is covered
                if j % num_models == m || rng.random_bool(0.5) {
                    offers.push((f.as_str(), [0.5, 0.7, 0.9][rng.random_range(0..3)]));
                }
            }
            let demand = cpu(rng.random_range(1..=2) as f64);
            let mut spec = ModelSpec::uniform(&format!("m{m}"), &offers, metrics_input(), demand, 1.0, 0.001);
            for per_kind in spec.suitability.values_mut() {
                for beta in per_kind.values_mut() {
                    *beta = [0.6, 1.0][rng.random_range(0..2)];
                }
            }
            spec
        })
        .collect();
    let catalog = Catalog::new(funcs.clone(), models).expect("generated catalog is valid");

    let requests = (0..rng.random_range(1..=3))
        .map(|r| {
            let mut reqs: Vec<Requirement> = Vec::new();
            for _ in 0..rng.random_range(1..=2) {
                let f = &funcs[rng.random_range(0..funcs.len())];
                let d = NodeIx::new(rng.random_range(0..n));
                if reqs.iter().any(|q| q.f == *f && q.d == name(d.idx())) {
                    continue;
                }
                let mut subtree = topology.descendants(d);
                subtree.push(d);
                let mut sources: Vec<String> = subtree
                    .iter()
                    .filter(|_| rng.random_bool(0.5))
                    .map(|s| name(s.idx()))
                    .collect();
                if sources.is_empty() {
                    sources.push(name(d.idx()));
                }
                let src: Vec<&str> = sources.iter().map(String::as_str).collect();
                let min_perf = [0.2, 0.4, 0.6][rng.random_range(0..3)];
                let delta = [0.01, 0.05, 0.1, 1.0][rng.random_range(0..4)];
                reqs.push(Requirement::new(f, &name(d.idx()), min_perf, delta, &src));
            }
            Request::new(&format!("r{r}"), rng.random_range(1..=3) as f64, reqs)
        })
        .collect();
    let requests = RequestSet::new(requests).expect("generated requests are valid");
    Instance::new(
        topology,
        catalog,
        requests,
        InstanceOptions {
            sharing,
            capacity_cap: Some(2),
            ..InstanceOptions::default()
        },
    )
    .expect("generated instance is valid")
}
