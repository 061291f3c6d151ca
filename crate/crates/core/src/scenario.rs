//! Seeded generators for random topologies, model catalogs and request sets.
//!
//! Each generator draws from its own ChaCha8 stream derived from the
//! configured seed, so changing the request parameters (node-class case,
//! timescale case, request count) never changes the topology or the catalog
//! drawn for the same seed. Request generation consumes the same random
//! numbers for every timescale case: one uniform draw per tuple is mapped
//! through the case's cumulative probabilities. Instances generated with the
//! same seed under DT, LL and ULL therefore differ only in the deadlines.

use crate::catalog::{Catalog, CatalogError, InputType, ModelSpec};
use crate::fixtures::CPU;
use crate::formulation::{Instance, InstanceError, InstanceOptions};
use crate::netmodel::{Link, Node, NodeKind, ResourceVector, Topology, TopologyError};
use crate::requests::{Request, RequestError, RequestSet, Requirement};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// One value per node kind, in hierarchy order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerKind<T> {
    pub non_rt_ric: T,
    pub near_rt_ric: T,
    pub cu: T,
    pub du: T,
    pub ru: T,
}

impl<T: Copy> PerKind<T> {
    pub fn get(&self, kind: NodeKind) -> T {
        match kind {
            NodeKind::NonRtRic => self.non_rt_ric,
            NodeKind::NearRtRic => self.near_rt_ric,
            NodeKind::Cu => self.cu,
            NodeKind::Du => self.du,
            NodeKind::Ru => self.ru,
        }
    }

    pub fn from_array(a: [T; 5]) -> Self {
        Self {
            non_rt_ric: a[0],
            near_rt_ric: a[1],
            cu: a[2],
            du: a[3],
            ru: a[4],
        }
    }
}

impl PerKind<usize> {
    pub fn total(&self) -> usize {
        NodeKind::ALL.iter().map(|&k| self.get(k)).sum()
    }
}

/// Which node classes may be targeted by requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum NodeClassCase {
    #[serde(rename = "ALL")]
    All,
    /// Everything except the non-RT RIC.
    #[serde(rename = "ER")]
    Er,
    /// RAN nodes only (CU, DU, RU).
    #[serde(rename = "RO")]
    Ro,
}

impl NodeClassCase {
    pub const ALL: [NodeClassCase; 3] = [NodeClassCase::All, NodeClassCase::Er, NodeClassCase::Ro];

    pub fn eligible(self, kind: NodeKind) -> bool {
        match self {
            NodeClassCase::All => true,
            NodeClassCase::Er => kind != NodeKind::NonRtRic,
            NodeClassCase::Ro => kind.is_ran(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeClassCase::All => "ALL",
            NodeClassCase::Er => "ER",
            NodeClassCase::Ro => "RO",
        }
    }
}

impl fmt::Display for NodeClassCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeClassCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "ALL" => Ok(NodeClassCase::All),
            "ER" => Ok(NodeClassCase::Er),
            "RO" => Ok(NodeClassCase::Ro),
            _ => Err(format!("unknown node-class case `{s}` (ALL|ER|RO)")),
        }
    }
}

/// Mix of deadline classes (TTI, sub-second, long) for generated tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimescaleCase {
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "LL")]
    Ll,
    #[serde(rename = "ULL")]
    Ull,
}

impl TimescaleCase {
    pub const ALL: [TimescaleCase; 3] = [TimescaleCase::Dt, TimescaleCase::Ll, TimescaleCase::Ull];

    /// Probabilities of the TTI, sub-second and long classes.
    pub fn probabilities(self) -> [f64; 3] {
        match self {
            TimescaleCase::Dt => [0.2, 0.2, 0.6],
            TimescaleCase::Ll => [0.2, 0.6, 0.2],
            TimescaleCase::Ull => [0.6, 0.4, 0.0],
        }
    }

    /// Deadline class for a uniform draw `u` in `[0, 1)`.
    pub fn class_of(self, u: f64) -> usize {
        let p = self.probabilities();
        if u < p[0] {
            0
        } else if u < p[0] + p[1] {
            1
        } else {
            2
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TimescaleCase::Dt => "DT",
            TimescaleCase::Ll => "LL",
            TimescaleCase::Ull => "ULL",
        }
    }
}

impl fmt::Display for TimescaleCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimescaleCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DT" => Ok(TimescaleCase::Dt),
            "LL" => Ok(TimescaleCase::Ll),
            "ULL" => Ok(TimescaleCase::Ull),
            _ => Err(format!("unknown timescale case `{s}` (DT|LL|ULL)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub counts: PerKind<usize>,
    pub cores: PerKind<f64>,
    /// Bandwidth of the link above a near-RT RIC, CU, DU and RU, in Gbps.
    pub bandwidth_gbps: [f64; 4],
    /// Propagation delay of the same links, in seconds.
    pub delay_s: [f64; 4],
    pub requests: usize,
    /// Probability that an eligible node is targeted by a request.
    pub p: f64,
    pub case: NodeClassCase,
    pub timescale: TimescaleCase,
    pub k_max: usize,
    pub capacity_cap: u32,
    /// Deadline of the TTI, sub-second and long classes, in seconds.
    pub deadlines_s: [f64; 3],
    pub models: usize,
    pub functionalities: usize,
    /// Number of models taking I/Q samples instead of metrics as input.
    pub iq_models: usize,
    pub exec_time_s: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            counts: PerKind::from_array([1, 4, 10, 30, 90]),
            cores: PerKind::from_array([128.0, 8.0, 4.0, 2.0, 1.0]),
            bandwidth_gbps: [100.0, 50.0, 25.0, 20.0],
            delay_s: [0.010, 0.010, 0.005, 0.001],
            requests: 20,
            p: 0.05,
            case: NodeClassCase::All,
            timescale: TimescaleCase::Dt,
            k_max: 3,
            capacity_cap: 3,
            deadlines_s: [0.01, 1.0, 10.0],
            models: 13,
            functionalities: 7,
            iq_models: 3,
            exec_time_s: 0.001,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("no node is eligible for case {0}")]
    NoEligibleNode(NodeClassCase),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Requests(#[from] RequestError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Node counts per kind for a tree of about `total` nodes, keeping the
/// default 4:10:30:90 proportions below the root and at least two near-RT
/// RICs.
pub fn counts_for_total(total: usize) -> PerKind<usize> {
    let scale = |w: f64| (w * total as f64 / 135.0).round() as usize;
    let near = scale(4.0).max(2);
    let cu = scale(10.0).max(near);
    let du = scale(30.0).max(cu);
    let ru = total.saturating_sub(1 + near + cu + du).max(du);
    PerKind::from_array([1, near, cu, du, ru])
}

impl ScenarioConfig {
    pub fn with_total_nodes(mut self, total: usize) -> Self {
        self.counts = counts_for_total(total);
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::InvalidConfig(m.into()));
        if self.counts.non_rt_ric != 1 {
            return bad("exactly one non-RT RIC is required");
        }
        let levels = NodeKind::ALL.map(|k| self.counts.get(k));
        if levels.windows(2).any(|w| w[0] == 0 && w[1] > 0) {
            return bad("a node kind is populated while its parent kind is empty");
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return bad("selection probability must be in (0, 1]");
        }
        if self.k_max == 0 || self.k_max > self.functionalities {
            return bad("k_max must be between 1 and the functionality count");
        }
        if self.iq_models > self.models {
            return bad("more I/Q models than models");
        }
        if self.models == 0 || self.functionalities == 0 {
            return bad("catalog must have models and functionalities");
        }
        if self.capacity_cap == 0 {
            return bad("capacity cap must be positive");
        }
        let positive = |xs: &[f64]| xs.iter().all(|&x| x > 0.0 && x.is_finite());
        if !positive(&self.bandwidth_gbps) || !positive(&self.deadlines_s) {
            return bad("bandwidths and deadlines must be positive");
        }
        if self.delay_s.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return bad("delays must be non-negative");
        }
        if NodeKind::ALL.iter().any(|&k| !(self.cores.get(k) >= 0.0)) {
            return bad("cores must be non-negative");
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn topology_rng(&self) -> ChaCha8Rng {
        self.rng(1)
    }

    pub fn catalog_rng(&self) -> ChaCha8Rng {
        self.rng(2)
    }

    pub fn request_rng(&self) -> ChaCha8Rng {
        self.rng(3)
    }
}

fn node_prefix(kind: NodeKind) -> &'static str {
    match kind {
        NodeKind::NonRtRic => "nonrt",
        NodeKind::NearRtRic => "nearrt",
        NodeKind::Cu => "cu",
        NodeKind::Du => "du",
        NodeKind::Ru => "ru",
    }
}

/// Random tree with the configured number of nodes per kind; every node
/// below the root hangs under a uniformly chosen node of the kind above.
pub fn generate_topology<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Topology, ScenarioError> {
    cfg.validate()?;
    let mut nodes = Vec::with_capacity(cfg.counts.total());
    let mut links = Vec::new();
    let mut above: Vec<String> = Vec::new();
    for kind in NodeKind::ALL {
        let level = kind.level();
        let res = ResourceVector::new().with(CPU, cfg.cores.get(kind));
        let mut this_level = Vec::with_capacity(cfg.counts.get(kind));
        for j in 0..cfg.counts.get(kind) {
            let id = format!("{}-{j}", node_prefix(kind));
            let parent = if level == 0 {
                None
            } else {
                Some(above[rng.random_range(0..above.len())].clone())
            };
            if let Some(p) = &parent {
                links.push(Link::new(
                    p,
                    &id,
                    cfg.bandwidth_gbps[level - 1] * 1e9 / 8.0,
                    cfg.delay_s[level - 1],
                ));
            }
            nodes.push(Node::new(&id, kind, res.clone(), parent.as_deref()));
            this_level.push(id);
        }
        if this_level.is_empty() {
            break;
        }
        above = this_level;
    }
    Ok(Topology::build(nodes, links)?)
}

/// Default catalog: each model offers one to three random functionalities
/// (every functionality is covered), needs one core, runs in the configured
/// execution time everywhere, and fully suits every functionality it offers.
pub fn default_catalog<R: Rng>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Catalog, ScenarioError> {
    cfg.validate()?;
    let funcs: Vec<String> = (0..cfg.functionalities).map(|f| format!("f{f}")).collect();
    let mut offered: Vec<Vec<usize>> = (0..cfg.models)
        .map(|_| {
            let k = rng.random_range(1..=3.min(cfg.functionalities));
            let mut v = sample(rng, cfg.functionalities, k).into_vec();
            v.sort_unstable();
            v
        })
        .collect();
    // hand any functionality nobody offers to a random model
    for f in 0..cfg.functionalities {
        if !offered.iter().any(|o| o.contains(&f)) {
            let m = rng.random_range(0..cfg.models);
            offered[m].push(f);
            offered[m].sort_unstable();
        }
    }
    let mut order: Vec<usize> = (0..cfg.models).collect();
    order.shuffle(rng);
    let iq: Vec<usize> = order[..cfg.iq_models].to_vec();

    let width = cfg.models.saturating_sub(1).to_string().len().max(2);
    let models = offered
        .iter()
        .enumerate()
        .map(|(m, fs)| {
            let input = if iq.contains(&m) {
                InputType {
                    id: "iq".into(),
                    size_bytes: 1000,
                }
            } else {
                InputType {
                    id: "metrics".into(),
                    size_bytes: 100,
                }
            };
            let gammas: Vec<(&str, f64)> = fs.iter().map(|&f| (funcs[f].as_str(), 1.0)).collect();
            ModelSpec::uniform(
                &format!("m{m:0width$}"),
                &gammas,
                input,
                ResourceVector::new().with(CPU, 1.0),
                1.0,
                cfg.exec_time_s,
            )
        })
        .collect();
    Ok(Catalog::new(funcs, models)?)
}

/// Random requests following the configured node-class and timescale cases.
pub fn generate_requests<R: Rng>(
    cfg: &ScenarioConfig,
    topology: &Topology,
    catalog: &Catalog,
    rng: &mut R,
) -> Result<RequestSet, ScenarioError> {
    cfg.validate()?;
    let eligible: Vec<_> = topology
        .indices()
        .filter(|&d| cfg.case.eligible(topology.kind(d)))
        .collect();
    if eligible.is_empty() {
        return Err(ScenarioError::NoEligibleNode(cfg.case));
    }
    let nf = catalog.functionalities().len();
    let k_max = cfg.k_max.min(nf);
    let width = cfg.requests.saturating_sub(1).to_string().len().max(2);
    let mut out = Vec::with_capacity(cfg.requests);
    for i in 0..cfg.requests {
        let targets = loop {
            let picked: Vec<_> = eligible
                .iter()
                .copied()
                .filter(|_| rng.random::<f64>() < cfg.p)
                .collect();
            if !picked.is_empty() {
                break picked;
            }
        };
        let k = rng.random_range(1..=k_max);
        let mut funcs = sample(rng, nf, k).into_vec();
        funcs.sort_unstable();
        let mut reqs = Vec::with_capacity(k * targets.len());
        for &f in &funcs {
            for &d in &targets {
                let class = cfg.timescale.class_of(rng.random::<f64>());
                let sources: Vec<String> = topology
                    .leaf_descendants(d)
                    .into_iter()
                    .map(|s| topology.node(s).id.clone())
                    .collect();
                let src: Vec<&str> = sources.iter().map(String::as_str).collect();
                reqs.push(Requirement::new(
                    catalog.functionalities()[f].as_str(),
                    &topology.node(d).id,
                    1.0,
                    cfg.deadlines_s[class],
                    &src,
                ));
            }
        }
        out.push(Request::new(&format!("req-{i:0width$}"), 1.0, reqs));
    }
    Ok(RequestSet::new(out)?)
}

/// Topology, catalog and requests drawn from their seeded streams, bundled
/// into an instance with the configured capacity cap and sharing flag.
pub fn generate_instance(cfg: &ScenarioConfig, sharing: bool) -> Result<Instance, ScenarioError> {
    let topology = generate_topology(cfg, &mut cfg.topology_rng())?;
    let catalog = default_catalog(cfg, &mut cfg.catalog_rng())?;
    let requests = generate_requests(cfg, &topology, &catalog, &mut cfg.request_rng())?;
    Ok(Instance::new(
        topology,
        catalog,
        requests,
        InstanceOptions {
            capacity_cap: Some(cfg.capacity_cap),
            sharing,
            big_m: None,
        },
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::requests::validate_request;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};

    #[test]
    fn default_topology_shape() {
        let cfg = ScenarioConfig::default();
        let t = generate_topology(&cfg, &mut cfg.topology_rng()).unwrap();
        assert_eq!(t.len(), 135);
        for kind in NodeKind::ALL {
            let n = t.indices().filter(|&d| t.kind(d) == kind).count();
            assert_eq!(n, cfg.counts.get(kind));
        }
        let ru = t.get("ru-0").unwrap();
        let path: Vec<_> = std::iter::once(ru).chain(t.ancestors(ru)).collect();
        assert_eq!(path.len(), 5);
        let pm = t.path_metrics_ix(ru, t.root()).unwrap();
        assert!((pm.delay_s - 0.026).abs() < 1e-12);
        assert_eq!(pm.bandwidth_bps, 20e9 / 8.0);
        for l in t.links() {
            let child = t.ix(&l.b).unwrap();
            let lvl = t.kind(child).level();
            assert_eq!(l.bandwidth_bps, cfg.bandwidth_gbps[lvl - 1] * 1e9 / 8.0);
            assert_eq!(l.delay_s, cfg.delay_s[lvl - 1]);
        }
    }

    #[test]
    fn single_path_topology() {
        let cfg = ScenarioConfig {
            counts: PerKind::from_array([1, 1, 1, 1, 1]),
            ..ScenarioConfig::default()
        };
        let t = generate_topology(&cfg, &mut cfg.topology_rng()).unwrap();
        let ru = t.get("ru-0").unwrap();
        let ids: Vec<_> = t.ancestors(ru).map(|a| t.node(a).id.clone()).collect();
        assert_eq!(ids, ["du-0", "cu-0", "nearrt-0", "nonrt-0"]);
    }

    #[test]
    fn catalog_shape() {
        let cfg = ScenarioConfig::default();
        let c = default_catalog(&cfg, &mut cfg.catalog_rng()).unwrap();
        assert_eq!(c.models().len(), 13);
        assert_eq!(c.functionalities().len(), 7);
        let iq = c.models().iter().filter(|m| m.input.id == "iq").count();
        assert_eq!(iq, 3);
        for m in c.models() {
            let size = if m.input.id == "iq" { 1000 } else { 100 };
            assert_eq!(m.input.size_bytes, size);
            assert_eq!(m.demand.get(CPU), 1.0);
        }
        for f in c.functionalities() {
            assert!(c.offering(f).count() >= 1, "{f} uncovered");
        }
        let t = generate_topology(&cfg, &mut cfg.topology_rng()).unwrap();
        for m in c.models() {
            for f in c.functionalities() {
                for kind in NodeKind::ALL {
                    let d = t.indices().find(|&d| t.kind(d) == kind).unwrap();
                    let beta = m.suitability_at(f, t.node(d));
                    assert_eq!(beta, if m.offers(f) { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn ro_requests_avoid_rics() {
        let cfg = ScenarioConfig {
            case: NodeClassCase::Ro,
            p: 0.2,
            ..ScenarioConfig::default()
        };
        let inst = generate_instance(&cfg, true).unwrap();
        for r in inst.requests().requests() {
            for q in &r.requirements {
                let d = inst.topology().ix(&q.d).unwrap();
                assert!(inst.topology().kind(d).is_ran());
            }
        }
    }

    #[test]
    fn single_node_forced_selection() {
        let cfg = ScenarioConfig {
            counts: PerKind::from_array([1, 0, 0, 0, 0]),
            p: 1.0,
            ..ScenarioConfig::default()
        };
        let inst = generate_instance(&cfg, true).unwrap();
        assert_eq!(inst.requests().len(), 20);
        for r in inst.requests().requests() {
            assert!(r.requirements.iter().all(|q| q.d == "nonrt-0"));
            assert!(r.requirements.iter().all(|q| q.data_sources == ["nonrt-0"]));
        }
        let er = ScenarioConfig {
            case: NodeClassCase::Er,
            ..cfg
        };
        assert!(matches!(
            generate_instance(&er, true),
            Err(ScenarioError::NoEligibleNode(NodeClassCase::Er))
        ));
    }

    #[test]
    fn ull_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hist = [0usize; 3];
        let n = 10_000;
        for _ in 0..n {
            hist[TimescaleCase::Ull.class_of(rng.random())] += 1;
        }
        let freq = hist.map(|h| h as f64 / n as f64);
        assert!((freq[0] - 0.6).abs() < 0.02, "{freq:?}");
        assert!((freq[1] - 0.4).abs() < 0.02, "{freq:?}");
        assert_eq!(hist[2], 0);
    }

    #[test]
    fn table_frequencies_chi_square() {
        // chi-square with 2 degrees of freedom; 13.8 is the 0.999 quantile
        for case in [TimescaleCase::Dt, TimescaleCase::Ll] {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let n = 10_000;
            let mut hist = [0usize; 3];
            for _ in 0..n {
                hist[case.class_of(rng.random())] += 1;
            }
            let chi: f64 = (0..3)
                .map(|c| {
                    let e = case.probabilities()[c] * n as f64;
                    (hist[c] as f64 - e).powi(2) / e
                })
                .sum();
            assert!(chi < 13.8, "{case}: {chi}");
        }
    }

    #[test]
    fn timescale_cases_share_targets() {
        let base = ScenarioConfig {
            counts: counts_for_total(31),
            requests: 10,
            seed: 5,
            ..ScenarioConfig::default()
        };
        let dt = generate_instance(&base, true).unwrap();
        let ull = generate_instance(
            &ScenarioConfig {
                timescale: TimescaleCase::Ull,
                ..base.clone()
            },
            true,
        )
        .unwrap();
        for (a, b) in dt.requests().requests().iter().zip(ull.requests().requests()) {
            assert_eq!(a.requirements.len(), b.requirements.len());
            for (x, y) in a.requirements.iter().zip(&b.requirements) {
                assert_eq!((&x.f, &x.d), (&y.f, &y.d));
                // every TTI tuple under DT is also TTI under ULL
                if x.max_latency_s == 0.01 {
                    assert_eq!(y.max_latency_s, 0.01);
                }
            }
        }
    }

    #[test]
    fn size_ladder() {
        for n in [30, 60, 120, 135] {
            let c = counts_for_total(n);
            assert_eq!(c.total(), n, "{c:?}");
            assert!(c.near_rt_ric >= 2);
        }
        assert_eq!(counts_for_total(135), ScenarioConfig::default().counts);
    }

    #[test]
    fn bad_configs() {
        let two_roots = ScenarioConfig {
            counts: PerKind::from_array([2, 1, 1, 1, 1]),
            ..ScenarioConfig::default()
        };
        assert!(two_roots.validate().is_err());
        let gap = ScenarioConfig {
            counts: PerKind::from_array([1, 0, 1, 1, 1]),
            ..ScenarioConfig::default()
        };
        assert!(gap.validate().is_err());
        let p0 = ScenarioConfig {
            p: 0.0,
            ..ScenarioConfig::default()
        };
        assert!(p0.validate().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generation_is_deterministic_and_valid(seed in 0u64..10_000, case in 0usize..3, ts in 0usize..3) {
            let cfg = ScenarioConfig {
                counts: counts_for_total(31),
                requests: 10,
                case: NodeClassCase::ALL[case],
                timescale: TimescaleCase::ALL[ts],
                seed,
                ..ScenarioConfig::default()
            };
            let a = generate_instance(&cfg, true).unwrap();
            let b = generate_instance(&cfg, true).unwrap();
            prop_assert_eq!(a.topology().nodes(), b.topology().nodes());
            prop_assert_eq!(a.catalog().models(), b.catalog().models());
            prop_assert_eq!(a.requests(), b.requests());
            for r in a.requests().requests() {
                prop_assert!(validate_request(a.topology(), r).is_ok());
                prop_assert!(!r.requirements.is_empty());
            }
        }
    }
}
