//! The orchestration problem: assignment variables, per-assignment quality
//! and latency evaluation, resource coupling, and a full feasibility checker
//! for candidate policies.
//!
//! An [`Instance`] resolves every string identifier of its topology, catalog
//! and requests into dense indices once, and precomputes the capacity table
//! `C[m][d]`. Each `(request, functionality, target node)` requirement is a
//! [`Slot`]; a binary assignment variable binds a slot to instance `k` of
//! model `m` on host `d'`.

mod bundle;
mod feasibility;
mod policy;
mod variables;

pub use bundle::{BundleOptions, InstanceBundle};
pub use feasibility::{big_m_holds, check_policy, ConstraintId, FeasibilityReport, Violation};
pub use policy::{AssignmentDoc, OrchestrationPolicy, Placement, PlacementDoc, PolicyDoc};
pub use variables::{count_variables, enumerate_variables, enumerate_variables_pruned, VarCounts, VariableSpace};

use crate::catalog::{capacity_of, Catalog, CatalogError};
use crate::ids::{FuncIx, ModelIx, NodeIx, RequestIx};
use crate::netmodel::{Topology, TopologyError};
use crate::requests::{validate_request, Direction, RequestSet, ValidationReport};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::ops::Range;
use thiserror::Error;

/// Absolute slack applied to the latency and quality comparisons.
pub const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("request `{}` is invalid: {}", .0.request, .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidRequest(ValidationReport),
    #[error("request `{request}` needs functionality `{f}`, which is not in the catalog")]
    UnknownFunctionality { request: String, f: String },
    #[error("big-M {big_m} must exceed I*F*D = {bound}")]
    BigMTooSmall { big_m: f64, bound: f64 },
    #[error(transparent)]
    Requests(#[from] crate::requests::RequestError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormulationError {
    #[error("no requirement ({request}, {f}, {d}) exists")]
    NoRequirement { request: u32, f: u32, d: u32 },
    #[error("data source `{from}` cannot reach host `{host}`")]
    SourceUnreachable { host: String, from: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceOptions {
    /// Upper clamp on the per-node instance count of every model.
    pub capacity_cap: Option<u32>,
    /// When false, every model instance serves at most one requirement.
    pub sharing: bool,
    /// Big-M constant; defaults to `I*F*D + 1`.
    pub big_m: Option<f64>,
}

impl Default for InstanceOptions {
    fn default() -> Self {
        Self {
            capacity_cap: None,
            sharing: true,
            big_m: None,
        }
    }
}

/// One `(i, f, d)` tuple with `tau = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub request: RequestIx,
    pub func: FuncIx,
    pub target: NodeIx,
    pub sources: Vec<NodeIx>,
    pub min_perf: f64,
    pub direction: Direction,
    pub max_latency_s: f64,
}

/// Binary variable `x^{i,f,d}_{m,k,d'}`; `k` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AssignmentVar {
    pub request: RequestIx,
    pub func: FuncIx,
    pub target: NodeIx,
    pub model: ModelIx,
    pub k: u32,
    pub host: NodeIx,
}

/// A validated problem instance.
#[derive(Debug, Clone)]
pub struct Instance {
    topology: Topology,
    catalog: Catalog,
    requests: RequestSet,
    capacity_cap: Option<u32>,
    sharing_enabled: bool,
    big_m: f64,
    resource_types: Vec<String>,
    capacity: Vec<u32>,
    /// `offers(m, f)`, indexed `m * F + f`.
    offered: Vec<bool>,
    /// Quality score, indexed `(m * F + f) * D + d`.
    quality: Vec<f64>,
    /// Execution time, indexed `m * D + d`.
    exec: Vec<f64>,
    slots: Vec<Slot>,
    slot_index: HashMap<(RequestIx, FuncIx, NodeIx), usize>,
    request_slots: Vec<Range<usize>>,
}

impl Instance {
    pub fn new(
        topology: Topology,
        catalog: Catalog,
        requests: RequestSet,
        opts: InstanceOptions,
    ) -> Result<Self, InstanceError> {
        for r in requests.requests() {
            let report = validate_request(&topology, r);
            if !report.is_ok() {
                return Err(InstanceError::InvalidRequest(report));
            }
        }
        Self::assemble(topology, catalog, requests, opts, None)
    }

    /// Instance over a subset of this one's nodes and a subset of its
    /// requests, reusing the per-node score tables.
    pub(crate) fn restricted(
        &self,
        topology: Topology,
        requests: RequestSet,
        opts: InstanceOptions,
    ) -> Result<Self, InstanceError> {
        Self::assemble(topology, self.catalog.clone(), requests, opts, Some(self))
    }

    fn assemble(
        topology: Topology,
        catalog: Catalog,
        requests: RequestSet,
        opts: InstanceOptions,
        parent: Option<&Instance>,
    ) -> Result<Self, InstanceError> {
        let d = topology.len();
        let bound = (requests.len() * catalog.functionalities().len() * d) as f64;
        let big_m = opts.big_m.unwrap_or(bound + 1.0);
        if !(big_m > bound) {
            return Err(InstanceError::BigMTooSmall { big_m, bound });
        }

        let mut capacity = Vec::with_capacity(catalog.models().len() * d);
        for m in catalog.models() {
            for n in topology.nodes() {
                let c = match capacity_of(&m.demand, &n.resources, opts.capacity_cap) {
                    Some(c) => c,
                    None => opts
                        .capacity_cap
                        .ok_or_else(|| CatalogError::UnboundedCapacity(m.id.clone()))?,
                };
                capacity.push(c);
            }
        }

        let funcs = catalog.functionalities();
        let nf = funcs.len();
        let mut offered = Vec::with_capacity(catalog.models().len() * nf);
        let mut quality = vec![0.0; catalog.models().len() * nf * d];
        let mut exec = Vec::with_capacity(catalog.models().len() * d);
        let origin = match parent {
            Some(p) => topology
                .nodes()
                .iter()
                .map(|n| p.topology.ix(&n.id).map(NodeIx::idx))
                .collect::<Result<Vec<_>, _>>()?,
            None => Vec::new(),
        };
        for (mi, m) in catalog.models().iter().enumerate() {
            for (fi, f) in funcs.iter().enumerate() {
                offered.push(m.offers(f));
                if !m.offers(f) {
                    continue;
                }
                for (di, n) in topology.nodes().iter().enumerate() {
                    quality[(mi * nf + fi) * d + di] = match parent {
                        Some(p) => p.quality[(mi * nf + fi) * p.topology.len() + origin[di]],
                        None => m.quality_score(f, n),
                    };
                }
            }
            match parent {
                Some(p) => exec.extend(origin.iter().map(|&o| p.exec[mi * p.topology.len() + o])),
                None => exec.extend(topology.nodes().iter().map(|n| m.exec_time_at(n))),
            }
        }

        let mut slots = Vec::new();
        let mut slot_index = HashMap::new();
        let mut request_slots = Vec::with_capacity(requests.len());
        for (ri, r) in requests.requests().iter().enumerate() {
            let start = slots.len();
            for req in &r.requirements {
                let func = catalog
                    .func_ix(&req.f)
                    .ok_or_else(|| InstanceError::UnknownFunctionality {
                        request: r.id.clone(),
                        f: req.f.clone(),
                    })?;
                let target = topology.ix(&req.d)?;
                let sources = req
                    .data_sources
                    .iter()
                    .map(|s| topology.ix(s))
                    .collect::<Result<Vec<_>, _>>()?;
                let request = RequestIx::new(ri);
                slot_index.insert((request, func, target), slots.len());
                slots.push(Slot {
                    request,
                    func,
                    target,
                    sources,
                    min_perf: req.min_perf,
                    direction: req.direction,
                    max_latency_s: req.max_latency_s,
                });
            }
            request_slots.push(start..slots.len());
        }

        let resource_types = {
            let mut keys = topology.resource_types();
            for m in catalog.models() {
                keys.extend(m.demand.keys().map(str::to_string));
            }
            keys.sort();
            keys.dedup();
            keys
        };

        Ok(Self {
            topology,
            catalog,
            requests,
            capacity_cap: opts.capacity_cap,
            sharing_enabled: opts.sharing,
            big_m,
            resource_types,
            capacity,
            offered,
            quality,
            exec,
            slots,
            slot_index,
            request_slots,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn requests(&self) -> &RequestSet {
        &self.requests
    }

    pub fn options(&self) -> InstanceOptions {
        InstanceOptions {
            capacity_cap: self.capacity_cap,
            sharing: self.sharing_enabled,
            big_m: Some(self.big_m),
        }
    }

    pub fn capacity_cap(&self) -> Option<u32> {
        self.capacity_cap
    }

    pub fn sharing_enabled(&self) -> bool {
        self.sharing_enabled
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn resource_types(&self) -> &[String] {
        &self.resource_types
    }

    pub fn num_requests(&self) -> usize {
        self.requests.len()
    }

    pub fn num_functionalities(&self) -> usize {
        self.catalog.functionalities().len()
    }

    pub fn num_nodes(&self) -> usize {
        self.topology.len()
    }

    pub fn num_models(&self) -> usize {
        self.catalog.models().len()
    }

    /// `C[m][d]`, including the optional cap.
    pub fn capacity(&self, m: ModelIx, d: NodeIx) -> u32 {
        self.capacity[m.idx() * self.topology.len() + d.idx()]
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, request: RequestIx, func: FuncIx, target: NodeIx) -> Option<usize> {
        self.slot_index.get(&(request, func, target)).copied()
    }

    /// Slot range belonging to request `r`.
    pub fn request_slots(&self, r: RequestIx) -> Range<usize> {
        self.request_slots[r.idx()].clone()
    }

    pub fn request_value(&self, r: RequestIx) -> f64 {
        self.requests.requests()[r.idx()].value
    }

    pub fn request_id(&self, r: RequestIx) -> &str {
        &self.requests.requests()[r.idx()].id
    }

    pub fn request_ix(&self, id: &str) -> Option<RequestIx> {
        self.requests
            .requests()
            .iter()
            .position(|r| r.id == id)
            .map(RequestIx::new)
    }

    pub fn offers(&self, m: ModelIx, f: FuncIx) -> bool {
        self.offered[m.idx() * self.catalog.functionalities().len() + f.idx()]
    }

    /// `tau_{i,f,d}`.
    pub fn tau(&self, i: RequestIx, f: FuncIx, d: NodeIx) -> bool {
        self.slot_index.contains_key(&(i, f, d))
    }

    /// Quality score of model `m` for `f` when hosted at `host`.
    pub fn quality_score(&self, m: ModelIx, f: FuncIx, host: NodeIx) -> f64 {
        let nf = self.catalog.functionalities().len();
        self.quality[(m.idx() * nf + f.idx()) * self.topology.len() + host.idx()]
    }

    /// Data collection time of slot `s` served by model `m` on `host`.
    pub fn slot_collection_time(&self, s: usize, m: ModelIx, host: NodeIx) -> Result<f64, FormulationError> {
        let slot = &self.slots[s];
        let size = self.catalog.model(m).input.size_bytes as f64;
        let n = slot.sources.len() as f64;
        let mut total = 0.0;
        for &src in &slot.sources {
            let pm = self
                .topology
                .path_metrics_ix(host, src)
                .ok_or_else(|| FormulationError::SourceUnreachable {
                    host: self.topology.node(host).id.clone(),
                    from: self.topology.node(src).id.clone(),
                })?;
            total += size / (pm.bandwidth_bps * n) + pm.delay_s;
        }
        Ok(total)
    }

    pub fn exec_time(&self, m: ModelIx, host: NodeIx) -> f64 {
        self.exec[m.idx() * self.topology.len() + host.idx()]
    }

    pub fn slot_latency_ok(&self, s: usize, m: ModelIx, host: NodeIx) -> bool {
        match self.slot_collection_time(s, m, host) {
            Ok(t) => self.latency_within(s, m, host, t),
            Err(_) => false,
        }
    }

    /// Latency check for a collection time computed elsewhere; collection
    /// time depends on the model only through its input size.
    pub(crate) fn latency_within(&self, s: usize, m: ModelIx, host: NodeIx, collection_s: f64) -> bool {
        collection_s + self.exec_time(m, host) <= self.slots[s].max_latency_s + TOLERANCE
    }

    pub fn slot_quality_ok(&self, s: usize, m: ModelIx, host: NodeIx) -> bool {
        let slot = &self.slots[s];
        let chi = slot.direction.sign();
        let score = if self.offers(m, slot.func) {
            self.quality_score(m, slot.func, host)
        } else {
            0.0
        };
        chi * score >= chi * slot.min_perf - TOLERANCE
    }

    /// Whether slot `s` may be bound to model `m` on `host` in isolation:
    /// offered, reachable, quality and latency satisfied, and room for at
    /// least one instance.
    pub fn slot_candidate_ok(&self, s: usize, m: ModelIx, host: NodeIx) -> bool {
        let slot = &self.slots[s];
        self.offers(m, slot.func)
            && self.capacity(m, host) >= 1
            && self.topology.reachable_ix(slot.target, host)
            && self.slot_quality_ok(s, m, host)
            && self.slot_latency_ok(s, m, host)
    }

    fn var_slot(&self, v: &AssignmentVar) -> Result<usize, FormulationError> {
        self.slot(v.request, v.func, v.target)
            .ok_or(FormulationError::NoRequirement {
                request: v.request.0,
                f: v.func.0,
                d: v.target.0,
            })
    }

    /// Data collection time of an assignment (sum over its data sources of
    /// transfer time plus propagation delay).
    pub fn data_collection_time(&self, v: &AssignmentVar) -> Result<f64, FormulationError> {
        self.slot_collection_time(self.var_slot(v)?, v.model, v.host)
    }

    pub fn execution_time(&self, v: &AssignmentVar) -> f64 {
        self.exec_time(v.model, v.host)
    }

    /// Collection plus execution time within the requirement's latency bound.
    /// Unreachable sources make the assignment fail.
    pub fn latency_ok(&self, v: &AssignmentVar) -> bool {
        self.var_slot(v)
            .map(|s| self.slot_latency_ok(s, v.model, v.host))
            .unwrap_or(false)
    }

    /// Quality score compared against the requested level in the requested
    /// direction.
    pub fn quality_ok(&self, v: &AssignmentVar) -> bool {
        self.var_slot(v)
            .map(|s| self.slot_quality_ok(s, v.model, v.host))
            .unwrap_or(false)
    }

    /// Sum of request values over accepted requests.
    pub fn objective_value(&self, p: &OrchestrationPolicy) -> f64 {
        p.accepted
            .iter()
            .filter(|r| r.idx() < self.requests.len())
            .map(|&r| self.request_value(r))
            .sum()
    }

    /// Human-readable `(i, f, d)` tuple.
    pub fn slot_label(&self, request: RequestIx, func: FuncIx, target: NodeIx) -> String {
        let i = if request.idx() < self.requests.len() {
            self.request_id(request).to_string()
        } else {
            format!("#{}", request.0)
        };
        let f = if func.idx() < self.num_functionalities() {
            self.catalog.functionality(func).to_string()
        } else {
            format!("#{}", func.0)
        };
        format!("({i}, {f}, {})", self.node_name(target))
    }

    pub fn var_label(&self, v: &AssignmentVar) -> String {
        format!(
            "{} -> ({}, k={}, {})",
            self.slot_label(v.request, v.func, v.target),
            self.model_name(v.model),
            v.k,
            self.node_name(v.host)
        )
    }

    pub fn model_name(&self, m: ModelIx) -> String {
        if m.idx() < self.num_models() {
            self.catalog.model(m).id.clone()
        } else {
            format!("#{}", m.0)
        }
    }

    pub fn node_name(&self, d: NodeIx) -> String {
        if d.idx() < self.num_nodes() {
            self.topology.node(d).id.clone()
        } else {
            format!("#{}", d.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn var(inst: &Instance, i: &str, f: &str, d: &str, m: &str, k: u32, host: &str) -> AssignmentVar {
        AssignmentVar {
            request: inst.request_ix(i).unwrap(),
            func: inst.catalog().func_ix(f).unwrap(),
            target: inst.topology().ix(d).unwrap(),
            model: inst.catalog().model_ix(m).unwrap(),
            k,
            host: inst.topology().ix(host).unwrap(),
        }
    }

    #[test]
    fn default_big_m_is_ifd_plus_one() {
        let inst = fixtures::t1(true);
        assert_eq!(inst.big_m(), (2 * 2 * 4 + 1) as f64);
        let err = Instance::new(
            fixtures::t1_topology(),
            fixtures::t1_catalog(),
            fixtures::t1_requests(),
            InstanceOptions {
                big_m: Some(16.0),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, InstanceError::BigMTooSmall { .. }));
    }

    #[test]
    fn collection_time_examples() {
        let inst = fixtures::t1(true);
        let at_src = var(&inst, "i1", "f1", "D1", "m1", 1, "D1");
        assert_eq!(inst.data_collection_time(&at_src).unwrap(), 0.0);

        let at_n1 = var(&inst, "i1", "f1", "D1", "m1", 1, "N1");
        let t = inst.data_collection_time(&at_n1).unwrap();
        assert!((t - 0.0011).abs() < 1e-15, "{t}");

        // two equidistant sources, each 1 hop away
        let rs = RequestSet::new(vec![crate::requests::Request::new(
            "x",
            1.0,
            vec![crate::requests::Requirement::new("f1", "N1", 0.0, 1.0, &["D1", "D2"])],
        )])
        .unwrap();
        let inst2 = Instance::new(
            fixtures::t1_topology(),
            fixtures::t1_catalog(),
            rs,
            InstanceOptions::default(),
        )
        .unwrap();
        let v = var(&inst2, "x", "f1", "N1", "m1", 1, "N1");
        let t = inst2.data_collection_time(&v).unwrap();
        assert!((t - 0.0021).abs() < 1e-15, "{t}");

        // host D2 cannot collect from D1
        let bad = var(&inst, "i1", "f1", "D1", "m1", 1, "D2");
        assert!(matches!(
            inst.data_collection_time(&bad),
            Err(FormulationError::SourceUnreachable { .. })
        ));
        assert!(!inst.latency_ok(&bad));
    }

    #[test]
    fn execution_time_lookup() {
        let inst = fixtures::t1(true);
        let v = var(&inst, "i1", "f1", "D1", "m1", 1, "D1");
        assert_eq!(inst.execution_time(&v), 0.001);

        let mut cat = fixtures::t1_catalog();
        let mut models = cat.models().to_vec();
        models[0].exec_time.insert(crate::netmodel::NodeKind::Du, 0.002);
        models[1].exec_time_overrides.insert("D1".into(), 0.0);
        cat = Catalog::new(cat.functionalities().to_vec(), models).unwrap();
        let inst = Instance::new(fixtures::t1_topology(), cat, fixtures::t1_requests(), InstanceOptions::default()).unwrap();
        assert_eq!(inst.execution_time(&var(&inst, "i1", "f1", "D1", "m1", 1, "D1")), 0.002);
        assert_eq!(inst.execution_time(&var(&inst, "i1", "f1", "D1", "m2", 1, "D1")), 0.0);
    }

    #[test]
    fn latency_examples() {
        let inst = fixtures::t1(true);
        assert!(inst.latency_ok(&var(&inst, "i1", "f1", "D1", "m1", 1, "N1")));

        let mut rs: Vec<_> = fixtures::t1_requests().into();
        rs[0].requirements[0].max_latency_s = 0.0;
        rs[1].requirements[0].max_latency_s = f64::INFINITY;
        let inst = Instance::new(
            fixtures::t1_topology(),
            fixtures::t1_catalog(),
            RequestSet::new(rs).unwrap(),
            InstanceOptions::default(),
        )
        .unwrap();
        assert!(!inst.latency_ok(&var(&inst, "i1", "f1", "D1", "m1", 1, "D1")));
        assert!(inst.latency_ok(&var(&inst, "i2", "f1", "D2", "m1", 1, "R0")));
    }

    #[test]
    fn quality_examples() {
        let inst = fixtures::t1(true);
        let v = var(&inst, "i1", "f1", "D1", "m1", 1, "D1");
        assert!(inst.quality_ok(&v));

        let mut rs: Vec<_> = fixtures::t1_requests().into();
        rs[0].requirements[0].direction = Direction::AtMost;
        rs[1].requirements[0].min_perf = 0.0;
        let inst = Instance::new(
            fixtures::t1_topology(),
            fixtures::t1_catalog(),
            RequestSet::new(rs).unwrap(),
            InstanceOptions::default(),
        )
        .unwrap();
        assert!(!inst.quality_ok(&var(&inst, "i1", "f1", "D1", "m1", 1, "D1")));
        assert!(inst.quality_ok(&var(&inst, "i2", "f1", "D2", "m2", 1, "D2")));
    }

    #[test]
    fn unknown_functionality_rejected() {
        let rs = RequestSet::new(vec![crate::requests::Request::new(
            "x",
            1.0,
            vec![crate::requests::Requirement::new("f9", "D1", 0.0, 1.0, &["D1"])],
        )])
        .unwrap();
        let err = Instance::new(fixtures::t1_topology(), fixtures::t1_catalog(), rs, InstanceOptions::default())
            .unwrap_err();
        assert!(matches!(err, InstanceError::UnknownFunctionality { .. }));
    }
}
