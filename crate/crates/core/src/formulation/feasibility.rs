//! Independent checker for candidate policies. Every constraint of the
//! problem is evaluated directly from its definition, without reusing any
//! solver state.

use super::policy::usage_counts;
use super::{Instance, OrchestrationPolicy};
use crate::ids::{ModelIx, NodeIx};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintId {
    /// Index out of range or `k` beyond the node's capacity for the model.
    Domain,
    /// Each required tuple of an accepted request is served exactly once,
    /// and nothing else is served.
    Coverage,
    Quality,
    Latency,
    /// Per-node, per-resource-type capacity.
    Resources,
    /// Placement usage counts must equal the assignment aggregation.
    UsageCount,
    /// Big-M linking between `n` and `z`.
    BigM,
    /// Host must be reachable from the target node.
    Reachability,
    /// With sharing disabled an instance serves at most one tuple.
    NoSharing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    pub tuple: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub objective: f64,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, c: ConstraintId) -> usize {
        self.violations.iter().filter(|v| v.constraint == c).count()
    }
}

/// `n >= 1 - M(1 - z)` and `n <= M z`.
pub fn big_m_holds(n: u32, z: bool, big_m: f64) -> bool {
    let n = n as f64;
    let z = if z { 1.0 } else { 0.0 };
    n >= 1.0 - big_m * (1.0 - z) && n <= big_m * z
}

/// Checks `p` against every constraint of `inst` and lists the violations.
pub fn check_policy(inst: &Instance, p: &OrchestrationPolicy) -> FeasibilityReport {
    let mut out = Vec::new();
    let mut push = |constraint, tuple: String| out.push(Violation { constraint, tuple });
    let t = inst.topology();
    let (nr, nf, nd, nm) = (
        inst.num_requests(),
        inst.num_functionalities(),
        inst.num_nodes(),
        inst.num_models(),
    );

    for r in &p.accepted {
        if r.idx() >= nr {
            push(ConstraintId::Domain, format!("accepted request #{}", r.0));
        }
    }

    // variables that can be evaluated further
    let mut valid = Vec::with_capacity(p.active.len());
    for v in &p.active {
        let in_range = v.request.idx() < nr
            && v.func.idx() < nf
            && v.target.idx() < nd
            && v.model.idx() < nm
            && v.host.idx() < nd;
        if !in_range || v.k == 0 || v.k > inst.capacity(v.model, v.host) {
            push(ConstraintId::Domain, format!("x {:?}", v));
            continue;
        }
        valid.push(*v);
    }

    // coverage: exactly one var per tuple of an accepted request, none elsewhere
    let mut cover = vec![0u32; inst.slots().len()];
    for v in &valid {
        let label = inst.var_label(v);
        match inst.slot(v.request, v.func, v.target) {
            None => push(ConstraintId::Coverage, format!("{label}: tuple not requested")),
            Some(s) => {
                if !inst.offers(v.model, v.func) {
                    push(ConstraintId::Coverage, format!("{label}: model does not offer functionality"));
                } else {
                    cover[s] += 1;
                }
                if !inst.topology().reachable_ix(v.target, v.host) {
                    push(ConstraintId::Reachability, label.clone());
                }
                if !inst.slot_quality_ok(s, v.model, v.host) {
                    push(ConstraintId::Quality, label.clone());
                }
                if !inst.slot_latency_ok(s, v.model, v.host) {
                    push(ConstraintId::Latency, label);
                }
            }
        }
    }
    for (s, slot) in inst.slots().iter().enumerate() {
        let want = u32::from(p.accepted.contains(&slot.request));
        if cover[s] != want {
            push(
                ConstraintId::Coverage,
                format!(
                    "{}: served {} times, expected {}",
                    inst.slot_label(slot.request, slot.func, slot.target),
                    cover[s],
                    want
                ),
            );
        }
    }

    // usage counts and big-M linking
    let recount = usage_counts(&valid);
    let mut declared: HashMap<(ModelIx, u32, NodeIx), (u32, bool)> = HashMap::new();
    for pl in &p.placements {
        let key = (pl.model, pl.k, pl.host);
        let label = format!("({}, k={}, {})", inst.model_name(pl.model), pl.k, inst.node_name(pl.host));
        if pl.model.idx() >= nm || pl.host.idx() >= nd || pl.k == 0 || pl.k > inst.capacity(pl.model, pl.host) {
            push(ConstraintId::Domain, format!("placement {label}"));
            continue;
        }
        if declared.insert(key, (pl.n, pl.z)).is_some() {
            push(ConstraintId::UsageCount, format!("{label}: listed twice"));
            continue;
        }
        let actual = recount.get(&key).copied().unwrap_or(0);
        if pl.n != actual {
            push(ConstraintId::UsageCount, format!("{label}: n={} but {} tuples assigned", pl.n, actual));
        }
        if !big_m_holds(pl.n, pl.z, inst.big_m()) {
            push(ConstraintId::BigM, format!("{label}: n={}, z={}", pl.n, pl.z));
        }
    }
    for (&(m, k, d), &n) in &recount {
        if !declared.contains_key(&(m, k, d)) {
            push(
                ConstraintId::UsageCount,
                format!("({}, k={}, {}): {} tuples assigned but no placement", inst.model_name(m), k, inst.node_name(d), n),
            );
        }
        if !inst.sharing_enabled() && n > 1 {
            push(
                ConstraintId::NoSharing,
                format!("({}, k={}, {}) serves {} tuples", inst.model_name(m), k, inst.node_name(d), n),
            );
        }
    }

    // resources: sum over active instances per node
    let mut used: BTreeMap<NodeIx, HashMap<&str, f64>> = BTreeMap::new();
    let mut seen = HashSet::new();
    for pl in &p.placements {
        if !pl.z || pl.model.idx() >= nm || pl.host.idx() >= nd || !seen.insert((pl.model, pl.k, pl.host)) {
            continue;
        }
        let per = used.entry(pl.host).or_default();
        for (key, amount) in inst.catalog().model(pl.model).demand.iter() {
            *per.entry(key).or_insert(0.0) += amount;
        }
    }
    for (d, per) in &used {
        let avail = &t.node(*d).resources;
        let mut keys: Vec<_> = per.iter().collect();
        keys.sort_by(|a, b| a.0.cmp(b.0));
        for (key, amount) in keys {
            if *amount > avail.get(key) + 1e-9 {
                push(
                    ConstraintId::Resources,
                    format!("{} {}: {} used of {}", t.node(*d).id, key, amount, avail.get(key)),
                );
            }
        }
    }

    FeasibilityReport {
        objective: inst.objective_value(p),
        violations: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formulation::{AssignmentVar, Placement};
    use crate::ids::RequestIx;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn shared_t1_policy(inst: &Instance) -> OrchestrationPolicy {
        let t = inst.topology();
        let m1 = inst.catalog().model_ix("m1").unwrap();
        let f1 = inst.catalog().func_ix("f1").unwrap();
        let n1 = t.ix("N1").unwrap();
        let active = vec![
            AssignmentVar { request: RequestIx(0), func: f1, target: t.ix("D1").unwrap(), model: m1, k: 1, host: n1 },
            AssignmentVar { request: RequestIx(1), func: f1, target: t.ix("D2").unwrap(), model: m1, k: 1, host: n1 },
        ];
        OrchestrationPolicy::from_assignments(active, BTreeSet::from([RequestIx(0), RequestIx(1)]))
    }

    #[test]
    fn empty_policy_is_feasible() {
        let inst = fixtures::t1(true);
        let rep = check_policy(&inst, &OrchestrationPolicy::empty());
        assert!(rep.is_ok(), "{:?}", rep);
        assert_eq!(rep.objective, 0.0);
    }

    #[test]
    fn shared_policy_depends_on_sharing_flag() {
        let inst = fixtures::t1(true);
        let p = shared_t1_policy(&inst);
        let rep = check_policy(&inst, &p);
        assert!(rep.is_ok(), "{:?}", rep);
        assert_eq!(rep.objective, 2.0);

        let inst = fixtures::t1(false);
        let rep = check_policy(&inst, &p);
        assert_eq!(rep.violations.len(), 1);
        assert_eq!(rep.violations[0].constraint, ConstraintId::NoSharing);
    }

    #[test]
    fn resource_overuse_at_a_du() {
        let inst = fixtures::t1(true);
        let t = inst.topology();
        let d1 = t.ix("D1").unwrap();
        let f1 = inst.catalog().func_ix("f1").unwrap();
        // m1 and m2 each on D1, both single-core; D1 has one core
        let active = vec![AssignmentVar {
            request: RequestIx(0),
            func: f1,
            target: d1,
            model: inst.catalog().model_ix("m1").unwrap(),
            k: 1,
            host: d1,
        }];
        let mut p = OrchestrationPolicy::from_assignments(active, BTreeSet::from([RequestIx(0)]));
        p.accepted.clear();
        p.active.clear();
        p.placements = vec![
            Placement { model: inst.catalog().model_ix("m1").unwrap(), k: 1, host: d1, n: 0, z: true },
            Placement { model: inst.catalog().model_ix("m2").unwrap(), k: 1, host: d1, n: 0, z: true },
        ];
        let rep = check_policy(&inst, &p);
        assert_eq!(rep.count(ConstraintId::Resources), 1);
        // z=1 with n=0 also breaks the big-M lower bound
        assert_eq!(rep.count(ConstraintId::BigM), 2);
    }

    #[test]
    fn coverage_violations() {
        let inst = fixtures::t1(true);
        let mut p = shared_t1_policy(&inst);
        p.accepted.remove(&RequestIx(1));
        let rep = check_policy(&inst, &p);
        assert_eq!(rep.count(ConstraintId::Coverage), 1);

        let mut p = shared_t1_policy(&inst);
        p.active.pop();
        p.placements[0].n = 1;
        let rep = check_policy(&inst, &p);
        assert_eq!(rep.count(ConstraintId::Coverage), 1);
        assert!(rep.violations.iter().all(|v| v.constraint == ConstraintId::Coverage));
    }

    #[test]
    fn unreachable_host_flagged() {
        let inst = fixtures::t1(true);
        let t = inst.topology();
        let v = AssignmentVar {
            request: RequestIx(0),
            func: inst.catalog().func_ix("f1").unwrap(),
            target: t.ix("D1").unwrap(),
            model: inst.catalog().model_ix("m1").unwrap(),
            k: 1,
            host: t.ix("D2").unwrap(),
        };
        let p = OrchestrationPolicy::from_assignments(vec![v], BTreeSet::from([RequestIx(0)]));
        let rep = check_policy(&inst, &p);
        assert_eq!(rep.count(ConstraintId::Reachability), 1);
        assert_eq!(rep.count(ConstraintId::Latency), 1);
    }

    proptest! {
        #[test]
        fn big_m_encodes_activation(n in 0u32..200, z: bool, slack in 1.0f64..1000.0) {
            // any M strictly above the largest possible n
            let m = 200.0 + slack;
            prop_assert_eq!(big_m_holds(n, z, m), z == (n >= 1));
        }

        #[test]
        fn value_scaling(scale in 0.1f64..100.0, accept_first: bool, accept_second: bool) {
            let inst = fixtures::t1(true);
            let mut p = shared_t1_policy(&inst);
            if !accept_first { p.accepted.remove(&RequestIx(0)); }
            if !accept_second { p.accepted.remove(&RequestIx(1)); }
            let base = check_policy(&inst, &p);

            let rs: Vec<crate::requests::Request> = inst.requests().clone().into();
            let rs = rs.into_iter().map(|mut r| { r.value *= scale; r }).collect();
            let scaled_inst = Instance::new(
                inst.topology().clone(),
                inst.catalog().clone(),
                crate::requests::RequestSet::new(rs).unwrap(),
                inst.options(),
            ).unwrap();
            let scaled = check_policy(&scaled_inst, &p);
            prop_assert!((scaled.objective - base.objective * scale).abs() < 1e-9);
            prop_assert_eq!(scaled.is_ok(), base.is_ok());
        }
    }
}
