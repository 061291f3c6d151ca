//! Per-run measurements and their aggregation over seeds.

use super::experiment::RunMode;
use super::{Orchestration, Outcome, TrafficEstimate};
use crate::formulation::{check_policy, count_variables, Instance, OrchestrationPolicy};
use crate::netmodel::NodeKind;
use crate::reduction::PruneMode;
use crate::scenario::{NodeClassCase, TimescaleCase};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `|x|` of the monolithic instance under each pruning mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VariableCounts {
    pub none: u64,
    pub fp: u64,
    pub ap: u64,
    pub fp_ap: u64,
}

impl VariableCounts {
    pub fn of(inst: &Instance) -> Self {
        let c = |m| count_variables(inst, m).x;
        Self {
            none: c(PruneMode::None),
            fp: c(PruneMode::Fp),
            ap: c(PruneMode::Ap),
            fp_ap: c(PruneMode::FpAp),
        }
    }
}

/// Where a run came from in the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunKey {
    pub nodes: usize,
    pub case: NodeClassCase,
    pub timescale: TimescaleCase,
    pub mode: RunMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub nodes: usize,
    pub case: NodeClassCase,
    pub timescale: TimescaleCase,
    pub mode: RunMode,
    pub seed: u64,
    pub requests: usize,
    /// `optimal`, `feasible` (limit hit), `infeasible_empty` or `error`.
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Every returned policy passed the feasibility checker.
    pub certified: bool,
    pub objective: f64,
    pub acceptance_ratio: f64,
    pub partial_acceptance_ratio: f64,
    pub instances: usize,
    /// Instances serving more than one tuple.
    pub shared_instances: usize,
    /// Sum of the demand totals of all placed instances.
    pub resources_used: f64,
    pub utilization: BTreeMap<NodeKind, f64>,
    /// Fraction of placed instances per host kind.
    pub location: BTreeMap<NodeKind, f64>,
    pub variables: VariableCounts,
    /// Sum of the per-cluster `|x|` for branched runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_variables: Option<u64>,
    pub e2_traffic_bytes: u64,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn key(&self) -> RunKey {
        RunKey {
            nodes: self.nodes,
            case: self.case,
            timescale: self.timescale,
            mode: self.mode,
            seed: self.seed,
        }
    }

    /// Record for a run that failed before producing a policy.
    pub fn failed(key: RunKey, requests: usize, error: String) -> Self {
        Self {
            nodes: key.nodes,
            case: key.case,
            timescale: key.timescale,
            mode: key.mode,
            seed: key.seed,
            requests,
            status: "error".into(),
            error: Some(error),
            certified: false,
            objective: 0.0,
            acceptance_ratio: 0.0,
            partial_acceptance_ratio: 0.0,
            instances: 0,
            shared_instances: 0,
            resources_used: 0.0,
            utilization: BTreeMap::new(),
            location: BTreeMap::new(),
            variables: VariableCounts::default(),
            cluster_variables: None,
            e2_traffic_bytes: 0,
            wall_time_s: 0.0,
        }
    }

    /// Placed instances at CU, DU or RU hosts, as a fraction.
    pub fn ran_fraction(&self) -> f64 {
        self.location
            .iter()
            .filter(|(k, _)| k.is_ran())
            .map(|(_, v)| v)
            .sum()
    }
}

/// Tallies of one policy against the host kinds of the full topology.
#[derive(Default)]
struct Usage {
    instances: usize,
    shared: usize,
    used: f64,
    per_kind_used: BTreeMap<NodeKind, f64>,
    per_kind_count: BTreeMap<NodeKind, usize>,
}

impl Usage {
    fn add(&mut self, sub: &Instance, policy: &OrchestrationPolicy, full: &Instance) {
        for p in policy.active_placements() {
            let id = sub.node_name(p.host);
            let kind = full.topology().kind(full.topology().get(&id).expect("cluster nodes exist in the full tree"));
            let demand = sub.catalog().model(p.model).demand.total();
            self.instances += 1;
            self.shared += usize::from(p.n >= 2);
            self.used += demand;
            *self.per_kind_used.entry(kind).or_insert(0.0) += demand;
            *self.per_kind_count.entry(kind).or_insert(0) += 1;
        }
    }
}

/// Measures one orchestration run of `inst`.
pub fn run_metrics(key: RunKey, inst: &Instance, o: &Orchestration, traffic: TrafficEstimate) -> RunRecord {
    let n_req = inst.num_requests();
    let ratio = |k: usize| if n_req == 0 { 0.0 } else { k as f64 / n_req as f64 };
    let mut usage = Usage::default();
    let (status, certified, objective, accepted, partial, cluster_variables) = match &o.outcome {
        Outcome::Exact(r) => {
            usage.add(inst, &r.policy, inst);
            let n = r.policy.accepted.len();
            (
                r.status,
                check_policy(inst, &r.policy).is_ok(),
                r.objective,
                ratio(n),
                ratio(n),
                None,
            )
        }
        Outcome::Branched(b) => {
            let mut certified = true;
            for c in &b.per_cluster {
                usage.add(&c.instance, &c.result.policy, inst);
                certified &= check_policy(&c.instance, &c.result.policy).is_ok();
            }
            let status = if b.is_optimal_per_cluster() {
                crate::solver::SolveStatus::Optimal
            } else {
                crate::solver::SolveStatus::Feasible
            };
            let full = b.fully_satisfied.len();
            (
                status,
                certified,
                b.objective(),
                ratio(full),
                ratio(full + b.partially_satisfied.len()),
                Some(b.variables()),
            )
        }
    };

    let t = inst.topology();
    let mut capacity: BTreeMap<NodeKind, f64> = BTreeMap::new();
    for n in t.nodes() {
        *capacity.entry(n.kind).or_insert(0.0) += n.resources.total();
    }
    let utilization = capacity
        .iter()
        .map(|(&k, &cap)| {
            let used = usage.per_kind_used.get(&k).copied().unwrap_or(0.0);
            (k, if cap > 0.0 { used / cap } else { 0.0 })
        })
        .collect();
    let location = if usage.instances == 0 {
        BTreeMap::new()
    } else {
        usage
            .per_kind_count
            .iter()
            .map(|(&k, &n)| (k, n as f64 / usage.instances as f64))
            .collect()
    };

    RunRecord {
        nodes: key.nodes,
        case: key.case,
        timescale: key.timescale,
        mode: key.mode,
        seed: key.seed,
        requests: n_req,
        status: serde_json::to_value(status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        error: None,
        certified,
        objective,
        acceptance_ratio: accepted,
        partial_acceptance_ratio: partial,
        instances: usage.instances,
        shared_instances: usage.shared,
        resources_used: usage.used,
        utilization,
        location,
        variables: VariableCounts::of(inst),
        cluster_variables,
        e2_traffic_bytes: traffic.e2_bytes,
        wall_time_s: o.outcome.wall_time_s(),
    }
}

/// Means over the runs of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub nodes: usize,
    pub case: NodeClassCase,
    pub timescale: TimescaleCase,
    pub mode: RunMode,
    pub runs: usize,
    pub failures: usize,
    pub limit_hits: usize,
    pub objective: f64,
    pub acceptance_ratio: f64,
    pub acceptance_std: f64,
    pub partial_acceptance_ratio: f64,
    pub resource_utilization: BTreeMap<NodeKind, f64>,
    /// Mean over matched seeds of resources used without sharing divided by
    /// resources used with sharing. Only set on sharing modes whose
    /// no-sharing counterpart ran on the same seeds.
    pub sharing_saving_ratio: Option<f64>,
    pub shared_model_fraction: f64,
    pub location_distribution: BTreeMap<NodeKind, f64>,
    pub variables: VariableCounts,
    pub cluster_variables: Option<f64>,
    pub wall_time_mean_s: f64,
    pub wall_time_max_s: f64,
    pub e2_traffic_bytes: f64,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in xs {
        sum += x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs.iter().copied());
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn mean_map<'a>(maps: impl Iterator<Item = &'a BTreeMap<NodeKind, f64>>) -> BTreeMap<NodeKind, f64> {
    let maps: Vec<_> = maps.collect();
    let mut out = BTreeMap::new();
    for m in &maps {
        for (&k, &v) in m.iter() {
            *out.entry(k).or_insert(0.0) += v;
        }
    }
    out.values_mut().for_each(|v| *v /= maps.len().max(1) as f64);
    out
}

/// Per-seed saving ratios of `mode` against its no-sharing counterpart.
pub fn saving_ratios(records: &[RunRecord], nodes: usize, case: NodeClassCase, ts: TimescaleCase, mode: RunMode) -> Vec<f64> {
    let Some(other) = mode.without_sharing() else {
        return Vec::new();
    };
    let ok = |r: &&RunRecord| r.nodes == nodes && r.case == case && r.timescale == ts && r.error.is_none();
    let without: BTreeMap<u64, f64> = records
        .iter()
        .filter(ok)
        .filter(|r| r.mode == other)
        .map(|r| (r.seed, r.resources_used))
        .collect();
    records
        .iter()
        .filter(ok)
        .filter(|r| r.mode == mode && r.resources_used > 0.0)
        .filter_map(|r| without.get(&r.seed).map(|w| w / r.resources_used))
        .collect()
}

/// One report per `(nodes, case, timescale, mode)` cell, in the order the
/// cells first appear in `records`.
pub fn aggregate(records: &[RunRecord]) -> Vec<MetricsReport> {
    let mut cells: Vec<(usize, NodeClassCase, TimescaleCase, RunMode)> = Vec::new();
    for r in records {
        let cell = (r.nodes, r.case, r.timescale, r.mode);
        if !cells.contains(&cell) {
            cells.push(cell);
        }
    }
    cells
        .into_iter()
        .map(|(nodes, case, timescale, mode)| {
            let all: Vec<&RunRecord> = records
                .iter()
                .filter(|r| (r.nodes, r.case, r.timescale, r.mode) == (nodes, case, timescale, mode))
                .collect();
            let ok: Vec<&RunRecord> = all.iter().copied().filter(|r| r.error.is_none()).collect();
            let acc: Vec<f64> = ok.iter().map(|r| r.acceptance_ratio).collect();
            let ratios = saving_ratios(records, nodes, case, timescale, mode);
            let placed: Vec<&RunRecord> = ok.iter().copied().filter(|r| r.instances > 0).collect();
            let vars = VariableCounts {
                none: mean(ok.iter().map(|r| r.variables.none as f64)).round() as u64,
                fp: mean(ok.iter().map(|r| r.variables.fp as f64)).round() as u64,
                ap: mean(ok.iter().map(|r| r.variables.ap as f64)).round() as u64,
                fp_ap: mean(ok.iter().map(|r| r.variables.fp_ap as f64)).round() as u64,
            };
            MetricsReport {
                nodes,
                case,
                timescale,
                mode,
                runs: all.len(),
                failures: all.len() - ok.len(),
                limit_hits: ok.iter().filter(|r| r.status == "feasible").count(),
                objective: mean(ok.iter().map(|r| r.objective)),
                acceptance_ratio: mean(acc.iter().copied()),
                acceptance_std: std_dev(&acc),
                partial_acceptance_ratio: mean(ok.iter().map(|r| r.partial_acceptance_ratio)),
                resource_utilization: mean_map(ok.iter().map(|r| &r.utilization)),
                sharing_saving_ratio: (!ratios.is_empty()).then(|| mean(ratios.iter().copied())),
                shared_model_fraction: mean(
                    placed
                        .iter()
                        .map(|r| r.shared_instances as f64 / r.instances as f64),
                ),
                location_distribution: mean_map(placed.iter().map(|r| &r.location)),
                variables: vars,
                cluster_variables: mode
                    .branched()
                    .then(|| mean(ok.iter().filter_map(|r| r.cluster_variables.map(|v| v as f64)))),
                wall_time_mean_s: mean(ok.iter().map(|r| r.wall_time_s)),
                wall_time_max_s: ok.iter().map(|r| r.wall_time_s).fold(0.0, f64::max),
                e2_traffic_bytes: mean(ok.iter().map(|r| r.e2_traffic_bytes as f64)),
            }
        })
        .collect()
}

/// Timing fields of plans and reports; these differ between otherwise
/// identical runs.
pub const TIMING_FIELDS: [&str; 3] = ["wall_time_s", "wall_time_mean_s", "wall_time_max_s"];

/// Recursively removes [`TIMING_FIELDS`] from a JSON value.
pub fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            for f in TIMING_FIELDS {
                map.remove(f);
            }
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{orchestrate, SolveMode};
    use crate::fixtures;
    use crate::solver::SolveOptions;

    fn key(mode: RunMode, seed: u64) -> RunKey {
        RunKey {
            nodes: 4,
            case: NodeClassCase::All,
            timescale: TimescaleCase::Dt,
            mode,
            seed,
        }
    }

    fn record(sharing: bool, seed: u64) -> RunRecord {
        let inst = fixtures::t1a(sharing);
        let opts = SolveOptions {
            sharing,
            ..SolveOptions::default()
        };
        let o = orchestrate(&inst, SolveMode::Exact, &opts).unwrap();
        let mode = if sharing { RunMode::Exact } else { RunMode::ExactNoSharing };
        run_metrics(key(mode, seed), &inst, &o, TrafficEstimate::default())
    }

    #[test]
    fn t1a_records() {
        let with = record(true, 0);
        assert_eq!(with.acceptance_ratio, 1.0);
        assert_eq!((with.instances, with.shared_instances), (1, 1));
        assert_eq!(with.location, BTreeMap::from([(NodeKind::NearRtRic, 1.0)]));
        assert_eq!(with.utilization[&NodeKind::NearRtRic], 1.0);
        assert!(with.certified);
        let without = record(false, 0);
        assert_eq!(without.acceptance_ratio, 0.5);
        assert_eq!(without.shared_instances, 0);
    }

    #[test]
    fn saving_ratio_over_matched_seeds() {
        let mut with = record(true, 0);
        let mut without = record(false, 0);
        with.resources_used = 2.0;
        without.resources_used = 5.0;
        let mut unmatched = record(true, 1);
        unmatched.resources_used = 1.0;
        let reports = aggregate(&[with, without, unmatched]);
        assert_eq!(reports.len(), 2);
        assert_eq!(reports[0].sharing_saving_ratio, Some(2.5));
        assert_eq!(reports[1].sharing_saving_ratio, None);
        assert_eq!(reports[0].runs, 2);
    }

    #[test]
    fn single_run_is_its_own_mean() {
        let r = record(true, 0);
        let rep = &aggregate(std::slice::from_ref(&r))[0];
        assert_eq!(rep.acceptance_ratio, r.acceptance_ratio);
        assert_eq!(rep.acceptance_std, 0.0);
        let total: f64 = rep.location_distribution.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn failures_are_counted_not_averaged() {
        let ok = record(true, 0);
        let bad = RunRecord::failed(key(RunMode::Exact, 1), 2, "boom".into());
        let rep = &aggregate(&[ok.clone(), bad])[0];
        assert_eq!((rep.runs, rep.failures), (2, 1));
        assert_eq!(rep.acceptance_ratio, ok.acceptance_ratio);
    }

    #[test]
    fn timing_is_stripped() {
        let mut v = serde_json::json!({"a": {"wall_time_s": 1.0, "b": [{"wall_time_max_s": 2}]}, "c": 3});
        strip_timing(&mut v);
        assert_eq!(v, serde_json::json!({"a": {"b": [{}]}, "c": 3}));
    }
}
