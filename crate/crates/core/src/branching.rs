//! Cluster decomposition: the tree is split into one subtree per near-RT
//! RIC (each keeping a copy of the root), every cluster is solved on its own,
//! and requests spanning several clusters may end up partially satisfied.

use crate::formulation::{check_policy, count_variables, Instance, InstanceError, InstanceOptions, PolicyDoc};
use crate::netmodel::{NodeKind, ResourceVector, Topology, TopologyError};
use crate::requests::{Request, RequestSet, Requirement};
use crate::solver::{solve_exact, SolveError, SolveOptions, SolveResult, SolveStats, SolveStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BranchingError {
    #[error("topology has no near-RT RIC")]
    NoNearRtRic,
    #[error("node `{0}` has no near-RT RIC ancestor")]
    Orphan(String),
    #[error("cluster `{cluster}`: {source}")]
    Topology {
        cluster: String,
        source: TopologyError,
    },
    #[error("cluster `{cluster}`: {source}")]
    Instance {
        cluster: String,
        source: InstanceError,
    },
    #[error("cluster `{cluster}`: {source}")]
    Solve { cluster: String, source: SolveError },
    /// A solver limit stopped at least one cluster; the result holds the
    /// incumbents.
    #[error("solver limit reached in at least one cluster")]
    LimitReached(Box<BranchedResult>),
}

/// A near-RT RIC, its whole subtree, and the shared root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    /// Id of the cluster's near-RT RIC.
    pub id: String,
    /// Member node ids in tree order, root first.
    pub members: Vec<String>,
    pub shared_root: String,
}

impl Cluster {
    pub fn contains(&self, node: &str) -> bool {
        self.members.iter().any(|m| m == node)
    }

    fn member_set(&self) -> HashSet<&str> {
        self.members.iter().map(String::as_str).collect()
    }
}

/// One cluster per near-RT RIC, in topology order.
pub fn decompose(t: &Topology) -> Result<Vec<Cluster>, BranchingError> {
    let root = t.root();
    for d in t.indices().filter(|&d| d != root) {
        let under_ric = std::iter::once(d)
            .chain(t.ancestors(d))
            .any(|a| t.kind(a) == NodeKind::NearRtRic);
        if !under_ric {
            return Err(BranchingError::Orphan(t.node(d).id.clone()));
        }
    }
    let clusters: Vec<Cluster> = t
        .indices()
        .filter(|&d| t.kind(d) == NodeKind::NearRtRic)
        .map(|ric| {
            let mut members = vec![t.node(root).id.clone(), t.node(ric).id.clone()];
            members.extend(t.descendants(ric).iter().map(|&d| t.node(d).id.clone()));
            Cluster {
                id: t.node(ric).id.clone(),
                members,
                shared_root: t.node(root).id.clone(),
            }
        })
        .collect();
    if clusters.is_empty() {
        return Err(BranchingError::NoNearRtRic);
    }
    Ok(clusters)
}

/// Requests with at least one requirement targeting a member of `c`, each
/// cut down to those requirements. Requirements on the shared root keep only
/// their data sources inside the cluster and are dropped when none remain.
pub fn cluster_requests(rs: &RequestSet, c: &Cluster) -> RequestSet {
    let members = c.member_set();
    let local: Vec<Request> = rs
        .requests()
        .iter()
        .filter_map(|r| {
            let requirements: Vec<_> = r
                .requirements
                .iter()
                .filter(|q| members.contains(q.d.as_str()))
                .filter_map(|q| {
                    // sources sit above or below the target, so only the
                    // shared root can see nodes of other clusters
                    if q.d != c.shared_root {
                        return Some(q.clone());
                    }
                    let data_sources: Vec<String> = q
                        .data_sources
                        .iter()
                        .filter(|s| members.contains(s.as_str()))
                        .cloned()
                        .collect();
                    (!data_sources.is_empty()).then(|| Requirement {
                        data_sources,
                        ..q.clone()
                    })
                })
                .collect();
            (!requirements.is_empty()).then(|| Request {
                requirements,
                ..r.clone()
            })
        })
        .collect();
    RequestSet::new(local).expect("a subset of a valid request set is valid")
}

/// Sub-instance of one cluster. `root_share` is the fraction of the root's
/// resources given to this cluster.
pub fn cluster_instance(inst: &Instance, c: &Cluster, root_share: f64) -> Result<Instance, BranchingError> {
    let t = inst.topology();
    let members = c
        .members
        .iter()
        .map(|id| t.ix(id))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| BranchingError::Topology {
            cluster: c.id.clone(),
            source,
        })?;
    let root = t.root();
    let overrides = HashMap::from([(root, t.node(root).resources.scaled(root_share))]);
    let sub = t.restrict(&members, &overrides).map_err(|source| BranchingError::Topology {
        cluster: c.id.clone(),
        source,
    })?;
    let requests = cluster_requests(inst.requests(), c);
    inst.restricted(
        sub,
        requests,
        InstanceOptions {
            big_m: None,
            ..inst.options()
        },
    )
    .map_err(|source| BranchingError::Instance {
        cluster: c.id.clone(),
        source,
    })
}

/// Root shares proportional to each cluster's requirement count, or even
/// when no cluster has any.
pub fn root_shares(rs: &RequestSet, clusters: &[Cluster]) -> Vec<f64> {
    let counts: Vec<usize> = clusters
        .iter()
        .map(|c| {
            let members = c.member_set();
            rs.requests()
                .iter()
                .flat_map(|r| &r.requirements)
                .filter(|q| {
                    members.contains(q.d.as_str())
                        && (q.d != c.shared_root || q.data_sources.iter().any(|s| members.contains(s.as_str())))
                })
                .count()
        })
        .collect();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![1.0 / clusters.len() as f64; clusters.len()];
    }
    counts.iter().map(|&n| n as f64 / total as f64).collect()
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub cluster: Cluster,
    pub instance: Instance,
    pub result: SolveResult,
}

#[derive(Debug, Clone)]
pub struct BranchedResult {
    pub per_cluster: Vec<ClusterOutcome>,
    /// Request ids accepted in every cluster they touch.
    pub fully_satisfied: Vec<String>,
    /// Request ids accepted in some but not all clusters they touch.
    pub partially_satisfied: Vec<String>,
    pub rejected: Vec<String>,
    pub wall_time_s: f64,
}

impl BranchedResult {
    /// Sum of the per-cluster objectives. A request split over clusters
    /// counts once per cluster that accepts it.
    pub fn objective(&self) -> f64 {
        self.per_cluster.iter().map(|c| c.result.objective).sum()
    }

    /// Total assignment variables over all clusters.
    pub fn variables(&self) -> u64 {
        self.per_cluster.iter().map(|c| c.result.stats.variables).sum()
    }

    pub fn is_optimal_per_cluster(&self) -> bool {
        self.per_cluster
            .iter()
            .all(|c| c.result.status != SolveStatus::Feasible)
    }

    pub fn to_doc(&self) -> BranchedResultDoc {
        BranchedResultDoc {
            objective: self.objective(),
            clusters: self
                .per_cluster
                .iter()
                .map(|c| ClusterDoc {
                    id: c.cluster.id.clone(),
                    members: c.cluster.members.clone(),
                    requests: c.instance.requests().requests().iter().map(|r| r.id.clone()).collect(),
                    objective: c.result.objective,
                    status: c.result.status,
                    stats: c.result.stats,
                    policy: c.instance.policy_to_doc(&c.result.policy),
                })
                .collect(),
            fully_satisfied: self.fully_satisfied.clone(),
            partially_satisfied: self.partially_satisfied.clone(),
            rejected: self.rejected.clone(),
            wall_time_s: self.wall_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDoc {
    pub id: String,
    pub members: Vec<String>,
    pub requests: Vec<String>,
    pub objective: f64,
    pub status: SolveStatus,
    pub stats: SolveStats,
    pub policy: PolicyDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchedResultDoc {
    pub objective: f64,
    pub clusters: Vec<ClusterDoc>,
    pub fully_satisfied: Vec<String>,
    pub partially_satisfied: Vec<String>,
    pub rejected: Vec<String>,
    pub wall_time_s: f64,
}

/// Sums the resources each cluster's policy takes from the shared root.
fn root_consumption(per_cluster: &[ClusterOutcome]) -> ResourceVector {
    let mut total = ResourceVector::new();
    for c in per_cluster {
        let root = c.instance.topology().root();
        for p in c.result.policy.active_placements().filter(|p| p.host == root) {
            for (key, amount) in c.instance.catalog().model(p.model).demand.iter() {
                total.set(key, total.get(key) + amount);
            }
        }
    }
    total
}

/// Solves every cluster independently (in parallel) and classifies the
/// original requests by how many of their clusters accepted them.
pub fn solve_branched(inst: &Instance, opts: &SolveOptions) -> Result<BranchedResult, BranchingError> {
    let start = Instant::now();
    let clusters = decompose(inst.topology())?;
    let shares = root_shares(inst.requests(), &clusters);
    let subs = clusters
        .iter()
        .zip(&shares)
        .map(|(c, &share)| cluster_instance(inst, c, share))
        .collect::<Result<Vec<_>, _>>()?;

    let solved: Vec<(Result<SolveResult, SolveError>, bool)> = subs
        .par_iter()
        .map(|sub| match solve_exact(sub, opts) {
            Err(SolveError::LimitReached(r)) => (Ok(*r), true),
            other => (other, false),
        })
        .collect();

    let mut per_cluster = Vec::with_capacity(clusters.len());
    let mut limited = false;
    for ((cluster, instance), (res, hit)) in clusters.into_iter().zip(subs).zip(solved) {
        let result = res.map_err(|source| BranchingError::Solve {
            cluster: cluster.id.clone(),
            source,
        })?;
        debug_assert!(check_policy(&instance, &result.policy).is_ok());
        limited |= hit;
        per_cluster.push(ClusterOutcome {
            cluster,
            instance,
            result,
        });
    }

    let used = root_consumption(&per_cluster);
    let root = &inst.topology().node(inst.topology().root()).resources;
    for (key, amount) in used.iter() {
        assert!(
            amount <= root.get(key) + 1e-9,
            "clusters overcommit `{key}` at the root: {amount} > {}",
            root.get(key)
        );
    }

    let (mut fully, mut partially, mut rejected) = (Vec::new(), Vec::new(), Vec::new());
    for r in inst.requests().requests() {
        let (mut touched, mut accepted) = (0, 0);
        for c in &per_cluster {
            if let Some(ix) = c.instance.request_ix(&r.id) {
                touched += 1;
                accepted += usize::from(c.result.policy.accepted.contains(&ix));
            }
        }
        let bucket = match accepted {
            0 => &mut rejected,
            a if a == touched => &mut fully,
            _ => &mut partially,
        };
        bucket.push(r.id.clone());
    }

    let result = BranchedResult {
        per_cluster,
        fully_satisfied: fully,
        partially_satisfied: partially,
        rejected,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    if limited {
        Err(BranchingError::LimitReached(Box::new(result)))
    } else {
        Ok(result)
    }
}

/// Variable counts of every cluster sub-instance, without solving.
pub fn cluster_variable_counts(
    inst: &Instance,
    mode: crate::reduction::PruneMode,
) -> Result<Vec<u64>, BranchingError> {
    let clusters = decompose(inst.topology())?;
    let shares = root_shares(inst.requests(), &clusters);
    clusters
        .iter()
        .zip(shares)
        .map(|(c, s)| Ok(count_variables(&cluster_instance(inst, c, s)?, mode).x))
        .collect()
}

impl BranchingError {
    /// The partial result carried by [`BranchingError::LimitReached`].
    pub fn into_incumbent(self) -> Option<BranchedResult> {
        match self {
            BranchingError::LimitReached(r) => Some(*r),
            _ => None,
        }
    }
}

/// Request ids that appear in at least one cluster.
pub fn touched_requests(rs: &RequestSet, clusters: &[Cluster]) -> BTreeSet<String> {
    clusters
        .iter()
        .flat_map(|c| cluster_requests(rs, c).requests().iter().map(|r| r.id.clone()).collect::<Vec<_>>())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::Catalog;
    use crate::fixtures::{self, CPU};
    use crate::netmodel::{Link, Node};
    use crate::solver::brute_force_oracle;

    /// Root with two near-RT RICs, each above one DU.
    fn two_cluster_topology(du_cores: [f64; 2]) -> Topology {
        let cpu = |c: f64| ResourceVector::new().with(CPU, c);
        Topology::build(
            vec![
                Node::new("R0", NodeKind::NonRtRic, cpu(0.0), None),
                Node::new("N1", NodeKind::NearRtRic, cpu(0.0), Some("R0")),
                Node::new("N2", NodeKind::NearRtRic, cpu(0.0), Some("R0")),
                Node::new("D1", NodeKind::Du, cpu(du_cores[0]), Some("N1")),
                Node::new("D2", NodeKind::Du, cpu(du_cores[1]), Some("N2")),
            ],
            vec![
                Link::new("R0", "N1", 1e6, 0.010),
                Link::new("R0", "N2", 1e6, 0.010),
                Link::new("N1", "D1", 1e6, 0.001),
                Link::new("N2", "D2", 1e6, 0.001),
            ],
        )
        .unwrap()
    }

    fn instance(t: Topology, requests: Vec<Request>) -> Instance {
        let catalog: Catalog = fixtures::t1_catalog();
        Instance::new(t, catalog, RequestSet::new(requests).unwrap(), InstanceOptions::default()).unwrap()
    }

    fn local(id: &str, d: &str) -> Request {
        Request::new(id, 1.0, vec![Requirement::new("f1", d, 0.5, 0.1, &[d])])
    }

    fn spanning(id: &str) -> Request {
        Request::new(
            id,
            1.0,
            vec![
                Requirement::new("f1", "D1", 0.5, 0.1, &["D1"]),
                Requirement::new("f1", "D2", 0.5, 0.1, &["D2"]),
            ],
        )
    }

    #[test]
    fn t1_is_one_cluster() {
        let t = fixtures::t1_topology();
        let c = decompose(&t).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].members, vec!["R0", "N1", "D1", "D2"]);
    }

    #[test]
    fn orphan_nodes_are_rejected() {
        let cpu = ResourceVector::new().with(CPU, 1.0);
        let t = Topology::build(
            vec![
                Node::new("R0", NodeKind::NonRtRic, cpu.clone(), None),
                Node::new("C1", NodeKind::Cu, cpu, Some("R0")),
            ],
            vec![Link::new("R0", "C1", 1e6, 0.01)],
        )
        .unwrap();
        assert!(matches!(decompose(&t), Err(BranchingError::Orphan(n)) if n == "C1"));
        let lone = Topology::build(
            vec![Node::new("R0", NodeKind::NonRtRic, ResourceVector::new(), None)],
            vec![],
        )
        .unwrap();
        assert!(matches!(decompose(&lone), Err(BranchingError::NoNearRtRic)));
    }

    #[test]
    fn spanning_request_is_split() {
        let t = two_cluster_topology([1.0, 1.0]);
        let clusters = decompose(&t).unwrap();
        let rs = RequestSet::new(vec![spanning("i1"), local("i2", "D1")]).unwrap();
        let c1 = cluster_requests(&rs, &clusters[0]);
        let c2 = cluster_requests(&rs, &clusters[1]);
        assert_eq!(c1.len(), 2);
        assert_eq!(c1.get("i1").unwrap().requirements.len(), 1);
        assert_eq!(c1.get("i1").unwrap().requirements[0].d, "D1");
        assert_eq!(c2.len(), 1);
        assert_eq!(c2.get("i1").unwrap().requirements[0].d, "D2");
        assert_eq!(c1.get("i2"), rs.get("i2"));
    }

    #[test]
    fn root_requirement_keeps_local_sources() {
        let t = two_cluster_topology([1.0, 1.0]);
        let clusters = decompose(&t).unwrap();
        let rs = RequestSet::new(vec![Request::new(
            "i1",
            1.0,
            vec![Requirement::new("f1", "R0", 0.5, 1.0, &["D1", "D2"])],
        )])
        .unwrap();
        for (c, src) in clusters.iter().zip(["D1", "D2"]) {
            let local = cluster_requests(&rs, c);
            assert_eq!(local.get("i1").unwrap().requirements[0].data_sources, vec![src]);
        }
    }

    #[test]
    fn partially_satisfied_when_one_side_lacks_cores() {
        // D2 has no cores and the RICs none either, so only D1's half of i1
        // can be served
        let inst = instance(two_cluster_topology([1.0, 0.0]), vec![spanning("i1")]);
        let r = solve_branched(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.partially_satisfied, vec!["i1"]);
        assert!(r.fully_satisfied.is_empty() && r.rejected.is_empty());
        for c in &r.per_cluster {
            let oracle = brute_force_oracle(&c.instance).unwrap();
            assert_eq!(c.result.objective, oracle.objective);
        }
    }

    #[test]
    fn local_requests_fully_satisfied() {
        let inst = instance(two_cluster_topology([2.0, 2.0]), vec![local("i1", "D1"), local("i2", "D2")]);
        let r = solve_branched(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.fully_satisfied, vec!["i1", "i2"]);
        assert_eq!(r.objective(), 2.0);
    }

    #[test]
    fn single_cluster_matches_exact() {
        for sharing in [true, false] {
            let inst = fixtures::t1(sharing);
            let opts = SolveOptions {
                sharing,
                ..SolveOptions::default()
            };
            let b = solve_branched(&inst, &opts).unwrap();
            let e = solve_exact(&inst, &opts).unwrap();
            assert_eq!(b.objective(), e.objective);
        }
    }

    #[test]
    fn root_shares_follow_requirement_counts() {
        let t = two_cluster_topology([1.0, 1.0]);
        let clusters = decompose(&t).unwrap();
        let rs = RequestSet::new(vec![spanning("i1"), local("i2", "D1")]).unwrap();
        assert_eq!(root_shares(&rs, &clusters), vec![2.0 / 3.0, 1.0 / 3.0]);
        let empty = RequestSet::new(vec![]).unwrap();
        assert_eq!(root_shares(&empty, &clusters), vec![0.5, 0.5]);
    }

    #[test]
    fn root_requests_are_replicated() {
        let t = two_cluster_topology([1.0, 1.0]);
        let inst = instance(
            t,
            vec![Request::new(
                "i1",
                1.0,
                vec![Requirement::new("f1", "R0", 0.5, 1.0, &["R0"])],
            )],
        );
        let clusters = decompose(inst.topology()).unwrap();
        assert_eq!(touched_requests(inst.requests(), &clusters).len(), 1);
        // each copy is served from the DU of its own cluster
        let r = solve_branched(&inst, &SolveOptions::default()).unwrap();
        assert_eq!(r.per_cluster.iter().filter(|c| c.instance.num_requests() == 1).count(), 2);
        assert_eq!(r.fully_satisfied, vec!["i1"]);
    }
}
