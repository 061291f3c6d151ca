//! Conversion of solved policies into deployable application descriptors.

use crate::branching::BranchedResult;
use crate::formulation::{Instance, InstanceBundle, OrchestrationPolicy};
use crate::netmodel::{NodeKind, Topology};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AppKind {
    #[serde(rename = "rApp")]
    RApp,
    #[serde(rename = "xApp")]
    XApp,
    #[serde(rename = "dApp")]
    DApp,
}

impl AppKind {
    pub fn for_host(kind: NodeKind) -> Self {
        match kind {
            NodeKind::NonRtRic => AppKind::RApp,
            NodeKind::NearRtRic => AppKind::XApp,
            NodeKind::Cu | NodeKind::Du | NodeKind::Ru => AppKind::DApp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ServedRequirement {
    pub request: String,
    pub f: String,
    pub d: String,
}

/// A data stream the app subscribes to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subscription {
    pub source: String,
    pub input: String,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppDescriptor {
    pub app_id: String,
    pub app_kind: AppKind,
    pub host: String,
    pub model: String,
    pub k: u32,
    /// Set for plans built from a cluster decomposition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster: Option<String>,
    pub serves: Vec<ServedRequirement>,
    pub subscriptions: Vec<Subscription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub apps: Vec<AppDescriptor>,
    pub policy_hash: String,
    pub instance_hash: String,
}

impl DeploymentPlan {
    pub fn count_by_kind(&self) -> BTreeMap<AppKind, usize> {
        let mut out = BTreeMap::new();
        for a in &self.apps {
            *out.entry(a.app_kind).or_insert(0) += 1;
        }
        out
    }
}

/// Hex SHA-256 of a serialisable value's JSON form.
pub fn json_hash<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("plan inputs serialise");
    hex::encode(Sha256::digest(json))
}

pub fn instance_hash(inst: &Instance) -> String {
    json_hash(&InstanceBundle::from_instance(inst))
}

fn apps_for(inst: &Instance, policy: &OrchestrationPolicy, cluster: Option<&str>) -> Vec<AppDescriptor> {
    let t = inst.topology();
    policy
        .active_placements()
        .map(|p| {
            let spec = inst.catalog().model(p.model);
            let mut serves = Vec::new();
            let mut sources = std::collections::BTreeSet::new();
            for v in policy
                .active
                .iter()
                .filter(|v| (v.model, v.k, v.host) == (p.model, p.k, p.host))
            {
                serves.push(ServedRequirement {
                    request: inst.request_id(v.request).to_string(),
                    f: inst.catalog().functionality(v.func).to_string(),
                    d: inst.node_name(v.target),
                });
                let s = inst
                    .slot(v.request, v.func, v.target)
                    .expect("active variables refer to existing tuples");
                sources.extend(inst.slots()[s].sources.iter().copied());
            }
            serves.sort();
            let subscriptions = sources
                .into_iter()
                .map(|s| Subscription {
                    source: inst.node_name(s),
                    input: spec.input.id.clone(),
                    size_bytes: spec.input.size_bytes,
                })
                .collect();
            let base = format!("{}-{}-{}", spec.id, p.k, inst.node_name(p.host));
            AppDescriptor {
                app_id: match cluster {
                    Some(c) => format!("{c}/{base}"),
                    None => base,
                },
                app_kind: AppKind::for_host(t.kind(p.host)),
                host: inst.node_name(p.host),
                model: spec.id.clone(),
                k: p.k,
                cluster: cluster.map(str::to_string),
                serves,
                subscriptions,
            }
        })
        .collect()
}

/// One descriptor per active `(m, k, d')` placement of `policy`.
pub fn build_plan(inst: &Instance, policy: &OrchestrationPolicy) -> DeploymentPlan {
    DeploymentPlan {
        apps: apps_for(inst, policy, None),
        policy_hash: json_hash(&inst.policy_to_doc(policy)),
        instance_hash: instance_hash(inst),
    }
}

/// Concatenates the plans of every cluster, in cluster order. Instances of
/// the same model on the shared root stay separate apps per cluster.
pub fn build_branched_plan(inst: &Instance, result: &BranchedResult) -> DeploymentPlan {
    let mut apps = Vec::new();
    let mut docs = Vec::new();
    for c in &result.per_cluster {
        apps.extend(apps_for(&c.instance, &c.result.policy, Some(&c.cluster.id)));
        docs.push(c.instance.policy_to_doc(&c.result.policy));
    }
    DeploymentPlan {
        apps,
        policy_hash: json_hash(&docs),
        instance_hash: instance_hash(inst),
    }
}

/// The same plan with every app below a near-RT RIC moved up to that RIC.
/// Apps on the root keep their host.
pub fn rehost_to_near_rt(plan: &DeploymentPlan, t: &Topology) -> DeploymentPlan {
    let mut out = plan.clone();
    for app in &mut out.apps {
        let Some(host) = t.get(&app.host) else { continue };
        if let Some(ric) = std::iter::once(host)
            .chain(t.ancestors(host))
            .find(|&a| t.kind(a) == NodeKind::NearRtRic)
        {
            app.host = t.node(ric).id.clone();
            app.app_kind = AppKind::XApp;
        }
    }
    out
}
