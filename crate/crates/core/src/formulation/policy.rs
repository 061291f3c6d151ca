use super::{AssignmentVar, Instance};
use crate::ids::{ModelIx, NodeIx, RequestIx};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Instance `k` of model `m` on `host`, with its usage count `n` and
/// activation flag `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub model: ModelIx,
    pub k: u32,
    pub host: NodeIx,
    pub n: u32,
    pub z: bool,
}

/// Assignment (`x`), acceptance (`y`) and placement (`n`, `z`) decisions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrchestrationPolicy {
    pub active: Vec<AssignmentVar>,
    pub accepted: BTreeSet<RequestIx>,
    pub placements: Vec<Placement>,
}

impl OrchestrationPolicy {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a policy whose placements are the usage-count aggregation of
    /// `active`, with `z = 1` exactly where `n >= 1`.
    pub fn from_assignments(mut active: Vec<AssignmentVar>, accepted: BTreeSet<RequestIx>) -> Self {
        active.sort();
        let placements = usage_counts(&active)
            .into_iter()
            .map(|((model, k, host), n)| Placement {
                model,
                k,
                host,
                n,
                z: true,
            })
            .collect();
        Self {
            active,
            accepted,
            placements,
        }
    }

    /// Placements with `z = 1`.
    pub fn active_placements(&self) -> impl Iterator<Item = &Placement> {
        self.placements.iter().filter(|p| p.z)
    }
}

/// `n_{m,k,d}` recomputed from the active assignment variables.
pub(crate) fn usage_counts(active: &[AssignmentVar]) -> BTreeMap<(ModelIx, u32, NodeIx), u32> {
    let mut counts = BTreeMap::new();
    for v in active {
        *counts.entry((v.model, v.k, v.host)).or_insert(0) += 1;
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentDoc {
    pub request: String,
    pub f: String,
    pub d: String,
    pub model: String,
    pub k: u32,
    pub host: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementDoc {
    pub model: String,
    pub k: u32,
    pub host: String,
    pub n: u32,
    pub z: bool,
}

/// Policy in terms of string identifiers, as exchanged in JSON files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyDoc {
    pub accepted: Vec<String>,
    pub active: Vec<AssignmentDoc>,
    pub placements: Vec<PlacementDoc>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyDocError {
    #[error("unknown request `{0}`")]
    UnknownRequest(String),
    #[error("unknown functionality `{0}`")]
    UnknownFunctionality(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error(transparent)]
    Topology(#[from] crate::netmodel::TopologyError),
}

impl Instance {
    pub fn policy_to_doc(&self, p: &OrchestrationPolicy) -> PolicyDoc {
        PolicyDoc {
            accepted: p
                .accepted
                .iter()
                .map(|&r| self.request_id(r).to_string())
                .collect(),
            active: p
                .active
                .iter()
                .map(|v| AssignmentDoc {
                    request: self.request_id(v.request).to_string(),
                    f: self.catalog().functionality(v.func).to_string(),
                    d: self.node_name(v.target),
                    model: self.model_name(v.model),
                    k: v.k,
                    host: self.node_name(v.host),
                })
                .collect(),
            placements: p
                .placements
                .iter()
                .map(|pl| PlacementDoc {
                    model: self.model_name(pl.model),
                    k: pl.k,
                    host: self.node_name(pl.host),
                    n: pl.n,
                    z: pl.z,
                })
                .collect(),
        }
    }

    pub fn policy_from_doc(&self, doc: &PolicyDoc) -> Result<OrchestrationPolicy, PolicyDocError> {
        let req = |id: &str| {
            self.request_ix(id)
                .ok_or_else(|| PolicyDocError::UnknownRequest(id.to_string()))
        };
        let model = |id: &str| {
            self.catalog()
                .model_ix(id)
                .ok_or_else(|| PolicyDocError::UnknownModel(id.to_string()))
        };
        let t = self.topology();
        let accepted = doc
            .accepted
            .iter()
            .map(|id| req(id))
            .collect::<Result<BTreeSet<_>, _>>()?;
        let mut active = Vec::with_capacity(doc.active.len());
        for a in &doc.active {
            active.push(AssignmentVar {
                request: req(&a.request)?,
                func: self
                    .catalog()
                    .func_ix(&a.f)
                    .ok_or_else(|| PolicyDocError::UnknownFunctionality(a.f.clone()))?,
                target: t.ix(&a.d)?,
                model: model(&a.model)?,
                k: a.k,
                host: t.ix(&a.host)?,
            });
        }
        let mut placements = Vec::with_capacity(doc.placements.len());
        for p in &doc.placements {
            placements.push(Placement {
                model: model(&p.model)?,
                k: p.k,
                host: t.ix(&p.host)?,
                n: p.n,
                z: p.z,
            });
        }
        Ok(OrchestrationPolicy {
            active,
            accepted,
            placements,
        })
    }
}
