//! ML/AI model catalog: offered functionalities, input type, resource
//! demand, suitability and performance scores, execution times.

use crate::ids::{FuncIx, ModelIx};
use crate::netmodel::{Node, NodeKind, ResourceVector};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// Floor tolerance so that e.g. `0.3 / 0.1` counts as 3 whole instances.
const FLOOR_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputType {
    pub id: String,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("duplicate model id `{0}`")]
    DuplicateModel(String),
    #[error("duplicate functionality id `{0}`")]
    DuplicateFunctionality(String),
    #[error("model `{model}` offers `{f}`, which is not in the functionality universe")]
    UnknownFunctionality { model: String, f: String },
    #[error("model `{model}`: {what} must be defined exactly for offered functionalities")]
    ScoreKeys { model: String, what: &'static str },
    #[error("model `{model}`: suitability {value} for `{f}` is outside [0,1]")]
    SuitabilityRange { model: String, f: String, value: f64 },
    #[error("model `{model}`: performance score for `{f}` must be >= 0")]
    NegativePerformance { model: String, f: String },
    #[error("model `{model}`: execution times must be finite and >= 0")]
    InvalidExecTime { model: String },
    #[error("model `{model}`: resource demand must be finite and >= 0")]
    InvalidDemand { model: String },
    #[error("model `{model}`: input size must be positive")]
    EmptyInput { model: String },
    #[error("model `{0}` demands no resources, so its capacity is unbounded")]
    UnboundedCapacity(String),
}

/// Descriptor of one pre-trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    pub functionalities: BTreeSet<String>,
    pub input: InputType,
    pub demand: ResourceVector,
    /// Performance score per offered functionality.
    pub perf: BTreeMap<String, f64>,
    /// Suitability per offered functionality and hosting node kind.
    pub suitability: BTreeMap<String, BTreeMap<NodeKind, f64>>,
    /// Per-node suitability overrides, keyed by functionality then node id.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub suitability_overrides: BTreeMap<String, BTreeMap<String, f64>>,
    pub exec_time: BTreeMap<NodeKind, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub exec_time_overrides: BTreeMap<String, f64>,
}

impl ModelSpec {
    /// Model with uniform suitability `beta` on every node kind and the
    /// same execution time everywhere.
    pub fn uniform(
        id: &str,
        offers: &[(&str, f64)],
        input: InputType,
        demand: ResourceVector,
        beta: f64,
        exec_s: f64,
    ) -> Self {
        let functionalities = offers.iter().map(|(f, _)| f.to_string()).collect();
        let perf = offers.iter().map(|(f, g)| (f.to_string(), *g)).collect();
        let suitability = offers
            .iter()
            .map(|(f, _)| (f.to_string(), NodeKind::ALL.iter().map(|k| (*k, beta)).collect()))
            .collect();
        Self {
            id: id.to_string(),
            functionalities,
            input,
            demand,
            perf,
            suitability,
            suitability_overrides: BTreeMap::new(),
            exec_time: NodeKind::ALL.iter().map(|k| (*k, exec_s)).collect(),
            exec_time_overrides: BTreeMap::new(),
        }
    }

    pub fn offers(&self, f: &str) -> bool {
        self.functionalities.contains(f)
    }

    /// Suitability of this model for `f` when hosted at `node`: per-node
    /// override, then per-kind value, then 0.
    pub fn suitability_at(&self, f: &str, node: &Node) -> f64 {
        if let Some(v) = self
            .suitability_overrides
            .get(f)
            .and_then(|m| m.get(&node.id))
        {
            return *v;
        }
        self.suitability
            .get(f)
            .and_then(|m| m.get(&node.kind))
            .copied()
            .unwrap_or(0.0)
    }

    /// Suitability times performance score, or 0 if `f` is not offered.
    pub fn quality_score(&self, f: &str, node: &Node) -> f64 {
        if !self.offers(f) {
            return 0.0;
        }
        self.suitability_at(f, node) * self.perf.get(f).copied().unwrap_or(0.0)
    }

    /// Execution time at `node`: per-node override, then per-kind, then 0.
    pub fn exec_time_at(&self, node: &Node) -> f64 {
        self.exec_time_overrides
            .get(&node.id)
            .or_else(|| self.exec_time.get(&node.kind))
            .copied()
            .unwrap_or(0.0)
    }

    /// Maximum number of concurrent instances `node` can hold: the floor-min
    /// over demanded resource types, clamped to `cap` when given.
    pub fn capacity(&self, node: &Node, cap: Option<u32>) -> Result<u32, CatalogError> {
        capacity_of(&self.demand, &node.resources, cap)
            .ok_or_else(|| CatalogError::UnboundedCapacity(self.id.clone()))
    }

    fn validate(&self, universe: &BTreeSet<&str>) -> Result<(), CatalogError> {
        let model = || self.id.clone();
        for f in &self.functionalities {
            if !universe.contains(f.as_str()) {
                return Err(CatalogError::UnknownFunctionality {
                    model: model(),
                    f: f.clone(),
                });
            }
        }
        let keys_match = |keys: Vec<&String>| {
            keys.len() == self.functionalities.len()
                && keys.iter().all(|k| self.functionalities.contains(*k))
        };
        if !keys_match(self.perf.keys().collect()) {
            return Err(CatalogError::ScoreKeys {
                model: model(),
                what: "performance scores",
            });
        }
        if !keys_match(self.suitability.keys().collect()) {
            return Err(CatalogError::ScoreKeys {
                model: model(),
                what: "suitability",
            });
        }
        if !self
            .suitability_overrides
            .keys()
            .all(|f| self.functionalities.contains(f))
        {
            return Err(CatalogError::ScoreKeys {
                model: model(),
                what: "suitability overrides",
            });
        }
        for (f, g) in &self.perf {
            if !(*g >= 0.0) || !g.is_finite() {
                return Err(CatalogError::NegativePerformance {
                    model: model(),
                    f: f.clone(),
                });
            }
        }
        let betas = self
            .suitability
            .iter()
            .flat_map(|(f, m)| m.values().map(move |b| (f, *b)))
            .chain(
                self.suitability_overrides
                    .iter()
                    .flat_map(|(f, m)| m.values().map(move |b| (f, *b))),
            );
        for (f, b) in betas {
            if !(0.0..=1.0).contains(&b) {
                return Err(CatalogError::SuitabilityRange {
                    model: model(),
                    f: f.clone(),
                    value: b,
                });
            }
        }
        if self
            .exec_time
            .values()
            .chain(self.exec_time_overrides.values())
            .any(|t| !(*t >= 0.0) || !t.is_finite())
        {
            return Err(CatalogError::InvalidExecTime { model: model() });
        }
        if !self.demand.is_valid() {
            return Err(CatalogError::InvalidDemand { model: model() });
        }
        if self.input.size_bytes == 0 {
            return Err(CatalogError::EmptyInput { model: model() });
        }
        Ok(())
    }
}

/// Floor-min of `available / demand` over resource types with positive
/// demand. `None` when the demand is all zero.
pub fn capacity_of(demand: &ResourceVector, available: &ResourceVector, cap: Option<u32>) -> Option<u32> {
    let mut best: Option<f64> = None;
    for (key, need) in demand.iter() {
        if need > 0.0 {
            let c = (available.get(key) / need + FLOOR_EPS).floor().max(0.0);
            best = Some(best.map_or(c, |b: f64| b.min(c)));
        }
    }
    let c = best?;
    let c = if c >= u32::MAX as f64 { u32::MAX } else { c as u32 };
    Some(match cap {
        Some(cap) => c.min(cap),
        None => c,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogDoc {
    pub functionalities: Vec<String>,
    pub models: Vec<ModelSpec>,
}

/// Validated set of models over a fixed functionality universe.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "CatalogDoc", into = "CatalogDoc")]
pub struct Catalog {
    functionalities: Vec<String>,
    models: Vec<ModelSpec>,
    func_index: HashMap<String, FuncIx>,
    model_index: HashMap<String, ModelIx>,
}

impl TryFrom<CatalogDoc> for Catalog {
    type Error = CatalogError;

    fn try_from(doc: CatalogDoc) -> Result<Self, Self::Error> {
        Catalog::new(doc.functionalities, doc.models)
    }
}

impl From<Catalog> for CatalogDoc {
    fn from(c: Catalog) -> Self {
        CatalogDoc {
            functionalities: c.functionalities,
            models: c.models,
        }
    }
}

impl Catalog {
    pub fn new(functionalities: Vec<String>, models: Vec<ModelSpec>) -> Result<Self, CatalogError> {
        let mut func_index = HashMap::new();
        for (i, f) in functionalities.iter().enumerate() {
            if func_index.insert(f.clone(), FuncIx::new(i)).is_some() {
                return Err(CatalogError::DuplicateFunctionality(f.clone()));
            }
        }
        let universe: BTreeSet<&str> = functionalities.iter().map(String::as_str).collect();
        let mut model_index = HashMap::new();
        for (i, m) in models.iter().enumerate() {
            m.validate(&universe)?;
            if model_index.insert(m.id.clone(), ModelIx::new(i)).is_some() {
                return Err(CatalogError::DuplicateModel(m.id.clone()));
            }
        }
        Ok(Self {
            functionalities,
            models,
            func_index,
            model_index,
        })
    }

    pub fn functionalities(&self) -> &[String] {
        &self.functionalities
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn model(&self, ix: ModelIx) -> &ModelSpec {
        &self.models[ix.idx()]
    }

    pub fn functionality(&self, ix: FuncIx) -> &str {
        &self.functionalities[ix.idx()]
    }

    pub fn func_ix(&self, id: &str) -> Option<FuncIx> {
        self.func_index.get(id).copied()
    }

    pub fn model_ix(&self, id: &str) -> Option<ModelIx> {
        self.model_index.get(id).copied()
    }

    pub fn model_indices(&self) -> impl Iterator<Item = ModelIx> {
        (0..self.models.len()).map(ModelIx::new)
    }

    /// Models offering functionality `f`, in catalog order.
    pub fn offering(&self, f: &str) -> impl Iterator<Item = ModelIx> + '_ {
        let f = f.to_string();
        self.model_indices()
            .filter(move |&m| self.models[m.idx()].offers(&f))
    }
}
