//! Exact solution of the orchestration problem, plus an exhaustive
//! enumeration oracle used to verify it on small instances.

mod bnb;
mod cover;
mod flow;
mod oracle;

pub use bnb::solve_exact;
pub use oracle::{brute_force_oracle, oracle_combinations, ORACLE_LIMIT};

use crate::formulation::{Instance, OrchestrationPolicy, PolicyDoc};
use crate::reduction::PruneMode;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Allow one model instance to serve several tuples. Ignored (treated as
    /// false) when the instance itself disables sharing.
    pub sharing: bool,
    pub prune: PruneMode,
    pub time_limit_s: Option<f64>,
    pub node_limit: Option<u64>,
    /// 0 keeps index order among otherwise equal requests; any other value
    /// applies a seeded permutation.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            sharing: true,
            prune: PruneMode::FpAp,
            time_limit_s: None,
            node_limit: None,
            seed: 0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.time_limit_s.is_some_and(|t| !(t > 0.0)) {
            return Err(SolveError::InvalidOptions("time limit must be positive".into()));
        }
        if self.node_limit == Some(0) {
            return Err(SolveError::InvalidOptions("node limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Best incumbent when a time or node limit stopped the search.
    Feasible,
    /// The request set is empty.
    InfeasibleEmpty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub explored_nodes: u64,
    pub pruned_by_bound: u64,
    pub pruned_by_dominance: u64,
    /// `|x|` of the variable space the search drew its candidates from.
    pub variables: u64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub policy: OrchestrationPolicy,
    pub objective: f64,
    pub status: SolveStatus,
    pub stats: SolveStats,
}

/// JSON form of a [`SolveResult`], with string identifiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResultDoc {
    pub objective: f64,
    pub status: SolveStatus,
    pub policy: PolicyDoc,
    pub stats: SolveStats,
}

impl SolveResult {
    pub fn to_doc(&self, inst: &Instance) -> SolveResultDoc {
        SolveResultDoc {
            objective: self.objective,
            status: self.status,
            policy: inst.policy_to_doc(&self.policy),
            stats: self.stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("search limit reached; best incumbent has objective {}", .0.objective)]
    LimitReached(Box<SolveResult>),
    #[error("brute-force enumeration needs {combinations:.3e} combinations (limit {limit:.0e})")]
    InstanceTooLarge { combinations: f64, limit: f64 },
    #[error("invalid solve options: {0}")]
    InvalidOptions(String),
}

impl SolveError {
    /// The incumbent carried by a limit error, if any.
    pub fn into_incumbent(self) -> Option<SolveResult> {
        match self {
            SolveError::LimitReached(r) => Some(*r),
            _ => None,
        }
    }
}
