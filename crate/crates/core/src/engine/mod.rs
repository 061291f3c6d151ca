//! End-to-end pipeline from an instance to a deployment plan, plus the
//! metrics and experiment harness built on top of it.

pub mod experiment;
pub mod metrics;
pub mod plan;
pub mod traffic;

pub use experiment::{export_csv, export_json, run_experiment, ExperimentGrid, ExperimentOutput, RunMode};
pub use metrics::{aggregate, run_metrics, MetricsReport, RunRecord, VariableCounts};
pub use plan::{build_branched_plan, build_plan, rehost_to_near_rt, AppDescriptor, AppKind, DeploymentPlan};
pub use traffic::{estimate_control_traffic, TrafficEstimate, TrafficParams};

use crate::branching::{solve_branched, BranchedResult, BranchingError};
use crate::formulation::Instance;
use crate::solver::{solve_exact, SolveError, SolveOptions, SolveResult};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    Exact,
    Branched,
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMode::Exact => "exact",
            SolveMode::Branched => "branched",
        })
    }
}

impl FromStr for SolveMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SolveMode::Exact),
            "branched" => Ok(SolveMode::Branched),
            other => Err(format!("unknown solve mode `{other}` (exact|branched)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Branching(#[from] BranchingError),
    #[error(transparent)]
    Scenario(#[from] crate::scenario::ScenarioError),
    #[error(transparent)]
    Traffic(#[from] traffic::TrafficError),
    #[error("experiment grid is empty: {0}")]
    EmptyGrid(&'static str),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Exact(SolveResult),
    Branched(BranchedResult),
}

impl Outcome {
    /// True when a solver limit cut the search short somewhere.
    pub fn hit_limit(&self) -> bool {
        match self {
            Outcome::Exact(r) => r.status == crate::solver::SolveStatus::Feasible,
            Outcome::Branched(b) => !b.is_optimal_per_cluster(),
        }
    }

    pub fn wall_time_s(&self) -> f64 {
        match self {
            Outcome::Exact(r) => r.stats.wall_time_s,
            Outcome::Branched(b) => b.wall_time_s,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Orchestration {
    pub outcome: Outcome,
    pub plan: DeploymentPlan,
}

/// Solves `inst` and turns the policy into a deployment plan. When a time or
/// node limit stops the solver, the best incumbent is used.
pub fn orchestrate(inst: &Instance, mode: SolveMode, opts: &SolveOptions) -> Result<Orchestration, EngineError> {
    match mode {
        SolveMode::Exact => {
            let result = solve_exact(inst, opts).or_else(|e| match e {
                SolveError::LimitReached(r) => Ok(*r),
                other => Err(other),
            })?;
            let plan = build_plan(inst, &result.policy);
            Ok(Orchestration {
                outcome: Outcome::Exact(result),
                plan,
            })
        }
        SolveMode::Branched => {
            let result = solve_branched(inst, opts).or_else(|e| match e {
                BranchingError::LimitReached(r) => Ok(*r),
                other => Err(other),
            })?;
            let plan = build_branched_plan(inst, &result);
            Ok(Orchestration {
                outcome: Outcome::Branched(result),
                plan,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn plan_matches_placements() {
        for mode in [SolveMode::Exact, SolveMode::Branched] {
            for sharing in [true, false] {
                let inst = fixtures::t1(sharing);
                let opts = SolveOptions {
                    sharing,
                    ..SolveOptions::default()
                };
                let o = orchestrate(&inst, mode, &opts).unwrap();
                let placed = match &o.outcome {
                    Outcome::Exact(r) => r.policy.active_placements().count(),
                    Outcome::Branched(b) => b
                        .per_cluster
                        .iter()
                        .map(|c| c.result.policy.active_placements().count())
                        .sum(),
                };
                assert_eq!(o.plan.apps.len(), placed);
                assert!(!o.outcome.hit_limit());
            }
        }
    }

    #[test]
    fn solve_mode_parses() {
        assert_eq!("branched".parse::<SolveMode>(), Ok(SolveMode::Branched));
        assert!("fast".parse::<SolveMode>().is_err());
        assert_eq!(SolveMode::Exact.to_string(), "exact");
    }
}
