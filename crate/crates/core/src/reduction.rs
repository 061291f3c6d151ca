//! Variable-reduction passes run before the search.
//!
//! Function-aware pruning drops variables whose tuple is not requested or
//! whose model does not offer the functionality. Architecture-aware pruning
//! drops variables whose host cannot exchange data with the target node.
//! Neither pass removes a variable that can be 1 in a feasible policy, so the
//! optimum is preserved.

use crate::formulation::{AssignmentVar, Instance, VarCounts, VariableSpace};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum PruneMode {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "fp")]
    Fp,
    #[serde(rename = "ap")]
    Ap,
    #[default]
    #[serde(rename = "fp+ap")]
    FpAp,
}

impl PruneMode {
    pub const ALL: [PruneMode; 4] = [PruneMode::None, PruneMode::Fp, PruneMode::Ap, PruneMode::FpAp];

    pub fn fp(self) -> bool {
        matches!(self, PruneMode::Fp | PruneMode::FpAp)
    }

    pub fn ap(self) -> bool {
        matches!(self, PruneMode::Ap | PruneMode::FpAp)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PruneMode::None => "none",
            PruneMode::Fp => "fp",
            PruneMode::Ap => "ap",
            PruneMode::FpAp => "fp+ap",
        }
    }
}

impl fmt::Display for PruneMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PruneMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(PruneMode::None),
            "fp" => Ok(PruneMode::Fp),
            "ap" => Ok(PruneMode::Ap),
            "fp+ap" | "ap+fp" => Ok(PruneMode::FpAp),
            other => Err(format!("unknown prune mode `{other}` (none|fp|ap|fp+ap)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PruneOrigin {
    Fp,
    Ap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InactiveSet {
    pub vars: Vec<AssignmentVar>,
    pub origin: PruneOrigin,
}

/// `tau_{i,f,d} = 0` or `sigma_{m,f} = 0`.
pub fn is_fp_inactive(inst: &Instance, v: &AssignmentVar) -> bool {
    !inst.tau(v.request, v.func, v.target) || !inst.offers(v.model, v.func)
}

/// Host and target node on different branches.
pub fn is_ap_inactive(inst: &Instance, v: &AssignmentVar) -> bool {
    !inst.topology().reachable_ix(v.target, v.host)
}

pub fn fp_prune(inst: &Instance, space: &VariableSpace) -> InactiveSet {
    InactiveSet {
        vars: space
            .vars
            .iter()
            .filter(|v| is_fp_inactive(inst, v))
            .copied()
            .collect(),
        origin: PruneOrigin::Fp,
    }
}

pub fn ap_prune(inst: &Instance, space: &VariableSpace) -> InactiveSet {
    InactiveSet {
        vars: space
            .vars
            .iter()
            .filter(|v| is_ap_inactive(inst, v))
            .copied()
            .collect(),
        origin: PruneOrigin::Ap,
    }
}

/// `space` minus the union of both inactive sets, with counts recomputed.
pub fn reduced_space(space: &VariableSpace, fp: &InactiveSet, ap: &InactiveSet) -> VariableSpace {
    let drop: HashSet<&AssignmentVar> = fp.vars.iter().chain(ap.vars.iter()).collect();
    let vars: Vec<AssignmentVar> = space
        .vars
        .iter()
        .filter(|v| !drop.contains(v))
        .copied()
        .collect();
    let x = vars.len() as u64;
    VariableSpace {
        vars,
        counts: VarCounts {
            x,
            n_opt: x + space.counts.y + space.counts.z,
            ..space.counts
        },
    }
}
