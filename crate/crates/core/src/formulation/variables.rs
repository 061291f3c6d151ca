use super::{AssignmentVar, Instance};
use crate::ids::{FuncIx, ModelIx, NodeIx, RequestIx};
use crate::reduction::{is_ap_inactive, is_fp_inactive, PruneMode};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Sizes of the `x`, `y` and `z` variable vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarCounts {
    pub x: u64,
    pub y: u64,
    pub z: u64,
    pub n_opt: u64,
    pub c_max: u32,
}

/// Enumerated assignment variables and their counts.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableSpace {
    pub vars: Vec<AssignmentVar>,
    pub counts: VarCounts,
}

impl VariableSpace {
    pub(crate) fn from_vars(inst: &Instance, vars: Vec<AssignmentVar>) -> Self {
        let counts = counts_with_x(inst, vars.len() as u64);
        Self { vars, counts }
    }
}

fn counts_with_x(inst: &Instance, x: u64) -> VarCounts {
    let mut z = 0u64;
    let mut c_max = 0u32;
    for m in inst.catalog().model_indices() {
        for d in inst.topology().indices() {
            let c = inst.capacity(m, d);
            z += c as u64;
            c_max = c_max.max(c);
        }
    }
    let y = inst.num_requests() as u64;
    VarCounts {
        x,
        y,
        z,
        n_opt: x + y + z,
        c_max,
    }
}

/// Full variable space: one variable per `(i, f, d)` tuple times
/// `(m, d', k)` placement slot, in lexicographic `(i, f, d, m, d', k)` order.
pub fn enumerate_variables(inst: &Instance) -> VariableSpace {
    enumerate_variables_pruned(inst, PruneMode::None)
}

/// Variable space with the selected pruning predicates applied during
/// enumeration, so pruned variables are never materialised.
pub fn enumerate_variables_pruned(inst: &Instance, mode: PruneMode) -> VariableSpace {
    let (nr, nf, nd, nm) = (
        inst.num_requests(),
        inst.num_functionalities(),
        inst.num_nodes(),
        inst.num_models(),
    );
    let mut vars = Vec::new();
    for i in (0..nr).map(RequestIx::new) {
        for f in (0..nf).map(FuncIx::new) {
            for d in (0..nd).map(NodeIx::new) {
                if mode.fp() && inst.slot(i, f, d).is_none() {
                    continue;
                }
                for m in (0..nm).map(ModelIx::new) {
                    for host in (0..nd).map(NodeIx::new) {
                        let cap = inst.capacity(m, host);
                        if cap == 0 {
                            continue;
                        }
                        let probe = AssignmentVar {
                            request: i,
                            func: f,
                            target: d,
                            model: m,
                            k: 1,
                            host,
                        };
                        if (mode.fp() && is_fp_inactive(inst, &probe))
                            || (mode.ap() && is_ap_inactive(inst, &probe))
                        {
                            continue;
                        }
                        vars.extend((1..=cap).map(|k| AssignmentVar { k, ..probe }));
                    }
                }
            }
        }
    }
    VariableSpace::from_vars(inst, vars)
}

/// Counts of the (pruned) variable space without materialising it.
pub fn count_variables(inst: &Instance, mode: PruneMode) -> VarCounts {
    let t = inst.topology();
    let (nr, nf) = (inst.num_requests() as u64, inst.num_functionalities() as u64);
    // sum over models of C[m][d'] for every host d'
    let host_cap: Vec<u64> = t
        .indices()
        .map(|d| inst.catalog().model_indices().map(|m| inst.capacity(m, d) as u64).sum())
        .collect();
    let x = match mode {
        PruneMode::None => nr * nf * t.len() as u64 * host_cap.iter().sum::<u64>(),
        PruneMode::Ap => {
            let per_target: u64 = t
                .indices()
                .map(|d| {
                    t.indices()
                        .filter(|&h| t.reachable_ix(d, h))
                        .map(|h| host_cap[h.idx()])
                        .sum::<u64>()
                })
                .sum();
            nr * nf * per_target
        }
        PruneMode::Fp | PruneMode::FpAp => {
            // per target, the capacity each model has on the allowed hosts
            let mut reach: HashMap<NodeIx, Vec<u64>> = HashMap::new();
            inst.slots()
                .iter()
                .map(|s| {
                    let caps = reach.entry(s.target).or_insert_with(|| {
                        let hosts: Vec<NodeIx> = if mode == PruneMode::Fp {
                            t.indices().collect()
                        } else {
                            t.reachable_from(s.target)
                        };
                        inst.catalog()
                            .model_indices()
                            .map(|m| hosts.iter().map(|&h| inst.capacity(m, h) as u64).sum())
                            .collect()
                    });
                    inst.catalog()
                        .model_indices()
                        .filter(|&m| inst.offers(m, s.func))
                        .map(|m| caps[m.idx()])
                        .sum::<u64>()
                })
                .sum()
        }
    };
    counts_with_x(inst, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::formulation::InstanceOptions;
    use crate::requests::RequestSet;

    #[test]
    fn t1_counts() {
        let inst = fixtures::t1(true);
        let space = enumerate_variables(&inst);
        assert_eq!(space.counts.x, 256);
        assert_eq!(space.counts.y, 2);
        assert_eq!(space.counts.z, 16);
        assert_eq!(space.counts.n_opt, 274);
        assert_eq!(space.counts.c_max, 4);
        assert_eq!(space.vars.len(), 256);
        let key = |v: &AssignmentVar| (v.request, v.func, v.target, v.model, v.host, v.k);
        assert!(space.vars.windows(2).all(|w| key(&w[0]) < key(&w[1])));
    }

    #[test]
    fn empty_request_set_has_no_x() {
        let inst = crate::formulation::Instance::new(
            fixtures::t1_topology(),
            fixtures::t1_catalog(),
            RequestSet::default(),
            InstanceOptions::default(),
        )
        .unwrap();
        assert_eq!(enumerate_variables(&inst).counts.x, 0);
    }

    #[test]
    fn counting_matches_enumeration() {
        let inst = fixtures::t1(true);
        for mode in PruneMode::ALL {
            assert_eq!(
                count_variables(&inst, mode),
                enumerate_variables_pruned(&inst, mode).counts,
                "{mode:?}"
            );
        }
    }
}
