//! Exhaustive enumeration of every assignment, filtered by the feasibility
//! checker. Shares no search logic with the branch-and-bound solver, which
//! makes it useful as a reference on tiny instances.

use super::{SolveError, SolveResult, SolveStats, SolveStatus};
use crate::formulation::{check_policy, AssignmentVar, Instance, OrchestrationPolicy};
use crate::ids::RequestIx;
use std::collections::BTreeSet;
use std::time::Instant;

/// Largest number of assignment combinations the oracle will enumerate.
pub const ORACLE_LIMIT: f64 = 1e7;

/// Number of assignment combinations the oracle would enumerate.
pub fn oracle_combinations(inst: &Instance) -> f64 {
    (0..inst.slots().len())
        .map(|s| {
            let mut n = 1.0;
            for m in inst.catalog().model_indices() {
                for host in inst.topology().indices() {
                    if inst.slot_candidate_ok(s, m, host) {
                        n += inst.capacity(m, host) as f64;
                    }
                }
            }
            n
        })
        .product()
}

/// Maximises the objective over all combinations of per-tuple choices
/// (unassigned, or any `(m, k, d')` with `k <= C`). Ties keep the first
/// combination found.
pub fn brute_force_oracle(inst: &Instance) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let options: Vec<Vec<Option<AssignmentVar>>> = (0..inst.slots().len())
        .map(|s| {
            let slot = &inst.slots()[s];
            let mut opts = vec![None];
            for m in inst.catalog().model_indices() {
                for host in inst.topology().indices() {
                    if !inst.slot_candidate_ok(s, m, host) {
                        continue;
                    }
                    for k in 1..=inst.capacity(m, host) {
                        opts.push(Some(AssignmentVar {
                            request: slot.request,
                            func: slot.func,
                            target: slot.target,
                            model: m,
                            k,
                            host,
                        }));
                    }
                }
            }
            opts
        })
        .collect();

    let combinations = oracle_combinations(inst);
    if combinations > ORACLE_LIMIT {
        return Err(SolveError::InstanceTooLarge {
            combinations,
            limit: ORACLE_LIMIT,
        });
    }

    let mut best = OrchestrationPolicy::empty();
    let mut best_value = f64::NEG_INFINITY;
    let mut explored = 0u64;
    let mut digits = vec![0usize; options.len()];
    loop {
        explored += 1;
        let active: Vec<AssignmentVar> = digits
            .iter()
            .zip(&options)
            .filter_map(|(&d, o)| o[d])
            .collect();
        let accepted: BTreeSet<RequestIx> = (0..inst.num_requests())
            .map(RequestIx::new)
            .filter(|&r| inst.request_slots(r).all(|s| digits[s] != 0))
            .collect();
        let policy = OrchestrationPolicy::from_assignments(active, accepted);
        let report = check_policy(inst, &policy);
        if report.is_ok() && report.objective > best_value {
            best_value = report.objective;
            best = policy;
        }

        // odometer step, last tuple fastest
        let mut i = digits.len();
        loop {
            if i == 0 {
                let objective = inst.objective_value(&best);
                return Ok(SolveResult {
                    policy: best,
                    objective,
                    status: if inst.num_requests() == 0 {
                        SolveStatus::InfeasibleEmpty
                    } else {
                        SolveStatus::Optimal
                    },
                    stats: SolveStats {
                        explored_nodes: explored,
                        wall_time_s: start.elapsed().as_secs_f64(),
                        ..SolveStats::default()
                    },
                });
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < options[i].len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn t1_values() {
        assert_eq!(brute_force_oracle(&fixtures::t1(true)).unwrap().objective, 2.0);
        assert_eq!(brute_force_oracle(&fixtures::t1a(true)).unwrap().objective, 2.0);
        assert_eq!(brute_force_oracle(&fixtures::t1a(false)).unwrap().objective, 1.0);
    }
}
