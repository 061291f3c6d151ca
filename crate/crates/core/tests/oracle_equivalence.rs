use oran_orchestrator::fixtures::random_small;
use oran_orchestrator::formulation::check_policy;
use oran_orchestrator::reduction::PruneMode;
use oran_orchestrator::solver::{brute_force_oracle, solve_exact, SolveOptions};

fn agree(seed: u64, sharing: bool) {
    let inst = random_small(seed, sharing, 2e5);
    let oracle = brute_force_oracle(&inst).unwrap();
    for prune in [PruneMode::None, PruneMode::FpAp] {
        let opts = SolveOptions {
            sharing,
            prune,
            seed,
            ..SolveOptions::default()
        };
        let got = solve_exact(&inst, &opts).unwrap();
        assert!(
            (got.objective - oracle.objective).abs() < 1e-9,
            "seed {seed} sharing {sharing} {prune:?}: bnb {} oracle {}",
            got.objective,
            oracle.objective
        );
        let report = check_policy(&inst, &got.policy);
        assert!(report.is_ok(), "seed {seed}: {:?}", report.violations);
    }
}

#[test]
fn exact_matches_oracle_with_sharing() {
    for seed in 0..300 {
        agree(seed, true);
    }
}

#[test]
fn exact_matches_oracle_without_sharing() {
    for seed in 0..300 {
        agree(seed, false);
    }
}

