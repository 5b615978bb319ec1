//! Cross-checks the finite-field engine against exact rational arithmetic on
//! small replicas of the built-in models.
//!
//! Run with `cargo run --release --example oracle_cross_check`.

use expbound::oracle::{exact_rank, oracle_defect, MAX_ORACLE_STATES};
use expbound::{counterexample, defect_with_replicas, generate_family, generic_output_rank, seir_mixture, DefectConfig, Family, PrimeField};

fn main() {
    let field = PrimeField::default();
    let models = [counterexample(), seir_mixture(), generate_family(Family::Cycle, 3).unwrap()];
    for model in &models {
        for r in 1..=3 {
            let replica = model.replicate(r).unwrap();
            let n = replica.num_states() + replica.num_params();
            if n > MAX_ORACLE_STATES {
                break;
            }
            let lifted = replica.lift_parameters(false).unwrap().lifted;
            let engine_rank = generic_output_rank(&lifted, n, 3, 1, field).unwrap();
            let exact = exact_rank(&lifted, n, 1).unwrap();
            let engine_defect = defect_with_replicas(model, r, &DefectConfig::default()).unwrap().defect;
            let exact_defect = oracle_defect(&replica, None, 1).unwrap();
            println!(
                "{:<15} r = {r}: rank {engine_rank} (exact {exact}), defect {engine_defect} (exact {exact_defect})",
                model.name
            );
            assert_eq!((engine_rank, engine_defect), (exact, exact_defect));
        }
    }
}
