//! The randomized observability rank test on its own: jets at a random
//! point of F_p, the output-jet Jacobian, and its rank.
//!
//! Run with `cargo run --example rank_engine`.

use expbound::observability::{rank_mod_p, trial_rng, JetEngine};
use expbound::{counterexample, nonobservable_trdeg, PrimeField, RankConfig};

fn main() {
    let field = PrimeField::default();
    // Parameters become constant states; y = x2 is the only output.
    let lifted = counterexample().lift_parameters(false).unwrap().lifted;
    let n = lifted.num_states();
    let engine = JetEngine::new(&lifted, field, n).unwrap();
    let point = engine.sample_point(&mut trial_rng(1, 0, 0));
    println!("random point: {:?}", point.initial_values);

    let jets = engine.solve(&point, None).unwrap();
    println!("output jet y(t) coefficients: {:?}", jets.output_jets[0].value.coeffs);

    let jacobian = engine.jacobian(&point).unwrap();
    println!("Jacobian (rows: Taylor orders of y; columns: {:?})", lifted.states);
    for r in 0..jacobian.rows() {
        println!("  {:?}", jacobian.row(r));
    }
    let rank = rank_mod_p(field, &jacobian);
    println!("rank {rank} of {n}");

    let trdeg = nonobservable_trdeg(&lifted, &RankConfig::default(), 1).unwrap();
    println!("unobservable transcendence degree: {trdeg}");

    // Ranks of the same Jacobian with and without parameter unit rows, as
    // used by the defect computation.
    let params = counterexample().lift_parameters(false).unwrap().param_indices;
    let ranks = engine.ranks_at(&point, &params, true).unwrap();
    println!(
        "rank {} -> {} with parameters observed (assembled through order {})",
        ranks.rank, ranks.augmented_rank, ranks.order_used
    );
}
