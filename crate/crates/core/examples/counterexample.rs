//! The two-state counterexample `x1' = 0, x2' = x1*x2 + mu1*x1 + mu2, y = x2`:
//! neither parameter is identifiable from one experiment, both are from two.
//!
//! Run with `cargo run --example counterexample`.

use expbound::{compute_experiment_bound, counterexample, print_model, BoundConfig};

fn main() {
    let model = counterexample();
    print!("{}", print_model(&model));

    let cfg = BoundConfig {
        seed: 42,
        ..BoundConfig::default()
    };
    let result = compute_experiment_bound(&model, &cfg).expect("analysis succeeds");
    println!();
    for entry in &result.defect_sequence {
        match &entry.report {
            None => println!("d_{} = {} (number of parameters)", entry.replicas, entry.defect),
            Some(r) => println!(
                "d_{} = {}  rank without/with parameters observed: {} / {} of {}",
                entry.replicas, entry.defect, r.rank_sigma_prime, r.rank_sigma_double_prime, r.num_variables
            ),
        }
    }
    println!(
        "NEL = {}, NEG ∈ {{{}, {}}}",
        result.nel, result.neg_lower, result.neg_upper
    );
    for w in &result.warnings {
        println!("warning: {w}");
    }
}
