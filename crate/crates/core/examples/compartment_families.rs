//! NEL and the NEG bracket for the cycle, catenary and mammillary compartment
//! families with constant-input perturbed rates, for n = 3..6.
//!
//! Run with `cargo run --release --example compartment_families [max_n]`.

use expbound::{compute_experiment_bound, generate_family, generate_family_with, BoundConfig, Family, TransferRule};

fn main() {
    let max_n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6);
    let cfg = BoundConfig {
        seed: 2024,
        ..BoundConfig::default()
    };
    println!("{:<16} {:>3} {:>7} {:>5} {:>10}  defects", "family", "n", "params", "NEL", "NEG");
    for family in [Family::Cycle, Family::Catenary, Family::Mammillary] {
        for n in 3..=max_n {
            let model = generate_family(family, n).expect("n >= 3");
            report(family.name(), n, &model, &cfg);
        }
    }
    for n in 3..=max_n {
        let model = generate_family_with(Family::Cycle, n, TransferRule::LiteralCycleDisplay).expect("n >= 3");
        report("cycle (literal)", n, &model, &cfg);
    }
}

fn report(label: &str, n: usize, model: &expbound::Model, cfg: &BoundConfig) {
    let start = std::time::Instant::now();
    let r = compute_experiment_bound(model, cfg).expect("analysis succeeds");
    println!(
        "{:<16} {:>3} {:>7} {:>5} {:>10}  {:?}  ({:.2?})",
        label,
        n,
        model.num_params(),
        r.nel,
        format!("{{{}, {}}}", r.neg_lower, r.neg_upper),
        r.defects(),
        start.elapsed()
    );
}
