//! SEIR epidemic model whose first output mixes two compartments
//! (`y1 = gamma*I + delta*E`): locally identifiable from one experiment.
//!
//! Run with `cargo run --example seir_mixture`.

use expbound::{compute_defect, compute_experiment_bound, seir_mixture, AnalysisReport, BoundConfig, DefectConfig};

fn main() {
    let model = seir_mixture();
    let single = compute_defect(&model, &DefectConfig::default()).expect("defect");
    println!(
        "one experiment: defect {} ({} lifted variables, ranks {} / {})",
        single.defect, single.num_variables, single.rank_sigma_prime, single.rank_sigma_double_prime
    );

    let cfg = BoundConfig {
        seed: 7,
        ..BoundConfig::default()
    };
    let result = compute_experiment_bound(&model, &cfg).expect("analysis succeeds");
    print!("{}", AnalysisReport::new(&model, &result, &cfg.rank, true).to_text());
}
