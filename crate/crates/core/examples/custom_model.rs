//! Analyzing a user-defined model with an input and a rational right-hand
//! side, and emitting the JSON report.
//!
//! Run with `cargo run --example custom_model`.

use expbound::{compute_experiment_bound, parse_model, AnalysisReport, BoundConfig, Probability};

const MODEL: &str = "\
model mm_infusion
states: x
params: vmax, km, scale
inputs: u
eq x' = -vmax*x/(km + x) + u
out y = scale*x
";

fn main() {
    let model = parse_model(MODEL).expect("valid model");
    let cfg = BoundConfig {
        probability: Probability::parse("0.999").unwrap(),
        seed: 5,
        ..BoundConfig::default()
    };
    let result = compute_experiment_bound(&model, &cfg).expect("analysis succeeds");
    println!("{}", AnalysisReport::new(&model, &result, &cfg.rank, false).to_json());
}
