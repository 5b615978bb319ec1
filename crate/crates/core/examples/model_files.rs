//! Reading and writing the line-oriented model format, with error positions.
//!
//! Run with `cargo run --example model_files`.

use expbound::{generate_family, parse_model, print_model, Family};

const TWO_COMPARTMENT: &str = "\
# Two-compartment pharmacokinetics with an infusion input.
model two_compartment
states:  x1, x2
params:  k01, k12, k21, v
inputs:  u
eq x1' = -(k21 + k01)*x1 + k12*x2 + u
eq x2' = k21*x1 - k12*x2
out y = x1/v
";

fn main() {
    let model = parse_model(TWO_COMPARTMENT).expect("valid model");
    println!(
        "parsed `{}`: {} states, {} parameters, {} inputs, {} outputs",
        model.name,
        model.num_states(),
        model.num_params(),
        model.inputs.len(),
        model.num_outputs()
    );
    println!("\ncanonical form:\n{}", print_model(&model));

    let replica = model.replicate(2).expect("replicable");
    println!("two experiments share the parameters:\n{}", print_model(&replica));

    let cycle = generate_family(Family::Cycle, 4).unwrap();
    let text = print_model(&cycle);
    assert_eq!(parse_model(&text).unwrap(), cycle);
    println!("generated cycle, n = 4:\n{text}");

    for bad in [
        "model m\nstates: x\neq x' = x +* 2\nout y = x\n",
        "model m\nstates: x\neq x' = -k*x\nout y = x\n",
        "model m\nstates: x, z\neq x' = 0\nout y = x\n",
    ] {
        match parse_model(bad) {
            Ok(_) => unreachable!(),
            Err(e) => println!("rejected: {e}"),
        }
    }
}
