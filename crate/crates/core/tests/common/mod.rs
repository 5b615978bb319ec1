//! Model fixtures shared by the integration tests.

#![allow(dead_code)]

use expbound::{counterexample, generate_family, seir_mixture, Family, Model};

pub fn model(name: &str, states: &[(&str, &str)], params: &[&str], inputs: &[&str], outputs: &[(&str, &str)]) -> Model {
    Model {
        name: name.into(),
        states: states.iter().map(|(s, _)| s.to_string()).collect(),
        params: params.iter().map(|p| p.to_string()).collect(),
        inputs: inputs.iter().map(|u| u.to_string()).collect(),
        outputs: outputs
            .iter()
            .map(|(n, e)| (n.to_string(), e.parse().expect("fixture output parses")))
            .collect(),
        rhs: states
            .iter()
            .map(|(_, e)| e.parse().expect("fixture rhs parses"))
            .collect(),
    }
}

/// `x' = 0, y = mu*x`: only the product is ever observed, `d_r = 1` for all r.
pub fn scaling() -> Model {
    model("scaling", &[("x", "0")], &["mu"], &[], &[("y", "mu*x")])
}

/// Driven first-order decay, identifiable from one experiment.
pub fn driven_decay() -> Model {
    model("driven_decay", &[("x", "-k*x + u")], &["k"], &["u"], &[("y", "x")])
}

/// Michaelis–Menten elimination with a rational right-hand side.
pub fn michaelis_menten() -> Model {
    model(
        "michaelis_menten",
        &[("x", "-vmax*x/(km + x)")],
        &["vmax", "km"],
        &[],
        &[("y", "x")],
    )
}

/// Driven two-compartment model with a leak, observed through a volume.
pub fn two_compartment() -> Model {
    model(
        "two_compartment",
        &[("x1", "-(k21 + k01)*x1 + k12*x2 + u"), ("x2", "k21*x1 - k12*x2")],
        &["k01", "k12", "k21", "v"],
        &["u"],
        &[("y", "x1/v")],
    )
}

/// All fixture models used by the property suites.
pub fn fixtures() -> Vec<Model> {
    vec![
        counterexample(),
        seir_mixture(),
        scaling(),
        driven_decay(),
        michaelis_menten(),
        two_compartment(),
        generate_family(Family::Cycle, 3).unwrap(),
        generate_family(Family::Catenary, 3).unwrap(),
        generate_family(Family::Mammillary, 3).unwrap(),
    ]
}

/// Fixtures small enough for replica sweeps up to r = 5 in a debug build.
pub fn small_fixtures() -> Vec<Model> {
    vec![
        counterexample(),
        seir_mixture(),
        scaling(),
        driven_decay(),
        michaelis_menten(),
        two_compartment(),
        generate_family(Family::Cycle, 3).unwrap(),
    ]
}
