//! Arithmetic kernels: the prime field, truncated power series, and dual
//! series carrying one sensitivity direction.
//!
//! Run with `cargo run --example jet_kernels`.

use std::collections::HashMap;

use expbound::ffield::{DualSeriesRing, PrimeField, SeriesRing};
use expbound::observability::{solve_jets, EvaluationPoint};
use expbound::Model;

fn main() {
    let f = PrimeField::default();
    let half = f.inv(2).unwrap();
    println!("p = {}, 1/2 = {half}, 2 * (1/2) = {}", f.modulus(), f.mul(2, half));

    // 1/(1 + t) truncated at order 4.
    let series = SeriesRing::new(f, 4);
    let one_plus_t = series.from_coeffs(vec![1, 1]);
    let inv = series.series_inv(&one_plus_t).unwrap();
    let signed: Vec<i64> = inv.coeffs.iter().map(|&c| if c > f.modulus() / 2 { c as i64 - f.modulus() as i64 } else { c as i64 }).collect();
    println!("1/(1+t) = {signed:?}");

    // d/dx of x^3 at x = 2 via a dual number: value 8, derivative 12.
    let dual = DualSeriesRing::new(f, 0);
    let x = dual.lift(dual.series.scalar(2), dual.series.scalar(1));
    let e: expbound::Expr = "x^3".parse().unwrap();
    let env: HashMap<String, _> = [("x".to_string(), x)].into_iter().collect();
    let v = e.evaluate(&dual, &env).unwrap();
    println!("x^3 at 2: value {}, derivative {}", v.value.coeffs[0], v.derivative.coeffs[0]);

    // Taylor coefficients of x' = x, x(0) = 1: 1, 1, 1/2, 1/6, ...
    let model = Model {
        name: "exp".into(),
        states: vec!["x".into()],
        params: vec![],
        inputs: vec![],
        outputs: vec![("y".into(), "x".parse().unwrap())],
        rhs: vec!["x".parse().unwrap()],
    };
    let point = EvaluationPoint {
        initial_values: vec![1],
        input_series: vec![],
        seed: 0,
        stream: 0,
        prime: f.modulus(),
    };
    let jets = solve_jets(&model, &point, 4, Some(0)).unwrap();
    let coeffs = &jets.state_jets[0].value.coeffs;
    for (k, &c) in coeffs.iter().enumerate() {
        let factorial: u64 = (1..=k as u64).product();
        println!("  x_{k} = {c}  (k! * x_k = {})", f.mul(c, factorial));
    }
    println!("sensitivity to x(0): {:?}", jets.state_jets[0].derivative.coeffs);
}
