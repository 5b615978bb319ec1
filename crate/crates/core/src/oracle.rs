//! Exact-arithmetic cross-check for the finite-field rank engine.
//!
//! Runs the same jet/Jacobian/rank pipeline over `Q` at small random integer
//! points, with no shared code beyond expression evaluation: jets come from a
//! whole-series fixed-point iteration over dual rational series instead of
//! the compiled order-by-order tape, and ranks from fraction-based Gaussian
//! elimination. Intended for small models only.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::EvalError;
use crate::ffield::{DualSeries, DualSeriesRing, RationalField, TruncatedSeries};
use crate::model::{Model, ModelError};
use crate::observability::MAX_RESAMPLES;

/// Largest state count accepted by the oracle.
pub const MAX_ORACLE_STATES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle is limited to {MAX_ORACLE_STATES} states, model has {0}")]
    TooLarge(usize),
    #[error("model still has parameters; lift them to states first")]
    HasParameters,
    #[error("denominators vanished at {MAX_RESAMPLES} consecutive rational points")]
    ResampleExhausted,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A jet with exact rational coefficients.
pub type RationalJet = TruncatedSeries<BigRational>;

fn small_int(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::from_integer(BigInt::from(rng.gen_range(1..=97u32)))
}

/// Output jets (value and sensitivity to the initial value of state
/// `direction`) by iterating `x ← x(0) + ∫ f(x, u) dt` to a fixed point.
fn dual_output_jets(
    model: &Model,
    x0: &[BigRational],
    inputs: &[RationalJet],
    order: usize,
    direction: usize,
) -> Result<Vec<DualSeries<BigRational>>, EvalError> {
    let ring = DualSeriesRing::new(RationalField, order);
    let s = &ring.series;
    let mut states: Vec<DualSeries<BigRational>> = x0
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let seed = if i == direction { 1 } else { 0 };
            ring.lift(s.scalar(v.clone()), s.scalar(BigRational::from_integer(seed.into())))
        })
        .collect();
    let input_env: Vec<(String, DualSeries<BigRational>)> = model
        .inputs
        .iter()
        .zip(inputs)
        .map(|(u, jet)| (u.clone(), ring.passive(jet.clone())))
        .collect();
    let env_of = |states: &[DualSeries<BigRational>]| -> HashMap<String, DualSeries<BigRational>> {
        model
            .states
            .iter()
            .cloned()
            .zip(states.iter().cloned())
            .chain(input_env.iter().cloned())
            .collect()
    };
    // Each pass fixes at least one more coefficient.
    for _ in 0..order {
        let env = env_of(&states);
        let derivs = model
            .rhs
            .iter()
            .map(|f| f.evaluate(&ring, &env))
            .collect::<Result<Vec<_>, _>>()?;
        states = states
            .iter()
            .zip(&derivs)
            .map(|(x, dx)| {
                let mut value = s.integrate(&dx.value);
                value.coeffs[0] = x.value.coeffs[0].clone();
                let mut derivative = s.integrate(&dx.derivative);
                derivative.coeffs[0] = x.derivative.coeffs[0].clone();
                DualSeries { value, derivative }
            })
            .collect();
    }
    let env = env_of(&states);
    model
        .outputs
        .iter()
        .map(|(_, g)| g.evaluate(&ring, &env))
        .collect()
}

/// Rank of a rational matrix by Gaussian elimination.
pub fn rational_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &pivot_row[col];
            for c in col..ncols {
                let delta = &factor * &pivot_row[c];
                rows[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

/// Exact Jacobian of the output jets at one random integer point.
pub fn exact_jacobian(
    model: &Model,
    order: usize,
    point_seed: u64,
) -> Result<Vec<Vec<BigRational>>, OracleError> {
    if !model.params.is_empty() {
        return Err(OracleError::HasParameters);
    }
    let n = model.num_states();
    if n > MAX_ORACLE_STATES {
        return Err(OracleError::TooLarge(n));
    }
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(point_seed);
    'attempt: for _ in 0..MAX_RESAMPLES {
        let x0: Vec<BigRational> = (0..n).map(|_| small_int(&mut rng)).collect();
        let inputs: Vec<RationalJet> = model
            .inputs
            .iter()
            .map(|_| TruncatedSeries {
                coeffs: (0..=order).map(|_| small_int(&mut rng)).collect(),
            })
            .collect();
        let m = model.num_outputs();
        let mut rows = vec![vec![BigRational::zero(); n]; m * (order + 1)];
        for d in 0..n {
            let outs = match dual_output_jets(model, &x0, &inputs, order, d) {
                Ok(o) => o,
                Err(e) if e.is_resample() => continue 'attempt,
                Err(e) => return Err(e.into()),
            };
            for (i, out) in outs.iter().enumerate() {
                for j in 0..=order {
                    rows[i * (order + 1) + j][d] = out.derivative.coeffs[j].clone();
                }
            }
        }
        return Ok(rows);
    }
    Err(OracleError::ResampleExhausted)
}

/// Rank over `Q` of the output-jet Jacobian at a random integer point.
pub fn exact_rank(model: &Model, order: usize, point_seed: u64) -> Result<usize, OracleError> {
    Ok(rational_rank(exact_jacobian(model, order, point_seed)?))
}

/// Defect computed exactly: rank with parameters observed minus rank with
/// parameters hidden, at jet order `order` (or the lifted state count).
pub fn oracle_defect(model: &Model, order: Option<usize>, point_seed: u64) -> Result<usize, OracleError> {
    if model.params.is_empty() {
        return Ok(0);
    }
    let hidden = model.lift_parameters(false)?;
    let observed = model.lift_parameters(true)?;
    let order = order.unwrap_or(hidden.lifted.num_states()).max(1);
    let a = exact_rank(&hidden.lifted, order, point_seed)?;
    let b = exact_rank(&observed.lifted, order, point_seed)?;
    Ok(b - a)
}

/// Rational Taylor coefficients of every state (no sensitivities); used to
/// cross-check the finite-field jets.
pub fn exact_state_jets(
    model: &Model,
    x0: &[BigRational],
    inputs: &[RationalJet],
    order: usize,
) -> Result<Vec<RationalJet>, OracleError> {
    let ring = crate::ffield::SeriesRing::new(RationalField, order);
    let mut states: Vec<RationalJet> = x0.iter().map(|v| ring.scalar(v.clone())).collect();
    for _ in 0..order {
        let env: HashMap<String, RationalJet> = model
            .states
            .iter()
            .cloned()
            .zip(states.iter().cloned())
            .chain(model.inputs.iter().cloned().zip(inputs.iter().cloned()))
            .collect();
        let derivs = model
            .rhs
            .iter()
            .map(|f| f.evaluate(&ring, &env))
            .collect::<Result<Vec<_>, _>>()?;
        states = states
            .iter()
            .zip(&derivs)
            .map(|(x, dx)| {
                let mut next = ring.integrate(dx);
                next.coeffs[0] = x.coeffs[0].clone();
                next
            })
            .collect();
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ratio;
    use crate::model::counterexample;

    fn toy(rhs: &[(&str, &str)], outputs: &[(&str, &str)]) -> Model {
        Model {
            name: "toy".into(),
            states: rhs.iter().map(|(s, _)| s.to_string()).collect(),
            params: vec![],
            inputs: vec![],
            outputs: outputs.iter().map(|(n, e)| (n.to_string(), e.parse().unwrap())).collect(),
            rhs: rhs.iter().map(|(_, e)| e.parse().unwrap()).collect(),
        }
    }

    #[test]
    fn linear_flow_rank() {
        let m = toy(&[("x", "m_state"), ("m_state", "0")], &[("y", "x")]);
        assert_eq!(exact_rank(&m, 2, 0).unwrap(), 2);
    }

    #[test]
    fn rational_rank_examples() {
        let q = |n| ratio(n, 1);
        assert_eq!(rational_rank(vec![vec![q(1), q(2)], vec![q(2), q(4)]]), 1);
        assert_eq!(rational_rank(vec![vec![q(0), q(1)], vec![q(1), q(0)]]), 2);
        assert_eq!(rational_rank(vec![vec![q(0); 3]; 2]), 0);
    }

    #[test]
    fn exponential_state_jet() {
        let m = toy(&[("x", "x")], &[("y", "x")]);
        let jets = exact_state_jets(&m, &[ratio(1, 1)], &[], 3).unwrap();
        assert_eq!(jets[0].coeffs, vec![ratio(1, 1), ratio(1, 1), ratio(1, 2), ratio(1, 6)]);
    }

    #[test]
    fn guards() {
        assert_eq!(exact_rank(&counterexample(), 2, 0), Err(OracleError::HasParameters));
        let names: Vec<(String, String)> = (0..11).map(|i| (format!("x{i}"), "0".to_string())).collect();
        let refs: Vec<(&str, &str)> = names.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let m = toy(&refs, &[("y", "x0")]);
        assert_eq!(exact_rank(&m, 2, 0), Err(OracleError::TooLarge(11)));
        let mut free = counterexample();
        free.params.clear();
        free.rhs[1] = "x1*x2".parse().unwrap();
        assert_eq!(oracle_defect(&free, None, 0), Ok(0));
    }
}
