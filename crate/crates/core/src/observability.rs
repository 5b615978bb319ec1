//! Randomized observability rank test for parameter-free models.
//!
//! The model is solved as a truncated power series (a jet) in `t` at a random
//! point of `F_p`: initial values and input coefficients are drawn uniformly,
//! and the state coefficients follow `x_{k+1} = [f(x, u)]_k / (k + 1)`.
//! Forward-mode sensitivities with respect to each initial value give one
//! Jacobian column per seed direction; the Jacobian rows are the Taylor
//! coefficients of the outputs. Its rank at a random point never exceeds the
//! generic rank, and `N - rank` is the number of states that are not
//! algebraic over the outputs and inputs.
//!
//! Solves run on a compiled straight-line program ([`Tape`]) evaluated one
//! Taylor order at a time, so a jet of order `ν` costs `O(ν²)` operations per
//! multiplication or division node.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::expr::Expr;
use crate::ffield::{DualSeries, PrimeField, TruncatedSeries};
use crate::model::Model;

/// Attempts per trial before giving up on finding a point where no
/// denominator vanishes.
pub const MAX_RESAMPLES: usize = 16;

/// Per-trial rank-drop probability assumed for the trial-count heuristic,
/// expressed as `DEGREE_BUDGET / p` (`2^-40` at `p = 2^61 - 1`).
pub const DEGREE_BUDGET: f64 = (1u64 << 21) as f64;

/// Cap on the trial count derived from a success probability.
pub const MAX_TRIALS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObservabilityError {
    #[error("model still has parameters; lift them to states first")]
    HasParameters,
    #[error("jet order must be at least 1")]
    ZeroJetOrder,
    #[error("jet order {order} too large for prime {prime} (need order + 1 < p)")]
    JetOrderTooLarge { order: usize, prime: u64 },
    #[error("constant {0} has a denominator divisible by the prime")]
    BadConstant(String),
    #[error("a denominator vanished at the evaluation point")]
    DenominatorVanished,
    #[error(
        "denominators vanished at {attempts} consecutive random points; \
         try a different prime (--prime)"
    )]
    ResampleExhausted { attempts: usize },
    #[error("seed direction {0} out of range")]
    BadDirection(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    State(usize),
    Input(usize),
    Const(u64),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
}

/// Straight-line program computing all right-hand sides and outputs of a
/// parameter-free model, with common subexpressions shared.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    num_states: usize,
    num_inputs: usize,
    rhs: Vec<usize>,
    outputs: Vec<usize>,
}

impl Tape {
    pub fn compile(model: &Model, field: PrimeField) -> Result<Tape, ObservabilityError> {
        if !model.params.is_empty() {
            return Err(ObservabilityError::HasParameters);
        }
        let mut b = TapeBuilder {
            ops: Vec::new(),
            memo: HashMap::new(),
            vars: HashMap::new(),
            field,
        };
        for (i, s) in model.states.iter().enumerate() {
            let slot = b.push(Op::State(i));
            b.vars.insert(s.clone(), slot);
        }
        for (i, u) in model.inputs.iter().enumerate() {
            let slot = b.push(Op::Input(i));
            b.vars.insert(u.clone(), slot);
        }
        let rhs = model.rhs.iter().map(|e| b.emit(e)).collect::<Result<_, _>>()?;
        let outputs = model.outputs.iter().map(|(_, e)| b.emit(e)).collect::<Result<_, _>>()?;
        Ok(Tape {
            ops: b.ops,
            num_states: model.states.len(),
            num_inputs: model.inputs.len(),
            rhs,
            outputs,
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }
}

struct TapeBuilder {
    ops: Vec<Op>,
    memo: HashMap<Op, usize>,
    vars: HashMap<String, usize>,
    field: PrimeField,
}

impl TapeBuilder {
    fn push(&mut self, op: Op) -> usize {
        if let Some(&slot) = self.memo.get(&op) {
            return slot;
        }
        self.ops.push(op);
        let slot = self.ops.len() - 1;
        self.memo.insert(op, slot);
        slot
    }

    fn emit(&mut self, e: &Expr) -> Result<usize, ObservabilityError> {
        Ok(match e {
            Expr::Const(q) => {
                let c = self
                    .field
                    .from_rational(q)
                    .map_err(|_| ObservabilityError::BadConstant(q.to_string()))?;
                self.push(Op::Const(c))
            }
            // Validated models only reference declared names.
            Expr::Var(v) => self.vars[v],
            Expr::Add(a, b) => {
                let (a, b) = (self.emit(a)?, self.emit(b)?);
                self.push(Op::Add(a, b))
            }
            Expr::Sub(a, b) => {
                let (a, b) = (self.emit(a)?, self.emit(b)?);
                self.push(Op::Sub(a, b))
            }
            Expr::Mul(a, b) => {
                let (a, b) = (self.emit(a)?, self.emit(b)?);
                self.push(Op::Mul(a, b))
            }
            Expr::Div(a, b) => {
                if let Expr::Const(q) = b.as_ref() {
                    if self.field.from_rational(q).map_or(true, |c| c == 0) {
                        return Err(ObservabilityError::BadConstant(format!("1/({q})")));
                    }
                }
                let (a, b) = (self.emit(a)?, self.emit(b)?);
                self.push(Op::Div(a, b))
            }
            Expr::Neg(a) => {
                let a = self.emit(a)?;
                self.push(Op::Neg(a))
            }
            Expr::Pow(a, e) => {
                let base = self.emit(a)?;
                self.emit_pow(base, *e)
            }
        })
    }

    fn emit_pow(&mut self, base: usize, e: u32) -> usize {
        match e {
            0 => self.push(Op::Const(1)),
            1 => base,
            _ => {
                let half = self.emit_pow(base, e / 2);
                let sq = self.push(Op::Mul(half, half));
                if e % 2 == 1 {
                    self.push(Op::Mul(sq, base))
                } else {
                    sq
                }
            }
        }
    }
}

/// A random point standing in for a generic solution: initial values of all
/// states and the Taylor coefficients of all inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationPoint {
    pub initial_values: Vec<u64>,
    pub input_series: Vec<TruncatedSeries<u64>>,
    pub seed: u64,
    pub stream: u64,
    pub prime: u64,
}

impl EvaluationPoint {
    pub fn sample(
        num_states: usize,
        num_inputs: usize,
        order: usize,
        field: PrimeField,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let initial_values = (0..num_states).map(|_| field.random(rng)).collect();
        let input_series = (0..num_inputs)
            .map(|_| TruncatedSeries {
                coeffs: (0..=order).map(|_| field.random(rng)).collect(),
            })
            .collect();
        EvaluationPoint {
            initial_values,
            input_series,
            seed: rng.get_seed_u64(),
            stream: rng.get_stream(),
            prime: field.modulus(),
        }
    }
}

trait SeedInfo {
    fn get_seed_u64(&self) -> u64;
}

impl SeedInfo for ChaCha8Rng {
    fn get_seed_u64(&self) -> u64 {
        let s = self.get_seed();
        u64::from_le_bytes(s[..8].try_into().expect("8 bytes"))
    }
}

/// Deterministic RNG stream for `(seed, replica, trial)`.
pub fn trial_rng(seed: u64, replica: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replica << 32) | trial);
    rng
}

/// Jet solver bound to one compiled model, prime, and truncation order.
#[derive(Debug, Clone)]
pub struct JetEngine {
    tape: Tape,
    field: PrimeField,
    order: usize,
    inv: Vec<u64>,
}

/// Primal Taylor coefficients of every tape slot, `slot * (order+1) + k`.
struct Primal {
    coeffs: Vec<u64>,
    /// `1/b_0` for each division slot, 0 elsewhere.
    div_inv: Vec<u64>,
}

impl JetEngine {
    pub fn new(model: &Model, field: PrimeField, order: usize) -> Result<Self, ObservabilityError> {
        if order == 0 {
            return Err(ObservabilityError::ZeroJetOrder);
        }
        if order as u64 + 1 >= field.modulus() {
            return Err(ObservabilityError::JetOrderTooLarge {
                order,
                prime: field.modulus(),
            });
        }
        let tape = Tape::compile(model, field)?;
        let inv = field.inverse_table(order);
        Ok(JetEngine {
            tape,
            field,
            order,
            inv,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> EvaluationPoint {
        EvaluationPoint::sample(
            self.tape.num_states,
            self.tape.num_inputs,
            self.order,
            self.field,
            rng,
        )
    }

    fn width(&self) -> usize {
        self.order + 1
    }

    fn primal(&self, point: &EvaluationPoint) -> Result<Primal, ObservabilityError> {
        let f = self.field;
        let w = self.width();
        let ops = &self.tape.ops;
        let mut c = vec![0u64; ops.len() * w];
        let mut div_inv = vec![0u64; ops.len()];
        for (slot, op) in ops.iter().enumerate() {
            match *op {
                Op::State(i) => c[slot * w] = f.reduce(point.initial_values[i]),
                Op::Input(i) => {
                    for (k, v) in point.input_series[i].coeffs.iter().take(w).enumerate() {
                        c[slot * w + k] = f.reduce(*v);
                    }
                }
                _ => {}
            }
        }
        for k in 0..w {
            for (s, op) in ops.iter().enumerate() {
                let v = match *op {
                    Op::State(_) | Op::Input(_) => continue,
                    Op::Const(v) => {
                        if k == 0 {
                            v
                        } else {
                            0
                        }
                    }
                    Op::Add(a, b) => f.add(c[a * w + k], c[b * w + k]),
                    Op::Sub(a, b) => f.sub(c[a * w + k], c[b * w + k]),
                    Op::Neg(a) => f.neg(c[a * w + k]),
                    Op::Mul(a, b) => {
                        let mut acc = 0;
                        for j in 0..=k {
                            acc = f.mul_add(acc, c[a * w + j], c[b * w + k - j]);
                        }
                        acc
                    }
                    Op::Div(a, b) => {
                        if k == 0 {
                            div_inv[s] = f.inv(c[b * w]).ok_or(ObservabilityError::DenominatorVanished)?;
                        }
                        let mut acc = c[a * w + k];
                        for j in 1..=k {
                            acc = f.sub(acc, f.mul(c[b * w + j], c[s * w + k - j]));
                        }
                        f.mul(acc, div_inv[s])
                    }
                };
                c[s * w + k] = v;
            }
            if k + 1 < w {
                for (i, &r) in self.tape.rhs.iter().enumerate() {
                    c[i * w + k + 1] = f.mul(c[r * w + k], self.inv[k]);
                }
            }
        }
        Ok(Primal { coeffs: c, div_inv })
    }

    fn seed_tangent(&self, direction: usize) -> Vec<u64> {
        let mut t = vec![0u64; self.tape.ops.len() * self.width()];
        // State i occupies slot i.
        t[direction * self.width()] = 1;
        t
    }

    /// Computes order-`k` sensitivity coefficients of every slot, then the
    /// order-`k+1` sensitivities of the states.
    fn tangent_step(&self, primal: &Primal, t: &mut [u64], k: usize) {
        let f = self.field;
        let w = self.width();
        let c = &primal.coeffs;
        for (s, op) in self.tape.ops.iter().enumerate() {
            let v = match *op {
                Op::State(_) | Op::Input(_) => continue,
                Op::Const(_) => 0,
                Op::Add(a, b) => f.add(t[a * w + k], t[b * w + k]),
                Op::Sub(a, b) => f.sub(t[a * w + k], t[b * w + k]),
                Op::Neg(a) => f.neg(t[a * w + k]),
                Op::Mul(a, b) => {
                    let mut acc = 0;
                    for j in 0..=k {
                        acc = f.mul_add(acc, t[a * w + j], c[b * w + k - j]);
                        acc = f.mul_add(acc, c[a * w + j], t[b * w + k - j]);
                    }
                    acc
                }
                Op::Div(a, b) => {
                    let mut acc = t[a * w + k];
                    for j in 0..=k {
                        acc = f.sub(acc, f.mul(c[s * w + j], t[b * w + k - j]));
                    }
                    for j in 1..=k {
                        acc = f.sub(acc, f.mul(c[b * w + j], t[s * w + k - j]));
                    }
                    f.mul(acc, primal.div_inv[s])
                }
            };
            t[s * w + k] = v;
        }
        if k + 1 < w {
            for (i, &r) in self.tape.rhs.iter().enumerate() {
                t[i * w + k + 1] = f.mul(t[r * w + k], self.inv[k]);
            }
        }
    }

    /// Jets of all states and outputs at `point`; with a seed direction the
    /// result also carries sensitivities with respect to that initial value.
    pub fn solve(
        &self,
        point: &EvaluationPoint,
        seed_direction: Option<usize>,
    ) -> Result<JetSolution, ObservabilityError> {
        let primal = self.primal(point)?;
        let w = self.width();
        let tangent = match seed_direction {
            Some(d) if d >= self.tape.num_states => return Err(ObservabilityError::BadDirection(d)),
            Some(d) => {
                let mut t = self.seed_tangent(d);
                for k in 0..w {
                    self.tangent_step(&primal, &mut t, k);
                }
                Some(t)
            }
            None => None,
        };
        let series = |buf: &[u64], slot: usize| TruncatedSeries {
            coeffs: buf[slot * w..(slot + 1) * w].to_vec(),
        };
        let dual = |slot: usize| DualSeries {
            value: series(&primal.coeffs, slot),
            derivative: match &tangent {
                Some(t) => series(t, slot),
                None => TruncatedSeries { coeffs: vec![0; w] },
            },
        };
        Ok(JetSolution {
            state_jets: (0..self.tape.num_states).map(dual).collect(),
            output_jets: self.tape.outputs.iter().map(|&s| dual(s)).collect(),
            seed_direction,
        })
    }

    /// Full Jacobian of the output jets with respect to all initial values.
    pub fn jacobian(&self, point: &EvaluationPoint) -> Result<JacobianMatrix, ObservabilityError> {
        let primal = self.primal(point)?;
        let w = self.width();
        let n = self.tape.num_states;
        let columns: Vec<Vec<u64>> = (0..n)
            .into_par_iter()
            .map(|d| {
                let mut t = self.seed_tangent(d);
                for k in 0..w {
                    self.tangent_step(&primal, &mut t, k);
                }
                t
            })
            .collect();
        let m = self.tape.outputs.len();
        let mut entries = vec![0u64; m * w * n];
        for (i, &slot) in self.tape.outputs.iter().enumerate() {
            for j in 0..w {
                let row = i * w + j;
                for (d, col) in columns.iter().enumerate() {
                    entries[row * n + d] = col[slot * w + j];
                }
            }
        }
        Ok(JacobianMatrix {
            num_outputs: m,
            order: self.order,
            cols: n,
            entries,
        })
    }

    /// Rank of the output-jet Jacobian, and of the same Jacobian stacked with
    /// unit rows `e_c` for `c` in `unit_columns`, assembled one Taylor order at
    /// a time. With `early_exit`, assembly stops once both ranks are unchanged
    /// between two consecutive orders.
    pub fn ranks_at(
        &self,
        point: &EvaluationPoint,
        unit_columns: &[usize],
        early_exit: bool,
    ) -> Result<TrialRanks, ObservabilityError> {
        let f = self.field;
        let primal = self.primal(point)?;
        let w = self.width();
        let n = self.tape.num_states;
        let mut tangents: Vec<Vec<u64>> = (0..n).map(|d| self.seed_tangent(d)).collect();
        let mut plain = EchelonBasis::new(f, n);
        let mut augmented = EchelonBasis::new(f, n);
        for &c in unit_columns {
            let mut e = vec![0u64; n];
            e[c] = 1;
            augmented.insert(e);
        }
        let mut prev: Option<(usize, usize)> = None;
        let mut order_used = self.order;
        for k in 0..w {
            tangents
                .par_iter_mut()
                .for_each(|t| self.tangent_step(&primal, t, k));
            for &slot in &self.tape.outputs {
                let row: Vec<u64> = tangents.iter().map(|t| t[slot * w + k]).collect();
                plain.insert(row.clone());
                augmented.insert(row);
            }
            let now = (plain.rank(), augmented.rank());
            let saturated = now.0 == n && now.1 == n;
            if early_exit && (saturated || prev == Some(now)) {
                order_used = k;
                break;
            }
            prev = Some(now);
        }
        Ok(TrialRanks {
            rank: plain.rank(),
            augmented_rank: augmented.rank(),
            order_used,
        })
    }

    /// Samples points from `rng` until one avoids every vanishing
    /// denominator, then runs [`JetEngine::ranks_at`].
    pub fn trial(
        &self,
        rng: &mut ChaCha8Rng,
        unit_columns: &[usize],
        early_exit: bool,
    ) -> Result<TrialRanks, ObservabilityError> {
        for _ in 0..MAX_RESAMPLES {
            let point = self.sample_point(rng);
            match self.ranks_at(&point, unit_columns, early_exit) {
                Err(ObservabilityError::DenominatorVanished) => continue,
                other => return other,
            }
        }
        Err(ObservabilityError::ResampleExhausted {
            attempts: MAX_RESAMPLES,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TrialRanks {
    pub rank: usize,
    pub augmented_rank: usize,
    /// Highest Taylor order whose rows were assembled.
    pub order_used: usize,
}

/// Jets of a solution; `derivative` parts are zero unless a seed direction
/// was given.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetSolution {
    pub state_jets: Vec<DualSeries<u64>>,
    pub output_jets: Vec<DualSeries<u64>>,
    pub seed_direction: Option<usize>,
}

/// Rows indexed by `(output i, order j)` at `i * (order + 1) + j`; column `k`
/// is the sensitivity with respect to the initial value of state `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobianMatrix {
    pub num_outputs: usize,
    pub order: usize,
    pub cols: usize,
    pub entries: Vec<u64>,
}

impl JacobianMatrix {
    pub fn rows(&self) -> usize {
        self.num_outputs * (self.order + 1)
    }

    pub fn row_index(&self, output: usize, order: usize) -> usize {
        output * (self.order + 1) + order
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, output: usize, order: usize, col: usize) -> u64 {
        self.row(self.row_index(output, order))[col]
    }
}

/// Row-echelon basis over `F_p` that accepts rows one at a time.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    field: PrimeField,
    ncols: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl EchelonBasis {
    pub fn new(field: PrimeField, ncols: usize) -> Self {
        EchelonBasis {
            field,
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the basis and keeps it if independent. Returns
    /// whether the rank grew.
    pub fn insert(&mut self, mut row: Vec<u64>) -> bool {
        debug_assert_eq!(row.len(), self.ncols);
        let f = self.field;
        for (pivot, basis_row) in &self.rows {
            let factor = row[*pivot];
            if factor == 0 {
                continue;
            }
            for (x, b) in row.iter_mut().zip(basis_row).skip(*pivot) {
                *x = f.sub(*x, f.mul(factor, *b));
            }
        }
        match row.iter().position(|&x| x != 0) {
            Some(pivot) => {
                let scale = f.inv(row[pivot]).expect("nonzero pivot");
                for x in row.iter_mut().skip(pivot) {
                    *x = f.mul(*x, scale);
                }
                self.rows.push((pivot, row));
                true
            }
            None => false,
        }
    }
}

/// Rank over `F_p` by Gaussian elimination.
pub fn rank_mod_p(field: PrimeField, matrix: &JacobianMatrix) -> usize {
    let mut basis = EchelonBasis::new(field, matrix.cols);
    for r in 0..matrix.rows() {
        basis.insert(matrix.row(r).to_vec());
        if basis.rank() == matrix.cols {
            break;
        }
    }
    basis.rank()
}

/// Rank of a dense row-major matrix over `F_p`.
pub fn rank_of_rows(field: PrimeField, rows: &[Vec<u64>]) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut basis = EchelonBasis::new(field, ncols);
    for r in rows {
        basis.insert(r.iter().map(|&x| field.reduce(x)).collect());
    }
    basis.rank()
}

pub fn solve_jets(
    model: &Model,
    point: &EvaluationPoint,
    order: usize,
    seed_direction: Option<usize>,
) -> Result<JetSolution, ObservabilityError> {
    let field = PrimeField::new(point.prime).expect("evaluation point carries a valid prime");
    JetEngine::new(model, field, order)?.solve(point, seed_direction)
}

pub fn build_jacobian(
    model: &Model,
    point: &EvaluationPoint,
    order: usize,
) -> Result<JacobianMatrix, ObservabilityError> {
    let field = PrimeField::new(point.prime).expect("evaluation point carries a valid prime");
    JetEngine::new(model, field, order)?.jacobian(point)
}

/// Maximum Jacobian rank over `trials` independent random points, each
/// assembled to the full jet `order`.
pub fn generic_output_rank(
    model: &Model,
    order: usize,
    trials: usize,
    rng_seed: u64,
    field: PrimeField,
) -> Result<usize, ObservabilityError> {
    let engine = JetEngine::new(model, field, order)?;
    let ranks = (0..trials.max(1) as u64)
        .into_par_iter()
        .map(|t| engine.trial(&mut trial_rng(rng_seed, 0, t), &[], false).map(|r| r.rank))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ranks.into_iter().max().unwrap_or(0))
}

/// Settings for the Monte Carlo rank engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankConfig {
    pub field: PrimeField,
    /// Minimum number of random points per rank query.
    pub trials: usize,
    /// Jet truncation order; `None` means the number of states of the model
    /// being ranked.
    pub jet_order: Option<usize>,
    pub early_exit: bool,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            field: PrimeField::default(),
            trials: 3,
            jet_order: None,
            early_exit: true,
        }
    }
}

impl RankConfig {
    pub fn order_for(&self, num_states: usize) -> usize {
        self.jet_order.unwrap_or(num_states).max(1)
    }

    /// Heuristic per-trial probability that a random point under-reports the
    /// rank.
    pub fn per_trial_failure(&self) -> f64 {
        (DEGREE_BUDGET / self.field.modulus() as f64).min(1.0)
    }

    /// Trials needed so that a rank query succeeds with probability at least
    /// `success`, never fewer than the configured minimum.
    pub fn trials_for(&self, success: f64) -> usize {
        let delta = self.per_trial_failure();
        let needed = if success <= 0.0 || delta <= 0.0 {
            1
        } else if delta >= 1.0 || success >= 1.0 {
            MAX_TRIALS
        } else {
            ((1.0 - success).ln() / delta.ln()).ceil().max(1.0) as usize
        };
        needed.min(MAX_TRIALS).max(self.trials)
    }
}

/// Number of states that are not algebraic over the outputs and inputs:
/// `N - rank`.
pub fn nonobservable_trdeg(model: &Model, cfg: &RankConfig, rng_seed: u64) -> Result<usize, ObservabilityError> {
    let n = model.num_states();
    let engine = JetEngine::new(model, cfg.field, cfg.order_for(n))?;
    let ranks = (0..cfg.trials.max(1) as u64)
        .into_par_iter()
        .map(|t| {
            engine
                .trial(&mut trial_rng(rng_seed, 0, t), &[], cfg.early_exit)
                .map(|r| r.rank)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(n - ranks.into_iter().max().unwrap_or(0))
}
