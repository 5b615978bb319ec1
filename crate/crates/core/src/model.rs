//! Rational ODE models `x' = f(x, μ, u)`, `y = g(x, μ, u)`, their replicas,
//! the parameter liftings used by the defect computation, and generators for
//! the built-in model families.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{is_identifier, Expr};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub states: Vec<String>,
    pub params: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<(String, Expr)>,
    /// One right-hand side per state, in state order.
    pub rhs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("identifier `{0}` is declared more than once")]
    Duplicate(String),
    #[error("`{0}` is not a valid identifier")]
    BadIdentifier(String),
    #[error("{context} uses undeclared variable `{name}`")]
    Undeclared { context: String, name: String },
    #[error("{states} states but {rhs} right-hand sides")]
    RhsCount { states: usize, rhs: usize },
    #[error("model has no outputs")]
    NoOutputs,
    #[error("replica count must be at least 1")]
    ZeroReplicas,
    #[error("replica name `{0}` collides with an existing identifier")]
    ReplicaCollision(String),
    #[error("{family} needs n >= 3 compartments, got {n}")]
    TooFewCompartments { family: Family, n: usize },
}

impl Model {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn rhs_of(&self, state: &str) -> Option<&Expr> {
        self.state_index(state).map(|i| &self.rhs[i])
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = HashSet::new();
        let names = self
            .states
            .iter()
            .chain(&self.params)
            .chain(&self.inputs)
            .chain(self.outputs.iter().map(|(n, _)| n));
        for n in names {
            if !is_identifier(n) {
                return Err(ModelError::BadIdentifier(n.clone()));
            }
            if !seen.insert(n.as_str()) {
                return Err(ModelError::Duplicate(n.clone()));
            }
        }
        if self.rhs.len() != self.states.len() {
            return Err(ModelError::RhsCount {
                states: self.states.len(),
                rhs: self.rhs.len(),
            });
        }
        let declared: HashSet<&str> = self
            .states
            .iter()
            .chain(&self.params)
            .chain(&self.inputs)
            .map(String::as_str)
            .collect();
        let exprs = self
            .states
            .iter()
            .zip(&self.rhs)
            .map(|(s, e)| (format!("equation for {s}'"), e))
            .chain(self.outputs.iter().map(|(n, e)| (format!("output {n}"), e)));
        for (context, e) in exprs {
            if let Some(name) = e.free_variables().into_iter().find(|v| !declared.contains(v.as_str())) {
                return Err(ModelError::Undeclared { context, name });
            }
        }
        if self.outputs.is_empty() {
            return Err(ModelError::NoOutputs);
        }
        Ok(())
    }

    /// The r-fold replica: `r` copies of states, inputs and outputs (suffixed
    /// `_1 .. _r`) sharing one parameter vector.
    pub fn replicate(&self, r: usize) -> Result<Model, ModelError> {
        self.validate()?;
        if r == 0 {
            return Err(ModelError::ZeroReplicas);
        }
        let params: HashSet<&str> = self.params.iter().map(String::as_str).collect();
        let suffixed = |name: &str, i: usize| -> Result<String, ModelError> {
            let s = format!("{name}_{i}");
            if params.contains(s.as_str()) {
                Err(ModelError::ReplicaCollision(s))
            } else {
                Ok(s)
            }
        };

        let mut out = Model {
            name: self.name.clone(),
            states: Vec::with_capacity(r * self.states.len()),
            params: self.params.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            rhs: Vec::new(),
        };
        for i in 1..=r {
            let mut map = HashMap::new();
            for v in self.states.iter().chain(&self.inputs) {
                map.insert(v.clone(), suffixed(v, i)?);
            }
            for (s, f) in self.states.iter().zip(&self.rhs) {
                out.states.push(map[s].clone());
                out.rhs.push(f.rename(&map));
            }
            out.inputs.extend(self.inputs.iter().map(|u| map[u].clone()));
            for (y, g) in &self.outputs {
                out.outputs.push((suffixed(y, i)?, g.rename(&map)));
            }
        }
        Ok(out)
    }

    /// Turns every parameter into a constant state (`μ' = 0`) appended after
    /// the existing states. With `with_param_outputs`, one extra output per
    /// former parameter observes it directly.
    pub fn lift_parameters(&self, with_param_outputs: bool) -> Result<LiftedModel, ModelError> {
        self.validate()?;
        let mut lifted = Model {
            name: self.name.clone(),
            states: self.states.clone(),
            params: Vec::new(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            rhs: self.rhs.clone(),
        };
        let param_indices: Vec<usize> = (0..self.params.len()).map(|i| self.states.len() + i).collect();
        lifted.states.extend(self.params.iter().cloned());
        lifted.rhs.extend(self.params.iter().map(|_| Expr::zero()));
        if with_param_outputs {
            let mut taken: HashSet<String> = lifted
                .states
                .iter()
                .chain(&lifted.inputs)
                .chain(lifted.outputs.iter().map(|(n, _)| n))
                .cloned()
                .collect();
            for p in &self.params {
                let mut name = format!("obs_{p}");
                while taken.contains(&name) {
                    name.push('_');
                }
                taken.insert(name.clone());
                lifted.outputs.push((name, Expr::var(p.clone())));
            }
        }
        Ok(LiftedModel {
            base: self.clone(),
            lifted,
            param_indices,
            with_param_outputs,
        })
    }
}

/// A parameter-free model obtained by turning parameters into constant
/// states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedModel {
    pub base: Model,
    pub lifted: Model,
    /// Positions of the former parameters in `lifted.states`.
    pub param_indices: Vec<usize>,
    pub with_param_outputs: bool,
}

// ---------------------------------------------------------------------------
// Families

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Cycle,
    Catenary,
    Mammillary,
    SeirMixture,
    Counterexample,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Cycle,
        Family::Catenary,
        Family::Mammillary,
        Family::SeirMixture,
        Family::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Catenary => "catenary",
            Family::Mammillary => "mammillary",
            Family::SeirMixture => "seir_mixture",
            Family::Counterexample => "counterexample",
        }
    }

    pub fn is_compartmental(self) -> bool {
        matches!(self, Family::Cycle | Family::Catenary | Family::Mammillary)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                format!("unknown family `{s}` (expected one of: {})", known.join(", "))
            })
    }
}

/// How a compartment transfer `i -> j` with rate `a_ji` enters the
/// equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransferRule {
    /// `+a_ji x_i` in `x_j'` and `-a_ji x_i` in `x_i'`.
    #[default]
    Standard,
    /// Cycle only: the outflow term of `x_i'` uses the downstream compartment,
    /// `-a_{i+1,i} x_{i+1}`, as printed in the four-compartment cycle display.
    LiteralCycleDisplay,
}

pub fn generate_family(family: Family, n: usize) -> Result<Model, ModelError> {
    generate_family_with(family, n, TransferRule::Standard)
}

pub fn generate_family_with(family: Family, n: usize, rule: TransferRule) -> Result<Model, ModelError> {
    if family.is_compartmental() && n < 3 {
        return Err(ModelError::TooFewCompartments { family, n });
    }
    let m = match family {
        Family::Counterexample => counterexample(),
        Family::SeirMixture => seir_mixture(),
        Family::Cycle => {
            let edges: Vec<(usize, usize)> = (1..=n).map(|i| (i, i % n + 1)).collect();
            let mut m = compartment_model("cycle", n, &edges, &[]);
            if rule == TransferRule::LiteralCycleDisplay {
                m.name = "cycle_literal".into();
                m.rhs = literal_cycle_rhs(n);
            }
            m
        }
        Family::Catenary => {
            let mut edges = Vec::new();
            for i in 1..n {
                edges.push((i, i + 1));
                edges.push((i + 1, i));
            }
            compartment_model("catenary", n, &edges, &[1])
        }
        Family::Mammillary => {
            let mut edges = Vec::new();
            for j in 2..=n {
                edges.push((1, j));
                edges.push((j, 1));
            }
            compartment_model("mammillary", n, &edges, &[1])
        }
    };
    debug_assert!(m.validate().is_ok());
    Ok(m)
}

/// `x1' = 0, x2' = x1*x2 + mu1*x1 + mu2, y = x2`.
pub fn counterexample() -> Model {
    let e = |s: &str| s.parse::<Expr>().expect("valid builtin expression");
    Model {
        name: "counterexample".into(),
        states: vec!["x1".into(), "x2".into()],
        params: vec!["mu1".into(), "mu2".into()],
        inputs: vec![],
        outputs: vec![("y".into(), e("x2"))],
        rhs: vec![e("0"), e("x1*x2 + mu1*x1 + mu2")],
    }
}

/// SEIR with a known total population and a per-experiment detection factor
/// `gamma` kept as an observed constant state.
pub fn seir_mixture() -> Model {
    let e = |s: &str| s.parse::<Expr>().expect("valid builtin expression");
    let names = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Model {
        name: "seir_mixture".into(),
        states: names(&["S", "E", "I", "N", "gamma"]),
        params: names(&["alpha", "beta", "nu", "delta"]),
        inputs: vec![],
        outputs: vec![
            ("y1".into(), e("gamma*I + delta*E")),
            ("y2".into(), e("gamma")),
            ("y3".into(), e("N")),
        ],
        rhs: vec![
            e("-beta*S*I/N"),
            e("beta*S*I/N - nu*E"),
            e("nu*E - alpha*I"),
            e("0"),
            e("0"),
        ],
    }
}

fn rate_names(n: usize, to: usize, from: usize) -> (String, String) {
    if n < 10 {
        (format!("b{to}{from}"), format!("c{to}{from}"))
    } else {
        (format!("b{to}_{from}"), format!("c{to}_{from}"))
    }
}

/// The rate `b_ji + c_ji*x0` as an expression.
fn rate(n: usize, to: usize, from: usize) -> Expr {
    let (b, c) = rate_names(n, to, from);
    Expr::Add(
        Box::new(Expr::var(b)),
        Box::new(Expr::Mul(Box::new(Expr::var(c)), Box::new(Expr::var("x0")))),
    )
}

fn term(n: usize, to: usize, from: usize, state: usize) -> Expr {
    Expr::Mul(Box::new(rate(n, to, from)), Box::new(Expr::var(format!("x{state}"))))
}

/// Linear compartment model on `n` compartments with edge list `(from, to)`
/// and leaks out of the system from `leaks`, every rate perturbed by the
/// constant input `x0`, outputs `y1 = x0` and `y2 = x1`.
fn compartment_model(name: &str, n: usize, edges: &[(usize, usize)], leaks: &[usize]) -> Model {
    let mut rhs_terms: Vec<Vec<(bool, Expr)>> = vec![Vec::new(); n + 1];
    let mut params = Vec::new();
    for &(from, to) in edges {
        let (b, c) = rate_names(n, to, from);
        params.push(b);
        params.push(c);
        rhs_terms[to].push((true, term(n, to, from, from)));
        rhs_terms[from].push((false, term(n, to, from, from)));
    }
    for &from in leaks {
        let (b, c) = rate_names(n, 0, from);
        params.push(b);
        params.push(c);
        rhs_terms[from].push((false, term(n, 0, from, from)));
    }
    // Inflows first, then outflows, to read like the textbook systems.
    let rhs = std::iter::once(Expr::zero())
        .chain((1..=n).map(|i| {
            let mut terms = std::mem::take(&mut rhs_terms[i]);
            terms.sort_by_key(|(positive, _)| !*positive);
            sum_terms(terms)
        }))
        .collect();
    Model {
        name: name.into(),
        states: (0..=n).map(|i| format!("x{i}")).collect(),
        params,
        inputs: vec![],
        outputs: vec![("y1".into(), Expr::var("x0")), ("y2".into(), Expr::var("x1"))],
        rhs,
    }
}

fn literal_cycle_rhs(n: usize) -> Vec<Expr> {
    let prev = |i: usize| if i == 1 { n } else { i - 1 };
    let next = |i: usize| i % n + 1;
    std::iter::once(Expr::zero())
        .chain((1..=n).map(|i| {
            sum_terms(vec![
                (true, term(n, i, prev(i), prev(i))),
                (false, term(n, next(i), i, next(i))),
            ])
        }))
        .collect()
}

fn sum_terms(terms: Vec<(bool, Expr)>) -> Expr {
    let mut acc: Option<Expr> = None;
    for (positive, t) in terms {
        acc = Some(match (acc, positive) {
            (None, true) => t,
            (None, false) => Expr::Neg(Box::new(t)),
            (Some(a), true) => Expr::Add(Box::new(a), Box::new(t)),
            (Some(a), false) => Expr::Sub(Box::new(a), Box::new(t)),
        });
    }
    acc.unwrap_or_else(Expr::zero)
}
