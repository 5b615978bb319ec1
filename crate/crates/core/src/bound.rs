//! Number of experiments: iterate the defect over r-fold replicas until two
//! consecutive values agree.
//!
//! With `d_0 = ℓ` and `d_i` the defect of the `i`-fold replica, the first `i`
//! with `d_i = d_{i-1}` gives `NEL = i - 1`, and the global count lies in
//! `{NEL, NEL + 1}`. The loop runs at most `ℓ + 1` times. Each defect call
//! gets success probability `1 - (1 - p)/ℓ`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::defect::{defect_with_replicas, DefectConfig, DefectError, DefectReport};
use crate::model::Model;
use crate::observability::RankConfig;

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("probability must satisfy 0 <= p < 1, got {0}")]
    BadProbability(String),
    #[error(transparent)]
    Defect(#[from] DefectError),
    #[error(
        "defects did not stabilize within {iterations} replicas (sequence {sequence:?}); \
         the rank estimates are unreliable, rerun with another seed or more trials"
    )]
    NoStabilization { iterations: usize, sequence: Vec<usize> },
}

/// A probability kept as an exact rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(q: BigRational) -> Result<Self, BoundError> {
        if q.is_negative() || q >= BigRational::one() {
            return Err(BoundError::BadProbability(q.to_string()));
        }
        Ok(Probability(q))
    }

    /// Parses a decimal (`0.99`) or fraction (`99/100`) exactly.
    pub fn parse(text: &str) -> Result<Self, BoundError> {
        let bad = || BoundError::BadProbability(text.to_string());
        let text = text.trim();
        let q = if let Some((n, d)) = text.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n, d)
        } else {
            let (int, frac) = text.split_once('.').unwrap_or((text, ""));
            if int.is_empty() && frac.is_empty()
                || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
            {
                return Err(bad());
            }
            let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
            BigRational::new(digits, num_traits::pow(BigInt::from(10), frac.len()))
        };
        Probability::new(q).map_err(|_| bad())
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(0.0)
    }

    /// `1 - (1 - p)/ℓ`; `p` itself when `ℓ = 0`.
    pub fn per_call(&self, ell: usize) -> Probability {
        if ell == 0 {
            return self.clone();
        }
        let one = BigRational::one();
        let ell = BigRational::from_integer(BigInt::from(ell));
        Probability(&one - (&one - &self.0) / ell)
    }
}

impl Default for Probability {
    fn default() -> Self {
        Probability(BigRational::new(BigInt::from(99), BigInt::from(100)))
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundConfig {
    pub probability: Probability,
    pub seed: u64,
    pub rank: RankConfig,
}

/// One entry of the defect sequence. Entry 0 is the synthetic `d_0 = ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectEntry {
    pub replicas: usize,
    pub defect: usize,
    pub report: Option<DefectReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub nel: usize,
    pub neg_lower: usize,
    pub neg_upper: usize,
    pub defect_sequence: Vec<DefectEntry>,
    pub probability: Probability,
    pub per_call_probability: Probability,
    pub seed: u64,
    pub num_params: usize,
    pub warnings: Vec<String>,
    pub runtime: Duration,
}

impl BoundResult {
    pub fn defects(&self) -> Vec<usize> {
        self.defect_sequence.iter().map(|e| e.defect).collect()
    }
}

pub fn compute_experiment_bound(model: &Model, cfg: &BoundConfig) -> Result<BoundResult, BoundError> {
    let start = Instant::now();
    model.validate().map_err(DefectError::from)?;
    let ell = model.num_params();
    let per_call = cfg.probability.per_call(ell);
    let mut sequence = vec![DefectEntry {
        replicas: 0,
        defect: ell,
        report: None,
    }];
    let mut warnings = Vec::new();

    let finish = |nel: usize, sequence: Vec<DefectEntry>, mut warnings: Vec<String>| {
        if nel == 0 {
            warnings.push(
                "NEL = 0: one experiment already identifies as much as any number of \
                 experiments; the bracket {0, 1} is reported by the same r/r+1 rule"
                    .to_string(),
            );
        }
        BoundResult {
            nel,
            neg_lower: nel,
            neg_upper: nel + 1,
            defect_sequence: sequence,
            probability: cfg.probability.clone(),
            per_call_probability: per_call.clone(),
            seed: cfg.seed,
            num_params: ell,
            warnings,
            runtime: start.elapsed(),
        }
    };

    if ell == 0 {
        return Ok(finish(0, sequence, warnings));
    }

    let defect_cfg = DefectConfig {
        rank: cfg.rank,
        probability: per_call.to_f64(),
        seed: cfg.seed,
        stream: 0,
    };
    for i in 1..=ell + 1 {
        if i == ell + 1 {
            warnings.push(format!(
                "defect computed for {i} replicas: the probability budget covers {ell} \
                 defect calls, so this extra call is outside it"
            ));
        }
        let report = defect_with_replicas(model, i, &DefectConfig { stream: i as u64, ..defect_cfg })?;
        let di = report.defect;
        let prev = sequence.last().expect("d_0 present").defect;
        sequence.push(DefectEntry {
            replicas: i,
            defect: di,
            report: Some(report),
        });
        if di == prev {
            return Ok(finish(i - 1, sequence, warnings));
        }
    }
    Err(BoundError::NoStabilization {
        iterations: ell + 1,
        sequence: sequence.iter().map(|e| e.defect).collect(),
    })
}
