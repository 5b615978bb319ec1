//! Identifiability defect: the transcendence degree of the parameters over
//! the field generated by outputs and inputs.
//!
//! Parameters are lifted to constant states twice: once unobserved and once
//! with every parameter observed directly. With `N` lifted states,
//! `A = N - rank'` and `B = N - rank''`, and the defect is `A - B`. Observing a
//! constant parameter only adds its order-0 unit row to the Jacobian, so both
//! ranks come out of a single assembly per random point.

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{Model, ModelError};
use crate::observability::{trial_rng, JetEngine, ObservabilityError, RankConfig, TrialRanks};

#[derive(Debug, thiserror::Error)]
pub enum DefectError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rank(#[from] ObservabilityError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectConfig {
    pub rank: RankConfig,
    /// Requested success probability of this defect computation.
    pub probability: f64,
    pub seed: u64,
    /// RNG stream tag, distinct per defect call made under one seed.
    pub stream: u64,
}

impl Default for DefectConfig {
    fn default() -> Self {
        DefectConfig {
            rank: RankConfig::default(),
            probability: 0.99,
            seed: 0,
            stream: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefectReport {
    pub replica_count: usize,
    pub defect: usize,
    /// Rank with parameters unobserved.
    pub rank_sigma_prime: usize,
    /// Rank with every parameter observed.
    pub rank_sigma_double_prime: usize,
    /// `N - rank_sigma_prime`.
    pub a: usize,
    /// `N - rank_sigma_double_prime`.
    pub b: usize,
    pub num_variables: usize,
    pub num_params: usize,
    pub trials: usize,
    pub jet_order: usize,
    pub seed: u64,
    pub prime: u64,
    pub per_trial: Vec<TrialRanks>,
}

pub fn compute_defect(model: &Model, cfg: &DefectConfig) -> Result<DefectReport, DefectError> {
    defect_with_replicas(model, 1, cfg)
}

/// Defect of the `replicas`-fold replica of `model`.
pub fn defect_with_replicas(
    model: &Model,
    replicas: usize,
    cfg: &DefectConfig,
) -> Result<DefectReport, DefectError> {
    let replicated = model.replicate(replicas)?;
    let lifted = replicated.lift_parameters(false)?;
    let n = lifted.lifted.num_states();
    let ell = model.num_params();
    let jet_order = cfg.rank.order_for(n);
    let prime = cfg.rank.field.modulus();
    let per_query = (1.0 + cfg.probability) / 2.0;

    if ell == 0 {
        return Ok(DefectReport {
            replica_count: replicas,
            defect: 0,
            rank_sigma_prime: 0,
            rank_sigma_double_prime: 0,
            a: 0,
            b: 0,
            num_variables: n,
            num_params: 0,
            trials: 0,
            jet_order,
            seed: cfg.seed,
            prime,
            per_trial: Vec::new(),
        });
    }

    let trials = cfg.rank.trials_for(per_query);
    let engine = JetEngine::new(&lifted.lifted, cfg.rank.field, jet_order)?;
    let per_trial = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, cfg.stream, t);
            engine.trial(&mut rng, &lifted.param_indices, cfg.rank.early_exit)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rank_prime = per_trial.iter().map(|t| t.rank).max().unwrap_or(0);
    let rank_double = per_trial.iter().map(|t| t.augmented_rank).max().unwrap_or(0);
    let a = n - rank_prime;
    let b = n - rank_double;
    Ok(DefectReport {
        replica_count: replicas,
        defect: a - b,
        rank_sigma_prime: rank_prime,
        rank_sigma_double_prime: rank_double,
        a,
        b,
        num_variables: n,
        num_params: ell,
        trials,
        jet_order,
        seed: cfg.seed,
        prime,
        per_trial,
    })
}
