//! JSON and plain-text renderings of an experiment-bound analysis.

use std::fmt::Write as _;

use serde::Serialize;

use crate::bound::BoundResult;
use crate::model::Model;
use crate::observability::RankConfig;

/// One row of the defect sequence. Row `r = 0` is the synthetic `d_0 = ℓ`
/// and carries no ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequenceEntry {
    pub r: usize,
    pub defect: usize,
    pub rank_prime: Option<usize>,
    pub rank_double_prime: Option<usize>,
    pub num_variables: Option<usize>,
    pub trials: Option<usize>,
    pub jet_order: Option<usize>,
}

/// Exact-arithmetic cross-check of one defect value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub r: usize,
    pub engine_defect: usize,
    pub oracle_defect: usize,
    pub agrees: bool,
}

/// Stable JSON schema of `expbound analyze --json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub model_name: String,
    pub num_states: usize,
    pub num_params: usize,
    pub num_outputs: usize,
    pub defect_sequence: Vec<SequenceEntry>,
    pub nel: usize,
    pub neg_candidates: [usize; 2],
    pub probability: f64,
    pub probability_exact: String,
    pub per_call_probability: f64,
    pub per_call_probability_exact: String,
    pub seed: u64,
    pub prime: u64,
    pub trials: usize,
    pub jet_order: usize,
    pub runtime_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleCheck>>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn new(model: &Model, result: &BoundResult, rank: &RankConfig, timing: bool) -> Self {
        let defect_sequence: Vec<SequenceEntry> = result
            .defect_sequence
            .iter()
            .map(|e| SequenceEntry {
                r: e.replicas,
                defect: e.defect,
                rank_prime: e.report.as_ref().map(|d| d.rank_sigma_prime),
                rank_double_prime: e.report.as_ref().map(|d| d.rank_sigma_double_prime),
                num_variables: e.report.as_ref().map(|d| d.num_variables),
                trials: e.report.as_ref().map(|d| d.trials),
                jet_order: e.report.as_ref().map(|d| d.jet_order),
            })
            .collect();
        let reports = result.defect_sequence.iter().filter_map(|e| e.report.as_ref());
        let trials = reports.clone().map(|d| d.trials).max().unwrap_or(0);
        let jet_order = reports
            .map(|d| d.jet_order)
            .max()
            .unwrap_or_else(|| rank.order_for(model.num_states() + model.num_params()));
        AnalysisReport {
            model_name: model.name.clone(),
            num_states: model.num_states(),
            num_params: model.num_params(),
            num_outputs: model.num_outputs(),
            defect_sequence,
            nel: result.nel,
            neg_candidates: [result.neg_lower, result.neg_upper],
            probability: result.probability.to_f64(),
            probability_exact: result.probability.to_string(),
            per_call_probability: result.per_call_probability.to_f64(),
            per_call_probability_exact: result.per_call_probability.to_string(),
            seed: result.seed,
            prime: rank.field.modulus(),
            trials,
            jet_order,
            runtime_ms: timing.then_some(result.runtime.as_secs_f64() * 1e3),
            oracle: None,
            warnings: result.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "model {}: {} states, {} parameters, {} outputs",
            self.model_name, self.num_states, self.num_params, self.num_outputs
        );
        let _ = writeln!(s, "NEL = {}, NEG ∈ {{{}, {}}}", self.nel, self.neg_candidates[0], self.neg_candidates[1]);
        let _ = writeln!(s, "defect sequence:");
        for e in &self.defect_sequence {
            match (e.rank_prime, e.rank_double_prime, e.num_variables) {
                (Some(a), Some(b), Some(n)) => {
                    let _ = writeln!(s, "  d_{} = {}  (rank {} -> {} of {} variables)", e.r, e.defect, a, b, n);
                }
                _ => {
                    let _ = writeln!(s, "  d_{} = {}  (number of parameters)", e.r, e.defect);
                }
            }
        }
        let _ = writeln!(
            s,
            "probability {} (per defect call {}), seed {}, prime {}, trials {}, jet order {}",
            self.probability_exact, self.per_call_probability_exact, self.seed, self.prime, self.trials, self.jet_order
        );
        if let Some(ms) = self.runtime_ms {
            let _ = writeln!(s, "runtime {ms:.1} ms");
        }
        if let Some(checks) = &self.oracle {
            for c in checks {
                let _ = writeln!(
                    s,
                    "oracle r = {}: exact defect {} ({})",
                    c.r,
                    c.oracle_defect,
                    if c.agrees { "agrees" } else { "DISAGREES" }
                );
            }
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}
