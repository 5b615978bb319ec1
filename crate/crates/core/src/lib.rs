//! Number of experiments needed for multi-experiment identifiability of
//! rational ODE models.
//!
//! For a model `x' = f(x, μ, u)`, `y = g(x, μ, u)` with rational right-hand
//! sides, [`bound::compute_experiment_bound`] returns `NEL`, the exact number
//! of independent experiments after which local identifiability no longer
//! improves, together with the bracket `{NEL, NEL + 1}` for the global count
//! `NEG`. Each step ranks a Jacobian of output Taylor coefficients evaluated
//! at random points of a prime field.
//!
//! ```
//! use expbound::{compute_experiment_bound, counterexample, BoundConfig};
//!
//! let result = compute_experiment_bound(&counterexample(), &BoundConfig::default()).unwrap();
//! assert_eq!((result.nel, result.neg_lower, result.neg_upper), (2, 2, 3));
//! ```

pub mod bound;
pub mod cli;
pub mod defect;
pub mod expr;
pub mod ffield;
pub mod format;
pub mod model;
pub mod observability;
pub mod oracle;
pub mod report;

pub use bound::{compute_experiment_bound, BoundConfig, BoundError, BoundResult, Probability};
pub use defect::{compute_defect, defect_with_replicas, DefectConfig, DefectReport};
pub use expr::{parse_expr, Expr};
pub use ffield::{PrimeField, MERSENNE_61};
pub use format::{parse_model, print_model, FormatError};
pub use model::{counterexample, generate_family, generate_family_with, seir_mixture, Family, Model, TransferRule};
pub use observability::{generic_output_rank, nonobservable_trdeg, RankConfig};
pub use report::AnalysisReport;
