//! Command-line front end: `expbound analyze` and `expbound generate`.
//!
//! Exit codes: 0 success, 1 input errors (usage, parse, validation),
//! 2 computational failures (resampling exhausted, no stabilization).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bound::{compute_experiment_bound, BoundConfig, BoundError, Probability};
use crate::defect::DefectError;
use crate::ffield::PrimeField;
use crate::format::{parse_model, print_model};
use crate::model::{generate_family_with, Family, Model, TransferRule};
use crate::observability::RankConfig;
use crate::oracle::{oracle_defect, MAX_ORACLE_STATES};
use crate::report::{AnalysisReport, OracleCheck};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "expbound",
    version,
    about = "Number of experiments needed for multi-experiment identifiability of rational ODE models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute NEL and the NEG bracket for a model file.
    Analyze(AnalyzeArgs),
    /// Print a built-in model in the model file format.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Model file.
    pub path: PathBuf,
    /// Overall success probability p, as a decimal or fraction (0 <= p < 1).
    #[arg(long = "prob", default_value = "0.99")]
    pub probability: String,
    /// RNG seed; falls back to EXPBOUND_SEED, then to fresh entropy.
    #[arg(long, env = "EXPBOUND_SEED")]
    pub seed: Option<u64>,
    /// Prime modulus of the evaluation field.
    #[arg(long, default_value_t = crate::ffield::MERSENNE_61)]
    pub prime: u64,
    /// Minimum number of random points per rank query.
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    /// Jet truncation order (default: number of lifted states).
    #[arg(long)]
    pub jet_order: Option<usize>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Shorthand for `--format json`.
    #[arg(long)]
    pub json: bool,
    /// Cross-check each defect with exact rational arithmetic (small models).
    #[arg(long)]
    pub oracle: bool,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Report `runtime_ms` as null so that output is byte-reproducible.
    #[arg(long)]
    pub no_timing: bool,
    /// Always assemble the Jacobian to the full jet order.
    #[arg(long)]
    pub no_early_exit: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// cycle, catenary, mammillary, seir_mixture or counterexample.
    pub family: String,
    /// Number of compartments (compartment families only, n >= 3).
    #[arg(long)]
    pub n: Option<usize>,
    /// Cycle only: outflow terms as displayed for the four-compartment cycle
    /// (`-a_{i+1,i} x_{i+1}`) instead of the source-proportional rule.
    #[arg(long)]
    pub literal_figure3: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_INPUT
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match cli.command {
        Command::Analyze(a) => analyze(&a, out, err),
        Command::Generate(g) => generate(&g, out, err),
    }
}

fn generate(args: &GenerateArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let family: Family = match args.family.parse() {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    if args.literal_figure3 && family != Family::Cycle {
        let _ = writeln!(err, "error: --literal-figure3 applies only to the cycle family");
        return EXIT_INPUT;
    }
    let n = match (family.is_compartmental(), args.n) {
        (true, Some(n)) => n,
        (true, None) => {
            let _ = writeln!(err, "error: family `{family}` requires --n <compartments>");
            return EXIT_INPUT;
        }
        (false, _) => 0,
    };
    let rule = if args.literal_figure3 {
        TransferRule::LiteralCycleDisplay
    } else {
        TransferRule::Standard
    };
    match generate_family_with(family, n, rule) {
        Ok(m) => {
            let _ = write!(out, "{}", print_model(&m));
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(&args.path) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", args.path.display());
            return EXIT_INPUT;
        }
    };
    let model = match parse_model(&text) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "{}:{}:{}: error: {}", args.path.display(), e.line, e.column, e.message);
            return EXIT_INPUT;
        }
    };
    let probability = match Probability::parse(&args.probability) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let field = match PrimeField::new(args.prime) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(err, "error: --prime: {e}");
            return EXIT_INPUT;
        }
    };
    if args.trials == 0 {
        let _ = writeln!(err, "error: --trials must be at least 1");
        return EXIT_INPUT;
    }
    if let Some(order) = args.jet_order {
        if order == 0 || order as u64 + 1 >= args.prime {
            let _ = writeln!(err, "error: --jet-order must satisfy 1 <= order < prime - 1");
            return EXIT_INPUT;
        }
    }
    if args.threads == Some(0) {
        let _ = writeln!(err, "error: --threads must be at least 1");
        return EXIT_INPUT;
    }
    let seed = args.seed.unwrap_or_else(rand::random);
    let cfg = BoundConfig {
        probability,
        seed,
        rank: RankConfig {
            field,
            trials: args.trials,
            jet_order: args.jet_order,
            early_exit: !args.no_early_exit,
        },
    };

    let run = || -> Result<AnalysisReport, BoundError> {
        let result = compute_experiment_bound(&model, &cfg)?;
        let mut report = AnalysisReport::new(&model, &result, &cfg.rank, !args.no_timing);
        if args.oracle {
            let (checks, notes) = oracle_checks(&model, &report, seed);
            report.oracle = Some(checks);
            report.warnings.extend(notes);
        }
        Ok(report)
    };
    let outcome = match args.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                let _ = writeln!(err, "error: cannot start {n} worker threads: {e}");
                return EXIT_COMPUTE;
            }
        },
        None => run(),
    };
    match outcome {
        Ok(report) => {
            let json = args.json || args.format == OutputFormat::Json;
            let _ = if json {
                writeln!(out, "{}", report.to_json())
            } else {
                write!(out, "{}", report.to_text())
            };
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error (seed {seed}): {e}");
            match e {
                BoundError::BadProbability(_) | BoundError::Defect(DefectError::Model(_)) => EXIT_INPUT,
                _ => EXIT_COMPUTE,
            }
        }
    }
}

/// Recomputes every defect of the sequence exactly where the replica is
/// small enough.
fn oracle_checks(model: &Model, report: &AnalysisReport, seed: u64) -> (Vec<OracleCheck>, Vec<String>) {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for entry in report.defect_sequence.iter().filter(|e| e.r > 0) {
        let n = entry.r * model.num_states() + model.num_params();
        if n > MAX_ORACLE_STATES {
            notes.push(format!(
                "oracle skipped for r = {}: {n} lifted states exceed the limit of {MAX_ORACLE_STATES}",
                entry.r
            ));
            continue;
        }
        let exact = model
            .replicate(entry.r)
            .map_err(|e| e.to_string())
            .and_then(|m| oracle_defect(&m, entry.jet_order, seed).map_err(|e| e.to_string()));
        match exact {
            Ok(d) => {
                if d != entry.defect {
                    notes.push(format!(
                        "oracle disagrees at r = {}: engine {}, exact {d}",
                        entry.r, entry.defect
                    ));
                }
                checks.push(OracleCheck {
                    r: entry.r,
                    engine_defect: entry.defect,
                    oracle_defect: d,
                    agrees: d == entry.defect,
                });
            }
            Err(e) => notes.push(format!("oracle failed for r = {}: {e}", entry.r)),
        }
    }
    (checks, notes)
}
