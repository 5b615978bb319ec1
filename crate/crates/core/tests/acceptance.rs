//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines are always shown:
//! `cargo test --test acceptance`.

mod common;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use expbound::defect::defect_with_replicas;
use expbound::expr::Expr;
use expbound::ffield::{DualSeriesRing, PrimeField, Ring, SeriesRing, TruncatedSeries};
use expbound::observability::{build_jacobian, rank_mod_p, trial_rng, JetEngine};
use expbound::oracle::exact_rank;
use expbound::{
    compute_experiment_bound, generate_family, generate_family_with, generic_output_rank, print_model, BoundConfig,
    DefectConfig, Family, Model, TransferRule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [11, 22, 33, 44, 55];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn manifest(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("expbound-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}

/// Runs `expbound analyze` and returns the parsed JSON report and wall time.
fn analyze(path: &std::path::Path, extra: &[&str]) -> Result<(serde_json::Value, Vec<u8>, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_expbound"))
        .arg("analyze")
        .arg(path)
        .args(["--json"])
        .args(extra)
        .env_remove("EXPBOUND_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let v = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok((v, out.stdout, elapsed))
}

fn expect_bound(path: &std::path::Path, nel: u64, limit: Duration) -> Outcome {
    let mut slowest = Duration::ZERO;
    for seed in SEEDS {
        let (v, _, t) = analyze(path, &["--prob", "0.99", "--seed", &seed.to_string()])?;
        ensure(v["nel"] == nel, || format!("seed {seed}: nel = {}", v["nel"]))?;
        ensure(v["neg_candidates"] == serde_json::json!([nel, nel + 1]), || {
            format!("seed {seed}: neg_candidates = {}", v["neg_candidates"])
        })?;
        ensure(t < limit, || format!("seed {seed}: {t:.2?} exceeds {limit:?}"))?;
        slowest = slowest.max(t);
    }
    Ok(format!("nel = {nel}, neg ∈ {{{nel}, {}}} for 5 seeds, slowest run {slowest:.2?}", nel + 1))
}

fn criterion_1() -> Outcome {
    expect_bound(&manifest("models/counterexample.mdl"), 2, Duration::from_secs(1))
}

fn criterion_2() -> Outcome {
    expect_bound(&manifest("models/seir_mixture.mdl"), 1, Duration::from_secs(5))
}

fn nel_all_seeds(model: &Model) -> Result<Vec<usize>, String> {
    SEEDS
        .iter()
        .map(|&seed| {
            compute_experiment_bound(model, &BoundConfig { seed, ..BoundConfig::default() })
                .map(|r| r.nel)
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let table: [(Family, [usize; 4]); 3] = [
        (Family::Cycle, [3, 3, 3, 3]),
        (Family::Catenary, [4, 5, 5, 5]),
        (Family::Mammillary, [4, 5, 5, 5]),
    ];
    let mut notes = Vec::new();
    for (family, expected) in table {
        for (n, want) in (3..=6).zip(expected) {
            let got = nel_all_seeds(&generate_family(family, n).unwrap())?;
            if got.iter().all(|&g| g == want) {
                continue;
            }
            // Fall back to the literal display variant where one exists.
            let literal_ok = family == Family::Cycle && {
                let m = generate_family_with(family, n, TransferRule::LiteralCycleDisplay).unwrap();
                nel_all_seeds(&m)?.iter().all(|&g| g == want)
            };
            if !literal_ok {
                return Err(format!("{family} n = {n}: expected {want}, got {got:?}"));
            }
            notes.push(format!("{family} n = {n} matched only with the literal variant"));
        }
    }
    let mut msg = "cycle 3,3,3,3; catenary 4,5,5,5; mammillary 4,5,5,5 (n = 3..6, 5 seeds, default rule)".to_string();
    if !notes.is_empty() {
        msg = format!("{msg}; {}", notes.join("; "));
    }
    Ok(msg)
}

fn criterion_4() -> Outcome {
    let dir = scratch_dir();
    let mut parts = Vec::new();
    for (n, limit) in [(10usize, 60u64), (15, 300)] {
        let path = dir.join(format!("cycle{n}.mdl"));
        std::fs::write(&path, print_model(&generate_family(Family::Cycle, n).unwrap())).unwrap();
        let (v, _, t) = analyze(&path, &["--seed", "1"])?;
        ensure(v["nel"] == 3, || format!("cycle n = {n}: nel = {}", v["nel"]))?;
        ensure(t < Duration::from_secs(limit), || format!("cycle n = {n}: {t:.2?} >= {limit} s"))?;
        parts.push(format!("n = {n} in {t:.2?} (limit {limit} s)"));
    }
    Ok(format!("cycle {}", parts.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut checked = 0;
    for m in common::fixtures() {
        let ell = m.num_params();
        for seed in SEEDS {
            let mut d = Vec::new();
            for r in 1..=5 {
                let cfg = DefectConfig { seed, stream: r as u64, ..DefectConfig::default() };
                let rep = defect_with_replicas(&m, r, &cfg).map_err(|e| e.to_string())?;
                ensure(rep.per_trial.iter().all(|t| t.augmented_rank >= t.rank), || {
                    format!("{} r = {r}: rank'' < rank' on a trial", m.name)
                })?;
                d.push(rep.defect);
            }
            ensure(d.iter().all(|&x| x <= ell), || format!("{}: {d:?} outside [0, {ell}]", m.name))?;
            ensure(d.windows(2).all(|w| w[0] >= w[1]), || format!("{}: {d:?} increases", m.name))?;
            if let Some(i) = d.windows(2).position(|w| w[0] == w[1]) {
                ensure(i + 2 >= d.len() || d[i + 2] == d[i], || {
                    format!("{}: {d:?} does not persist after stabilizing", m.name)
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (fixture, seed) sequences for r = 1..5 nonincreasing, in [0, ℓ], persistent"))
}

fn criterion_6() -> Outcome {
    let f = PrimeField::default();
    let mut cases: Vec<(String, Model)> = Vec::new();
    for m in common::fixtures() {
        for r in 1..=5 {
            let rep = m.replicate(r).unwrap();
            if rep.num_states() + rep.num_params() > 8 {
                break;
            }
            for observe in [false, true] {
                cases.push((format!("{} r = {r}", m.name), rep.lift_parameters(observe).unwrap().lifted));
            }
        }
    }
    for observe in [false, true] {
        let cycle = generate_family(Family::Cycle, 3).unwrap();
        cases.push(("cycle n = 3 r = 1".into(), cycle.lift_parameters(observe).unwrap().lifted));
    }
    for (name, lifted) in &cases {
        let n = lifted.num_states();
        for seed in SEEDS {
            let engine = generic_output_rank(lifted, n, 3, seed, f).map_err(|e| e.to_string())?;
            let exact = exact_rank(lifted, n, seed).map_err(|e| e.to_string())?;
            ensure(engine == exact, || format!("{name} seed {seed}: engine {engine}, oracle {exact}"))?;
        }
    }
    Ok(format!("{} lifted systems x 5 seeds: finite-field rank = exact rank", cases.len()))
}

/// Random polynomial expression in `a`, `b` of bounded depth.
fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..3) {
            0 => Expr::var("a"),
            1 => Expr::var("b"),
            _ => Expr::int(rng.gen_range(-5..6)),
        };
    }
    let x = Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..5) {
        0 => Expr::Add(x, Box::new(random_expr(rng, depth - 1))),
        1 => Expr::Sub(x, Box::new(random_expr(rng, depth - 1))),
        2 => Expr::Mul(x, Box::new(random_expr(rng, depth - 1))),
        3 => Expr::Neg(x),
        _ => Expr::Pow(x, rng.gen_range(0..4)),
    }
}

fn criterion_7() -> Outcome {
    const CASES: usize = 10_000;
    const ORDER: usize = 5;
    let f = PrimeField::default();
    let p = f.modulus();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = [0usize; 3];

    for _ in 0..CASES {
        let (a, b, c) = (rng.gen_range(0..p), rng.gen_range(0..p), rng.gen_range(0..p));
        let ok = f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
            && f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
            && f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
            && f.add(a, f.neg(a)) == 0
            && (a == 0 || f.mul(a, f.inv(a).unwrap()) == 1);
        failures[0] += usize::from(!ok);
    }

    let series = SeriesRing::new(f, ORDER);
    let random_series = |rng: &mut ChaCha8Rng| TruncatedSeries {
        coeffs: (0..=ORDER).map(|_| rng.gen_range(0..p)).collect::<Vec<u64>>(),
    };
    for _ in 0..CASES {
        let mut s = random_series(&mut rng);
        s.coeffs[0] = rng.gen_range(1..p);
        let ok = series
            .series_inv(&s)
            .and_then(|inv| Ok(series.series_mul(&s, &inv)? == series.one() && series.series_inv(&inv)? == s))
            .unwrap_or(false);
        failures[1] += usize::from(!ok);
    }

    let dual = DualSeriesRing::new(f, ORDER);
    for _ in 0..CASES {
        let e1 = random_expr(&mut rng, 3);
        let e2 = random_expr(&mut rng, 3);
        let env: HashMap<String, _> = [
            ("a".to_string(), dual.lift(random_series(&mut rng), random_series(&mut rng))),
            ("b".to_string(), dual.lift(random_series(&mut rng), random_series(&mut rng))),
        ]
        .into_iter()
        .collect();
        let v1 = e1.evaluate(&dual, &env).unwrap();
        let v2 = e2.evaluate(&dual, &env).unwrap();
        let prod = Expr::Mul(Box::new(e1), Box::new(e2)).evaluate(&dual, &env).unwrap();
        let s = &dual.series;
        let ok = prod.value == s.mul(&v1.value, &v2.value)
            && prod.derivative == s.add(&s.mul(&v1.derivative, &v2.value), &s.mul(&v1.value, &v2.derivative));
        failures[2] += usize::from(!ok);
    }
    ensure(failures == [0, 0, 0], || {
        format!("failures: field {}, series inverse {}, product rule {}", failures[0], failures[1], failures[2])
    })?;

    // Rank is monotone in the jet order at a fixed point and constant from
    // order N on.
    let mut systems = 0;
    for m in common::fixtures() {
        for observe in [false, true] {
            let lifted = m.lift_parameters(observe).unwrap().lifted;
            let n = lifted.num_states();
            let point = JetEngine::new(&lifted, f, n + 2)
                .unwrap()
                .sample_point(&mut trial_rng(5, 0, 0));
            let ranks: Vec<usize> = (1..=n + 2)
                .map(|nu| rank_mod_p(f, &build_jacobian(&lifted, &point, nu).unwrap()))
                .collect();
            ensure(ranks.windows(2).all(|w| w[0] <= w[1]), || format!("{}: {ranks:?}", m.name))?;
            ensure(ranks[n - 1..].iter().all(|&r| r == ranks[n - 1]), || format!("{}: {ranks:?}", m.name))?;
            systems += 1;
        }
    }
    Ok(format!(
        "3 x {CASES} kernel cases with 0 failures; rank monotone in jet order on {systems} lifted fixtures"
    ))
}

fn criterion_8() -> Outcome {
    let dir = scratch_dir();
    let mut models = vec![manifest("models/counterexample.mdl"), manifest("models/seir_mixture.mdl")];
    let cycle = dir.join("cycle5.mdl");
    std::fs::write(&cycle, print_model(&generate_family(Family::Cycle, 5).unwrap())).unwrap();
    models.push(cycle);
    for path in &models {
        let base = ["--seed", "2024", "--no-timing"];
        let (_, first, _) = analyze(path, &base)?;
        let (_, second, _) = analyze(path, &base)?;
        let (_, one, _) = analyze(path, &[&base[..], &["--threads", "1"]].concat())?;
        let (_, eight, _) = analyze(path, &[&base[..], &["--threads", "8"]].concat())?;
        let name = path.file_name().unwrap().to_string_lossy();
        ensure(first == second, || format!("{name}: two runs differ"))?;
        ensure(one == eight, || format!("{name}: --threads 1 and 8 differ"))?;
        ensure(first == one, || format!("{name}: default threads differ from 1"))?;
    }
    Ok(format!("{} models: byte-identical JSON across runs and thread counts", models.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("counterexample NEL = 2", criterion_1),
        ("SEIR mixture NEL = 1", criterion_2),
        ("compartment families NEL table", criterion_3),
        ("cycle scaling runtimes", criterion_4),
        ("defect-sequence properties", criterion_5),
        ("oracle equivalence", criterion_6),
        ("kernel property suites", criterion_7),
        ("determinism", criterion_8),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {title} — {detail} [{t:.1?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {title} — {detail} [{t:.1?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
