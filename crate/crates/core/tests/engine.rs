//! The finite-field rank engine against the exact oracle, and structural
//! properties of ranks, defects and experiment bounds on the fixtures.

mod common;

use expbound::defect::defect_with_replicas;
use expbound::observability::{
    build_jacobian, rank_mod_p, solve_jets, trial_rng, EvaluationPoint, JetEngine,
};
use expbound::oracle::{exact_rank, exact_state_jets, oracle_defect};
use expbound::{
    compute_experiment_bound, counterexample, generic_output_rank, nonobservable_trdeg, BoundConfig, DefectConfig,
    Model, PrimeField, RankConfig,
};
use num_rational::BigRational;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Lifted `(Σ', Σ'')` pairs of every fixture replica with at most `max_n`
/// lifted states.
fn lifted_pairs(max_n: usize) -> Vec<(String, Model, Model)> {
    let mut out = Vec::new();
    for m in common::fixtures() {
        for r in 1..=5 {
            let rep = m.replicate(r).unwrap();
            if rep.num_states() + rep.num_params() > max_n {
                break;
            }
            let a = rep.lift_parameters(false).unwrap().lifted;
            let b = rep.lift_parameters(true).unwrap().lifted;
            out.push((format!("{} r={r}", m.name), a, b));
        }
    }
    out
}

#[test]
fn engine_matches_oracle() {
    let f = PrimeField::default();
    let pairs = lifted_pairs(10);
    assert!(pairs.iter().any(|(name, _, _)| name == "cycle r=1"));
    for (name, a, b) in pairs {
        let n = a.num_states();
        for seed in SEEDS {
            for lifted in [&a, &b] {
                let engine = generic_output_rank(lifted, n, 3, seed, f).unwrap();
                let exact = exact_rank(lifted, n, seed).unwrap();
                assert_eq!(engine, exact, "{name} seed {seed}");
            }
        }
    }
}

#[test]
fn oracle_rank_is_stable_across_points() {
    for (name, a, b) in lifted_pairs(8) {
        for lifted in [&a, &b] {
            let n = lifted.num_states();
            let ranks: Vec<usize> = [11, 12, 13].iter().map(|&s| exact_rank(lifted, n, s).unwrap()).collect();
            assert!(ranks.windows(2).all(|w| w[0] == w[1]), "{name}: {ranks:?}");
        }
    }
}

#[test]
fn oracle_defects_of_the_counterexample() {
    let m = counterexample();
    assert_eq!(oracle_defect(&m, Some(4), 0).unwrap(), 1);
    assert_eq!(oracle_defect(&m.replicate(2).unwrap(), None, 0).unwrap(), 0);
    let sigma1 = m.lift_parameters(false).unwrap().lifted;
    let sigma2 = m.lift_parameters(true).unwrap().lifted;
    assert_eq!(exact_rank(&sigma1, 4, 0).unwrap(), 3);
    assert_eq!(exact_rank(&sigma2, 4, 0).unwrap(), 4);
    assert_eq!(nonobservable_trdeg(&sigma1, &RankConfig::default(), 0).unwrap(), 1);
    assert_eq!(oracle_defect(&common::scaling().replicate(3).unwrap(), None, 0).unwrap(), 1);
}

#[test]
fn finite_field_jets_reduce_exact_jets() {
    let f = PrimeField::default();
    let m = counterexample().lift_parameters(false).unwrap().lifted;
    let point = EvaluationPoint {
        initial_values: vec![1, 1, 1, 1],
        input_series: vec![],
        seed: 0,
        stream: 0,
        prime: f.modulus(),
    };
    let jets = solve_jets(&m, &point, 6, None).unwrap();
    let one = BigRational::from_integer(1.into());
    let exact = exact_state_jets(&m, &vec![one; 4], &[], 6).unwrap();
    for (fp, q) in jets.state_jets.iter().zip(&exact) {
        let reduced: Vec<u64> = q.coeffs.iter().map(|c| f.from_rational(c).unwrap()).collect();
        assert_eq!(fp.value.coeffs, reduced);
    }
    // x2' = x1*x2 + mu1*x1 + mu2 at all ones: [1, 3, 3/2, ...].
    let x2 = &jets.state_jets[1].value.coeffs;
    assert_eq!(&x2[..3], &[1, 3, f.mul(3, f.inv(2).unwrap())]);
}

#[test]
fn rank_is_monotone_in_jet_order() {
    let f = PrimeField::default();
    for (name, a, b) in lifted_pairs(12) {
        for lifted in [&a, &b] {
            let n = lifted.num_states();
            let top = n + 2;
            let mut rng = trial_rng(7, 0, 0);
            let point = JetEngine::new(lifted, f, top).unwrap().sample_point(&mut rng);
            let ranks: Vec<usize> = (1..=top)
                .map(|nu| rank_mod_p(f, &build_jacobian(lifted, &point, nu).unwrap()))
                .collect();
            assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{name}: {ranks:?}");
            assert!(ranks[n - 1..].iter().all(|&r| r == ranks[n - 1]), "{name}: {ranks:?}");
            for (nu, &r) in (1..=top).zip(&ranks) {
                assert!(r <= n.min(lifted.num_outputs() * (nu + 1)));
            }
        }
    }
}

#[test]
fn permuting_states_permutes_columns() {
    let f = PrimeField::default();
    for (name, a, _) in lifted_pairs(10) {
        let n = a.num_states();
        let perm: Vec<usize> = (0..n).rev().collect();
        let permuted = Model {
            states: perm.iter().map(|&i| a.states[i].clone()).collect(),
            rhs: perm.iter().map(|&i| a.rhs[i].clone()).collect(),
            ..a.clone()
        };
        let mut rng = trial_rng(3, 0, 0);
        let point = JetEngine::new(&a, f, n).unwrap().sample_point(&mut rng);
        let permuted_point = EvaluationPoint {
            initial_values: perm.iter().map(|&i| point.initial_values[i]).collect(),
            ..point.clone()
        };
        let j = build_jacobian(&a, &point, n).unwrap();
        let jp = build_jacobian(&permuted, &permuted_point, n).unwrap();
        for row in 0..j.rows() {
            for (new_col, &old_col) in perm.iter().enumerate() {
                assert_eq!(jp.row(row)[new_col], j.row(row)[old_col], "{name}");
            }
        }
        assert_eq!(rank_mod_p(f, &j), rank_mod_p(f, &jp));
    }
}

#[test]
fn defect_sequences_are_well_behaved() {
    for m in common::small_fixtures() {
        let ell = m.num_params();
        for seed in SEEDS {
            let cfg = DefectConfig {
                seed,
                ..DefectConfig::default()
            };
            let reports: Vec<_> = (1..=5)
                .map(|r| defect_with_replicas(&m, r, &DefectConfig { stream: r as u64, ..cfg }).unwrap())
                .collect();
            let d: Vec<usize> = reports.iter().map(|r| r.defect).collect();
            assert!(d.iter().all(|&x| x <= ell), "{} {d:?}", m.name);
            assert!(d.windows(2).all(|w| w[0] >= w[1]), "{} not nonincreasing: {d:?}", m.name);
            // Once two consecutive defects agree they stay equal.
            if let Some(i) = d.windows(2).position(|w| w[0] == w[1]) {
                assert!(d[i..].iter().all(|&x| x == d[i]), "{} {d:?}", m.name);
            }
            for rep in &reports {
                assert_eq!(rep.defect, rep.a - rep.b);
                assert!(rep.per_trial.iter().all(|t| t.augmented_rank >= t.rank));
            }
        }
    }
}

#[test]
fn early_exit_does_not_change_defects() {
    for m in common::fixtures() {
        let mut exhaustive = DefectConfig::default();
        exhaustive.rank.early_exit = false;
        for r in 1..=2 {
            let fast = defect_with_replicas(&m, r, &DefectConfig::default()).unwrap();
            let full = defect_with_replicas(&m, r, &exhaustive).unwrap();
            assert_eq!(
                (fast.rank_sigma_prime, fast.rank_sigma_double_prime),
                (full.rank_sigma_prime, full.rank_sigma_double_prime),
                "{} r={r}",
                m.name
            );
        }
    }
}

#[test]
fn bounds_on_fixtures() {
    let expected = [
        ("counterexample", 2),
        ("seir_mixture", 1),
        ("scaling", 0),
        ("driven_decay", 1),
        ("michaelis_menten", 1),
        ("two_compartment", 1),
        ("cycle", 3),
        ("catenary", 4),
        ("mammillary", 4),
    ];
    for (m, (name, nel)) in common::fixtures().iter().zip(expected) {
        assert_eq!(m.name, name);
        let r = compute_experiment_bound(m, &BoundConfig::default()).unwrap();
        assert_eq!(r.nel, nel, "{name}: {:?}", r.defects());
        assert_eq!((r.neg_lower, r.neg_upper), (nel, nel + 1));
        assert!(r.nel <= m.num_params());
        let d = r.defects();
        assert_eq!(d[d.len() - 1], d[d.len() - 2]);
        if r.nel >= 1 {
            assert!(d[r.nel - 1] > d[r.nel]);
        }
    }
}

#[test]
fn counterexample_sequence_and_budget_warning() {
    let r = compute_experiment_bound(&counterexample(), &BoundConfig::default()).unwrap();
    assert_eq!(r.defects(), vec![2, 1, 0, 0]);
    assert_eq!(r.per_call_probability.to_string(), "199/200");
    assert_eq!(r.warnings.len(), 1);
    let scaling = compute_experiment_bound(&common::scaling(), &BoundConfig::default()).unwrap();
    assert_eq!(scaling.defects(), vec![1, 1]);
    assert!(scaling.warnings.iter().any(|w| w.contains("NEL = 0")));
}

#[test]
fn results_are_deterministic_per_seed() {
    for m in common::small_fixtures() {
        let cfg = BoundConfig {
            seed: 99,
            ..BoundConfig::default()
        };
        let a = compute_experiment_bound(&m, &cfg).unwrap();
        let b = compute_experiment_bound(&m, &cfg).unwrap();
        assert_eq!(a.defect_sequence, b.defect_sequence);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = single.install(|| compute_experiment_bound(&m, &cfg).unwrap());
        assert_eq!(a.defect_sequence, c.defect_sequence);
    }
}

#[test]
fn generic_rank_examples() {
    let f = PrimeField::default();
    let linear = common::model("lin", &[("x", "m_state"), ("m_state", "0")], &[], &[], &[("y", "x")]);
    assert_eq!(generic_output_rank(&linear, 2, 1, 0, f).unwrap(), 2);
    assert_eq!(exact_rank(&linear, 2, 0).unwrap(), 2);
    let product = common::model("prod", &[("x", "0"), ("m_state", "0")], &[], &[], &[("y", "m_state*x")]);
    assert_eq!(generic_output_rank(&product, 2, 1, 0, f).unwrap(), 1);
    let constant = common::model("const", &[("x", "x")], &[], &[], &[("y", "1")]);
    assert_eq!(generic_output_rank(&constant, 3, 1, 0, f).unwrap(), 0);
    let sigma2 = counterexample().replicate(2).unwrap().lift_parameters(true).unwrap().lifted;
    assert_eq!(generic_output_rank(&sigma2, 6, 3, 0, f).unwrap(), 6);
}
