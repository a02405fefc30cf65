mod common;

use csqbc::bounds::pb_lower;
use csqbc::protocol::{
    analyze, builtin_protocol, monte_carlo, monte_carlo_with, predicted_pass_rate, ProtocolSpec,
    SimConfig, Strategy, BUILTIN_PROTOCOLS,
};
use csqbc::state::PureState;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TRIALS: u64 = 100_000;

fn sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn assert_within_4_sigma(observed: f64, expected: f64, n: u64, what: &str) {
    let s = sigma(expected, n);
    assert!(
        (observed - expected).abs() <= 4.0 * s + 1e-12,
        "{what}: observed {observed}, expected {expected}, 4 sigma = {}",
        4.0 * s
    );
}

#[test]
fn closed_form_agreement_for_builtins() {
    let pairs = [
        (Strategy::Honest, Strategy::Cheating),
        (Strategy::Cheating, Strategy::Honest),
        (Strategy::Cheating, Strategy::Cheating),
    ];
    for (k, name) in BUILTIN_PROTOCOLS.iter().enumerate() {
        let protocol = builtin_protocol(name).unwrap();
        for (j, (alice, bob)) in pairs.into_iter().enumerate() {
            let expected = predicted_pass_rate(&protocol, alice, bob).unwrap();
            let seed = 1000 + 10 * k as u64 + j as u64;
            let stats = monte_carlo(&protocol, alice, bob, TRIALS, seed).unwrap();
            assert_within_4_sigma(
                stats.pass_rate,
                expected,
                TRIALS,
                &format!("{name} alice={alice} bob={bob}"),
            );
        }
    }
}

#[test]
fn hbc2000_cheating_bob_and_decode_accuracy() {
    let protocol = builtin_protocol("hbc2000").unwrap();
    let stats = monte_carlo(&protocol, Strategy::Honest, Strategy::Cheating, TRIALS, 7).unwrap();
    assert_within_4_sigma(stats.pass_rate, 0.75, TRIALS, "pass rate");
    assert_eq!(stats.measured_trials, TRIALS);
    let reliability = 0.5 + 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    assert_within_4_sigma(
        stats.decode_accuracy.unwrap(),
        reliability,
        stats.measured_trials,
        "decode accuracy",
    );
}

#[test]
fn fair_angle_cheating_alice() {
    let protocol = builtin_protocol("fair_angle").unwrap();
    let alpha = 19.85f64.to_radians().cos().powi(2);
    let f = 2.0 * (alpha * (1.0 - alpha)).sqrt();
    let zeta = 0.469;
    let expected = zeta + (1.0 - zeta) * (1.0 + f) / 2.0;
    let stats = monte_carlo(&protocol, Strategy::Cheating, Strategy::Honest, TRIALS, 11).unwrap();
    assert_within_4_sigma(
        stats.pass_rate,
        expected,
        TRIALS,
        "fair_angle cheating alice",
    );
    assert!(stats.decode_accuracy.is_none());
}

#[test]
fn honest_runs_pass_exactly() {
    for name in BUILTIN_PROTOCOLS {
        for zeta in [0.0, 0.3, 1.0] {
            let protocol = builtin_protocol(name).unwrap().with_zeta(zeta).unwrap();
            let stats =
                monte_carlo(&protocol, Strategy::Honest, Strategy::Honest, 5_000, 3).unwrap();
            assert_eq!(stats.passes, stats.trials);
            assert_eq!(stats.pass_rate, 1.0);
            assert_eq!(stats.standard_error, 0.0);
        }
    }
}

fn random_protocol(rng: &mut ChaCha8Rng) -> ProtocolSpec {
    let dim = rng.random_range(2..=4);
    let mut ensemble = || {
        let k = rng.random_range(1..=3);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights
            .into_iter()
            .map(|w| {
                let state = PureState::new(common::random_unit_vector(rng, dim)).unwrap();
                (w / total, state)
            })
            .collect::<Vec<_>>()
    };
    let e0 = ensemble();
    let e1 = ensemble();
    ProtocolSpec::new("random", e0, e1, 1.0).unwrap()
}

#[test]
fn ensemble_average_bound_for_random_protocols() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 20_000;
    for i in 0..6 {
        let protocol = random_protocol(&mut rng);
        let report = analyze(&protocol).unwrap();
        assert!(report.p_b >= pb_lower(report.d).unwrap() - 1e-9);
        assert!((report.reliability - (1.0 + report.d) / 2.0).abs() < 1e-12);
        let stats = monte_carlo(&protocol, Strategy::Honest, Strategy::Cheating, n, i).unwrap();
        let floor = pb_lower(report.d).unwrap();
        assert!(
            stats.pass_rate >= floor - 4.0 * sigma(floor, n),
            "protocol {i}: {} < {floor}",
            stats.pass_rate
        );
        assert_within_4_sigma(stats.pass_rate, report.p_b, n, "random protocol P_B");
    }
}

#[test]
fn deterministic_across_worker_counts() {
    let protocol = builtin_protocol("hbc2000").unwrap().with_zeta(0.5).unwrap();
    let run = |workers| {
        monte_carlo_with(
            &protocol,
            Strategy::Cheating,
            Strategy::Cheating,
            20_000,
            123,
            SimConfig {
                workers,
                ..SimConfig::default()
            },
        )
        .unwrap()
    };
    let reference = run(None);
    for workers in [Some(1), Some(2), Some(7)] {
        assert_eq!(run(workers), reference);
    }
    let other_seed = monte_carlo(
        &protocol,
        Strategy::Cheating,
        Strategy::Cheating,
        20_000,
        124,
    )
    .unwrap();
    assert_ne!(other_seed.passes, reference.passes);
}
