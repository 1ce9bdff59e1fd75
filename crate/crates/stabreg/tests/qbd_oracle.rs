//! Analytic relay-chain solver against the truncated-chain oracle, plus
//! the structural invariants of the root machinery.

mod common;

use common::{random_stable_spec, seeded, truncated_stationary};
use num_complex::Complex;
use stabreg::qbd::{
    characteristic_roots, pi0_identity_check, solve_stationary, ChainSpec, QbdError,
};

#[test]
#[allow(clippy::needless_range_loop)] // the index labels assertions
fn stationary_matches_truncated_oracle() {
    let mut rng = seeded(0xdecafbad);
    for trial in 0..60 {
        let k = 1 + (trial % 3) as u32;
        let spec = random_stable_spec(&mut rng, k);
        let dist = solve_stationary(&spec).expect("stable spec solves");
        let oracle = truncated_stationary(&spec, 400);
        for n in 0..=10 {
            assert!(
                (dist.pi(n) - oracle[n]).abs() < 1e-6,
                "trial {trial} k={k} Pi_{n}: {} vs {}",
                dist.pi(n),
                oracle[n]
            );
        }
    }
}

#[test]
fn generating_function_identity_on_random_specs() {
    let mut rng = seeded(0x5eed);
    for trial in 0..60 {
        let k = 2 + (trial % 2) as u32;
        let spec = random_stable_spec(&mut rng, k);
        let dist = solve_stationary(&spec).unwrap();
        let residual = pi0_identity_check(&spec, &dist);
        assert!(residual < 1e-9, "trial {trial}: residual {residual}");
    }
}

#[test]
fn tail_reconstruction_is_real() {
    let mut rng = seeded(0xc0ffee);
    for _ in 0..30 {
        let spec = random_stable_spec(&mut rng, 3);
        let dist = solve_stationary(&spec).unwrap();
        for n in (spec.k as usize + 1)..30 {
            let z: Complex<f64> = dist
                .tail_roots
                .iter()
                .zip(&dist.coefficients)
                .map(|(x, c)| c * x.powu(n as u32))
                .sum();
            assert!(z.im.abs() < 1e-9, "Pi_{n} imaginary part {}", z.im);
            assert!(z.re >= -1e-9, "Pi_{n} negative: {}", z.re);
        }
    }
}

#[test]
fn instability_signal_matches_drift_sign() {
    // Grid over service levels; drift crossings within 1e-9 excluded.
    let mut rng = seeded(77);
    for _ in 0..300 {
        let k = 1 + rng.gen_range(0..3u32);
        let a11 = rng.gen_range(0.0..0.4);
        let a12 = rng.gen_range(0.0..0.4);
        let b11 = rng.gen_range(0.05..0.5);
        let b12 = rng.gen_range(0.0..0.4);
        let spec = ChainSpec {
            a01: 0.1,
            a02: 0.1,
            a11,
            a12,
            b11,
            b12,
            k,
        };
        if spec.validate().is_err() || spec.drift().abs() < 1e-9 {
            continue;
        }
        let unstable_signal = matches!(characteristic_roots(&spec), Err(QbdError::NoInteriorRoot));
        assert_eq!(
            unstable_signal,
            spec.drift() >= 0.0,
            "spec {spec:?} drift {}",
            spec.drift()
        );
    }
}

use rand::Rng;

#[test]
fn mean_backlog_matches_oracle() {
    let mut rng = seeded(31);
    for _ in 0..10 {
        let spec = random_stable_spec(&mut rng, 2);
        let dist = solve_stationary(&spec).unwrap();
        let oracle = truncated_stationary(&spec, 400);
        let oracle_mean: f64 = oracle.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
        assert!(
            (dist.mean_backlog() - oracle_mean).abs() < 1e-5,
            "{} vs {oracle_mean}",
            dist.mean_backlog()
        );
    }
}

#[test]
fn aggregated_emptiness_matches_birth_death_truncation() {
    // The aggregate chain is a plain birth-death chain; its closed-form
    // emptiness probability must match a truncated stationary solve.
    let mut rng = seeded(55);
    for _ in 0..40 {
        let b = 0.3 + 0.6 * rng.gen::<f64>();
        let a1 = rng.gen::<f64>() * (b - 0.05).max(0.01);
        let a0 = rng.gen::<f64>();
        let chain = stabreg::bd::ApproxChain {
            arrive_empty: a0,
            arrive_busy: a1,
            serve: b,
        };
        let pi0 = stabreg::bd::pi0_closed_form(&chain).unwrap();
        let bd = ChainSpec {
            a01: a0,
            a02: 0.0,
            a11: a1,
            a12: 0.0,
            b11: b,
            b12: 0.0,
            k: 1,
        };
        let oracle = truncated_stationary(&bd, 400);
        assert!((pi0 - oracle[0]).abs() < 1e-9, "{pi0} vs {}", oracle[0]);
    }
}
