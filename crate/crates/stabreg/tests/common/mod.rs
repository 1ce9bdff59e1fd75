#![allow(dead_code)] // shared across several integration-test binaries

//! Shared test oracles and generators.
//!
//! The truncated-chain oracle reproduces the relay queue's slot dynamics
//! on a finite state space and extracts the stationary distribution by
//! lazy power iteration; it shares no code with the analytic solver it
//! checks.

use rand::rngs::StdRng;
use rand::Rng;
use rand::SeedableRng;

use stabreg::channel::{state_probabilities, LinkGeometry, LinkStateProbs};
use stabreg::presets;
use stabreg::qbd::ChainSpec;
use stabreg::ss::SsScenario;

/// Stationary distribution of the relay chain truncated to `states`
/// levels, by power iteration on the lazy transition matrix.
///
/// Transitions out of state `i`: `+k` with the arrival probability of
/// the current occupancy class, `+1` likewise, `-1` with `b12`, `-k`
/// with `b11` when `i >= k`, else stay. Upward jumps past the truncation
/// collapse onto the last state; callers must pick specs whose tail mass
/// beyond the truncation is negligible.
pub fn truncated_stationary(spec: &ChainSpec, states: usize) -> Vec<f64> {
    let k = spec.k as usize;
    let mut pi = vec![0.0; states];
    pi[0] = 1.0;
    let mut next = vec![0.0; states];
    for _ in 0..500_000 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let (up_k, up_1) = if i == 0 {
                (spec.a01, spec.a02)
            } else {
                (spec.a11, spec.a12)
            };
            let down_k = if i >= k { spec.b11 } else { 0.0 };
            let down_1 = if i >= 1 { spec.b12 } else { 0.0 };
            let stay = 1.0 - up_k - up_1 - down_k - down_1;
            next[(i + k).min(states - 1)] += mass * up_k;
            next[(i + 1).min(states - 1)] += mass * up_1;
            if i >= k {
                next[i - k] += mass * down_k;
            }
            if i >= 1 {
                next[i - 1] += mass * down_1;
            }
            next[i] += mass * stay;
        }
        // lazy step for aperiodicity, then convergence check
        let mut delta = 0.0f64;
        for i in 0..states {
            let blended = 0.5 * (pi[i] + next[i]);
            delta = delta.max((blended - pi[i]).abs());
            pi[i] = blended;
        }
        if delta < 1e-14 {
            break;
        }
    }
    pi
}

/// Random chain spec with the given rate ratio, rejection-sampled for a
/// drift margin so the truncated oracle resolves the tail to 1e-12.
pub fn random_stable_spec(rng: &mut StdRng, k: u32) -> ChainSpec {
    loop {
        let a01 = rng.gen::<f64>() * 0.5;
        let a02 = rng.gen::<f64>() * (1.0 - a01).min(0.5);
        let a11 = rng.gen::<f64>() * 0.4;
        let a12 = rng.gen::<f64>() * (1.0 - a11).min(0.4);
        let b11 = 0.2 + rng.gen::<f64>() * 0.5;
        let b12 = rng.gen::<f64>() * (1.0 - b11);
        let spec = ChainSpec {
            a01,
            a02,
            a11,
            a12,
            b11,
            b12,
            k,
        };
        if spec.validate().is_err() {
            continue;
        }
        let busy = spec.packet_arrivals_busy();
        let serve = spec.packet_service();
        if busy < 0.8 * serve {
            return spec;
        }
    }
}

/// Random three-user scenario drawn from the reference radio model with
/// independent per-UE distances in `[d_lo, d_hi]` meters, `k = 2`.
pub fn random_physical_ss(rng: &mut StdRng, d_lo: f64, d_hi: f64) -> SsScenario {
    let cfg = presets::radio();
    let mut d = || d_lo + rng.gen::<f64>() * (d_hi - d_lo);
    SsScenario {
        probs_s: state_probabilities(&LinkGeometry::uplink(d()), &cfg, 3).unwrap(),
        probs_u: state_probabilities(&LinkGeometry::uplink(d()), &cfg, 3).unwrap(),
        probs_d: state_probabilities(&LinkGeometry::downlink(d()), &cfg, 3).unwrap(),
        r2: 200.0,
        k: 2,
    }
}

/// Random three-user scenario with unconstrained probability simplexes.
pub fn random_raw_ss(rng: &mut StdRng) -> SsScenario {
    let mut simplex = || {
        let a = rng.gen::<f64>();
        let b = rng.gen::<f64>();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        LinkStateProbs::new(vec![lo, hi - lo, 1.0 - hi]).unwrap()
    };
    SsScenario {
        probs_s: simplex(),
        probs_u: simplex(),
        probs_d: simplex(),
        r2: 200.0,
        k: 2,
    }
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
