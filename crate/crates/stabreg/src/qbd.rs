//! Exact solver for the relay-queue Markov chain.
//!
//! The queue level (in packets of the smaller rate) moves per slot by
//! `+k` / `+1` on arrivals and `-k` / `-1` on departures, with arrival
//! probabilities that differ between the empty and non-empty states
//! because the scheduler sees the buffer state. Departures of `k` packets
//! require at least `k` packets in the buffer; a granted `k`-packet slot
//! with a shorter backlog moves nothing. The stationary distribution has
//! a geometric-mixture tail `Pi_n = sum_i c_i x_i^n` built from the roots
//! of the characteristic polynomial inside the unit disk; the head
//! `Pi_0..Pi_k` and the mixture coefficients come from a small linear
//! system of boundary balance equations plus normalization.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

type C64 = Complex<f64>;

/// Unit-disk test excludes the removed root at `x = 1` under rounding.
const UNIT_DISK_MARGIN: f64 = 1e-9;
/// Pairwise root distance below which the mixture basis degenerates.
const ROOT_SEPARATION: f64 = 1e-7;
/// Residual each balance equation must meet after the solve.
const RESIDUAL_TOL: f64 = 1e-9;
const CONDITION_WARN: f64 = 1e10;

#[derive(Debug, Error, PartialEq)]
pub enum QbdError {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(&'static str),
    /// No characteristic root inside the unit disk: the chain is not
    /// positive recurrent (arrival drift at least matches service).
    #[error("no characteristic root inside the unit disk; chain is unstable")]
    NoInteriorRoot,
    #[error("boundary system numerically singular: {0}")]
    SingularSystem(&'static str),
}

/// Transition probabilities of the relay queue under one `(policy, alpha)`
/// choice, plus the integer rate ratio `k` (`r1 = k * r2`).
///
/// `a01`/`a02`: arrival of `k`/`1` packets from the empty state;
/// `a11`/`a12`: the same from any non-empty state; `b11`/`b12`:
/// departures of `k`/`1` packets. The slot is idle with the remaining
/// probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub a01: f64,
    pub a02: f64,
    pub a11: f64,
    pub a12: f64,
    pub b11: f64,
    pub b12: f64,
    pub k: u32,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<(), QbdError> {
        let probs = [self.a01, self.a02, self.a11, self.a12, self.b11, self.b12];
        if probs.iter().any(|p| !(-1e-12..=1.0 + 1e-12).contains(p)) {
            return Err(QbdError::InvalidSpec("probabilities must lie in [0, 1]"));
        }
        if self.a01 + self.a02 > 1.0 + 1e-12
            || self.a11 + self.a12 > 1.0 + 1e-12
            || self.b11 + self.b12 > 1.0 + 1e-12
        {
            return Err(QbdError::InvalidSpec("grouped probabilities exceed 1"));
        }
        if self.k == 0 {
            return Err(QbdError::InvalidSpec("rate ratio k must be positive"));
        }
        Ok(())
    }

    /// Packet-weighted drift `arrivals - service` of the non-empty chain;
    /// negative drift is the stability condition.
    pub fn drift(&self) -> f64 {
        let k = f64::from(self.k);
        (self.a12 + k * self.a11) - (self.b12 + k * self.b11)
    }

    /// Aggregate packet arrival probability when empty: `a02 + k a01`.
    pub fn packet_arrivals_empty(&self) -> f64 {
        self.a02 + f64::from(self.k) * self.a01
    }

    /// Aggregate packet arrival probability when busy: `a12 + k a11`.
    pub fn packet_arrivals_busy(&self) -> f64 {
        self.a12 + f64::from(self.k) * self.a11
    }

    /// Aggregate packet service probability: `b12 + k b11`.
    pub fn packet_service(&self) -> f64 {
        self.b12 + f64::from(self.k) * self.b11
    }

    /// Characteristic polynomial of the interior balance equation,
    /// ascending coefficients of degree `2k`. `x = 1` is always a root.
    fn characteristic_poly(&self) -> Vec<f64> {
        let k = self.k as usize;
        let a1 = self.a11 + self.a12;
        let b1 = self.b11 + self.b12;
        let mut c = vec![0.0; 2 * k + 1];
        c[0] += self.a11;
        c[k - 1] += self.a12;
        c[k] -= a1 + b1;
        c[k + 1] += self.b12;
        c[2 * k] += self.b11;
        c
    }
}

/// Head probabilities, tail roots and mixture coefficients of the
/// stationary distribution.
#[derive(Debug, Clone)]
pub struct StationaryDist {
    /// `Pi_0 ..= Pi_k`.
    pub head: Vec<f64>,
    /// Tail roots inside the unit disk.
    pub tail_roots: Vec<C64>,
    /// Mixture coefficients matching `tail_roots`.
    pub coefficients: Vec<C64>,
    /// Convenience copy of `Pi_0`.
    pub pi0: f64,
    k: usize,
}

impl StationaryDist {
    /// `Pi_n` for any level; tail levels are reconstructed from the
    /// geometric mixture (imaginary parts of conjugate pairs cancel).
    pub fn pi(&self, n: usize) -> f64 {
        if n <= self.k {
            self.head[n]
        } else {
            self.tail_roots
                .iter()
                .zip(&self.coefficients)
                .map(|(x, c)| c * x.powu(n as u32))
                .sum::<C64>()
                .re
        }
    }

    /// Total mass, evaluated through the geometric tail sums.
    pub fn total_mass(&self) -> f64 {
        let head: f64 = self.head.iter().sum();
        let tail: C64 = self
            .tail_roots
            .iter()
            .zip(&self.coefficients)
            .map(|(x, c)| c * x.powu(self.k as u32 + 1) / (C64::new(1.0, 0.0) - x))
            .sum();
        head + tail.re
    }

    /// Expected backlog in packets (finite under stability).
    pub fn mean_backlog(&self) -> f64 {
        let head: f64 = self
            .head
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum();
        let one = C64::new(1.0, 0.0);
        let kk = self.k as u32 + 1;
        // sum_{n>k} n x^n = x^{k+1} ((k+1) - k x) / (1-x)^2
        let tail: C64 = self
            .tail_roots
            .iter()
            .zip(&self.coefficients)
            .map(|(x, c)| {
                let km1 = C64::new(self.k as f64, 0.0);
                c * x.powu(kk) * (km1 + one - km1 * x) / ((one - x) * (one - x))
            })
            .sum();
        head + tail.re
    }
}

/// Roots of the characteristic polynomial strictly inside the unit disk,
/// after removing the root at `x = 1` and dropping roots at the origin
/// (their geometric contribution vanishes identically).
///
/// Errors with [`QbdError::NoInteriorRoot`] when the chain is unstable:
/// nonnegative packet drift, in which case no normalizable tail exists.
/// Degenerate stable chains whose backlog cannot exceed level `k` return
/// an empty list.
pub fn characteristic_roots(spec: &ChainSpec) -> Result<Vec<C64>, QbdError> {
    spec.validate()?;
    if spec.drift() >= -1e-12 {
        return Err(QbdError::NoInteriorRoot);
    }
    let p = spec.characteristic_poly();
    // Deflate the known root x = 1 by synthetic division (descending).
    let desc: Vec<f64> = p.iter().rev().copied().collect();
    let mut cof = Vec::with_capacity(desc.len() - 1);
    let mut acc = 0.0;
    for &c in &desc[..desc.len() - 1] {
        acc += c;
        cof.push(acc);
    }
    debug_assert!(
        (acc + desc[desc.len() - 1]).abs() < 1e-10,
        "x=1 must be a root"
    );
    let roots = poly_roots(&cof);
    // A second root on the unit circle (the critical limit, or a
    // periodic sub-lattice chain) leaves no usable geometric basis.
    if roots
        .iter()
        .any(|x| (x.norm() - 1.0).abs() < UNIT_DISK_MARGIN)
    {
        return Err(QbdError::SingularSystem(
            "root too close to the unit circle",
        ));
    }
    Ok(roots
        .into_iter()
        .filter(|x| x.norm() < 1.0 - UNIT_DISK_MARGIN && x.norm() > 1e-12)
        .collect())
}

/// All complex roots of a polynomial with descending real coefficients,
/// via the eigenvalues of its companion matrix.
fn poly_roots(desc: &[f64]) -> Vec<C64> {
    // Strip (numerically) zero leading coefficients.
    let scale = desc.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let first = desc
        .iter()
        .position(|c| c.abs() > 1e-14 * scale)
        .unwrap_or(desc.len());
    let d = &desc[first..];
    let n = d.len().saturating_sub(1);
    if n == 0 {
        return Vec::new();
    }
    let lead = d[0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -d[n - i] / lead;
    }
    m.complex_eigenvalues().iter().copied().collect()
}

/// Solve for the stationary distribution: the first `R + k` balance
/// equations plus normalization determine `Pi_0..Pi_k` and the mixture
/// coefficients.
pub fn solve_stationary(spec: &ChainSpec) -> Result<StationaryDist, QbdError> {
    let roots = characteristic_roots(spec)?;
    for (i, xi) in roots.iter().enumerate() {
        for xj in &roots[i + 1..] {
            if (xi - xj).norm() < ROOT_SEPARATION {
                return Err(QbdError::SingularSystem("near-multiple tail roots"));
            }
        }
    }
    let k = spec.k as usize;
    let r = roots.len();
    let unknowns = k + 1 + r;

    // Column of the unknown vector representing Pi_n: a head entry for
    // n <= k, otherwise the mixture row x_i^n.
    let pi_col = |n: usize| -> DVector<C64> {
        let mut v = DVector::<C64>::zeros(unknowns);
        if n <= k {
            v[n] = C64::new(1.0, 0.0);
        } else {
            for (j, x) in roots.iter().enumerate() {
                v[k + 1 + j] = x.powu(n as u32);
            }
        }
        v
    };

    let mut a = DMatrix::<C64>::zeros(unknowns, unknowns);
    let mut b = DVector::<C64>::zeros(unknowns);
    let (a0, a1) = (spec.a01 + spec.a02, spec.a11 + spec.a12);
    for state in 0..(r + k) {
        let mut eq = DVector::<C64>::zeros(unknowns);
        let out_rate = if state == 0 {
            a0
        } else {
            a1 + spec.b12 + if state >= k { spec.b11 } else { 0.0 }
        };
        eq -= pi_col(state).scale(out_rate);
        // Inflows: +k and +1 arrivals from below, -1 and -k services from
        // above. Jumps from the empty state use the empty-state rates;
        // for k = 1 both arrival kinds land on state 1 and accumulate.
        if state >= k {
            if state == k {
                eq += pi_col(0).scale(spec.a01);
            } else {
                eq += pi_col(state - k).scale(spec.a11);
            }
        }
        if state >= 1 {
            if state == 1 {
                eq += pi_col(0).scale(spec.a02);
            } else {
                eq += pi_col(state - 1).scale(spec.a12);
            }
        }
        eq += pi_col(state + 1).scale(spec.b12);
        eq += pi_col(state + k).scale(spec.b11);
        a.set_row(state, &eq.transpose());
    }
    // Normalization: head sum plus geometric tail sums equals 1.
    let mut norm = DVector::<C64>::zeros(unknowns);
    for n in 0..=k {
        norm += pi_col(n);
    }
    for (j, x) in roots.iter().enumerate() {
        norm[k + 1 + j] += x.powu(k as u32 + 1) / (C64::new(1.0, 0.0) - x);
    }
    a.set_row(r + k, &norm.transpose());
    b[r + k] = C64::new(1.0, 0.0);

    let a_norm = a.camax();
    let lu = a.clone().lu();
    let sol = lu
        .solve(&b)
        .ok_or(QbdError::SingularSystem("LU solve failed"))?;
    if log::log_enabled!(log::Level::Warn) {
        if let Some(inv) = lu.try_inverse() {
            let cond = a_norm * inv.camax();
            if cond > CONDITION_WARN {
                log::warn!(
                    "boundary system condition estimate {cond:.3e} exceeds {CONDITION_WARN:.0e}"
                );
            }
        }
    }

    let mut head = Vec::with_capacity(k + 1);
    for n in 0..=k {
        let v = sol[n];
        if v.im.abs() > RESIDUAL_TOL || v.re < -RESIDUAL_TOL {
            return Err(QbdError::SingularSystem(
                "head probabilities not real/nonnegative",
            ));
        }
        head.push(v.re);
    }
    let coefficients: Vec<C64> = (0..r).map(|j| sol[k + 1 + j]).collect();
    let dist = StationaryDist {
        pi0: head[0],
        head,
        tail_roots: roots,
        coefficients,
        k,
    };

    // The solution must satisfy the balance equations it was built from,
    // plus the first tail equations (guards degenerate root sets).
    let res = balance_residual(spec, &dist, r + k + 2);
    if res > RESIDUAL_TOL {
        return Err(QbdError::SingularSystem("balance residual above tolerance"));
    }
    if (dist.total_mass() - 1.0).abs() > RESIDUAL_TOL {
        return Err(QbdError::SingularSystem(
            "normalization residual above tolerance",
        ));
    }
    Ok(dist)
}

/// Largest residual of the first `states` balance equations.
pub fn balance_residual(spec: &ChainSpec, dist: &StationaryDist, states: usize) -> f64 {
    let k = spec.k as usize;
    let (a0, a1) = (spec.a01 + spec.a02, spec.a11 + spec.a12);
    let mut worst = 0.0f64;
    for state in 0..states {
        let out_rate = if state == 0 {
            a0
        } else {
            a1 + spec.b12 + if state >= k { spec.b11 } else { 0.0 }
        };
        let mut lhs = -dist.pi(state) * out_rate;
        if state >= k {
            lhs += if state == k {
                dist.pi(0) * spec.a01
            } else {
                dist.pi(state - k) * spec.a11
            };
        }
        if state >= 1 {
            lhs += if state == 1 {
                dist.pi(0) * spec.a02
            } else {
                dist.pi(state - 1) * spec.a12
            };
        }
        lhs += dist.pi(state + 1) * spec.b12 + dist.pi(state + k) * spec.b11;
        worst = worst.max(lhs.abs());
    }
    worst
}

/// Residual of the generating-function identity relating the exact
/// emptiness probability to the birth-death aggregate:
/// `Pi_0 = Pi~_0 - k b11 (Pi_1 + .. + Pi_{k-1}) / (b - a1 + a0)` with the
/// aggregated arrival/service probabilities. Zero for `k = 1`.
pub fn pi0_identity_check(spec: &ChainSpec, dist: &StationaryDist) -> f64 {
    let k = spec.k as usize;
    let a0 = spec.packet_arrivals_empty();
    let a1 = spec.packet_arrivals_busy();
    let b = spec.packet_service();
    let denom = b - a1 + a0;
    let head_sum: f64 = (1..k).map(|n| dist.pi(n)).sum();
    let approx_pi0 = (b - a1) / denom;
    let rhs = approx_pi0 - f64::from(spec.k) * spec.b11 * head_sum / denom;
    (dist.pi0 - rhs).abs()
}
