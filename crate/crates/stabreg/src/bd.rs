//! Birth-death aggregation of the relay queue: closed-form emptiness
//! probability, the fraction-vector stability constraint, and the finite
//! candidate set that reaches the corner points of the approximated
//! region.
//!
//! Aggregating `k`-packet and single-packet moves into packet-weighted
//! birth/death probabilities turns the bounded-jump chain into a plain
//! birth-death chain whose emptiness probability is explicit. The
//! scheduler's uplink/downlink split `alpha` then has to satisfy one
//! linear stability constraint, and maximizing the source rate over it is
//! a linear-fractional program whose optimum lies in a small closed-form
//! candidate set.

use thiserror::Error;

use crate::policy::SsPolicyParams;
use crate::qbd::ChainSpec;
use crate::ss::{relay_chain, SsAlpha, SsScenario};

/// Relative slack below which the constraint is treated as violated.
pub const FEASIBILITY_TOL: f64 = 1e-12;
/// An `alpha` is usable while `arrivals - service <= ALPHA_SLACK_TOL`
/// (the emptiness probability degrades continuously to 0 on the
/// boundary itself).
const ALPHA_SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum BdError {
    #[error("aggregated chain unstable: arrivals {arrivals:.6} >= service {service:.6}")]
    Unstable { arrivals: f64, service: f64 },
}

/// Packet-weighted transition probabilities of the aggregated chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxChain {
    /// Arrival probability from the empty state, `a02 + k a01`.
    pub arrive_empty: f64,
    /// Arrival probability from busy states, `a12 + k a11`.
    pub arrive_busy: f64,
    /// Service probability, `b12 + k b11`.
    pub serve: f64,
}

impl ApproxChain {
    pub fn from_spec(spec: &ChainSpec) -> Self {
        Self {
            arrive_empty: spec.packet_arrivals_empty(),
            arrive_busy: spec.packet_arrivals_busy(),
            serve: spec.packet_service(),
        }
    }
}

/// Emptiness probability `(b - a1) / (b - a1 + a0)` of the aggregated
/// chain; requires `a1 < b` (up to a boundary tolerance, where it tends
/// to zero).
pub fn pi0_closed_form(chain: &ApproxChain) -> Result<f64, BdError> {
    let gap = chain.serve - chain.arrive_busy;
    if gap < -ALPHA_SLACK_TOL {
        return Err(BdError::Unstable {
            arrivals: chain.arrive_busy,
            service: chain.serve,
        });
    }
    let gap = gap.max(0.0);
    Ok(gap / (gap + chain.arrive_empty))
}

/// Coefficients of the linear stability constraint `c . alpha <= rhs` for
/// one policy. `rhs` is `k p_d^1 U + p_d^2 N - (k p_s^1 U + p_s^2 V)
/// p_d^3`; the four `c` entries weight the fraction components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaConstraint {
    pub coeffs: [f64; 4],
    pub rhs: f64,
}

impl AlphaConstraint {
    pub fn new(sc: &SsScenario, params: &SsPolicyParams) -> Self {
        let k = f64::from(sc.k);
        let (ps1, ps2) = (sc.probs_s.state(1), sc.probs_s.state(2));
        let (pd1, pd2, pd3) = (
            sc.probs_d.state(1),
            sc.probs_d.state(2),
            sc.probs_d.state(3),
        );
        let (u, v) = (params.u, params.v);
        let n = params.n(ps1);
        AlphaConstraint {
            coeffs: [
                2.0 * k * ps1 * pd1 * u,
                (k + 1.0) * ps1 * pd2 * u,
                (k + 1.0) * ps2 * pd1 * u,
                2.0 * ps2 * pd2 * v,
            ],
            rhs: k * pd1 * u + pd2 * n - (k * ps1 * u + ps2 * v) * pd3,
        }
    }

    pub fn lhs(&self, alpha: &SsAlpha) -> f64 {
        self.coeffs.iter().zip(&alpha.0).map(|(c, a)| c * a).sum()
    }

    /// Slack `rhs - lhs`; nonnegative means the relay queue stays stable.
    pub fn slack(&self, alpha: &SsAlpha) -> f64 {
        self.rhs - self.lhs(alpha)
    }
}

/// Evaluate the stability constraint at `alpha`: `(satisfied, slack)`.
///
/// The slack equals the aggregated chain's `service - arrivals` gap, so
/// this is exactly the Loynes condition of the approximated relay queue.
pub fn alpha_constraint(sc: &SsScenario, params: &SsPolicyParams, alpha: &SsAlpha) -> (bool, f64) {
    let slack = AlphaConstraint::new(sc, params).slack(alpha);
    (slack >= -FEASIBILITY_TOL, slack)
}

/// The finite candidate set reaching the corner points of the
/// approximated region for one policy.
///
/// Members come from three case families of the linear-fractional
/// optimum: (i) binary `(alpha_2, alpha_3)` with `alpha_1 = alpha_4 = 0`,
/// (ii) `(alpha_1, alpha_4)` loaded onto the active constraint for each
/// binary `(alpha_2, alpha_3)` (the objective is constant along that
/// segment, so one clipped representative suffices), and (iii) the six
/// closed-form rows solving `alpha_3` (at `alpha_2 = 1`) or `alpha_2`
/// (at binary `alpha_3`) from the active constraint with
/// `(alpha_1, alpha_4)` pinned at `(0,0)` or `(1,1)`. Solved coordinates
/// falling outside `[0, 1]` are dropped; the clipped family-(ii)
/// representatives stay feasible by construction. The zero vector is
/// always included. At most 14 candidates result.
pub fn candidate_set(sc: &SsScenario, params: &SsPolicyParams) -> Vec<SsAlpha> {
    const COEFF_EPS: f64 = 1e-300;
    let con = AlphaConstraint::new(sc, params);
    let [c1, c2, c3, c4] = con.coeffs;
    let m = con.rhs;
    let f2 = m - c1 - c4;
    let mut out: Vec<SsAlpha> = Vec::with_capacity(14);
    let mut push = |alpha: SsAlpha| {
        if !alpha.in_unit_cube() || con.slack(&alpha) < -FEASIBILITY_TOL {
            return;
        }
        if !out
            .iter()
            .any(|b| alpha.0.iter().zip(&b.0).all(|(x, y)| (x - y).abs() < 1e-10))
        {
            out.push(alpha);
        }
    };

    for a2 in [0.0, 1.0] {
        for a3 in [0.0, 1.0] {
            // (i) box corner with the relay-heavy components off
            push(SsAlpha([0.0, a2, a3, 0.0]));
            // (ii) load (alpha_1, alpha_4) onto the active constraint
            let rem = m - c2 * a2 - c3 * a3;
            if rem >= -FEASIBILITY_TOL {
                let rem = rem.max(0.0);
                if c1 > COEFF_EPS {
                    let a1 = (rem / c1).min(1.0);
                    let left = rem - c1 * a1;
                    if left <= FEASIBILITY_TOL {
                        push(SsAlpha([a1, a2, a3, 0.0]));
                    } else if c4 > COEFF_EPS && left / c4 <= 1.0 + FEASIBILITY_TOL {
                        push(SsAlpha([a1, a2, a3, (left / c4).min(1.0)]));
                    } else {
                        // constraint slack even at the corner; keep it
                        push(SsAlpha([
                            a1,
                            a2,
                            a3,
                            if c4 > COEFF_EPS { 1.0 } else { 0.0 },
                        ]));
                    }
                } else if c4 > COEFF_EPS {
                    push(SsAlpha([0.0, a2, a3, (rem / c4).min(1.0)]));
                }
            }
        }
    }
    // (iii) closed-form boundary rows
    for (a14, f) in [(0.0, m), (1.0, f2)] {
        if c3 > COEFF_EPS {
            let a3 = (f - c2) / c3; // alpha_2 = 1 maximizes the objective here
            if (-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&a3) {
                push(SsAlpha([a14, 1.0, a3.clamp(0.0, 1.0), a14]));
            }
        }
        for a3 in [0.0, 1.0] {
            if c2 > COEFF_EPS {
                let a2 = (f - c3 * a3) / c2;
                if (-FEASIBILITY_TOL..=1.0 + FEASIBILITY_TOL).contains(&a2) {
                    push(SsAlpha([a14, a2.clamp(0.0, 1.0), a3, a14]));
                }
            }
        }
    }
    push(SsAlpha::ZERO);
    debug_assert!(out.len() <= 14);
    out
}

/// Closed-form approximated service rates `(mu~_s, mu~_u)` at a feasible
/// fraction vector.
///
/// The shared denominator is `a1 - b - a0` of the aggregated chain
/// (strictly negative under the constraint); the forms are algebraically
/// identical to blending the conditional rates with the closed-form
/// emptiness probability, which the tests verify.
pub fn approx_service_rates(
    sc: &SsScenario,
    params: &SsPolicyParams,
    alpha: &SsAlpha,
) -> Result<(f64, f64), BdError> {
    let k = f64::from(sc.k);
    let r1 = sc.r1();
    let r2 = sc.r2;
    let [a1, a2, a3, a4] = alpha.0;
    let (ps1, ps2) = (sc.probs_s.state(1), sc.probs_s.state(2));
    let (pu1, pu2) = (sc.probs_u.state(1), sc.probs_u.state(2));
    let (pd1, pd2, pd3) = (
        sc.probs_d.state(1),
        sc.probs_d.state(2),
        sc.probs_d.state(3),
    );
    let (u, v, w, x, y, z) = (params.u, params.v, params.w, params.x, params.y, params.z);
    let n = params.n(ps1);
    let group = k * pd1 * u + pd2 * n; // downlink drain term
    let feed = k * ps1 * u + ps2 * v; // source feed term
    let den = 2.0 * k * a1 * ps1 * pd1 * u
        + (k + 1.0) * a2 * ps1 * pd2 * u
        + (k + 1.0) * a3 * ps2 * pd1 * u
        + 2.0 * a4 * ps2 * pd2 * v
        - group
        - feed * (1.0 - pd3);
    let slack = AlphaConstraint::new(sc, params).slack(alpha);
    if den >= -FEASIBILITY_TOL || slack < -ALPHA_SLACK_TOL {
        let chain = ApproxChain::from_spec(&relay_chain(sc, params, alpha));
        return Err(BdError::Unstable {
            arrivals: chain.arrive_busy,
            service: chain.serve,
        });
    }
    let num = (1.0 - k) * a2 * ps1 * pd2 * u + (k - 1.0) * a3 * ps2 * pd1 * u - group
        + feed * (1.0 - pd3);
    let mu_s = 0.5 * (r1 * ps1 * u + r2 * ps2 * v) * (1.0 + num / den);
    let mu_u =
        (r1 * pu1 * w + r2 * pu2 * x) + (r1 * pu1 * (w - y) + r2 * pu2 * (x - z)) * feed / den;
    Ok((mu_s, mu_u))
}

/// Relative source-rate error of the aggregation at one `(alpha,
/// policy)`, from the generating-function comparison:
/// `k b11 (Pi_1+..+Pi_{k-1}) (a0 - a1) / (a0 b)` with exact head
/// probabilities. Positive where the aggregate over-estimates.
pub fn relative_rate_error(spec: &ChainSpec, dist: &crate::qbd::StationaryDist) -> f64 {
    let k = spec.k as usize;
    let head: f64 = (1..k).map(|n| dist.pi(n)).sum();
    let a0 = spec.packet_arrivals_empty();
    let a1 = spec.packet_arrivals_busy();
    let b = spec.packet_service();
    f64::from(spec.k) * spec.b11 * head * (a0 - a1) / (a0 * b)
}
