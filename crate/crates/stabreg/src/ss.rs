//! Three-user scenario model: one relayed pair, one uplink-only flow,
//! three bit rates `[r1 = k r2, r2, 0]`.
//!
//! This module owns the mapping from `(policy, link probabilities,
//! fraction vector)` to the relay-queue transition probabilities and the
//! conditional service rates of the two user queues. Both the exact
//! region sweep and the birth-death approximation are built on these
//! primitives, so the two routes share no derived algebra beyond them.

use serde::{Deserialize, Serialize};

use crate::channel::LinkStateProbs;
use crate::policy::SsPolicyParams;
use crate::qbd::ChainSpec;

/// Scenario data: per-link state probabilities (`M = 3`), the base rate
/// `r2` and the integer ratio `k` (`r1 = k * r2`, `r3 = 0` by
/// construction).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsScenario {
    pub probs_s: LinkStateProbs,
    pub probs_u: LinkStateProbs,
    pub probs_d: LinkStateProbs,
    pub r2: f64,
    pub k: u32,
}

impl SsScenario {
    pub fn r1(&self) -> f64 {
        f64::from(self.k) * self.r2
    }
}

/// Fraction vector of the relayed pair: the probability of granting the
/// uplink leg when both legs could transmit, indexed by the `(S_s, S_d)`
/// SNR-state pair `(1,1), (1,2), (2,1), (2,2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsAlpha(pub [f64; 4]);

impl SsAlpha {
    pub const ZERO: SsAlpha = SsAlpha([0.0; 4]);

    pub fn in_unit_cube(&self) -> bool {
        self.0.iter().all(|a| (-1e-12..=1.0 + 1e-12).contains(a))
    }
}

/// Relay-queue transition probabilities for one `(policy, alpha)` choice.
///
/// Arrivals are the source's transmissions (it feeds the buffer);
/// departures are the downlink leg's. The policy enters through the
/// class-competition factors `U`, `V`, `N`; the fraction vector splits
/// the pair's slots between its legs whenever both are able.
pub fn relay_chain(sc: &SsScenario, params: &SsPolicyParams, alpha: &SsAlpha) -> ChainSpec {
    let [a1, a2, a3, a4] = alpha.0;
    let (ps1, ps2) = (sc.probs_s.state(1), sc.probs_s.state(2));
    let (pd1, pd2, pd3) = (
        sc.probs_d.state(1),
        sc.probs_d.state(2),
        sc.probs_d.state(3),
    );
    let (u, v) = (params.u, params.v);
    let n = params.n(ps1);
    ChainSpec {
        a01: ps1 * u,
        a02: ps2 * v,
        a11: ps1 * (a1 * pd1 + a2 * pd2 + pd3) * u,
        a12: ps2 * (a3 * pd1 * u + a4 * pd2 * v + pd3 * v),
        b11: pd1 * (1.0 - a1 * ps1 - a3 * ps2) * u,
        b12: pd2 * (n - a2 * ps1 * u - a4 * ps2 * v),
        k: sc.k,
    }
}

/// Service rates of the source and uplink-only queues conditional on the
/// relay buffer being empty (`.0`) or busy (`.1`), in rate units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServicePieces {
    pub mu_s_empty: f64,
    pub mu_s_busy: f64,
    pub mu_u_empty: f64,
    pub mu_u_busy: f64,
}

pub fn service_pieces(sc: &SsScenario, params: &SsPolicyParams, alpha: &SsAlpha) -> ServicePieces {
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
    ServicePieces {
        mu_s_empty: r1 * ps1 * params.u + r2 * ps2 * params.v,
        mu_s_busy: r1 * ps1 * (a1 * pd1 + a2 * pd2 + pd3) * params.u
            + r2 * ps2 * (a3 * pd1 * params.u + a4 * pd2 * params.v + pd3 * params.v),
        mu_u_empty: r1 * pu1 * params.w + r2 * pu2 * params.x,
        mu_u_busy: r1 * pu1 * params.y + r2 * pu2 * params.z,
    }
}

/// Blend the conditional rates with an emptiness probability.
pub fn blend(pieces: &ServicePieces, pi0: f64) -> (f64, f64) {
    (
        pi0 * pieces.mu_s_empty + (1.0 - pi0) * pieces.mu_s_busy,
        pi0 * pieces.mu_u_empty + (1.0 - pi0) * pieces.mu_u_busy,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkStateProbs;
    use crate::policy::{ss_params, SsPolicy};

    fn scenario() -> SsScenario {
        SsScenario {
            probs_s: LinkStateProbs::new(vec![0.5, 0.3, 0.2]).unwrap(),
            probs_u: LinkStateProbs::new(vec![0.6, 0.1, 0.3]).unwrap(),
            probs_d: LinkStateProbs::new(vec![0.4, 0.35, 0.25]).unwrap(),
            r2: 200.0,
            k: 2,
        }
    }

    #[test]
    fn chain_probabilities_are_valid_everywhere() {
        let sc = scenario();
        for g in SsPolicy::ALL {
            let params = ss_params(g, &sc.probs_s, &sc.probs_u, &sc.probs_d);
            for a in [[0.0; 4], [1.0; 4], [0.3, 0.9, 0.1, 0.6]] {
                let spec = relay_chain(&sc, &params, &SsAlpha(a));
                spec.validate().unwrap();
            }
        }
    }

    #[test]
    fn source_feed_equals_busy_arrival_rate() {
        // mu_s (rate units) and the packet arrival probabilities describe
        // the same flow: mu_s_busy = r2 * (k a11 + a12).
        let sc = scenario();
        let params = ss_params(SsPolicy::G3, &sc.probs_s, &sc.probs_u, &sc.probs_d);
        let alpha = SsAlpha([0.2, 0.8, 0.5, 0.1]);
        let spec = relay_chain(&sc, &params, &alpha);
        let pieces = service_pieces(&sc, &params, &alpha);
        assert!((pieces.mu_s_busy - sc.r2 * spec.packet_arrivals_busy()).abs() < 1e-12);
        assert!((pieces.mu_s_empty - sc.r2 * spec.packet_arrivals_empty()).abs() < 1e-12);
    }

    #[test]
    fn alpha_one_makes_busy_arrivals_match_empty() {
        // Granting the uplink leg every contested slot removes the
        // downlink's bite from the source's rate.
        let sc = scenario();
        let params = ss_params(SsPolicy::G1, &sc.probs_s, &sc.probs_u, &sc.probs_d);
        let spec = relay_chain(&sc, &params, &SsAlpha([1.0; 4]));
        assert!((spec.a11 - spec.a01).abs() < 1e-15);
        assert!((spec.a12 - spec.a02).abs() < 1e-15);
    }
}
