//! Multi-user stability regions with two bit rates (`r2 = 0`): the exact
//! grid construction, the border-fraction reduction, and the symmetric
//! epsilon-approximation with a priority-depth cutoff.
//!
//! Every relayed flow `i` contributes one fraction parameter `alpha_i`;
//! its relay queue is a plain birth-death chain whose emptiness
//! probability is explicit, so service rates are closed-form products
//! over the more-prioritized communications. Region vertex sets in more
//! than three dimensions keep dominance-filtered generator lists rather
//! than facet descriptions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{enumerate_policies, policy_count, prioritized_sets, MuPolicy};
use crate::region::{BuildStats, RegionVertexSet, VertexLabel};

/// Componentwise tolerance when testing `alpha_i <= alpha_i*`.
const ALPHA_TOL: f64 = 1e-12;

/// Display helper: enumeration counts saturate at `u128::MAX`.
struct Count(u128);

impl std::fmt::Display for Count {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0 == u128::MAX {
            write!(f, "more than 1e38")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MuError {
    #[error("alpha[{index}] = {alpha} exceeds the stability threshold {limit}")]
    AlphaInfeasible {
        index: usize,
        alpha: f64,
        limit: f64,
    },
    #[error(
        "complexity guard: {} policies x {} fraction points = {} evaluations exceed the \
         budget of {budget}",
        Count(*policies),
        Count(*alpha_points),
        Count(*total)
    )]
    ComplexityGuard {
        policies: u128,
        alpha_points: u128,
        total: u128,
        budget: u128,
    },
    #[error("epsilon {epsilon} must lie in (0, r1 * p_s) = (0, {limit})")]
    EpsilonTooLarge { epsilon: f64, limit: f64 },
    #[error("epsilon construction requires a symmetric scenario")]
    NotSymmetric,
    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),
}

/// Multi-user scenario: `K` relayed flows, `U` uplink-only flows, success
/// probabilities of the top SNR state per link, and the single nonzero
/// rate `r1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuScenario {
    /// Per relayed flow: uplink-leg success probability.
    pub p_s: Vec<f64>,
    /// Per relayed flow: downlink-leg success probability.
    pub p_d: Vec<f64>,
    /// Per uplink-only flow: success probability.
    pub p_u: Vec<f64>,
    pub r1: f64,
}

impl MuScenario {
    pub fn k_flows(&self) -> usize {
        self.p_s.len()
    }

    pub fn u_flows(&self) -> usize {
        self.p_u.len()
    }

    pub fn total(&self) -> usize {
        self.k_flows() + self.u_flows()
    }

    pub fn validate(&self) -> Result<(), MuError> {
        if self.p_s.len() != self.p_d.len() {
            return Err(MuError::InvalidScenario("p_s and p_d lengths differ"));
        }
        if self.total() == 0 {
            return Err(MuError::InvalidScenario("need at least one communication"));
        }
        let all = self.p_s.iter().chain(&self.p_d).chain(&self.p_u);
        if all.clone().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(MuError::InvalidScenario("probabilities outside [0, 1]"));
        }
        let r1_positive = self.r1 > 0.0;
        if !r1_positive {
            return Err(MuError::InvalidScenario("r1 must be positive"));
        }
        Ok(())
    }

    /// Raw stability threshold `alpha_i* = (p_d - p_s + p_s p_d) /
    /// (2 p_s p_d)`; `None` when the flow cannot relay at all
    /// (`p_s = 0` or `p_d = 0`).
    pub fn alpha_star_raw(&self, i: usize) -> Option<f64> {
        let (ps, pd) = (self.p_s[i], self.p_d[i]);
        if ps <= 0.0 || pd <= 0.0 {
            return None;
        }
        Some((pd - ps + ps * pd) / (2.0 * ps * pd))
    }

    /// Whether flow `i` admits a stable relay operating point in the
    /// saturated regime. A negative raw threshold means the uplink leg
    /// outruns the downlink drain even with every contested slot granted
    /// to the downlink; such flows (like those with a dead leg) are
    /// treated as silent: zero service, no slot occupancy.
    pub fn relayable(&self, i: usize) -> bool {
        self.alpha_star_raw(i).is_some_and(|raw| raw >= 0.0)
    }

    /// Threshold clamped into `[0, 1]` for use as a time fraction; `None`
    /// for flows without a stable relay point. A raw value above one
    /// means the constraint is slack at `alpha = 1`; the clamp is logged
    /// because the border set then stops being tight there.
    pub fn alpha_star(&self, i: usize) -> Option<f64> {
        let raw = self.alpha_star_raw(i)?;
        if raw < 0.0 {
            return None;
        }
        if raw > 1.0 {
            log::debug!("alpha*[{i}] = {raw:.4} clamped to 1 (stability constraint slack)");
            Some(1.0)
        } else {
            Some(raw)
        }
    }

    /// `(p_s, p_d)` when every flow shares them (uplink-only flows
    /// included), i.e. the same-distance drop.
    pub fn symmetric(&self) -> Option<(f64, f64)> {
        let ps = *self.p_s.first().or_else(|| self.p_u.first())?;
        let pd = self.p_d.first().copied().unwrap_or(ps);
        let same = self.p_s.iter().all(|p| (p - ps).abs() < 1e-12)
            && self.p_u.iter().all(|p| (p - ps).abs() < 1e-12)
            && self.p_d.iter().all(|p| (p - pd).abs() < 1e-12);
        same.then_some((ps, pd))
    }
}

/// `1 + p_bar_s p_d / ((1 + p_s) p_d - 2 alpha p_s p_d)`: the flow's own
/// uplink share given its fraction.
fn own_factor(ps: f64, pd: f64, alpha: f64) -> f64 {
    1.0 + (1.0 - ps) * pd / ((1.0 + ps) * pd - 2.0 * alpha * ps * pd)
}

/// `p_bar_s (1 + p_s p_d / (2 alpha p_s p_d - (1 + p_s) p_d))`: the
/// probability a more-prioritized relayed flow leaves the slot free
/// (equivalently `p_bar_s (Pi_0 + p_bar_d (1 - Pi_0))` with the flow's
/// emptiness probability).
fn blocking_factor(ps: f64, pd: f64, alpha: f64) -> f64 {
    (1.0 - ps) * (1.0 + ps * pd / (2.0 * alpha * ps * pd - (1.0 + ps) * pd))
}

/// Service-rate vector (length `K + U`) under one policy and fraction
/// vector. Communications absent from a prefix policy get zero. Relayed
/// flows that can never relay (`p_s = 0` or `p_d = 0`) get zero and their
/// fraction is ignored.
pub fn service_rates(
    sc: &MuScenario,
    policy: &MuPolicy,
    alpha: &[f64],
) -> Result<Vec<f64>, MuError> {
    let k = sc.k_flows();
    assert_eq!(alpha.len(), k, "one fraction per relayed flow");
    for (i, &a) in alpha.iter().enumerate() {
        if !sc.relayable(i) {
            continue; // silent flow: fraction is ignored
        }
        if let Some(limit) = self_limit(sc, i) {
            if a > limit + ALPHA_TOL {
                return Err(MuError::AlphaInfeasible {
                    index: i,
                    alpha: a,
                    limit,
                });
            }
        }
    }
    let mut mu = vec![0.0; sc.total()];
    for &comm in policy.order() {
        let (bs_before, ue_before) = prioritized_sets(policy, comm, k, sc.u_flows())
            .expect("policy order indexes validated at construction");
        let mut block = 1.0;
        for m in bs_before {
            block *= 1.0 - sc.p_u[m - k];
        }
        for n in ue_before {
            if sc.relayable(n) {
                block *= blocking_factor(sc.p_s[n], sc.p_d[n], alpha[n]);
            }
        }
        mu[comm] = if comm < k {
            let (ps, pd) = (sc.p_s[comm], sc.p_d[comm]);
            if sc.relayable(comm) {
                0.5 * sc.r1 * ps * own_factor(ps, pd, alpha[comm]) * block
            } else {
                0.0
            }
        } else {
            sc.r1 * sc.p_u[comm - k] * block
        };
    }
    Ok(mu)
}

/// Stability limit used for the feasibility check: the raw threshold,
/// capped at 1 because fractions are time shares.
fn self_limit(sc: &MuScenario, i: usize) -> Option<f64> {
    sc.alpha_star_raw(i).map(|raw| raw.min(1.0))
}

fn policy_label(policy: &MuPolicy, alpha: &[f64]) -> VertexLabel {
    let order = policy
        .order()
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(">");
    VertexLabel {
        policy: order,
        alpha: alpha.to_vec(),
    }
}

/// Flows that actually enumerate a fraction (those able to relay).
fn active_flows(sc: &MuScenario) -> Vec<usize> {
    (0..sc.k_flows())
        .filter(|&i| sc.alpha_star(i).is_some())
        .collect()
}

/// Exact region: hull generators over all `(K+U)!` policies and an
/// `L^K` fraction grid inside `[0, alpha*]`.
///
/// The guard rejects requests whose `policies x grid` product exceeds
/// the evaluation budget; that blow-up is the reason the reduced and
/// epsilon constructions exist.
pub fn exact_region(
    sc: &MuScenario,
    grid: usize,
    budget: u128,
) -> Result<(RegionVertexSet, BuildStats), MuError> {
    sc.validate()?;
    if grid < 2 {
        return Err(MuError::InvalidScenario(
            "fraction grid needs at least 2 points",
        ));
    }
    let active = active_flows(sc);
    let policies = policy_count(sc.k_flows(), sc.u_flows(), None);
    let alpha_points = (0..active.len()).fold(1u128, |acc, _| acc.saturating_mul(grid as u128));
    let total = policies.saturating_mul(alpha_points);
    if total > budget {
        return Err(MuError::ComplexityGuard {
            policies,
            alpha_points,
            total,
            budget,
        });
    }
    let grids: Vec<Vec<f64>> = active
        .iter()
        .map(|&i| {
            let star = sc.alpha_star(i).expect("active flow has a threshold");
            (0..grid)
                .map(|j| star * j as f64 / (grid - 1) as f64)
                .collect()
        })
        .collect();
    let vertices = sweep(
        sc,
        enumerate_policies(sc.k_flows(), sc.u_flows(), None).unwrap(),
        |f| for_each_grid_point(&active, &grids, sc.k_flows(), f),
    );
    let stats = BuildStats {
        policies_evaluated: policies,
        points_evaluated: total,
        alpha_combinations: alpha_points,
        ..BuildStats::default()
    };
    Ok((vertices, stats))
}

/// Reduced region: only the border fractions `alpha_i in {0, alpha_i*}`,
/// `2^K` combinations per policy.
pub fn reduced_region(
    sc: &MuScenario,
    budget: u128,
) -> Result<(RegionVertexSet, BuildStats), MuError> {
    sc.validate()?;
    let active = active_flows(sc);
    let policies = policy_count(sc.k_flows(), sc.u_flows(), None);
    let alpha_points = 1u128 << active.len();
    let total = policies.saturating_mul(alpha_points);
    if total > budget {
        return Err(MuError::ComplexityGuard {
            policies,
            alpha_points,
            total,
            budget,
        });
    }
    let vertices = sweep(
        sc,
        enumerate_policies(sc.k_flows(), sc.u_flows(), None).unwrap(),
        |f| for_each_border_point(sc, &active, f),
    );
    let stats = BuildStats {
        policies_evaluated: policies,
        points_evaluated: total,
        alpha_combinations: alpha_points,
        ..BuildStats::default()
    };
    Ok((vertices, stats))
}

/// Priority depth at which a flow's best-case rate falls below
/// `epsilon`, capped at the number of communications. The ratio of
/// logarithms is evaluated with a small tolerance so analytically integer
/// cases land on the integer.
pub fn k0_depth(sc: &MuScenario, epsilon: f64) -> Result<usize, MuError> {
    let (ps, _) = sc.symmetric().ok_or(MuError::NotSymmetric)?;
    let limit = sc.r1 * ps;
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(MuError::EpsilonTooLarge { epsilon, limit });
    }
    let pbar = 1.0 - ps;
    if pbar <= 0.0 {
        return Ok(1); // perfect channel: only the top priority ever serves
    }
    let raw = 1.0 + (epsilon / limit).ln() / pbar.ln();
    let depth = (raw - 1e-9).ceil().max(1.0) as usize;
    Ok(depth.min(sc.total()))
}

/// Epsilon-approximation of the symmetric multi-user region: prefix
/// policies of depth `K0(epsilon)` with border fractions on the relayed
/// flows inside each prefix; flows outside a prefix contribute zero.
pub fn epsilon_region(
    sc: &MuScenario,
    epsilon: f64,
) -> Result<(RegionVertexSet, BuildStats), MuError> {
    sc.validate()?;
    let depth = k0_depth(sc, epsilon)?;
    let policies = policy_count(sc.k_flows(), sc.u_flows(), Some(depth));
    let mut vertices = RegionVertexSet::new(sc.total());
    let mut max_combos = 0u128;
    let mut evaluated = 0u128;
    for policy in enumerate_policies(sc.k_flows(), sc.u_flows(), Some(depth)).unwrap() {
        let in_prefix: Vec<usize> = policy
            .order()
            .iter()
            .copied()
            .filter(|&i| i < sc.k_flows() && sc.alpha_star(i).is_some())
            .collect();
        max_combos = max_combos.max(1 << in_prefix.len());
        let mut alpha = vec![0.0; sc.k_flows()];
        for mask in 0u32..(1 << in_prefix.len()) {
            for (bit, &flow) in in_prefix.iter().enumerate() {
                alpha[flow] = if mask & (1 << bit) != 0 {
                    sc.alpha_star(flow).unwrap()
                } else {
                    0.0
                };
            }
            evaluated += 1;
            let mu = service_rates(sc, &policy, &alpha)
                .expect("border fractions satisfy the stability constraint");
            vertices.push(mu, policy_label(&policy, &alpha));
        }
    }
    let stats = BuildStats {
        policies_evaluated: policies,
        points_evaluated: evaluated,
        alpha_combinations: max_combos,
        prefix_depth: Some(depth),
        ..BuildStats::default()
    };
    Ok((vertices, stats))
}

/// Evaluation counts of [`epsilon_region`] without materializing any
/// vertex: prefix policies are streamed and only their fraction
/// combinations are tallied. Large cells use this to report the
/// complexity reduction (the `2^K0 (K+U)!/(K+U-K0)!` product) without
/// building the region.
pub fn epsilon_stats(sc: &MuScenario, epsilon: f64) -> Result<BuildStats, MuError> {
    sc.validate()?;
    let depth = k0_depth(sc, epsilon)?;
    let policies = policy_count(sc.k_flows(), sc.u_flows(), Some(depth));
    let mut evaluated = 0u128;
    let mut max_combos = 0u128;
    for policy in enumerate_policies(sc.k_flows(), sc.u_flows(), Some(depth)).unwrap() {
        let in_prefix = policy
            .order()
            .iter()
            .filter(|&&i| i < sc.k_flows() && sc.alpha_star(i).is_some())
            .count();
        let combos = 1u128 << in_prefix;
        max_combos = max_combos.max(combos);
        evaluated += combos;
    }
    Ok(BuildStats {
        policies_evaluated: policies,
        points_evaluated: evaluated,
        alpha_combinations: max_combos,
        prefix_depth: Some(depth),
        ..BuildStats::default()
    })
}

/// Convex-combination coefficient expressing the service vector at
/// `alpha_i = lambda alpha_i*` as a mix of the border vectors:
/// `gamma = (1 + p_s) p_d (1 - lambda) / ((1 + p_s) p_d -
/// lambda (p_s p_d + p_d - p_s))`, always in `[0, 1]`.
pub fn convexity_coefficient(p_s: f64, p_d: f64, lambda: f64) -> f64 {
    let top = (1.0 + p_s) * p_d * (1.0 - lambda);
    let bottom = (1.0 + p_s) * p_d - lambda * (p_s * p_d + p_d - p_s);
    top / bottom
}

fn sweep<F>(
    sc: &MuScenario,
    policies: impl Iterator<Item = MuPolicy>,
    per_policy: F,
) -> RegionVertexSet
where
    F: Fn(&mut dyn FnMut(&[f64])) + Sync,
{
    let policies: Vec<MuPolicy> = policies.collect();
    let chunks: Vec<Vec<(Vec<f64>, VertexLabel)>> = policies
        .par_iter()
        .map(|policy| {
            let mut out = Vec::new();
            per_policy(&mut |alpha: &[f64]| {
                let mu = service_rates(sc, policy, alpha)
                    .expect("grid fractions satisfy the stability constraint");
                out.push((mu, policy_label(policy, alpha)));
            });
            out
        })
        .collect();
    let mut vertices = RegionVertexSet::new(sc.total());
    for chunk in chunks {
        for (mu, label) in chunk {
            vertices.push(mu, label);
        }
    }
    vertices
}

fn for_each_grid_point(
    active: &[usize],
    grids: &[Vec<f64>],
    k_flows: usize,
    f: &mut dyn FnMut(&[f64]),
) {
    let mut alpha = vec![0.0; k_flows];
    let mut idx = vec![0usize; active.len()];
    loop {
        for (slot, &flow) in active.iter().enumerate() {
            alpha[flow] = grids[slot][idx[slot]];
        }
        f(&alpha);
        let mut carry = 0;
        loop {
            if carry == idx.len() {
                return;
            }
            idx[carry] += 1;
            if idx[carry] < grids[carry].len() {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
    }
}

fn for_each_border_point(sc: &MuScenario, active: &[usize], f: &mut dyn FnMut(&[f64])) {
    let mut alpha = vec![0.0; sc.k_flows()];
    for mask in 0u64..(1u64 << active.len()) {
        for (bit, &flow) in active.iter().enumerate() {
            alpha[flow] = if mask & (1 << bit) != 0 {
                sc.alpha_star(flow).unwrap()
            } else {
                0.0
            };
        }
        f(&alpha);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::MuPolicy;

    fn two_flow_scenario() -> MuScenario {
        MuScenario {
            p_s: vec![0.6],
            p_d: vec![0.8],
            p_u: vec![0.5],
            r1: 1.0,
        }
    }

    #[test]
    fn lone_uplink_flow_gets_its_raw_rate() {
        let sc = MuScenario {
            p_s: vec![],
            p_d: vec![],
            p_u: vec![0.7],
            r1: 2.0,
        };
        let policy = MuPolicy::new(vec![0], 1).unwrap();
        let mu = service_rates(&sc, &policy, &[]).unwrap();
        assert!((mu[0] - 2.0 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn lone_relayed_flow_at_threshold_balances_legs() {
        // At alpha = alpha* the own factor is 1 + p_bar_s p_d / p_s.
        let sc = MuScenario {
            p_s: vec![0.6],
            p_d: vec![0.8],
            p_u: vec![],
            r1: 1.0,
        };
        let star = sc.alpha_star(0).unwrap();
        let policy = MuPolicy::new(vec![0], 1).unwrap();
        let mu = service_rates(&sc, &policy, &[star]).unwrap();
        let expect = 0.5 * 0.6 * (1.0 + 0.4 * 0.8 / 0.6);
        assert!((mu[0] - expect).abs() < 1e-12);
    }

    #[test]
    fn uplink_first_blocks_the_relayed_flow() {
        let sc = two_flow_scenario();
        let policy = MuPolicy::new(vec![1, 0], 2).unwrap();
        let mu = service_rates(&sc, &policy, &[0.0]).unwrap();
        assert!((mu[1] - 0.5).abs() < 1e-15); // un-contended uplink flow
        let blocked = 0.5 * 0.6 * own_factor(0.6, 0.8, 0.0) * (1.0 - 0.5);
        assert!((mu[0] - blocked).abs() < 1e-12);
    }

    #[test]
    fn infeasible_alpha_is_rejected() {
        let sc = two_flow_scenario();
        let policy = MuPolicy::new(vec![0, 1], 2).unwrap();
        let star = sc.alpha_star_raw(0).unwrap();
        let err = service_rates(&sc, &policy, &[star + 1e-6]).unwrap_err();
        assert!(matches!(err, MuError::AlphaInfeasible { index: 0, .. }));
    }

    #[test]
    fn exact_region_small_counts() {
        let sc = two_flow_scenario();
        let (region, stats) = exact_region(&sc, 2, 10_000).unwrap();
        assert_eq!(stats.policies_evaluated, 2);
        assert_eq!(stats.alpha_combinations, 2);
        assert_eq!(region.len(), 4);
    }

    #[test]
    fn complexity_guard_fires_on_large_requests() {
        let sc = MuScenario {
            p_s: vec![0.5; 50],
            p_d: vec![0.9; 50],
            p_u: vec![],
            r1: 1.0,
        };
        let err = exact_region(&sc, 1000, 10_000_000).unwrap_err();
        assert!(matches!(err, MuError::ComplexityGuard { .. }));
        // the border reduction alone still blows the budget at 50 flows
        let err = reduced_region(&sc, 10_000_000).unwrap_err();
        let MuError::ComplexityGuard { alpha_points, .. } = err else {
            panic!("expected the guard, got {err}")
        };
        assert_eq!(alpha_points, 1 << 50);
    }

    #[test]
    fn gamma_endpoints_and_range() {
        assert!((convexity_coefficient(0.6, 0.8, 0.0) - 1.0).abs() < 1e-15);
        assert!(convexity_coefficient(0.6, 0.8, 1.0).abs() < 1e-15);
        for l in [0.1, 0.35, 0.77, 0.99] {
            let g = convexity_coefficient(0.23, 0.91, l);
            assert!((0.0..=1.0).contains(&g));
        }
    }

    #[test]
    fn interior_alpha_is_a_convex_mix_of_the_borders() {
        let (ps, pd) = (0.55, 0.75);
        let sc = MuScenario {
            p_s: vec![ps],
            p_d: vec![pd],
            p_u: vec![0.4],
            r1: 1.0,
        };
        let star = sc.alpha_star(0).unwrap();
        let policy = MuPolicy::new(vec![0, 1], 2).unwrap();
        for lambda in [0.0, 0.2, 0.5, 0.8, 1.0] {
            let g = convexity_coefficient(ps, pd, lambda);
            let mid = service_rates(&sc, &policy, &[lambda * star]).unwrap();
            let lo = service_rates(&sc, &policy, &[0.0]).unwrap();
            let hi = service_rates(&sc, &policy, &[star]).unwrap();
            for c in 0..2 {
                let mix = g * lo[c] + (1.0 - g) * hi[c];
                assert!((mid[c] - mix).abs() < 1e-12, "coord {c} at lambda {lambda}");
            }
        }
    }

    #[test]
    fn k0_depth_analytic_forcing_case() {
        for ps in [0.2, 0.45, 0.604412303, 0.9] {
            let sc = MuScenario {
                p_s: vec![ps; 4],
                p_d: vec![0.95; 4],
                p_u: vec![ps; 2],
                r1: 1.0,
            };
            let eps = sc.r1 * ps * (1.0 - ps) * (1.0 - ps);
            assert_eq!(k0_depth(&sc, eps).unwrap(), 3, "p_s = {ps}");
        }
    }

    #[test]
    fn k0_monotone_and_capped() {
        let sc = MuScenario {
            p_s: vec![0.5; 2],
            p_d: vec![0.9; 2],
            p_u: vec![0.5; 1],
            r1: 1.0,
        };
        let k_small = k0_depth(&sc, 1e-6).unwrap();
        let k_large = k0_depth(&sc, 0.2).unwrap();
        assert!(k_small >= k_large);
        assert!(k_small <= sc.total());
        assert!(matches!(
            k0_depth(&sc, 0.5001),
            Err(MuError::EpsilonTooLarge { .. })
        ));
    }

    #[test]
    fn epsilon_region_rejects_asymmetric_scenarios() {
        let sc = MuScenario {
            p_s: vec![0.5, 0.6],
            p_d: vec![0.9, 0.9],
            p_u: vec![],
            r1: 1.0,
        };
        assert!(matches!(
            epsilon_region(&sc, 0.1),
            Err(MuError::NotSymmetric)
        ));
    }

    #[test]
    fn relay_impossible_flows_are_silent_but_present() {
        let sc = MuScenario {
            p_s: vec![0.0, 0.6],
            p_d: vec![0.8, 0.7],
            p_u: vec![],
            r1: 1.0,
        };
        let policy = MuPolicy::new(vec![0, 1], 2).unwrap();
        let mu = service_rates(&sc, &policy, &[0.9, 0.0]).unwrap(); // alpha[0] ignored
        assert_eq!(mu[0], 0.0);
        assert!(mu[1] > 0.0);
        let (region, _) = reduced_region(&sc, 1_000_000).unwrap();
        assert!(region.vertices.iter().all(|(p, _)| p.len() == 2));
    }
}
