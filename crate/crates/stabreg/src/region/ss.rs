//! Three-user stability regions: the exact sweep over the fraction cube,
//! the birth-death approximated region, the relative error bound between
//! the two, and the sandwich containment check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bd;
use crate::policy::{ss_params, SsPolicy, SsPolicyParams};
use crate::polytope::{contains_set, reduce_2d, CoSet};
use crate::qbd;
use crate::region::{BuildStats, RegionError, RegionVertexSet, VertexLabel};
use crate::ss::{blend, relay_chain, service_pieces, SsAlpha, SsScenario};

fn label(policy: SsPolicy, alpha: &SsAlpha) -> VertexLabel {
    VertexLabel {
        policy: format!("G{}", policy.index()),
        alpha: alpha.0.to_vec(),
    }
}

/// Exact service rates at one `(policy, alpha)` point, or `None` when the
/// relay queue is unstable (or numerically degenerate) there.
pub fn exact_point(
    sc: &SsScenario,
    params: &SsPolicyParams,
    alpha: &SsAlpha,
) -> Option<(f64, f64)> {
    let spec = relay_chain(sc, params, alpha);
    match qbd::solve_stationary(&spec) {
        Ok(dist) => Some(blend(&service_pieces(sc, params, alpha), dist.pi0)),
        Err(qbd::QbdError::NoInteriorRoot) => {
            log::debug!(
                "skipping unstable grid point alpha={:?}, drift={:+.3e}",
                alpha.0,
                spec.drift()
            );
            None
        }
        Err(err) => {
            log::debug!("skipping degenerate grid point alpha={:?}: {err}", alpha.0);
            None
        }
    }
}

/// Sweep the six corner policies over an `L^4` fraction grid, solving the
/// relay chain at every stable point, and keep the hull extremes.
///
/// The sweep also visits each policy's closed-form candidate vectors
/// pulled slightly inside the stability boundary, so the hull does not
/// depend on the grid accidentally straddling a corner.
pub fn exact_region(
    sc: &SsScenario,
    grid: usize,
) -> Result<(RegionVertexSet, BuildStats), RegionError> {
    if grid < 2 {
        return Err(RegionError::GridTooCoarse(grid));
    }
    let steps: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let mut stats = BuildStats {
        policies_evaluated: 6,
        alpha_combinations: (grid as u128).pow(4),
        ..BuildStats::default()
    };
    let mut all: Vec<(f64, f64, SsPolicy, SsAlpha)> = Vec::new();
    let mut skipped = 0u128;
    let mut evaluated = 0u128;
    for policy in SsPolicy::ALL {
        let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
        let total = grid * grid * grid * grid;
        let points: Vec<(SsAlpha, Option<(f64, f64)>)> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let alpha = SsAlpha([
                    steps[idx / (grid * grid * grid)],
                    steps[(idx / (grid * grid)) % grid],
                    steps[(idx / grid) % grid],
                    steps[idx % grid],
                ]);
                let mu = exact_point(sc, &params, &alpha);
                (alpha, mu)
            })
            .collect();
        for (alpha, mu) in points {
            evaluated += 1;
            match mu {
                Some((mu_s, mu_u)) => all.push((mu_s, mu_u, policy, alpha)),
                None => skipped += 1,
            }
        }
        let constraint = bd::AlphaConstraint::new(sc, &params);
        for cand in bd::candidate_set(sc, &params) {
            evaluated += 1;
            if constraint.slack(&cand) > 1e-9 {
                match exact_point(sc, &params, &cand) {
                    Some((mu_s, mu_u)) => all.push((mu_s, mu_u, policy, cand)),
                    None => skipped += 1,
                }
            } else {
                // Critical candidate: the relay queue drifts to the
                // boundary and its emptiness probability vanishes, so the
                // closure of the region contains the busy-state rates.
                let (mu_s, mu_u) = blend(&service_pieces(sc, &params, &cand), 0.0);
                all.push((mu_s, mu_u, policy, cand));
            }
        }
    }
    stats.points_evaluated = evaluated;
    stats.points_skipped_unstable = skipped;
    Ok((reduce_labeled(all), stats))
}

/// The approximated region: closed-form rates at every candidate
/// fraction vector of every corner policy.
pub fn approx_region(sc: &SsScenario) -> (RegionVertexSet, BuildStats) {
    let mut all: Vec<(f64, f64, SsPolicy, SsAlpha)> = Vec::new();
    let mut evaluated = 0u128;
    let mut skipped = 0u128;
    for policy in SsPolicy::ALL {
        let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
        for alpha in bd::candidate_set(sc, &params) {
            evaluated += 1;
            match bd::approx_service_rates(sc, &params, &alpha) {
                Ok((mu_s, mu_u)) => all.push((mu_s, mu_u, policy, alpha)),
                Err(_) => skipped += 1,
            }
        }
    }
    let stats = BuildStats {
        policies_evaluated: 6,
        points_evaluated: evaluated,
        points_skipped_unstable: skipped,
        alpha_combinations: evaluated,
        ..BuildStats::default()
    };
    (reduce_labeled(all), stats)
}

fn reduce_labeled(all: Vec<(f64, f64, SsPolicy, SsAlpha)>) -> RegionVertexSet {
    let hull = reduce_2d(&all.iter().map(|p| (p.0, p.1)).collect::<Vec<_>>());
    let mut out = RegionVertexSet::new(2);
    for (x, y) in hull {
        if let Some((_, _, policy, alpha)) = all.iter().find(|(px, py, _, _)| *px == x && *py == y)
        {
            out.push(vec![x, y], label(*policy, alpha));
        }
    }
    out
}

/// Maximum relative source-rate error of the approximation, evaluated per
/// policy at the candidate maximizing the approximated source rate among
/// candidates whose exact chain is solvable. Boundary candidates (where
/// the exact chain is critical and both constructions agree in the limit)
/// contribute zero and are skipped.
pub fn error_bound(sc: &SsScenario) -> f64 {
    let mut worst = 0.0f64;
    for policy in SsPolicy::ALL {
        let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
        let mut best: Option<(f64, SsAlpha)> = None;
        for alpha in bd::candidate_set(sc, &params) {
            let Ok((mu_s, _)) = bd::approx_service_rates(sc, &params, &alpha) else {
                continue;
            };
            let spec = relay_chain(sc, &params, &alpha);
            if qbd::characteristic_roots(&spec).is_err() {
                continue; // critical boundary candidate
            }
            if best.is_none_or(|(b, _)| mu_s > b) {
                best = Some((mu_s, alpha));
            }
        }
        if let Some((_, alpha)) = best {
            let spec = relay_chain(sc, &params, &alpha);
            if let Ok(dist) = qbd::solve_stationary(&spec) {
                worst = worst.max(bd::relative_rate_error(&spec, &dist).abs());
            }
        }
    }
    worst
}

/// Outcome of the two-sided containment between the exact region and its
/// approximation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub epsilon_star: f64,
    /// Violation of `exact subset-of approx` (0 when contained).
    pub exact_in_approx_violation: f64,
    /// Violation of `(1 - eps*) approx subset-of exact`.
    pub shrunk_approx_in_exact_violation: f64,
    pub exact_vertices: usize,
    pub approx_vertices: usize,
}

/// Verify the sandwich `(1 - eps*) approx <= exact <= approx` on
/// already-built hulls.
pub fn sandwich_check_on(
    exact: &RegionVertexSet,
    approx: &RegionVertexSet,
    eps: f64,
) -> SandwichReport {
    let exact_set = exact.co_set();
    let approx_set = approx.co_set();
    let v1 = contains_set(&exact_set, &approx_set, 0.0).expect("same dimension");
    let shrunk = CoSet::new(
        approx_set
            .generators()
            .iter()
            .map(|g| g.iter().map(|x| x * (1.0 - eps)).collect())
            .collect(),
    );
    let v2 = contains_set(&shrunk, &exact_set, 0.0).expect("same dimension");
    SandwichReport {
        epsilon_star: eps,
        exact_in_approx_violation: v1,
        shrunk_approx_in_exact_violation: v2,
        exact_vertices: exact.len(),
        approx_vertices: approx.len(),
    }
}

/// Verify the sandwich `(1 - eps*) approx <= exact <= approx` on the
/// hulls built at grid resolution `grid`.
pub fn sandwich_check(sc: &SsScenario, grid: usize) -> Result<SandwichReport, RegionError> {
    let (exact, _) = exact_region(sc, grid)?;
    let (approx, _) = approx_region(sc);
    Ok(sandwich_check_on(&exact, &approx, error_bound(sc)))
}

/// Largest relative overshoot `(mu~_s - mu_s) / mu~_s` of the
/// approximation over an `L^4` fraction grid, all six policies. Points
/// where either construction is unstable are skipped.
pub fn measured_relative_gap(sc: &SsScenario, grid: usize) -> f64 {
    let steps: Vec<f64> = (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect();
    let total = grid * grid * grid * grid;
    SsPolicy::ALL
        .iter()
        .map(|&policy| {
            let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
            (0..total)
                .into_par_iter()
                .map(|idx| {
                    let alpha = SsAlpha([
                        steps[idx / (grid * grid * grid)],
                        steps[(idx / (grid * grid)) % grid],
                        steps[(idx / grid) % grid],
                        steps[idx % grid],
                    ]);
                    let Ok((approx, _)) = bd::approx_service_rates(sc, &params, &alpha) else {
                        return 0.0;
                    };
                    let Some((exact, _)) = exact_point(sc, &params, &alpha) else {
                        return 0.0;
                    };
                    if approx > 0.0 {
                        (approx - exact) / approx
                    } else {
                        0.0
                    }
                })
                .reduce(|| 0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
