//! Region-level properties: candidate sufficiency, nesting in distance,
//! corner coverage against mixed priority orderings, border-fraction
//! sufficiency and the epsilon construction for the multi-user case.

mod common;

use common::seeded;
use rand::Rng;

use stabreg::bd;
use stabreg::policy::{ss_params, ss_params_from_order, CommKind, MuPolicy, SchedClass, SsPolicy};
use stabreg::polytope::{contains_set, CoSet};
use stabreg::presets;
use stabreg::qbd;
use stabreg::region::mu::{self, MuScenario};
use stabreg::region::ss::{approx_region, exact_point, exact_region};
use stabreg::ss::{blend, relay_chain, service_pieces, SsAlpha};

/// The closed-form candidate set reaches the hull of the full
/// fraction-cube sweep of the approximated rates.
#[test]
fn approx_candidates_cover_dense_alpha_sampling() {
    let mut rng = seeded(42);
    for d in presets::REFERENCE_DISTANCES_M {
        let sc = presets::ss_symmetric(d);
        let (region, _) = approx_region(&sc);
        let hull = region.co_set();
        for policy in SsPolicy::ALL {
            let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
            for _ in 0..400 {
                let alpha = SsAlpha([rng.gen(), rng.gen(), rng.gen(), rng.gen()]);
                if let Ok((mu_s, mu_u)) = bd::approx_service_rates(&sc, &params, &alpha) {
                    assert!(
                        hull.contains(&[mu_s, mu_u]).unwrap(),
                        "d={d} {policy:?} alpha={alpha:?} point ({mu_s}, {mu_u}) escapes"
                    );
                }
            }
        }
    }
}

/// Farther drops give strictly smaller regions (nesting in distance).
#[test]
fn regions_nest_with_distance() {
    let regions: Vec<CoSet> = presets::REFERENCE_DISTANCES_M
        .iter()
        .map(|&d| approx_region(&presets::ss_symmetric(d)).0.co_set())
        .collect();
    // 500 m inside 350 m inside 100 m
    assert_eq!(contains_set(&regions[2], &regions[1], 0.0).unwrap(), 0.0);
    assert_eq!(contains_set(&regions[1], &regions[0], 0.0).unwrap(), 0.0);
    // and strictly so: the larger region is not contained in the smaller
    assert!(contains_set(&regions[0], &regions[1], 0.0).unwrap() > 1.0);
}

/// Sweeping mixed (non rate-monotone) priority orderings never enlarges
/// the exact hull built from the six corner policies.
#[test]
fn corner_policies_cover_mixed_orderings() {
    let sc = presets::ss_symmetric(350.0);
    let (region, _) = exact_region(&sc, 5).unwrap();
    let hull = region.co_set();
    let scale = 400.0;
    use CommKind::{Ue2Bs, Ue2Ue};
    let classes: [SchedClass; 4] = [(Ue2Ue, 0), (Ue2Ue, 1), (Ue2Bs, 0), (Ue2Bs, 1)];
    let mut orders: Vec<[SchedClass; 4]> = Vec::new();
    // all 24 permutations of the four scheduling classes
    let idx = [0usize, 1, 2, 3];
    for a in idx {
        for b in idx {
            for c in idx {
                for d in idx {
                    let perm = [a, b, c, d];
                    let mut seen = [false; 4];
                    perm.iter().for_each(|&i| seen[i] = true);
                    if seen == [true; 4] {
                        orders.push([classes[a], classes[b], classes[c], classes[d]]);
                    }
                }
            }
        }
    }
    assert_eq!(orders.len(), 24);
    let steps = [0.0, 0.5, 1.0];
    for order in orders {
        let params = ss_params_from_order(&order, &sc.probs_s, &sc.probs_u, &sc.probs_d);
        for a1 in steps {
            for a2 in steps {
                for a3 in steps {
                    for a4 in steps {
                        let alpha = SsAlpha([a1, a2, a3, a4]);
                        if let Some((mu_s, mu_u)) = exact_point(&sc, &params, &alpha) {
                            let probe = [mu_s - 1e-9 * scale, mu_u - 1e-9 * scale];
                            let probe = [probe[0].max(0.0), probe[1].max(0.0)];
                            assert!(
                                hull.contains(&probe).unwrap(),
                                "mixed ordering {order:?} grows the hull at ({mu_s}, {mu_u})"
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Known pointwise failure of the birth-death bound: with a strong
/// downlink the relay pair's class is promoted by the downlink leg, the
/// buffer being busy then raises the source's conditional rate above its
/// empty-buffer rate, and the aggregate under-estimates. All three
/// computation routes (analytic chain, truncated oracle, simulation)
/// agree that the exact rate exceeds the approximated one here.
#[test]
fn documented_dominance_reversal_at_cell_edge() {
    let sc = presets::ss_symmetric(500.0);
    let params = ss_params(SsPolicy::G3, &sc.probs_s, &sc.probs_u, &sc.probs_d);
    let alpha = SsAlpha([0.0, 0.0, 1.0, 0.0]);
    let (feasible, _) = bd::alpha_constraint(&sc, &params, &alpha);
    assert!(feasible);
    let (mu_s_exact, _) = exact_point(&sc, &params, &alpha).expect("stable point");
    let (mu_s_approx, _) = bd::approx_service_rates(&sc, &params, &alpha).unwrap();
    assert!(
        mu_s_exact > mu_s_approx + 1.0,
        "expected a clear reversal, got exact {mu_s_exact} vs approx {mu_s_approx}"
    );
    // truncated-chain oracle agrees with the analytic route
    let spec = relay_chain(&sc, &params, &alpha);
    let oracle = common::truncated_stationary(&spec, 600);
    let (mu_s_oracle, _) = blend(&service_pieces(&sc, &params, &alpha), oracle[0]);
    assert!((mu_s_oracle - mu_s_exact).abs() < 1e-5);
    // and the slot-level simulator agrees within noise
    use stabreg::sim::{run, SimConfig, SimPolicy};
    let mut cfg = SimConfig::new(
        stabreg::region::Scenario::Ss(sc.clone()),
        SimPolicy::Ss(SsPolicy::G3),
        alpha.0.to_vec(),
    )
    .unwrap();
    cfg.horizon = 2_000_000;
    cfg.seed = 9;
    let out = run(&cfg).unwrap();
    assert!(
        (out.empirical_mu[0] - mu_s_exact).abs() < 4.0 * out.mu_std_err[0],
        "simulated {} vs analytic {mu_s_exact} (se {})",
        out.empirical_mu[0],
        out.mu_std_err[0]
    );
    assert!(out.empirical_mu[0] > mu_s_approx);
}

/// For policies whose empty-buffer competition factors coincide at both
/// rates (U = V), the busy buffer can only slow the source, and the
/// aggregate is a true pointwise upper bound.
#[test]
fn dominance_holds_when_competition_factors_match() {
    let mut rng = seeded(17);
    for trial in 0..40 {
        let sc = if trial % 2 == 0 {
            common::random_physical_ss(&mut rng, 100.0, 500.0)
        } else {
            common::random_raw_ss(&mut rng)
        };
        for policy in [SsPolicy::G1, SsPolicy::G2, SsPolicy::G4] {
            let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
            assert!((params.u - params.v).abs() < 1e-15);
            for _ in 0..25 {
                let alpha = SsAlpha([rng.gen(), rng.gen(), rng.gen(), rng.gen()]);
                let Some((mu_s, _)) = exact_point(&sc, &params, &alpha) else {
                    continue;
                };
                let Ok((mu_s_approx, _)) = bd::approx_service_rates(&sc, &params, &alpha) else {
                    continue;
                };
                assert!(
                    mu_s_approx >= mu_s - 1e-10,
                    "trial {trial} {policy:?} alpha {alpha:?}: {mu_s_approx} < {mu_s}"
                );
            }
        }
    }
}

/// Even where the aggregate fails pointwise, the region-level sandwich
/// holds: hull corners come from boundary candidates where the two
/// constructions coincide in the limit.
#[test]
fn sandwich_holds_on_strongly_asymmetric_cells() {
    use stabreg::region::ss::{error_bound, sandwich_check_on};
    for (ds, du, dd) in [
        (500.0, 150.0, 350.0),
        (480.0, 120.0, 200.0),
        (350.0, 500.0, 100.0),
    ] {
        let sc = presets::ss_at(ds, du, dd);
        let (exact, _) = exact_region(&sc, 7).unwrap();
        let (approx, _) = approx_region(&sc);
        let rep = sandwich_check_on(&exact, &approx, error_bound(&sc));
        assert_eq!(
            rep.exact_in_approx_violation, 0.0,
            "({ds},{du},{dd}): {rep:?}"
        );
        assert_eq!(
            rep.shrunk_approx_in_exact_violation, 0.0,
            "({ds},{du},{dd}): {rep:?}"
        );
    }
}

/// Candidates produced by solving the stability constraint sit on it.
#[test]
fn solved_candidates_are_tight() {
    for d in presets::REFERENCE_DISTANCES_M {
        let sc = presets::ss_symmetric(d);
        for policy in SsPolicy::ALL {
            let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
            for cand in bd::candidate_set(&sc, &params) {
                let (ok, slack) = bd::alpha_constraint(&sc, &params, &cand);
                assert!(ok);
                let fractional = cand.0.iter().any(|a| *a > 1e-12 && *a < 1.0 - 1e-12);
                if fractional {
                    assert!(
                        (-1e-12..=1e-9).contains(&slack),
                        "d={d} {policy:?} {cand:?}: slack {slack}"
                    );
                }
            }
        }
    }
}

fn random_mu(rng: &mut rand::rngs::StdRng, k: usize, u: usize) -> MuScenario {
    // Rejection-sampled so every relayed flow has a stable operating
    // point (nonnegative fraction threshold).
    loop {
        let sc = MuScenario {
            p_s: (0..k).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect(),
            p_d: (0..k).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect(),
            p_u: (0..u).map(|_| 0.05 + 0.9 * rng.gen::<f64>()).collect(),
            r1: 1.0,
        };
        if (0..k).all(|i| sc.relayable(i)) {
            return sc;
        }
    }
}

/// Flows whose uplink outruns the downlink drain at any fraction are
/// silent: zero rate, no slot occupancy, fraction ignored.
#[test]
fn relay_saturated_flows_are_silent() {
    let sc = MuScenario {
        p_s: vec![0.3, 0.5],
        p_d: vec![0.1, 0.9], // flow 0: p_s (1 - p_d) = 0.27 > 0.1 = p_d
        p_u: vec![0.4],
        r1: 1.0,
    };
    assert!(!sc.relayable(0) && sc.relayable(1));
    let policy = MuPolicy::new(vec![0, 1, 2], 3).unwrap();
    let mu = mu::service_rates(&sc, &policy, &[1.0, 0.0]).unwrap();
    assert_eq!(mu[0], 0.0);
    // flows below the silent one see no blocking from it
    let solo = MuScenario {
        p_s: vec![0.5],
        p_d: vec![0.9],
        p_u: vec![0.4],
        r1: 1.0,
    };
    let solo_policy = MuPolicy::new(vec![0, 1], 2).unwrap();
    let solo_mu = mu::service_rates(&solo, &solo_policy, &[0.0]).unwrap();
    assert!((mu[1] - solo_mu[0]).abs() < 1e-15);
    assert!((mu[2] - solo_mu[1]).abs() < 1e-15);
}

/// Exact grid points stay inside the border-fraction hull, and the
/// border points are grid points themselves.
#[test]
fn border_fractions_generate_the_exact_region() {
    let mut rng = seeded(2024);
    for trial in 0..6 {
        let k = 1 + trial % 2;
        let u = 1;
        let sc = random_mu(&mut rng, k, u);
        let (grid_region, _) = mu::exact_region(&sc, 9, 1_000_000).unwrap();
        let (border_region, _) = mu::reduced_region(&sc, 1_000_000).unwrap();
        let border = border_region.co_set().reduce();
        for (point, label) in &grid_region.vertices {
            assert!(
                border.contains(point).unwrap(),
                "trial {trial}: grid point {point:?} ({label:?}) outside the border hull"
            );
        }
        let grid = grid_region.co_set();
        let v = contains_set(&border_region.co_set(), &grid, 0.0).unwrap();
        assert!(v < 1e-9, "border points must be grid points, violation {v}");
    }
}

/// Pointwise convex-combination identity behind the border reduction.
#[test]
fn interior_fraction_is_a_convex_mix_with_gamma() {
    // The coefficient expresses fractions relative to the raw threshold,
    // so scenarios with thresholds above 1 (where the time-share clamp
    // engages) are drawn away here.
    let mut rng = seeded(7);
    for _ in 0..20 {
        let sc = loop {
            let sc = random_mu(&mut rng, 2, 1);
            if (0..2).all(|i| sc.alpha_star_raw(i).unwrap() <= 1.0) {
                break sc;
            }
        };
        let policy = MuPolicy::new(vec![0, 2, 1], 3).unwrap();
        let stars: Vec<f64> = (0..2).map(|i| sc.alpha_star(i).unwrap()).collect();
        for _ in 0..30 {
            let lambda = rng.gen::<f64>();
            let flow = rng.gen_range(0..2usize);
            let mut alpha = vec![rng.gen::<f64>() * stars[0], rng.gen::<f64>() * stars[1]];
            let gamma = mu::convexity_coefficient(sc.p_s[flow], sc.p_d[flow], lambda);
            alpha[flow] = lambda * stars[flow];
            let mid = mu::service_rates(&sc, &policy, &alpha).unwrap();
            let mut lo = alpha.clone();
            lo[flow] = 0.0;
            let mut hi = alpha.clone();
            hi[flow] = stars[flow];
            let lo = mu::service_rates(&sc, &policy, &lo).unwrap();
            let hi = mu::service_rates(&sc, &policy, &hi).unwrap();
            for c in 0..3 {
                let mix = gamma * lo[c] + (1.0 - gamma) * hi[c];
                assert!(
                    (mid[c] - mix).abs() < 1e-12,
                    "coord {c}: {} vs {mix}",
                    mid[c]
                );
            }
        }
    }
}

/// In the symmetric case, no communication at priority level `l` can
/// exceed `r1 p_s (1 - p_s)^(l-1)`.
#[test]
fn priority_depth_bounds_symmetric_rates() {
    let mut rng = seeded(99);
    for _ in 0..10 {
        // relayable symmetric pairs: the level bound presumes every flow
        // has a stable relay point
        let (ps, pd) = loop {
            let ps = 0.1 + 0.8 * rng.gen::<f64>();
            let pd = 0.1 + 0.9f64.min(0.89) * rng.gen::<f64>();
            if pd - ps + ps * pd >= 0.0 {
                break (ps, pd);
            }
        };
        let sc = MuScenario {
            p_s: vec![ps; 2],
            p_d: vec![pd; 2],
            p_u: vec![ps; 2],
            r1: 1.0,
        };
        let (region, _) = mu::reduced_region(&sc, 1_000_000).unwrap();
        for (point, label) in &region.vertices {
            let order: Vec<usize> = label
                .policy
                .split('>')
                .map(|t| t.parse().unwrap())
                .collect();
            for (level, &comm) in order.iter().enumerate() {
                let bound = sc.r1 * ps * (1.0 - ps).powi(level as i32);
                assert!(
                    point[comm] <= bound + 1e-12,
                    "comm {comm} at level {} rate {} exceeds {bound}",
                    level + 1,
                    point[comm]
                );
            }
        }
    }
}

/// The epsilon construction sandwiches the border-fraction region within
/// a componentwise epsilon.
#[test]
fn epsilon_sandwich_on_small_symmetric_instances() {
    for (d, k, u, eps) in [
        (350.0, 2, 1, 0.1),
        (350.0, 2, 2, 0.05),
        (500.0, 3, 1, 0.08),
        (200.0, 1, 2, 0.2),
    ] {
        let sc = presets::mu_symmetric(d, k, u);
        let (full, _) = mu::reduced_region(&sc, 10_000_000).unwrap();
        let (apx, stats) = mu::epsilon_region(&sc, eps).unwrap();
        let depth = stats.prefix_depth.unwrap();
        assert!(depth <= sc.total());
        let full_set = full.co_set().reduce();
        let apx_set = apx.co_set().reduce();
        let v1 = contains_set(&apx_set, &full_set, 0.0).unwrap();
        assert!(
            v1 < 1e-9,
            "approx escapes the exact region by {v1} (d={d} k={k} u={u})"
        );
        let v2 = contains_set(&full_set, &apx_set, eps).unwrap();
        assert!(
            v2 < 1e-9,
            "exact escapes approx + eps by {v2} (d={d} k={k} u={u})"
        );
    }
}

/// The error bound is attained: the measured relative gap between the
/// approximated and exact source rate stays below it across the grid.
#[test]
fn relative_gap_bounded_by_error_bound_at_reference_cell() {
    let sc = presets::ss_symmetric(350.0);
    let eps_star = stabreg::region::ss::error_bound(&sc);
    let mut rng = seeded(4);
    let mut worst: f64 = 0.0;
    for policy in SsPolicy::ALL {
        let params = ss_params(policy, &sc.probs_s, &sc.probs_u, &sc.probs_d);
        for _ in 0..400 {
            let alpha = SsAlpha([rng.gen(), rng.gen(), rng.gen(), rng.gen()]);
            let Ok((mu_s_a, _)) = bd::approx_service_rates(&sc, &params, &alpha) else {
                continue;
            };
            let spec = relay_chain(&sc, &params, &alpha);
            let Ok(dist) = qbd::solve_stationary(&spec) else {
                continue;
            };
            let (mu_s, _) = blend(&service_pieces(&sc, &params, &alpha), dist.pi0);
            if mu_s_a > 0.0 {
                worst = worst.max((mu_s_a - mu_s) / mu_s_a);
            }
        }
    }
    assert!(worst <= eps_star + 1e-9, "gap {worst} vs bound {eps_star}");
}
