//! Downward-closed sub-convex hulls over finite generator sets.
//!
//! A rate point is achievable when it is componentwise dominated by a
//! nonnegative combination of generators with weight sum at most one
//! (time sharing with idling, then discarding surplus). This closure is
//! what queue stability supports and, unlike the bare union of
//! "dominated by one generator" with "exact combination", it is closed
//! under dropping generators that other generators already express.
//! Membership is a small linear feasibility problem solved by a dense
//! phase-1 simplex; coordinates are normalized so the tolerance is
//! relative to the largest generator coordinate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Membership tolerance on normalized coordinates.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PolytopeError {
    #[error("dimension mismatch: set is {set}-dimensional, point is {point}-dimensional")]
    DimensionMismatch { set: usize, point: usize },
}

/// Finite generator list in the nonnegative orthant; duplicates removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoSet {
    generators: Vec<Vec<f64>>,
    dim: usize,
}

impl CoSet {
    /// Build from generators (all coordinates nonnegative, equal length).
    /// Exact duplicates are dropped.
    pub fn new(generators: Vec<Vec<f64>>) -> Self {
        let dim = generators.first().map_or(0, Vec::len);
        let mut seen = std::collections::HashSet::with_capacity(generators.len());
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(generators.len());
        for g in generators {
            assert_eq!(g.len(), dim, "generators must share a dimension");
            assert!(
                g.iter().all(|v| *v >= -1e-12),
                "generators live in the nonnegative orthant"
            );
            if seen.insert(g.iter().map(|v| v.to_bits()).collect::<Vec<u64>>()) {
                out.push(g);
            }
        }
        Self {
            generators: out,
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    fn scale(&self) -> f64 {
        self.generators
            .iter()
            .flat_map(|g| g.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300)
    }

    /// Membership test: componentwise dominated by some sub-convex
    /// combination of generators (weights nonnegative, sum at most 1).
    /// Domination by a single generator is the cheap special case tried
    /// first.
    pub fn contains(&self, point: &[f64]) -> Result<bool, PolytopeError> {
        if point.len() != self.dim {
            return Err(PolytopeError::DimensionMismatch {
                set: self.dim,
                point: point.len(),
            });
        }
        if self.generators.is_empty() {
            return Ok(point.iter().all(|v| *v <= MEMBERSHIP_TOL));
        }
        let scale = self.scale();
        let tol = MEMBERSHIP_TOL * scale;
        if point.iter().all(|v| *v <= tol) {
            return Ok(true); // origin and its neighborhood
        }
        if self
            .generators
            .iter()
            .any(|g| g.iter().zip(point).all(|(gi, xi)| *xi <= gi + tol))
        {
            return Ok(true);
        }
        Ok(subconvex_feasible(&self.generators, point, scale))
    }

    /// Largest uniform inflation still missing from `outer`, over this
    /// set's generators; zero when every generator fits in `outer`
    /// inflated componentwise by `inflation`.
    pub fn max_violation(&self, outer: &CoSet, inflation: f64) -> Result<f64, PolytopeError> {
        if self.dim != outer.dim {
            return Err(PolytopeError::DimensionMismatch {
                set: outer.dim,
                point: self.dim,
            });
        }
        let mut worst = 0.0f64;
        for g in &self.generators {
            let deflated: Vec<f64> = g.iter().map(|v| (v - inflation).max(0.0)).collect();
            if outer.contains(&deflated)? {
                continue;
            }
            // Bisect the extra uniform slack needed for membership.
            let mut lo = 0.0f64;
            let mut hi = g.iter().fold(0.0f64, |m, v| m.max(*v)).max(1e-12);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let probe: Vec<f64> = g.iter().map(|v| (v - inflation - mid).max(0.0)).collect();
                if outer.contains(&probe)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            worst = worst.max(hi);
        }
        Ok(worst)
    }

    /// Drop componentwise-dominated generators, then generators already
    /// contained in the set spanned by the others. The represented set is
    /// unchanged.
    pub fn reduce(&self) -> CoSet {
        let mut kept: Vec<Vec<f64>> = Vec::new();
        for g in &self.generators {
            if self.generators.iter().any(|h| {
                h != g
                    && g.iter().zip(h).all(|(gi, hi)| gi <= hi)
                    && h.iter().zip(g).any(|(hi, gi)| hi > gi)
            }) {
                continue;
            }
            if !kept.iter().any(|h| h == g) {
                kept.push(g.clone());
            }
        }
        // Leave-one-out membership: a generator expressible by the rest
        // contributes nothing to the hull.
        let mut i = 0;
        while i < kept.len() {
            let mut others: Vec<Vec<f64>> = kept.clone();
            let g = others.swap_remove(i);
            if !others.is_empty() {
                let rest = CoSet {
                    generators: others,
                    dim: self.dim,
                };
                if rest.contains(&g).unwrap_or(false) {
                    kept.remove(i);
                    continue;
                }
            }
            i += 1;
        }
        CoSet {
            generators: kept,
            dim: self.dim,
        }
    }
}

/// Check every generator of `inner` against `outer` inflated
/// componentwise by `inflation`; returns the largest infeasibility.
pub fn contains_set(inner: &CoSet, outer: &CoSet, inflation: f64) -> Result<f64, PolytopeError> {
    inner.max_violation(outer, inflation)
}

/// Phase-1 simplex feasibility for `{A gamma >= x, gamma >= 0,
/// sum gamma <= 1}` with columns the generators. Coordinates are divided
/// by `scale` first.
fn subconvex_feasible(gens: &[Vec<f64>], x: &[f64], scale: f64) -> bool {
    let dim = x.len();
    let n = gens.len();
    let rows = dim + 1; // covering rows plus the weight budget row
    let cols = n + dim + 1; // generators, surplus slacks, budget slack
                            // tableau[r] = row of structural columns, then artificial basis is
                            // implicit: basis[r] == usize::MAX means the artificial of row r.
    let mut a = vec![vec![0.0f64; cols]; rows];
    let mut b = vec![0.0f64; rows];
    for (j, g) in gens.iter().enumerate() {
        for r in 0..dim {
            a[r][j] = g[r] / scale;
        }
        a[rows - 1][j] = 1.0;
    }
    for r in 0..dim {
        a[r][n + r] = -1.0; // A gamma - s = x with surplus s >= 0
        b[r] = x[r] / scale;
    }
    a[rows - 1][cols - 1] = 1.0;
    b[rows - 1] = 1.0;
    // b >= 0 already (nonnegative orthant), artificial start is feasible.
    let mut basis = vec![usize::MAX; rows];
    // price row: minimize sum of artificials -> initial reduced costs are
    // column sums negated; track as cost[j] = -(sum_r a[r][j]) while the
    // artificial of row r is basic.
    let mut in_basis = vec![false; cols];
    let tol = 1e-11;
    for _iter in 0..10_000 {
        // reduced cost of column j: -(sum over rows whose basis is
        // artificial of a[r][j])
        let mut enter = None;
        for j in 0..cols {
            if in_basis[j] {
                continue;
            }
            let mut rc = 0.0;
            for r in 0..rows {
                if basis[r] == usize::MAX {
                    rc -= a[r][j];
                }
            }
            if rc < -tol {
                enter = Some(j); // Bland: first improving column
                break;
            }
        }
        let Some(j) = enter else { break };
        // ratio test
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..rows {
            if a[r][j] > tol {
                let ratio = b[r] / a[r][j];
                if ratio < best - 1e-15
                    || (ratio < best + 1e-15
                        && leave.is_none_or(|l| basis[r] == usize::MAX && basis[l] != usize::MAX))
                {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(r) = leave else { break }; // unbounded cannot happen here
                                            // pivot
        let piv = a[r][j];
        a[r].iter_mut().for_each(|v| *v /= piv);
        b[r] /= piv;
        for rr in 0..rows {
            if rr != r && a[rr][j].abs() > 0.0 {
                let f = a[rr][j];
                let pivot_row = a[r].clone();
                a[rr]
                    .iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, pv)| *v -= f * pv);
                b[rr] -= f * b[r];
            }
        }
        if basis[r] != usize::MAX {
            in_basis[basis[r]] = false;
        }
        basis[r] = j;
        in_basis[j] = true;
    }
    let artificial_mass: f64 = (0..rows)
        .filter(|r| basis[*r] == usize::MAX)
        .map(|r| b[r].max(0.0))
        .sum();
    artificial_mass <= MEMBERSHIP_TOL
}

/// Componentwise-dominance filter for large generator lists in any
/// dimension: keeps the points no other point weakly dominates. The
/// represented co-set is unchanged; unlike [`CoSet::reduce`] no
/// combination membership is solved, so this scales to the raw sweeps of
/// the multi-user constructions.
pub fn pareto_front(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let kept: Vec<bool> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            !points.iter().enumerate().any(|(j, q)| {
                j != i
                    && p.iter().zip(q).all(|(a, b)| a <= b)
                    && (q.iter().zip(p).any(|(b, a)| b > a) || j < i)
            })
        })
        .collect();
    points
        .iter()
        .zip(&kept)
        .filter(|(_, keep)| **keep)
        .map(|(p, _)| p.clone())
        .collect()
}

/// Generators of the 2-D reduction: the Pareto staircase filtered down to
/// its concave (upper convex hull) extremes. Used by the planar region
/// builders where the exact hull is cheap.
pub fn reduce_2d(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.is_empty() {
        return Vec::new();
    }
    // Pareto filter via sort by x desc, keep strictly increasing y.
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut frontier: Vec<(f64, f64)> = Vec::new();
    let mut best_y = f64::NEG_INFINITY;
    for p in pts {
        if p.1 > best_y {
            frontier.push(p);
            best_y = p.1;
        }
    }
    frontier.reverse(); // ascending x, descending y
                        // Upper hull relative to the origin-anchored downward closure: keep
                        // points where the chain turns clockwise, plus the axis extremes.
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    // The max-y and max-x frontier endpoints are extreme by
    // construction; middle points below (or on) a chord are redundant.
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in &frontier {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) >= -1e-15 {
            hull.pop();
        }
        hull.push(p);
    }
    hull
}
