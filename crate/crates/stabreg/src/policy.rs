//! Priority policies and the policy-dependent transmission probabilities.
//!
//! Each slot the scheduler serves the highest-priority communication that
//! is able to transmit. In the three-user scenario a communication's
//! priority class is `(kind, rate)` where the rate is the best rate among
//! its able legs; the six corner-point policies are exactly the orderings
//! of the four classes that rank `r1` above `r2` within each kind. The
//! multi-user scenario uses plain permutations of communication indices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::LinkStateProbs;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("communication index {0} does not appear in the policy order")]
    UnknownIndex(usize),
    #[error("prefix depth {depth} exceeds the {total} communications")]
    DepthTooLarge { depth: usize, total: usize },
}

/// Kind of communication competing for a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommKind {
    /// Relayed pair: uplink leg into the BS buffer, downlink leg out.
    Ue2Ue,
    /// Plain uplink to the base station.
    Ue2Bs,
}

/// A `(kind, rate index)` scheduling class; rate index 0 is `r1`.
pub type SchedClass = (CommKind, usize);

/// The six corner-point priority policies of the three-user scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SsPolicy {
    /// Relayed pair first at any rate.
    G1,
    /// Uplink-only flow first at any rate.
    G2,
    /// Relayed pair first at `r1`, uplink-only flow first at `r2`.
    G3,
    /// Uplink-only flow first at `r1`, relayed pair first at `r2`.
    G4,
    /// Highest rate first, ties to the relayed pair.
    G5,
    /// Highest rate first, ties to the uplink-only flow.
    G6,
}

impl SsPolicy {
    pub const ALL: [SsPolicy; 6] = [
        SsPolicy::G1,
        SsPolicy::G2,
        SsPolicy::G3,
        SsPolicy::G4,
        SsPolicy::G5,
        SsPolicy::G6,
    ];

    /// 1-based index used in labels and output files.
    pub fn index(self) -> usize {
        match self {
            SsPolicy::G1 => 1,
            SsPolicy::G2 => 2,
            SsPolicy::G3 => 3,
            SsPolicy::G4 => 4,
            SsPolicy::G5 => 5,
            SsPolicy::G6 => 6,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i.checked_sub(1)?).copied()
    }

    /// Priority order over the four scheduling classes, best first.
    pub fn class_order(self) -> [SchedClass; 4] {
        use CommKind::{Ue2Bs, Ue2Ue};
        match self {
            SsPolicy::G1 => [(Ue2Ue, 0), (Ue2Ue, 1), (Ue2Bs, 0), (Ue2Bs, 1)],
            SsPolicy::G2 => [(Ue2Bs, 0), (Ue2Bs, 1), (Ue2Ue, 0), (Ue2Ue, 1)],
            SsPolicy::G3 => [(Ue2Ue, 0), (Ue2Bs, 0), (Ue2Bs, 1), (Ue2Ue, 1)],
            SsPolicy::G4 => [(Ue2Bs, 0), (Ue2Ue, 0), (Ue2Ue, 1), (Ue2Bs, 1)],
            SsPolicy::G5 => [(Ue2Ue, 0), (Ue2Bs, 0), (Ue2Ue, 1), (Ue2Bs, 1)],
            SsPolicy::G6 => [(Ue2Bs, 0), (Ue2Ue, 0), (Ue2Bs, 1), (Ue2Ue, 1)],
        }
    }
}

/// Policy-dependent transmission probabilities of the three-user model.
///
/// `u`/`v`: probability that the relayed pair's source transmits at
/// `r1`/`r2` when the relay buffer is empty. `w`/`x` and `y`/`z`: same
/// for the uplink-only flow, with the buffer empty and non-empty
/// respectively. All six are conditional on the transmitting link having
/// the corresponding SNR state, so they capture only the competition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsPolicyParams {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SsPolicyParams {
    /// `N = p_s^1 U + (1 - p_s^1) V`: probability the source wins its
    /// class competition at whichever rate its channel offers.
    pub fn n(&self, ps1: f64) -> f64 {
        ps1 * self.u + (1.0 - ps1) * self.v
    }

    /// `M = U` in the chain notation (the source's `r1`-class win
    /// probability does not depend on the downlink state).
    pub fn m(&self) -> f64 {
        self.u
    }

    fn within_unit(&self) -> bool {
        [self.u, self.v, self.w, self.x, self.y, self.z]
            .iter()
            .all(|p| (-1e-12..=1.0 + 1e-12).contains(p))
    }
}

/// Evaluate the six-parameter row of a corner-point policy at the given
/// link state probabilities (each with `M = 3` states).
pub fn ss_params(
    policy: SsPolicy,
    probs_s: &LinkStateProbs,
    probs_u: &LinkStateProbs,
    probs_d: &LinkStateProbs,
) -> SsPolicyParams {
    assert_eq!(
        probs_s.num_states(),
        3,
        "three-user model uses M = 3 states"
    );
    assert_eq!(probs_u.num_states(), 3);
    assert_eq!(probs_d.num_states(), 3);
    let (ps1, ps3) = (probs_s.state(1), probs_s.state(3));
    let (pu1, pu3) = (probs_u.state(1), probs_u.state(3));
    let (pd1, pd3) = (probs_d.state(1), probs_d.state(3));
    let (bs1, bu1, bd1) = (1.0 - ps1, 1.0 - pu1, 1.0 - pd1);
    let params = match policy {
        SsPolicy::G1 => SsPolicyParams {
            u: 1.0,
            v: 1.0,
            w: ps3,
            x: ps3,
            y: ps3 * pd3,
            z: ps3 * pd3,
        },
        SsPolicy::G2 => SsPolicyParams {
            u: pu3,
            v: pu3,
            w: 1.0,
            x: 1.0,
            y: 1.0,
            z: 1.0,
        },
        SsPolicy::G3 => SsPolicyParams {
            u: 1.0,
            v: pu3,
            w: bs1,
            x: bs1,
            y: bs1 * bd1,
            z: bs1 * bd1,
        },
        SsPolicy::G4 => SsPolicyParams {
            u: bu1,
            v: bu1,
            w: 1.0,
            x: ps3,
            y: 1.0,
            z: ps3 * pd3,
        },
        SsPolicy::G5 => SsPolicyParams {
            u: 1.0,
            v: bu1,
            w: bs1,
            x: ps3,
            y: bs1 * bd1,
            z: ps3 * pd3,
        },
        SsPolicy::G6 => SsPolicyParams {
            u: bu1,
            v: pu3,
            w: 1.0,
            x: bs1,
            y: 1.0,
            z: bs1 * bd1,
        },
    };
    debug_assert!(params.within_unit());
    params
}

/// Derive the six parameters of an arbitrary class ordering by
/// enumerating the 27 joint SNR states. Agrees with [`ss_params`] on the
/// six corner-point policies and extends the sweep machinery to mixed
/// orderings.
pub fn ss_params_from_order(
    order: &[SchedClass; 4],
    probs_s: &LinkStateProbs,
    probs_u: &LinkStateProbs,
    probs_d: &LinkStateProbs,
) -> SsPolicyParams {
    let rank = |class: SchedClass| {
        order
            .iter()
            .position(|&c| c == class)
            .expect("class in order")
    };
    // Best able class of the relayed pair given leg states (usize::MAX =
    // unable). `s_state`/`d_state` are 0-based; state 2 has zero rate.
    let pair_rank = |s_state: usize, d_state: usize, busy: bool| -> usize {
        let mut best = usize::MAX;
        if s_state < 2 {
            best = best.min(rank((CommKind::Ue2Ue, s_state)));
        }
        if busy && d_state < 2 {
            best = best.min(rank((CommKind::Ue2Ue, d_state)));
        }
        best
    };
    let mut out = SsPolicyParams {
        u: 0.0,
        v: 0.0,
        w: 0.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };
    for u_state in 0..3 {
        let pu = probs_u.state(u_state + 1);
        // Source wins at its rate when the uplink-only flow's class ranks
        // lower. Empty buffer: only the source leg counts.
        for (rate, slot) in [(0, &mut out.u), (1, &mut out.v)] {
            let my = rank((CommKind::Ue2Ue, rate));
            let other = if u_state < 2 {
                rank((CommKind::Ue2Bs, u_state))
            } else {
                usize::MAX
            };
            if my < other {
                *slot += pu;
            }
        }
    }
    for s_state in 0..3 {
        let ps = probs_s.state(s_state + 1);
        for (rate, slot) in [(0, &mut out.w), (1, &mut out.x)] {
            let my = rank((CommKind::Ue2Bs, rate));
            let pair = pair_rank(s_state, 2, false); // empty: no downlink leg
            if my < pair {
                *slot += ps;
            }
        }
        for d_state in 0..3 {
            let pd = probs_d.state(d_state + 1);
            for (rate, slot) in [(0, &mut out.y), (1, &mut out.z)] {
                let my = rank((CommKind::Ue2Bs, rate));
                let pair = pair_rank(s_state, d_state, true);
                if my < pair {
                    *slot += ps * pd;
                }
            }
        }
    }
    out
}

/// A multi-user priority policy: a permutation (or permutation prefix) of
/// communication indices, most prioritized first. `UE2UE` flows occupy
/// indices `0..K`, `UE2BS` flows `K..K+U`. Communications absent from a
/// prefix are never scheduled.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MuPolicy {
    order: Vec<usize>,
}

impl MuPolicy {
    /// Build from an explicit order; indices must be unique and `< total`.
    pub fn new(order: Vec<usize>, total: usize) -> Result<Self, PolicyError> {
        let mut seen = vec![false; total];
        for &i in &order {
            if i >= total || seen[i] {
                return Err(PolicyError::UnknownIndex(i));
            }
            seen[i] = true;
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.order.contains(&index)
    }
}

/// Split the communications strictly more prioritized than `index` by
/// kind: `(ue2bs_before, ue2ue_before)`.
pub fn prioritized_sets(
    policy: &MuPolicy,
    index: usize,
    k_flows: usize,
    _u_flows: usize,
) -> Result<(Vec<usize>, Vec<usize>), PolicyError> {
    let pos = policy
        .order
        .iter()
        .position(|&i| i == index)
        .ok_or(PolicyError::UnknownIndex(index))?;
    let mut ue2bs = Vec::new();
    let mut ue2ue = Vec::new();
    for &i in &policy.order[..pos] {
        if i < k_flows {
            ue2ue.push(i);
        } else {
            ue2bs.push(i);
        }
    }
    Ok((ue2bs, ue2ue))
}

/// Lazily enumerate priority policies: all `(K+U)!` full permutations, or
/// the `(K+U)!/(K+U-depth)!` ordered prefixes of length `depth`.
pub fn enumerate_policies(
    k_flows: usize,
    u_flows: usize,
    depth: Option<usize>,
) -> Result<PolicyIter, PolicyError> {
    let total = k_flows + u_flows;
    let depth = depth.unwrap_or(total);
    if depth > total {
        return Err(PolicyError::DepthTooLarge { depth, total });
    }
    Ok(PolicyIter::new(total, depth))
}

/// Number of policies [`enumerate_policies`] will yield, saturating at
/// `u128::MAX` for cell sizes past any enumerable range.
pub fn policy_count(k_flows: usize, u_flows: usize, depth: Option<usize>) -> u128 {
    let total = (k_flows + u_flows) as u128;
    let depth = depth.map(|d| d as u128).unwrap_or(total);
    ((total - depth + 1)..=total).fold(1u128, |acc, f| acc.saturating_mul(f))
}

/// Streaming iterator over ordered `depth`-prefixes of `0..total` in
/// lexicographic order. Materializing the full set is infeasible for
/// large cells, so region builders fold over this iterator instead.
#[derive(Debug)]
pub struct PolicyIter {
    total: usize,
    depth: usize,
    current: Vec<usize>,
    used: Vec<bool>,
    done: bool,
}

impl PolicyIter {
    fn new(total: usize, depth: usize) -> Self {
        let mut it = Self {
            total,
            depth,
            current: Vec::new(),
            used: vec![false; total],
            done: false,
        };
        if !it.descend() {
            it.done = true;
        }
        it
    }

    /// Extend `current` with the smallest unused indices up to `depth`.
    fn descend(&mut self) -> bool {
        while self.current.len() < self.depth {
            match (0..self.total).find(|&i| !self.used[i]) {
                Some(i) => {
                    self.used[i] = true;
                    self.current.push(i);
                }
                None => return false,
            }
        }
        true
    }

    /// Advance the deepest position that still has a larger unused index.
    fn bump(&mut self) -> bool {
        while let Some(last) = self.current.pop() {
            self.used[last] = false;
            if let Some(next) = ((last + 1)..self.total).find(|&i| !self.used[i]) {
                self.used[next] = true;
                self.current.push(next);
                return self.descend();
            }
        }
        false
    }
}

impl Iterator for PolicyIter {
    type Item = MuPolicy;

    fn next(&mut self) -> Option<MuPolicy> {
        if self.done {
            return None;
        }
        let item = MuPolicy {
            order: self.current.clone(),
        };
        if self.depth == 0 || !self.bump() {
            self.done = true;
        }
        Some(item)
    }
}
