//! SNR-state probabilities per link from geometry, power, noise and
//! threshold configuration.
//!
//! Links are Rayleigh-faded: the per-slot SNR is `|h|^2 * g(d) * P / N0`
//! with `|h|^2` unit-mean exponential, so the probability of the SNR
//! exceeding a threshold `gamma` is `exp(-gamma * N0 / (g(d) * P))`. The
//! SNR axis is cut into `M` states by strictly decreasing thresholds
//! `gamma_1 > gamma_2 > ...` (state 1 is the best); state `M` collects
//! everything below the last threshold and maps to a zero rate in the
//! queueing model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Convert a dB value to linear scale.
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    /// Thresholds must be strictly decreasing after the implicit `+inf`.
    #[error("SNR thresholds must be strictly decreasing, got {0} dB before {1} dB")]
    NonDecreasingThresholds(f64, f64),
    #[error("invalid radio configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("need at least {needed} finite thresholds for {states} states, got {got}")]
    NotEnoughThresholds {
        states: usize,
        needed: usize,
        got: usize,
    },
}

/// Which leg of the cell a link is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkDirection {
    Uplink,
    Downlink,
}

/// Cell-wide radio parameters.
///
/// Powers are per scheduled resource block; noise densities are in
/// dB(W)/Hz and integrate over `rb_bandwidth_hz`. The path gain is
/// `10^(pathloss_offset_db/10) * d^-beta`; the offset defaults to 0 dB
/// (pure power law) and lets configs express calibrated distance-based
/// models without changing the exponential channel law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// UE transmit power per resource block, watts.
    pub ul_power_w: f64,
    /// BS transmit power per resource block, watts.
    pub dl_power_w: f64,
    /// Uplink noise density, dB(W)/Hz.
    pub ul_noise_density_dbhz: f64,
    /// Downlink noise density, dB(W)/Hz.
    pub dl_noise_density_dbhz: f64,
    /// Resource-block bandwidth, Hz.
    pub rb_bandwidth_hz: f64,
    /// Path-loss exponent `beta`.
    pub pathloss_exponent: f64,
    /// Additional path-gain offset in dB (0 = pure `d^-beta`).
    pub pathloss_offset_db: f64,
    /// Uplink SNR thresholds in dB, strictly decreasing.
    pub ul_thresholds_db: Vec<f64>,
    /// Downlink SNR thresholds in dB, strictly decreasing.
    pub dl_thresholds_db: Vec<f64>,
}

impl RadioConfig {
    /// Check positivity and threshold-ordering invariants.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // negations also reject NaN
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.ul_power_w > 0.0) || !(self.dl_power_w > 0.0) {
            return Err(ChannelError::InvalidConfig(
                "transmit powers must be positive",
            ));
        }
        if !(self.rb_bandwidth_hz > 0.0) {
            return Err(ChannelError::InvalidConfig("bandwidth must be positive"));
        }
        for ths in [&self.ul_thresholds_db, &self.dl_thresholds_db] {
            for w in ths.windows(2) {
                if !(w[0] > w[1]) {
                    return Err(ChannelError::NonDecreasingThresholds(w[0], w[1]));
                }
            }
        }
        Ok(())
    }

    fn thresholds(&self, dir: LinkDirection) -> &[f64] {
        match dir {
            LinkDirection::Uplink => &self.ul_thresholds_db,
            LinkDirection::Downlink => &self.dl_thresholds_db,
        }
    }

    /// Mean SNR (linear) of a link at distance `d` meters.
    pub fn mean_snr(&self, geom: &LinkGeometry) -> f64 {
        let (p, n_db) = match geom.direction {
            LinkDirection::Uplink => (self.ul_power_w, self.ul_noise_density_dbhz),
            LinkDirection::Downlink => (self.dl_power_w, self.dl_noise_density_dbhz),
        };
        let n0 = db_to_lin(n_db) * self.rb_bandwidth_hz;
        let gain =
            db_to_lin(self.pathloss_offset_db) * geom.distance_m.powf(-self.pathloss_exponent);
        gain * p / n0
    }
}

/// One link: distance to the base station and direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub distance_m: f64,
    pub direction: LinkDirection,
}

impl LinkGeometry {
    pub fn uplink(distance_m: f64) -> Self {
        Self {
            distance_m,
            direction: LinkDirection::Uplink,
        }
    }

    pub fn downlink(distance_m: f64) -> Self {
        Self {
            distance_m,
            direction: LinkDirection::Downlink,
        }
    }
}

/// Probability of each SNR state `S_1 .. S_M` for one link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStateProbs {
    probs: Vec<f64>,
}

impl LinkStateProbs {
    /// Build from raw state probabilities; they must be in `[0, 1]` and
    /// sum to one within 1e-12.
    pub fn new(probs: Vec<f64>) -> Result<Self, ChannelError> {
        if probs.len() < 2 {
            return Err(ChannelError::InvalidConfig("need at least two SNR states"));
        }
        if probs.iter().any(|p| !(-1e-15..=1.0 + 1e-12).contains(p)) {
            return Err(ChannelError::InvalidConfig(
                "state probabilities outside [0, 1]",
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ChannelError::InvalidConfig(
                "state probabilities must sum to 1",
            ));
        }
        Ok(Self { probs })
    }

    pub fn num_states(&self) -> usize {
        self.probs.len()
    }

    /// Probability of state `n` (1-based, matching `S_n`).
    pub fn state(&self, n: usize) -> f64 {
        self.probs[n - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// Probability that a link's SNR falls in each of `num_states` intervals.
///
/// With mean SNR `s` and thresholds `g_1 > g_2 > ...` (linear), state `n`
/// has probability `exp(-g_n/s) - exp(-g_{n-1}/s)` where `g_0 = +inf` and
/// the final state absorbs the remainder (`g_M = -inf`). Equal adjacent
/// thresholds would make a state empty; the strict-ordering invariant
/// rejects them up front.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation also rejects NaN
pub fn state_probabilities(
    geom: &LinkGeometry,
    cfg: &RadioConfig,
    num_states: usize,
) -> Result<LinkStateProbs, ChannelError> {
    cfg.validate()?;
    if num_states < 2 {
        return Err(ChannelError::InvalidConfig("need at least two SNR states"));
    }
    if !(geom.distance_m > 0.0) {
        return Err(ChannelError::InvalidConfig("distance must be positive"));
    }
    let ths = cfg.thresholds(geom.direction);
    if ths.len() < num_states - 1 {
        return Err(ChannelError::NotEnoughThresholds {
            states: num_states,
            needed: num_states - 1,
            got: ths.len(),
        });
    }
    let s = cfg.mean_snr(geom);
    // Tail probabilities P[SNR >= gamma_n]; prev starts at gamma_0 = +inf.
    let mut probs = Vec::with_capacity(num_states);
    let mut prev_tail = 0.0;
    for &th_db in ths.iter().take(num_states - 1) {
        let tail = (-db_to_lin(th_db) / s).exp();
        probs.push(tail - prev_tail);
        prev_tail = tail;
    }
    probs.push(1.0 - prev_tail);
    LinkStateProbs::new(probs)
}

/// Two-rate (`M = 2`, zero rate in the second state) success
/// probabilities for a symmetric drop: every UE at distance `d`.
///
/// Returns `(p_s, p_d)`: the uplink and downlink probabilities of the
/// top SNR state, used by the multi-user region constructions.
pub fn symmetric_probs(d_m: f64, cfg: &RadioConfig) -> Result<(f64, f64), ChannelError> {
    let ul = state_probabilities(&LinkGeometry::uplink(d_m), cfg, 2)?;
    let dl = state_probabilities(&LinkGeometry::downlink(d_m), cfg, 2)?;
    Ok((ul.state(1), dl.state(1)))
}
