//! Named scenario presets for a 10 MHz LTE-like TDD cell.
//!
//! Per-RB transmit powers divide the total power across the 50 resource
//! blocks a scheduled user occupies (0.25 W total uplink, 40 W total
//! downlink). The path gain is a calibrated urban-macro style power law,
//! `-15.3 dB + 37.6 log10(d)` of loss at `d` meters (exponent 3.76).
//! Rates per RB are `r1 = 400`, `r2 = 200` kbps for the three-user
//! presets; the multi-user presets use `r1 = 1` (normalized) so the
//! epsilon precision parameter is a plain rate fraction.

use crate::channel::{state_probabilities, symmetric_probs, LinkGeometry, RadioConfig};
use crate::region::mu::MuScenario;
use crate::ss::SsScenario;

/// Radio parameters of the reference cell (500 m radius).
pub fn radio() -> RadioConfig {
    RadioConfig {
        ul_power_w: 0.25 / 50.0,
        dl_power_w: 40.0 / 50.0,
        ul_noise_density_dbhz: -199.0,
        dl_noise_density_dbhz: -195.0,
        rb_bandwidth_hz: 180e3,
        pathloss_exponent: 3.76,
        pathloss_offset_db: -15.3,
        ul_thresholds_db: vec![9.5, 2.5],
        dl_thresholds_db: vec![7.5, 1.5],
    }
}

/// Three-user scenario with every UE at distance `d` meters, `k = 2`.
pub fn ss_symmetric(d_m: f64) -> SsScenario {
    let cfg = radio();
    let ul = state_probabilities(&LinkGeometry::uplink(d_m), &cfg, 3).expect("preset is valid");
    let dl = state_probabilities(&LinkGeometry::downlink(d_m), &cfg, 3).expect("preset is valid");
    SsScenario {
        probs_s: ul.clone(),
        probs_u: ul,
        probs_d: dl,
        r2: 200.0,
        k: 2,
    }
}

/// Three-user scenario with per-UE distances (source, uplink-only UE,
/// destination), `k = 2`.
pub fn ss_at(d_s: f64, d_u: f64, d_d: f64) -> SsScenario {
    let cfg = radio();
    SsScenario {
        probs_s: state_probabilities(&LinkGeometry::uplink(d_s), &cfg, 3).expect("valid"),
        probs_u: state_probabilities(&LinkGeometry::uplink(d_u), &cfg, 3).expect("valid"),
        probs_d: state_probabilities(&LinkGeometry::downlink(d_d), &cfg, 3).expect("valid"),
        r2: 200.0,
        k: 2,
    }
}

/// Symmetric multi-user scenario: `k_flows` relayed and `u_flows`
/// uplink-only communications, every UE at distance `d` meters,
/// normalized rate `r1 = 1`.
pub fn mu_symmetric(d_m: f64, k_flows: usize, u_flows: usize) -> MuScenario {
    let (p_s, p_d) = symmetric_probs(d_m, &radio()).expect("preset is valid");
    MuScenario {
        p_s: vec![p_s; k_flows],
        p_d: vec![p_d; k_flows],
        p_u: vec![p_s; u_flows],
        r1: 1.0,
    }
}

/// The distances used by the reference figures.
pub const REFERENCE_DISTANCES_M: [f64; 3] = [100.0, 350.0, 500.0];
