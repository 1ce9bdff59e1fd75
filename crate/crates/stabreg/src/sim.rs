//! Slot-level Monte-Carlo oracle for the coupled queue system.
//!
//! Each slot draws every link's SNR state, applies the priority policy to
//! pick one transmitter among the communications able to transmit, and
//! moves packets in units of the smaller rate (`r1` moves `k` units).
//! The relay buffer follows the bounded-jump convention of the analytic
//! chain: the downlink leg competes for slots whenever the buffer is
//! non-empty, but a granted `k`-unit slot with fewer than `k` buffered
//! units moves nothing. Runs are bit-reproducible for a fixed seed: one
//! ChaCha stream per run, drawn in a fixed per-slot order.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{CommKind, MuPolicy, SsPolicy};
use crate::region::mu::MuScenario;
use crate::region::Scenario;
use crate::ss::SsScenario;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(&'static str),
}

/// Traffic offered to the user queues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ArrivalMode {
    /// Sources always have packets (the regime of the region analysis).
    Saturated,
    /// Independent arrivals with the given mean rates (rate units, one
    /// entry per user queue).
    Bernoulli(Vec<f64>),
}

/// How the relay buffer couples the legs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Real relaying: the downlink leg is schedulable only when its
    /// buffer holds packets.
    Relayed,
    /// Saturated-buffer comparison: the downlink always has packets and
    /// the buffer never empties (the physical-layer rate region).
    FullBuffer,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimPolicy {
    Ss(SsPolicy),
    Mu(MuPolicy),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub policy: SimPolicy,
    /// Fraction vector: 4 components for the three-user scenario, one
    /// per relayed flow otherwise.
    pub alpha: Vec<f64>,
    pub horizon: u64,
    pub seed: u64,
    pub arrival_mode: ArrivalMode,
    pub coupling: Coupling,
    /// Fraction of the horizon discarded before collecting statistics.
    pub warmup: f64,
    /// Backlog-slope threshold for stability verdicts, packets per slot.
    pub theta: f64,
    /// Record queue lengths every `n` slots when set.
    pub trace_stride: Option<u64>,
}

impl SimConfig {
    pub fn new(scenario: Scenario, policy: SimPolicy, alpha: Vec<f64>) -> Result<Self, SimError> {
        let cfg = Self {
            scenario,
            policy,
            alpha,
            horizon: 1_000_000,
            seed: 1,
            arrival_mode: ArrivalMode::Saturated,
            coupling: Coupling::Relayed,
            warmup: 0.1,
            theta: 1e-3,
            trace_stride: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        match (&self.scenario, &self.policy) {
            (Scenario::Ss(_), SimPolicy::Ss(_)) | (Scenario::Mu(_), SimPolicy::Mu(_)) => {}
            _ => {
                return Err(SimError::InvalidConfig(
                    "policy kind does not match scenario",
                ))
            }
        }
        let need = match &self.scenario {
            Scenario::Ss(_) => 4,
            Scenario::Mu(m) => m.k_flows(),
        };
        if self.alpha.len() != need {
            return Err(SimError::InvalidConfig("fraction vector length mismatch"));
        }
        if self.alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(SimError::InvalidConfig(
                "fraction components must lie in [0, 1]",
            ));
        }
        if self.horizon == 0 {
            return Err(SimError::InvalidConfig("horizon must be positive"));
        }
        if let ArrivalMode::Bernoulli(rates) = &self.arrival_mode {
            let queues = match &self.scenario {
                Scenario::Ss(_) => 2,
                Scenario::Mu(m) => m.total(),
            };
            if rates.len() != queues {
                return Err(SimError::InvalidConfig("one arrival rate per user queue"));
            }
            if rates.iter().any(|r| *r < 0.0) {
                return Err(SimError::InvalidConfig("arrival rates must be nonnegative"));
            }
        }
        if !(0.0..1.0).contains(&self.warmup) {
            return Err(SimError::InvalidConfig(
                "warmup fraction must lie in [0, 1)",
            ));
        }
        Ok(())
    }
}

/// Per-queue stability verdict from the backlog trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    /// Slope too close to the threshold; lengthen the horizon.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimOutcome {
    /// Mean departure rate per user queue, rate units.
    pub empirical_mu: Vec<f64>,
    /// Batch-means standard error of each `empirical_mu` entry.
    pub mu_std_err: Vec<f64>,
    /// Fraction of observed slots each relay buffer was empty.
    pub pi0_empirical: Vec<f64>,
    /// Batch-means standard error of each `pi0_empirical` entry.
    pub pi0_std_err: Vec<f64>,
    /// Backlog-slope verdict per queue: user queues then relay buffers.
    pub stability_verdicts: Vec<Verdict>,
    /// Backlog slopes matching `stability_verdicts`, packets per slot.
    pub backlog_slopes: Vec<f64>,
    pub final_backlogs: Vec<u64>,
    pub slots_observed: u64,
    /// `(slot, queue backlogs)` samples when tracing was requested.
    pub trace: Vec<(u64, Vec<u64>)>,
}

/// Streaming least-squares slope of a backlog series.
#[derive(Debug, Clone, Copy, Default)]
struct SlopeAcc {
    n: f64,
    st: f64,
    stt: f64,
    sx: f64,
    stx: f64,
}

impl SlopeAcc {
    fn push(&mut self, t: f64, x: f64) {
        self.n += 1.0;
        self.st += t;
        self.stt += t * t;
        self.sx += x;
        self.stx += t * x;
    }

    fn slope(&self) -> f64 {
        let den = self.n * self.stt - self.st * self.st;
        if den <= 0.0 {
            return 0.0;
        }
        (self.n * self.stx - self.st * self.sx) / den
    }
}

fn verdict_from_slope(slope: f64, theta: f64) -> Verdict {
    if slope < theta / 2.0 {
        Verdict::Stable
    } else if slope > 2.0 * theta {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    }
}

/// Batch-means accumulator: per-batch averages of a per-slot statistic,
/// reported as a mean and a standard error that honours the slot-to-slot
/// correlation of the queue process.
#[derive(Debug, Clone)]
struct BatchAcc {
    batch_size: u64,
    in_batch: u64,
    acc: f64,
    means: Vec<f64>,
}

impl BatchAcc {
    fn new(observed: u64, batches: u64) -> Self {
        Self {
            batch_size: (observed / batches).max(1),
            in_batch: 0,
            acc: 0.0,
            means: Vec::new(),
        }
    }

    fn push(&mut self, x: f64) {
        self.acc += x;
        self.in_batch += 1;
        if self.in_batch == self.batch_size {
            self.means.push(self.acc / self.batch_size as f64);
            self.acc = 0.0;
            self.in_batch = 0;
        }
    }

    fn mean(&self) -> f64 {
        if self.means.is_empty() {
            return 0.0;
        }
        self.means.iter().sum::<f64>() / self.means.len() as f64
    }

    fn std_err(&self) -> f64 {
        let b = self.means.len();
        if b < 2 {
            return f64::INFINITY;
        }
        let m = self.mean();
        let var = self.means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (b - 1) as f64;
        (var / b as f64).sqrt()
    }
}

/// Run one replication.
pub fn run(cfg: &SimConfig) -> Result<SimOutcome, SimError> {
    cfg.validate()?;
    match (&cfg.scenario, &cfg.policy) {
        (Scenario::Ss(sc), SimPolicy::Ss(policy)) => Ok(run_ss(cfg, sc, *policy)),
        (Scenario::Mu(sc), SimPolicy::Mu(policy)) => Ok(run_mu(cfg, sc, policy)),
        _ => unreachable!("validated above"),
    }
}

/// Run with the given arrival rates and return per-queue verdicts from
/// the backlog trend over the second half of the horizon.
pub fn stability_probe(
    cfg: &SimConfig,
    rates: &[f64],
    horizon: u64,
) -> Result<SimOutcome, SimError> {
    let mut probe = cfg.clone();
    probe.arrival_mode = ArrivalMode::Bernoulli(rates.to_vec());
    probe.horizon = horizon;
    run(&probe)
}

/// Categorical draw over M=3 SNR states from one uniform.
fn draw_state3(rng: &mut ChaCha8Rng, probs: &[f64]) -> usize {
    let x: f64 = rng.gen();
    if x < probs[0] {
        0
    } else if x < probs[0] + probs[1] {
        1
    } else {
        2
    }
}

/// Arrivals for one queue: a deterministic floor plus a Bernoulli
/// fractional unit, mean `rate_units` per slot.
fn draw_arrivals(rng: &mut ChaCha8Rng, rate_units: f64) -> u64 {
    let whole = rate_units.floor();
    let frac = rate_units - whole;
    whole as u64 + u64::from(rng.gen::<f64>() < frac)
}

fn run_ss(cfg: &SimConfig, sc: &SsScenario, policy: SsPolicy) -> SimOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = sc.k as u64;
    let order = policy.class_order();
    let full_buffer = cfg.coupling == Coupling::FullBuffer;
    let ps = sc.probs_s.as_slice();
    let pu = sc.probs_u.as_slice();
    let pd = sc.probs_d.as_slice();
    // arrival rates in r2-units per slot
    let unit_rates: Option<[f64; 2]> = match &cfg.arrival_mode {
        ArrivalMode::Saturated => None,
        ArrivalMode::Bernoulli(r) => Some([r[0] / sc.r2, r[1] / sc.r2]),
    };

    let warmup_slots = (cfg.horizon as f64 * cfg.warmup) as u64;
    let observed = cfg.horizon - warmup_slots;
    let mut dep_s = BatchAcc::new(observed, 100);
    let mut dep_u = BatchAcc::new(observed, 100);
    let mut empty = BatchAcc::new(observed, 100);
    let half = cfg.horizon / 2;
    let mut slopes = [SlopeAcc::default(); 3];
    let mut trace = Vec::new();

    let mut q_s: u64 = 0;
    let mut q_u: u64 = 0;
    let mut q_bs: u64 = 0;
    let mut fed_bs: u64 = 0;
    let mut sent_s: u64 = 0;

    for slot in 0..cfg.horizon {
        let s_state = draw_state3(&mut rng, ps);
        let u_state = draw_state3(&mut rng, pu);
        let d_state = draw_state3(&mut rng, pd);
        if let Some(rates) = unit_rates {
            q_s = q_s.saturating_add(draw_arrivals(&mut rng, rates[0]));
            q_u = q_u.saturating_add(draw_arrivals(&mut rng, rates[1]));
        }
        let in_warmup = slot < warmup_slots;
        if !in_warmup {
            empty.push(f64::from(u8::from(q_bs == 0 && !full_buffer)));
        }

        let batch = |state: usize| if state == 0 { k } else { 1 };
        let saturated = unit_rates.is_none();
        let s_able = s_state < 2 && (saturated || q_s >= batch(s_state));
        let u_able = u_state < 2 && (saturated || q_u >= batch(u_state));
        let d_able = d_state < 2 && (full_buffer || q_bs >= 1);
        // best able rate index of the relayed pair
        let pair_class = match (s_able, d_able) {
            (true, true) => Some(s_state.min(d_state)),
            (true, false) => Some(s_state),
            (false, true) => Some(d_state),
            (false, false) => None,
        };

        let mut winner: Option<(CommKind, usize)> = None;
        for class in order {
            match class.0 {
                CommKind::Ue2Ue => {
                    if pair_class == Some(class.1) {
                        winner = Some(class);
                        break;
                    }
                }
                CommKind::Ue2Bs => {
                    if u_able && u_state == class.1 {
                        winner = Some(class);
                        break;
                    }
                }
            }
        }

        let mut moved_s: u64 = 0;
        let mut moved_u: u64 = 0;
        match winner {
            Some((CommKind::Ue2Ue, _)) => {
                let uplink = if s_able && d_able {
                    let idx = s_state * 2 + d_state;
                    rng.gen::<f64>() < cfg.alpha[idx]
                } else {
                    s_able
                };
                if uplink {
                    let m = batch(s_state);
                    if !saturated {
                        q_s -= m;
                    }
                    if !full_buffer {
                        q_bs += m;
                        fed_bs += m;
                    }
                    moved_s = m;
                    sent_s += m;
                } else {
                    // Downlink slot: moves a full batch or nothing (the
                    // bounded-jump convention of the analytic chain).
                    let m = batch(d_state);
                    if full_buffer {
                        // phantom service, no queue to drain
                    } else if q_bs >= m {
                        q_bs -= m;
                    }
                }
            }
            Some((CommKind::Ue2Bs, _)) => {
                let m = batch(u_state);
                if !saturated {
                    q_u -= m;
                }
                moved_u = m;
            }
            None => {}
        }

        if !in_warmup {
            dep_s.push(moved_s as f64);
            dep_u.push(moved_u as f64);
        }
        if slot >= half {
            let t = (slot - half) as f64;
            slopes[0].push(t, q_s as f64);
            slopes[1].push(t, q_u as f64);
            slopes[2].push(t, q_bs as f64);
        }
        if let Some(stride) = cfg.trace_stride {
            if slot % stride == 0 {
                trace.push((slot, vec![q_s, q_u, q_bs]));
            }
        }
    }
    // relay conservation: the buffer received exactly what the source
    // sent, in integer units
    assert!(full_buffer || fed_bs == sent_s);

    let slopes: Vec<f64> = slopes.iter().map(SlopeAcc::slope).collect();
    SimOutcome {
        empirical_mu: vec![dep_s.mean() * sc.r2, dep_u.mean() * sc.r2],
        mu_std_err: vec![dep_s.std_err() * sc.r2, dep_u.std_err() * sc.r2],
        pi0_empirical: vec![empty.mean()],
        pi0_std_err: vec![empty.std_err()],
        stability_verdicts: slopes
            .iter()
            .map(|s| verdict_from_slope(*s, cfg.theta))
            .collect(),
        backlog_slopes: slopes,
        final_backlogs: vec![q_s, q_u, q_bs],
        slots_observed: observed,
        trace,
    }
}

fn run_mu(cfg: &SimConfig, sc: &MuScenario, policy: &MuPolicy) -> SimOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let k = sc.k_flows();
    let total = sc.total();
    let full_buffer = cfg.coupling == Coupling::FullBuffer;
    let unit_rates: Option<Vec<f64>> = match &cfg.arrival_mode {
        ArrivalMode::Saturated => None,
        ArrivalMode::Bernoulli(r) => Some(r.iter().map(|x| x / sc.r1).collect()),
    };

    let warmup_slots = (cfg.horizon as f64 * cfg.warmup) as u64;
    let observed = cfg.horizon - warmup_slots;
    let mut deps: Vec<BatchAcc> = (0..total).map(|_| BatchAcc::new(observed, 100)).collect();
    let mut empties: Vec<BatchAcc> = (0..k).map(|_| BatchAcc::new(observed, 100)).collect();
    let half = cfg.horizon / 2;
    let mut slopes = vec![SlopeAcc::default(); total + k];
    let mut trace = Vec::new();

    let mut q_user: Vec<u64> = vec![0; total];
    let mut q_bs: Vec<u64> = vec![0; k];
    let mut fed_bs: Vec<u64> = vec![0; k];
    let mut sent: Vec<u64> = vec![0; k];
    let mut ul_success = vec![false; k];
    let mut dl_success = vec![false; k];
    let mut bs_success = vec![false; total - k];

    for slot in 0..cfg.horizon {
        for (i, (ul, dl)) in ul_success.iter_mut().zip(&mut dl_success).enumerate() {
            *ul = rng.gen::<f64>() < sc.p_s[i];
            *dl = rng.gen::<f64>() < sc.p_d[i];
        }
        for (j, bs) in bs_success.iter_mut().enumerate() {
            *bs = rng.gen::<f64>() < sc.p_u[j];
        }
        if let Some(rates) = &unit_rates {
            for (q, rate) in q_user.iter_mut().zip(rates) {
                *q = q.saturating_add(draw_arrivals(&mut rng, *rate));
            }
        }
        let in_warmup = slot < warmup_slots;
        if !in_warmup {
            for (i, acc) in empties.iter_mut().enumerate() {
                acc.push(f64::from(u8::from(q_bs[i] == 0 && !full_buffer)));
            }
        }

        let saturated = unit_rates.is_none();
        let mut moved = vec![0u64; total];
        for &comm in policy.order() {
            if comm < k {
                let ul = ul_success[comm] && (saturated || q_user[comm] >= 1);
                let dl = dl_success[comm] && (full_buffer || q_bs[comm] >= 1);
                if !(ul || dl) {
                    continue;
                }
                let uplink = if ul && dl {
                    rng.gen::<f64>() < cfg.alpha[comm]
                } else {
                    ul
                };
                if uplink {
                    if !saturated {
                        q_user[comm] -= 1;
                    }
                    if !full_buffer {
                        q_bs[comm] += 1;
                        fed_bs[comm] += 1;
                    }
                    moved[comm] = 1;
                    sent[comm] += 1;
                } else if !full_buffer {
                    q_bs[comm] -= 1;
                }
            } else {
                if !(bs_success[comm - k] && (saturated || q_user[comm] >= 1)) {
                    continue;
                }
                if !saturated {
                    q_user[comm] -= 1;
                }
                moved[comm] = 1;
            }
            break; // exactly one transmission per slot
        }

        if !in_warmup {
            for (acc, m) in deps.iter_mut().zip(&moved) {
                acc.push(*m as f64);
            }
        }
        if slot >= half {
            let t = (slot - half) as f64;
            for (i, q) in q_user.iter().enumerate() {
                slopes[i].push(t, *q as f64);
            }
            for (i, q) in q_bs.iter().enumerate() {
                slopes[total + i].push(t, *q as f64);
            }
        }
        if let Some(stride) = cfg.trace_stride {
            if slot % stride == 0 {
                let mut row = q_user.clone();
                row.extend_from_slice(&q_bs);
                trace.push((slot, row));
            }
        }
    }

    assert!(full_buffer || fed_bs == sent); // per-flow relay conservation

    let slopes: Vec<f64> = slopes.iter().map(SlopeAcc::slope).collect();
    let mut final_backlogs = q_user;
    final_backlogs.extend_from_slice(&q_bs);
    SimOutcome {
        empirical_mu: deps.iter().map(|d| d.mean() * sc.r1).collect(),
        mu_std_err: deps.iter().map(|d| d.std_err() * sc.r1).collect(),
        pi0_empirical: empties.iter().map(BatchAcc::mean).collect(),
        pi0_std_err: empties.iter().map(BatchAcc::std_err).collect(),
        stability_verdicts: slopes
            .iter()
            .map(|s| verdict_from_slope(*s, cfg.theta))
            .collect(),
        backlog_slopes: slopes,
        final_backlogs,
        slots_observed: observed,
        trace,
    }
}
