//! Scenario configuration document: TOML with fixed sections and strict
//! key checking (unknown keys are rejected with their location).

use serde::{Deserialize, Serialize};

use stabreg::channel::{state_probabilities, LinkGeometry, RadioConfig};
use stabreg::policy::{MuPolicy, SsPolicy};
use stabreg::region::mu::MuScenario;
use stabreg::region::Scenario;
use stabreg::sim::Coupling;
use stabreg::ss::SsScenario;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub radio: RadioSection,
    pub geometry: GeometrySection,
    pub rates: RatesSection,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub simulate: Option<SimulateSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub ul_power_w: f64,
    pub dl_power_w: f64,
    pub ul_noise_density_dbhz: f64,
    pub dl_noise_density_dbhz: f64,
    pub rb_bandwidth_hz: f64,
    pub pathloss_exponent: f64,
    #[serde(default)]
    pub pathloss_offset_db: f64,
    pub ul_thresholds_db: Vec<f64>,
    pub dl_thresholds_db: Vec<f64>,
}

/// Either one symmetric distance, per-UE distances (three-user case), or
/// per-flow distance lists (multi-user case).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub symmetric_distance_m: Option<f64>,
    pub source_m: Option<f64>,
    pub uplink_ue_m: Option<f64>,
    pub destination_m: Option<f64>,
    pub flow_source_m: Option<Vec<f64>>,
    pub flow_destination_m: Option<Vec<f64>>,
    pub uplink_ue_m_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesSection {
    /// Base rate `r2` for the three-user scenario (rate units per RB).
    pub r2: Option<f64>,
    /// Integer rate ratio `r1 = k r2` (three-user scenario).
    pub k: Option<u32>,
    /// Single nonzero rate of the multi-user scenario.
    pub r1: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub k_flows: usize,
    #[serde(default)]
    pub u_flows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Ss,
    Mu,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub grid: usize,
    pub epsilon: f64,
    pub horizon: u64,
    pub seeds: Vec<u64>,
    pub eval_budget: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            grid: 16,
            epsilon: 0.1,
            horizon: 1_000_000,
            seeds: vec![1],
            eval_budget: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsSection {
    pub dir: String,
    pub emit_trace: bool,
    pub trace_stride: u64,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            emit_trace: false,
            trace_stride: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// `G1`..`G6` for the three-user scenario, a `>`-separated priority
    /// order for the multi-user scenario.
    pub policy: String,
    pub alpha: Vec<f64>,
    #[serde(default = "default_couplings")]
    pub coupling: Vec<Coupling>,
    /// Probe arrival vectors at these multiples of the analytic rates.
    #[serde(default)]
    pub probe_scales: Vec<f64>,
    /// Fail the command (nonzero exit) when a probe verdict disagrees
    /// with its scale (< 1 stable, > 1 unstable).
    #[serde(default)]
    pub assert_probe_verdicts: bool,
}

fn default_couplings() -> Vec<Coupling> {
    vec![Coupling::Relayed]
}

impl ScenarioDoc {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let doc: ScenarioDoc = toml::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    fn radio_config(&self) -> RadioConfig {
        RadioConfig {
            ul_power_w: self.radio.ul_power_w,
            dl_power_w: self.radio.dl_power_w,
            ul_noise_density_dbhz: self.radio.ul_noise_density_dbhz,
            dl_noise_density_dbhz: self.radio.dl_noise_density_dbhz,
            rb_bandwidth_hz: self.radio.rb_bandwidth_hz,
            pathloss_exponent: self.radio.pathloss_exponent,
            pathloss_offset_db: self.radio.pathloss_offset_db,
            ul_thresholds_db: self.radio.ul_thresholds_db.clone(),
            dl_thresholds_db: self.radio.dl_thresholds_db.clone(),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.radio_config().validate()?;
        self.scenario_instance()?;
        Ok(())
    }

    /// Build the scenario the document describes.
    pub fn scenario_instance(&self) -> anyhow::Result<Scenario> {
        let cfg = self.radio_config();
        let g = &self.geometry;
        match self.scenario.kind {
            ScenarioKind::Ss => {
                let (d_s, d_u, d_d) = match (g.symmetric_distance_m, g.source_m) {
                    (Some(d), None) => (d, d, d),
                    (None, Some(s)) => (
                        s,
                        g.uplink_ue_m
                            .ok_or_else(|| anyhow::anyhow!("geometry: uplink_ue_m missing"))?,
                        g.destination_m
                            .ok_or_else(|| anyhow::anyhow!("geometry: destination_m missing"))?,
                    ),
                    _ => anyhow::bail!(
                        "geometry: give either symmetric_distance_m or per-UE distances"
                    ),
                };
                let r2 = self
                    .rates
                    .r2
                    .ok_or_else(|| anyhow::anyhow!("rates.r2 missing"))?;
                let k = self
                    .rates
                    .k
                    .ok_or_else(|| anyhow::anyhow!("rates.k missing"))?;
                anyhow::ensure!(k >= 1, "rates.k must be at least 1");
                Ok(Scenario::Ss(SsScenario {
                    probs_s: state_probabilities(&LinkGeometry::uplink(d_s), &cfg, 3)?,
                    probs_u: state_probabilities(&LinkGeometry::uplink(d_u), &cfg, 3)?,
                    probs_d: state_probabilities(&LinkGeometry::downlink(d_d), &cfg, 3)?,
                    r2,
                    k,
                }))
            }
            ScenarioKind::Mu => {
                let r1 = self
                    .rates
                    .r1
                    .ok_or_else(|| anyhow::anyhow!("rates.r1 missing"))?;
                let (k_flows, u_flows) = (self.scenario.k_flows, self.scenario.u_flows);
                anyhow::ensure!(
                    k_flows + u_flows >= 1,
                    "scenario: need k_flows + u_flows >= 1"
                );
                let p1 = |d: f64, geom: fn(f64) -> LinkGeometry| -> anyhow::Result<f64> {
                    Ok(state_probabilities(&geom(d), &cfg, 2)?.state(1))
                };
                let sc = if let Some(d) = g.symmetric_distance_m {
                    let ps = p1(d, LinkGeometry::uplink)?;
                    let pd = p1(d, LinkGeometry::downlink)?;
                    MuScenario {
                        p_s: vec![ps; k_flows],
                        p_d: vec![pd; k_flows],
                        p_u: vec![ps; u_flows],
                        r1,
                    }
                } else {
                    let src = g
                        .flow_source_m
                        .as_ref()
                        .ok_or_else(|| anyhow::anyhow!("geometry: flow_source_m missing"))?;
                    let dst = g
                        .flow_destination_m
                        .as_ref()
                        .ok_or_else(|| anyhow::anyhow!("geometry: flow_destination_m missing"))?;
                    let ups = g.uplink_ue_m_list.clone().unwrap_or_default();
                    anyhow::ensure!(
                        src.len() == k_flows && dst.len() == k_flows && ups.len() == u_flows,
                        "geometry: distance lists must match k_flows/u_flows"
                    );
                    MuScenario {
                        p_s: src
                            .iter()
                            .map(|&d| p1(d, LinkGeometry::uplink))
                            .collect::<Result<_, _>>()?,
                        p_d: dst
                            .iter()
                            .map(|&d| p1(d, LinkGeometry::downlink))
                            .collect::<Result<_, _>>()?,
                        p_u: ups
                            .iter()
                            .map(|&d| p1(d, LinkGeometry::uplink))
                            .collect::<Result<_, _>>()?,
                        r1,
                    }
                };
                sc.validate()?;
                Ok(Scenario::Mu(sc))
            }
        }
    }

    /// Parse the `[simulate]` policy string against the scenario kind.
    pub fn sim_policy(&self, scenario: &Scenario) -> anyhow::Result<stabreg::sim::SimPolicy> {
        let section = self
            .simulate
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("[simulate] section missing"))?;
        match scenario {
            Scenario::Ss(_) => {
                let text = section.policy.trim();
                let idx: usize = text
                    .strip_prefix('G')
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| anyhow::anyhow!("simulate.policy must be G1..G6"))?;
                let policy = SsPolicy::from_index(idx)
                    .ok_or_else(|| anyhow::anyhow!("simulate.policy must be G1..G6"))?;
                Ok(stabreg::sim::SimPolicy::Ss(policy))
            }
            Scenario::Mu(m) => {
                let order: Vec<usize> = section
                    .policy
                    .split('>')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| anyhow::anyhow!("simulate.policy must be like 0>2>1"))?;
                Ok(stabreg::sim::SimPolicy::Mu(MuPolicy::new(
                    order,
                    m.total(),
                )?))
            }
        }
    }
}
