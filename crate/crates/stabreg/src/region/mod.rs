//! Stability-region construction: vertex sets with generating labels,
//! and the runtime registry of interchangeable construction strategies.

pub mod mu;
pub mod ss;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polytope::CoSet;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Mu(#[from] mu::MuError),
    #[error("builder `{mode}` does not support this scenario")]
    UnsupportedScenario { mode: String },
    #[error("unknown region mode `{0}`")]
    UnknownMode(String),
    #[error("grid resolution must be at least 2, got {0}")]
    GridTooCoarse(usize),
}

/// Which construction produced a vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexLabel {
    /// Policy identifier: `G<i>` for the three-user corner policies, or
    /// the priority order `i0>i1>...` for multi-user policies.
    pub policy: String,
    /// Fraction-vector components used at this vertex.
    pub alpha: Vec<f64>,
}

/// A stability region as the downward-closed sub-convex hull of labeled
/// generator vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionVertexSet {
    pub vertices: Vec<(Vec<f64>, VertexLabel)>,
    pub dim: usize,
}

impl RegionVertexSet {
    pub fn new(dim: usize) -> Self {
        Self {
            vertices: Vec::new(),
            dim,
        }
    }

    pub fn push(&mut self, point: Vec<f64>, label: VertexLabel) {
        debug_assert_eq!(point.len(), self.dim);
        self.vertices.push((point, label));
    }

    pub fn co_set(&self) -> CoSet {
        CoSet::new(self.vertices.iter().map(|(p, _)| p.clone()).collect())
    }

    /// Drop dominated and hull-interior vertices, keeping one label per
    /// surviving point.
    pub fn reduced(&self) -> RegionVertexSet {
        let kept = self.co_set().reduce();
        let mut out = RegionVertexSet::new(self.dim);
        for g in kept.generators() {
            if let Some((p, l)) = self.vertices.iter().find(|(p, _)| p == g) {
                out.push(p.clone(), l.clone());
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Scenario accepted by the region builders.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Ss(crate::ss::SsScenario),
    Mu(mu::MuScenario),
}

/// Options shared by the builders; unused fields are ignored by builders
/// that do not need them.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildOpts {
    /// Grid resolution per fraction dimension for exact sweeps.
    pub grid: usize,
    /// Precision target of the epsilon-approximation (rate units).
    pub epsilon: f64,
    /// Budget on `policies x fraction points` for guarded sweeps.
    pub eval_budget: u128,
}

impl Default for BuildOpts {
    fn default() -> Self {
        Self {
            grid: 64,
            epsilon: 0.1,
            eval_budget: 10_000_000,
        }
    }
}

/// Summary a builder reports next to its vertex set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub policies_evaluated: u128,
    pub points_evaluated: u128,
    pub points_skipped_unstable: u128,
    /// Depth cutoff used by the epsilon construction, when applicable.
    pub prefix_depth: Option<usize>,
    /// Fraction combinations per policy (the `2^K`-style factor).
    pub alpha_combinations: u128,
}

/// One region-construction strategy, selected by name at runtime.
pub trait RegionBuilder: Sync + Send {
    /// Registry key (`exact`, `approx`, `reduced`, `epsilon`).
    fn name(&self) -> &'static str;
    fn supports(&self, scenario: &Scenario) -> bool;
    fn build(
        &self,
        scenario: &Scenario,
        opts: &BuildOpts,
    ) -> Result<(RegionVertexSet, BuildStats), RegionError>;
}

struct SsExactBuilder;
struct SsApproxBuilder;
struct MuExactBuilder;
struct MuBorderBuilder;
struct MuEpsilonBuilder;

impl RegionBuilder for SsExactBuilder {
    fn name(&self) -> &'static str {
        "exact"
    }
    fn supports(&self, s: &Scenario) -> bool {
        matches!(s, Scenario::Ss(_))
    }
    fn build(
        &self,
        scenario: &Scenario,
        opts: &BuildOpts,
    ) -> Result<(RegionVertexSet, BuildStats), RegionError> {
        match scenario {
            Scenario::Ss(sc) => ss::exact_region(sc, opts.grid),
            _ => Err(RegionError::UnsupportedScenario {
                mode: self.name().into(),
            }),
        }
    }
}

impl RegionBuilder for SsApproxBuilder {
    fn name(&self) -> &'static str {
        "approx"
    }
    fn supports(&self, s: &Scenario) -> bool {
        matches!(s, Scenario::Ss(_))
    }
    fn build(
        &self,
        scenario: &Scenario,
        _opts: &BuildOpts,
    ) -> Result<(RegionVertexSet, BuildStats), RegionError> {
        match scenario {
            Scenario::Ss(sc) => Ok(ss::approx_region(sc)),
            _ => Err(RegionError::UnsupportedScenario {
                mode: self.name().into(),
            }),
        }
    }
}

impl RegionBuilder for MuExactBuilder {
    fn name(&self) -> &'static str {
        "exact"
    }
    fn supports(&self, s: &Scenario) -> bool {
        matches!(s, Scenario::Mu(_))
    }
    fn build(
        &self,
        scenario: &Scenario,
        opts: &BuildOpts,
    ) -> Result<(RegionVertexSet, BuildStats), RegionError> {
        match scenario {
            Scenario::Mu(sc) => Ok(mu::exact_region(sc, opts.grid, opts.eval_budget)?),
            _ => Err(RegionError::UnsupportedScenario {
                mode: self.name().into(),
            }),
        }
    }
}

impl RegionBuilder for MuBorderBuilder {
    fn name(&self) -> &'static str {
        "reduced"
    }
    fn supports(&self, s: &Scenario) -> bool {
        matches!(s, Scenario::Mu(_))
    }
    fn build(
        &self,
        scenario: &Scenario,
        opts: &BuildOpts,
    ) -> Result<(RegionVertexSet, BuildStats), RegionError> {
        match scenario {
            Scenario::Mu(sc) => Ok(mu::reduced_region(sc, opts.eval_budget)?),
            _ => Err(RegionError::UnsupportedScenario {
                mode: self.name().into(),
            }),
        }
    }
}

impl RegionBuilder for MuEpsilonBuilder {
    fn name(&self) -> &'static str {
        "epsilon"
    }
    fn supports(&self, s: &Scenario) -> bool {
        matches!(s, Scenario::Mu(m) if m.symmetric().is_some())
    }
    fn build(
        &self,
        scenario: &Scenario,
        opts: &BuildOpts,
    ) -> Result<(RegionVertexSet, BuildStats), RegionError> {
        match scenario {
            Scenario::Mu(sc) => Ok(mu::epsilon_region(sc, opts.epsilon)?),
            _ => Err(RegionError::UnsupportedScenario {
                mode: self.name().into(),
            }),
        }
    }
}

/// All registered construction strategies.
pub fn builtin_builders() -> Vec<Box<dyn RegionBuilder>> {
    vec![
        Box::new(SsExactBuilder),
        Box::new(SsApproxBuilder),
        Box::new(MuExactBuilder),
        Box::new(MuBorderBuilder),
        Box::new(MuEpsilonBuilder),
    ]
}

/// Look up the builder handling `mode` for the given scenario.
pub fn builder_for(mode: &str, scenario: &Scenario) -> Result<Box<dyn RegionBuilder>, RegionError> {
    let mut saw_name = false;
    for b in builtin_builders() {
        if b.name() == mode {
            saw_name = true;
            if b.supports(scenario) {
                return Ok(b);
            }
        }
    }
    if saw_name {
        Err(RegionError::UnsupportedScenario { mode: mode.into() })
    } else {
        Err(RegionError::UnknownMode(mode.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkStateProbs;

    fn ss_scenario() -> Scenario {
        Scenario::Ss(crate::ss::SsScenario {
            probs_s: LinkStateProbs::new(vec![0.5, 0.3, 0.2]).unwrap(),
            probs_u: LinkStateProbs::new(vec![0.6, 0.1, 0.3]).unwrap(),
            probs_d: LinkStateProbs::new(vec![0.4, 0.35, 0.25]).unwrap(),
            r2: 200.0,
            k: 2,
        })
    }

    #[test]
    fn registry_dispatches_by_mode_and_scenario() {
        let sc = ss_scenario();
        assert!(builder_for("exact", &sc).is_ok());
        assert!(builder_for("approx", &sc).is_ok());
        assert!(matches!(
            builder_for("reduced", &sc),
            Err(RegionError::UnsupportedScenario { .. })
        ));
        assert!(matches!(
            builder_for("nope", &sc),
            Err(RegionError::UnknownMode(_))
        ));
    }
}
