//! Experiment configuration: one TOML file per experiment, so a run's
//! provenance is a small diff-able text file. Unknown keys are schema
//! violations, not warnings.

use serde::{Deserialize, Serialize};

use lieblab::inversion::InversionConfig;
use lieblab::lattice::{LatticeSystem, PotentialField, Topology};
use lieblab::lieb::LiebConfig;
use lieblab::operators::InteractionSpec;
use lieblab::{LabError, Result};

/// Which experiment the runner executes on the configured system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Canonical response kernel plus its spectral decomposition.
    KernelDiagnostics,
    /// Random-perturbation statistics of the quadratic ensemble term.
    DegenerateCancellation,
    /// Finite-difference remainder table against the kernel prediction.
    RemainderScan,
    /// Potential -> density -> potential recovery with full traces.
    InversionRoundtrip,
    /// Tightening-schedule probe of a target density.
    RepresentabilityProbe,
    /// Kernel condition ratios along a family of rings.
    ConditioningSweep,
    /// Dual identity and energy decomposition on random draws.
    LiebIdentity,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Experiment name; becomes the output subdirectory.
    pub name: String,
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    /// Lattice under study. The conditioning sweep builds its own family
    /// and ignores this section.
    pub system: Option<SystemSection>,
    #[serde(default)]
    pub hamiltonian: HamiltonianSection,
    /// Target density for inversion-type scenarios.
    pub target: Option<TargetSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyName {
    Ring,
    Chain,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub sites: usize,
    pub topology: TopologyName,
    #[serde(default = "one")]
    pub spacing: f64,
    pub particles: usize,
}

impl SystemSection {
    pub fn build(&self) -> Result<LatticeSystem> {
        let topology = match self.topology {
            TopologyName::Ring => Topology::Ring,
            TopologyName::Chain => Topology::OpenChain,
        };
        LatticeSystem::new(self.sites, topology, self.spacing, self.particles)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    #[serde(default = "one")]
    pub hopping: f64,
    pub potential: Option<PotentialSection>,
    pub interaction: Option<InteractionSection>,
}

impl Default for HamiltonianSection {
    fn default() -> Self {
        HamiltonianSection {
            hopping: 1.0,
            potential: None,
            interaction: None,
        }
    }
}

/// External potential, given inline or as a named shape.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub values: Option<Vec<f64>>,
    /// "zero" or "ramp" (symmetric linear ramp spanning [-0.3, 0.3]).
    pub shape: Option<String>,
}

impl PotentialSection {
    pub fn build(&self, system: &LatticeSystem) -> Result<PotentialField> {
        let l = system.sites();
        match (&self.values, &self.shape) {
            (Some(v), None) => {
                if v.len() != l {
                    return Err(LabError::validation(format!(
                        "potential has {} entries, lattice has {l} sites",
                        v.len()
                    )));
                }
                Ok(PotentialField::raw(v.clone()))
            }
            (None, Some(shape)) => match shape.as_str() {
                "zero" => Ok(PotentialField::raw(vec![0.0; l])),
                "ramp" => Ok(PotentialField::raw(
                    (0..l)
                        .map(|i| 0.6 * (i as f64 / (l - 1) as f64) - 0.3)
                        .collect(),
                )),
                other => Err(LabError::validation(format!(
                    "unknown potential shape {other:?}; expected \"zero\" or \"ramp\""
                ))),
            },
            _ => Err(LabError::validation(
                "potential needs exactly one of `values` or `shape`",
            )),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKindName {
    None,
    NearestNeighbor,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSection {
    pub kind: InteractionKindName,
    /// Coupling strength. The lieb_identity scenario treats an absent
    /// strength as "draw one per sample".
    pub strength: Option<f64>,
}

impl InteractionSection {
    pub fn build(&self, system: &LatticeSystem) -> Result<Option<InteractionSpec>> {
        match self.kind {
            InteractionKindName::None => Ok(None),
            InteractionKindName::NearestNeighbor => Ok(Some(InteractionSpec::nearest_neighbor(
                system,
                self.strength.unwrap_or(1.0),
            ))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    /// Site density, weighted sum must equal the particle count.
    pub density: Vec<f64>,
}

/// Optional overrides for solver tolerances; unset keys keep the library
/// defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub residual_tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub step_damping: Option<f64>,
    pub dual_tolerance: Option<f64>,
    pub warmup_iterations: Option<usize>,
    pub refine_iterations: Option<usize>,
}

impl Tolerances {
    pub fn inversion_config(&self, hopping: f64) -> InversionConfig {
        let mut cfg = InversionConfig {
            hopping,
            ..InversionConfig::default()
        };
        if let Some(t) = self.residual_tol {
            cfg.residual_tol = t;
        }
        if let Some(m) = self.max_iterations {
            cfg.max_iterations = m;
        }
        if let Some(d) = self.step_damping {
            cfg.step_damping = d;
        }
        cfg
    }

    pub fn lieb_config(&self, hopping: f64) -> LiebConfig {
        let mut cfg = LiebConfig {
            hopping,
            ..LiebConfig::default()
        };
        if let Some(t) = self.dual_tolerance {
            cfg.tolerance = t;
        }
        if let Some(w) = self.warmup_iterations {
            cfg.warmup_iterations = w;
        }
        if let Some(r) = self.refine_iterations {
            cfg.max_refine_iterations = r;
        }
        cfg
    }
}

/// Scenario knobs. Each scenario reads the keys it understands and leaves
/// the rest at their defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Random draw count for sampling scenarios.
    pub draws: Option<usize>,
    /// Ensemble weights for the visible half of the cancellation scenario.
    pub unequal_weights: Option<Vec<f64>>,
    /// Strictly descending positive step sizes or stage tolerances.
    pub epsilons: Option<Vec<f64>>,
    /// Explicit perturbation direction for the remainder scan.
    pub perturbation: Option<Vec<f64>>,
    /// Ring sizes for the conditioning sweep.
    pub ring_sizes: Option<Vec<usize>>,
    /// Sup-norm scale of random potential draws.
    pub amplitude: Option<f64>,
    /// Upper end of the random interaction-strength range.
    pub u_max: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Base directory for result files; the `--out` flag takes precedence.
    pub dir: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| LabError::validation(format!("config does not match schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(LabError::validation("experiment name must not be empty"));
        }
        let ok = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '-';
        if !self.name.chars().all(ok) {
            return Err(LabError::validation(format!(
                "experiment name {:?} may only contain alphanumerics, '_' and '-'",
                self.name
            )));
        }
        Ok(())
    }

    /// The lattice section, or a validation error naming the scenario that
    /// needed it.
    pub fn require_system(&self) -> Result<LatticeSystem> {
        match &self.system {
            Some(s) => s.build(),
            None => Err(LabError::validation(
                "this scenario needs a [system] section",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
scenario = "kernel_diagnostics"

[system]
sites = 4
topology = "ring"
particles = 1
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.name, "demo");
        assert_eq!(cfg.scenario, Scenario::KernelDiagnostics);
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.hamiltonian.hopping, 1.0);
        let system = cfg.require_system().unwrap();
        assert_eq!(system.sites(), 4);
        assert_eq!(system.spacing(), 1.0);
    }

    #[test]
    fn unknown_keys_are_schema_violations() {
        let text = format!("{MINIMAL}\nsurprise = 1\n");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(matches!(err, LabError::Validation(_)), "{err}");
    }

    #[test]
    fn bad_names_are_rejected() {
        let text = MINIMAL.replace("\"demo\"", "\"../escape\"");
        assert!(ExperimentConfig::parse(&text).is_err());
    }

    #[test]
    fn potential_requires_exactly_one_form() {
        let system = LatticeSystem::unit(4, Topology::Ring, 1).unwrap();
        let both = PotentialSection {
            values: Some(vec![0.0; 4]),
            shape: Some("zero".into()),
        };
        assert!(both.build(&system).is_err());
        let neither = PotentialSection {
            values: None,
            shape: None,
        };
        assert!(neither.build(&system).is_err());
        let ramp = PotentialSection {
            values: None,
            shape: Some("ramp".into()),
        };
        let v = ramp.build(&system).unwrap();
        assert_eq!(v.values()[0], -0.3);
        assert_eq!(v.values()[3], 0.3);
    }

    #[test]
    fn tolerance_overrides_reach_the_solver_configs() {
        let text = format!(
            "{MINIMAL}\n[tolerances]\nresidual_tol = 1e-8\nmax_iterations = 50\ndual_tolerance = 1e-7\n"
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let inv = cfg.tolerances.inversion_config(2.0);
        assert_eq!(inv.hopping, 2.0);
        assert_eq!(inv.residual_tol, 1e-8);
        assert_eq!(inv.max_iterations, 50);
        assert_eq!(inv.step_damping, 1.0);
        let lieb = cfg.tolerances.lieb_config(2.0);
        assert_eq!(lieb.tolerance, 1e-7);
        assert_eq!(lieb.warmup_iterations, 40);
    }
}
