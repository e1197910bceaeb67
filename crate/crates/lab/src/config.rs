//! Scenario configuration: TOML with dotted sections, validated and
//! stamped with a 64-bit FNV-1a hash of its canonical text.

use std::fmt;
use std::hash::Hasher;
use std::path::Path;
use std::str::FromStr;

use fnv::FnvHasher;
use mfselect_core::numerics::Vector;
use mfselect_core::potentials::{InitialLaw, ModelFamily, ModelOptions, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    #[serde(rename = "custom")]
    Custom,
}

impl ScenarioId {
    /// Scenarios whose verdicts are Monte Carlo statements.
    pub fn is_statistical(self) -> bool {
        !matches!(self, ScenarioId::E6)
    }

    pub fn uses_eps(self) -> bool {
        self == ScenarioId::E5
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioId::E1 => "E1",
            ScenarioId::E2 => "E2",
            ScenarioId::E3 => "E3",
            ScenarioId::E4 => "E4",
            ScenarioId::E5 => "E5",
            ScenarioId::E6 => "E6",
            ScenarioId::Custom => "custom",
        };
        f.write_str(s)
    }
}

impl FromStr for ScenarioId {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "E1" => ScenarioId::E1,
            "E2" => ScenarioId::E2,
            "E3" => ScenarioId::E3,
            "E4" => ScenarioId::E4,
            "E5" => ScenarioId::E5,
            "E6" => ScenarioId::E6,
            "CUSTOM" => ScenarioId::Custom,
            _ => return Err(LabError::Config(format!("unknown scenario id {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: ScenarioId,
    #[serde(default)]
    pub seed: u64,
    /// Monte Carlo paths per sweep value.
    pub paths: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Catalogue name, e.g. `logcosh(4)`, `quadratic(1)`, `delarue(0.1)`,
    /// `radial_logcosh(4,2)`.
    pub family: String,
    #[serde(default)]
    pub drift: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default = "origin")]
    pub nu0: Vec<f64>,
    /// `gaussian` or `dirac`.
    #[serde(default = "gaussian")]
    pub initial: String,
    #[serde(default = "one")]
    pub initial_std: f64,
    #[serde(default = "six")]
    pub initial_cutoff: f64,
}

fn one() -> f64 {
    1.0
}

fn six() -> f64 {
    6.0
}

fn origin() -> Vec<f64> {
    vec![0.0]
}

fn gaussian() -> String {
    "gaussian".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Domain half-width; omitted means the model's a-priori bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    pub spacing: f64,
    /// Cap on stored time levels of a field.
    pub max_levels: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { half_width: None, spacing: 0.02, max_levels: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub steps: usize,
    pub record_every: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self { steps: 1000, record_every: 10 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
}

/// Verdict thresholds and scenario-specific probe settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Width of the binomial sign band in standard deviations.
    pub band_sigmas: f64,
    /// E1: bound on `sup_t E|m^N_t − m̂_t|` at the largest N.
    pub mean_error: f64,
    /// E1: bound on the noiseless deterministic error.
    pub limit_error: f64,
    /// E1: also run the symmetric `ν0 = 0` mean check.
    pub symmetry_check: bool,
    /// E2/E3: N values over which W1 must decrease strictly (empty: all).
    pub trend_n: Vec<usize>,
    /// E3: closed-form trajectory tolerance.
    pub closed_form_error: f64,
    /// E4: Kuiper level and the N it applies to (0: every N).
    pub kuiper_alpha: f64,
    pub kuiper_n: usize,
    /// E4: tolerance on the median radius and the N it applies to.
    pub radius_tolerance: f64,
    pub radius_n: usize,
    /// E5: off-centre start for the variance trend.
    pub offcentre: f64,
    /// E6: probe point and gap tolerance at the largest N.
    pub probe: f64,
    pub gap_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            band_sigmas: 3.0,
            mean_error: 5e-2,
            limit_error: 2e-2,
            symmetry_check: true,
            trend_n: Vec::new(),
            closed_form_error: 1e-3,
            kuiper_alpha: 0.01,
            kuiper_n: 0,
            radius_tolerance: 0.1,
            radius_n: 0,
            offcentre: 0.5,
            probe: 0.5,
            gap_tolerance: 5e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let cfg: Self = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical text: fields in declaration order, output directory dropped.
    pub fn canonical(&self) -> String {
        let mut c = self.clone();
        c.scenario.out_dir = None;
        toml::to_string(&c).expect("config serializes")
    }

    pub fn hash(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(self.canonical().as_bytes());
        h.finish()
    }

    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash())
    }

    pub fn family(&self) -> Result<ModelFamily, LabError> {
        Ok(ModelFamily::parse(&self.model.family)?)
    }

    pub fn model_options(&self) -> Result<ModelOptions, LabError> {
        let initial = match self.model.initial.as_str() {
            "gaussian" => InitialLaw::Gaussian { std: self.model.initial_std, cutoff: self.model.initial_cutoff },
            "dirac" => InitialLaw::Dirac,
            other => return Err(LabError::Config(format!("initial law must be gaussian or dirac, got {other:?}"))),
        };
        Ok(ModelOptions {
            drift: self.model.drift,
            sigma: self.model.sigma,
            horizon: self.model.horizon,
            nu0: self.model.nu0.clone(),
            initial,
        })
    }

    pub fn spec(&self) -> Result<ModelSpec, LabError> {
        Ok(self.family()?.build(&self.model_options()?)?)
    }

    /// Model with a different starting mean.
    pub fn spec_at(&self, nu0: f64) -> Result<ModelSpec, LabError> {
        let spec = self.spec()?;
        let d = spec.dim();
        Ok(spec.with_nu0(Vector::from_element(d, nu0)))
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let id = self.scenario.id;
        let spec = self.spec()?;
        if spec.dim() > 2 {
            return Err(LabError::Config("dimension 3 and above is not supported".into()));
        }
        if id.is_statistical() && self.scenario.paths < 100 {
            return Err(LabError::Config(format!(
                "statistical scenarios need at least 100 paths, got {}",
                self.scenario.paths
            )));
        }
        if self.scenario.paths == 0 {
            return Err(LabError::Config("paths must be positive".into()));
        }
        if self.simulation.steps == 0 || self.simulation.record_every == 0 {
            return Err(LabError::Config("simulation steps and record_every must be positive".into()));
        }
        if !(self.grid.spacing > 0.0) || self.grid.max_levels == 0 {
            return Err(LabError::Config("grid spacing and max_levels must be positive".into()));
        }
        if id.uses_eps() {
            if self.sweep.eps.is_empty() || !self.sweep.n.is_empty() {
                return Err(LabError::Config(format!("{id} sweeps eps values only")));
            }
            if self.sweep.eps.iter().any(|e| !(*e > 0.0)) {
                return Err(LabError::Config("eps values must be positive".into()));
            }
            if self.sweep.eps.windows(2).any(|w| w[1] >= w[0]) {
                return Err(LabError::Config("eps values must be strictly decreasing".into()));
            }
        } else {
            if self.sweep.n.is_empty() || !self.sweep.eps.is_empty() {
                return Err(LabError::Config(format!("{id} sweeps N values only")));
            }
            if self.sweep.n[0] == 0 || self.sweep.n.windows(2).any(|w| w[1] <= w[0]) {
                return Err(LabError::Config("N values must be positive and strictly increasing".into()));
            }
        }
        if spec.sigma <= 0.0 {
            return Err(LabError::Config("scenarios need sigma > 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E2: &str = r#"
[scenario]
id = "E2"
seed = 7
paths = 2000

[model]
family = "logcosh(4)"

[sweep]
n = [25, 100, 400]
"#;

    #[test]
    fn parses_defaults_and_hashes_canonically() {
        let a = ScenarioConfig::parse(E2).unwrap();
        assert_eq!(a.model.sigma, 1.0);
        assert_eq!(a.grid.spacing, 0.02);
        let reordered = r#"
[sweep]
n = [25, 100, 400]
[model]
family = "logcosh(4)"
sigma = 1.0
[scenario]
paths = 2000
seed = 7
id = "E2"
out_dir = "elsewhere"
"#;
        let b = ScenarioConfig::parse(reordered).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = ScenarioConfig::parse(&E2.replace("seed = 7", "seed = 8")).unwrap();
        assert_ne!(a.hash(), c.hash());
        assert_eq!(ScenarioConfig::parse(&a.canonical()).unwrap(), { let mut x = a.clone(); x.scenario.out_dir = None; x });
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig::parse(&E2.replace("[25, 100, 400]", "[100, 25]")).is_err());
        assert!(ScenarioConfig::parse(&E2.replace("2000", "50")).is_err());
        assert!(ScenarioConfig::parse(&E2.replace("logcosh(4)", "cubic(4)")).is_err());
        assert!(ScenarioConfig::parse(&E2.replace("seed = 7", "seed = 7\ncolour = 1")).is_err());
        assert!(ScenarioConfig::parse(&E2.replace("n = [25, 100, 400]", "eps = [0.5]")).is_err());
    }

    #[test]
    fn fnv_reference_value() {
        // FNV-1a 64 of the empty input is the offset basis
        assert_eq!(FnvHasher::default().finish(), 0xcbf29ce484222325);
    }
}
