use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempora::spectra::{harmonic_spectrum, hydrogen_point_spectrum, DiscreteSpectrum};
use tempora::uwform::FunctionSpec;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Model {
    Oscillator { omega: Vec<f64>, n_max: usize },
    Hydrogen { m: f64, gamma: f64, n_max: usize },
    Rabi { mu: f64, omega: f64, g: f64, cutoff: usize, count: usize },
    CustomSpectrum { path: PathBuf },
}

impl Model {
    pub fn discrete_spectrum(&self) -> CliResult<DiscreteSpectrum> {
        match self {
            Model::Oscillator { omega, n_max } => Ok(harmonic_spectrum(omega, *n_max)?),
            Model::Hydrogen { m, gamma, n_max } => Ok(hydrogen_point_spectrum(*m, *gamma, *n_max)?),
            Model::CustomSpectrum { path } => read_spectrum(path),
            Model::Rabi { .. } => {
                Err(CliError::Config("the rabi model is a matrix model; use the `spectrum` pipeline".into()))
            }
        }
    }
}

pub fn read_spectrum(path: &Path) -> CliResult<DiscreteSpectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    #[serde(rename = "L")]
    pub half_width: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub m: f64,
    pub x0: f64,
    pub k0: f64,
    pub sigma: f64,
    pub tmax: f64,
    pub steps: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        Self { half_width: 50.0, n: 1024, m: 1.0, x0: 0.0, k0: 5.0, sigma: 2.0, tmax: 1.0, steps: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pipeline {
    Spectrum,
    Decompose,
    #[serde(rename = "timeop")]
    TimeOp,
    #[serde(rename = "uwform")]
    UWForm {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        f: Option<FunctionSpec>,
    },
    #[serde(rename = "ftransform")]
    FTransform { f: FunctionSpec },
    #[serde(rename = "oscspec")]
    OscSpectrum {
        #[serde(default = "default_omega")]
        omega: f64,
        n_list: Vec<usize>,
    },
    #[serde(rename = "abweyl")]
    ABWeyl(GridParams),
    #[serde(rename = "s0check")]
    S0Check {
        #[serde(default = "default_samples")]
        samples: usize,
    },
}

fn default_omega() -> f64 {
    1.0
}

fn default_samples() -> usize {
    100
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Spectrum => "spectrum",
            Pipeline::Decompose => "decompose",
            Pipeline::TimeOp => "timeop",
            Pipeline::UWForm { .. } => "uwform",
            Pipeline::FTransform { .. } => "ftransform",
            Pipeline::OscSpectrum { .. } => "oscspec",
            Pipeline::ABWeyl(_) => "abweyl",
            Pipeline::S0Check { .. } => "s0check",
        }
    }

    pub fn needs_model(&self) -> bool {
        matches!(
            self,
            Pipeline::Spectrum | Pipeline::Decompose | Pipeline::TimeOp | Pipeline::UWForm { .. } | Pipeline::FTransform { .. }
        )
    }
}

/// Every tolerance a report may use, with its default.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    // relative to max |T_nk|
    ("ccr", 1e-12),
    // relative to ‖v‖, for random vectors of the difference span
    ("ccr_random", 1e-10),
    // relative to ‖φ‖‖ψ‖
    ("uw_ccr", 1e-10),
    ("uncertainty", 1e-10),
    ("toeplitz_bound", 1e-9),
    ("toeplitz_lambda_floor", 3.0),
    ("rabi_stability", 1e-8),
    ("weyl", 1e-6),
    ("s0_symmetry", 1e-9),
    ("scaling", 1e-13),
];

pub fn default_tolerances() -> BTreeMap<String, f64> {
    DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Model>,
    pub pipeline: Pipeline,
    /// Overrides merged over [`DEFAULT_TOLERANCES`].
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
    /// Summability exponent for the channel decomposition.
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_p() -> f64 {
    2.0
}

impl RunConfig {
    pub fn new(model: Option<Model>, pipeline: Pipeline) -> Self {
        Self { model, pipeline, tolerances: BTreeMap::new(), seed: 0, p: 2.0 }
    }

    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Defaults merged with overrides; unknown names and negative values are rejected.
    pub fn effective_tolerances(&self) -> CliResult<BTreeMap<String, f64>> {
        let mut tol = default_tolerances();
        for (name, &value) in &self.tolerances {
            if !tol.contains_key(name) {
                return Err(CliError::Config(format!("unknown tolerance `{name}`")));
            }
            if !(value >= 0.0 && value.is_finite()) {
                return Err(CliError::Config(format!("tolerance `{name}` must be finite and nonnegative")));
            }
            tol.insert(name.clone(), value);
        }
        Ok(tol)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.effective_tolerances()?;
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(CliError::Config("p must be positive".into()));
        }
        if self.pipeline.needs_model() && self.model.is_none() {
            return Err(CliError::Config(format!("pipeline `{}` needs a model", self.pipeline.name())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_round_trip() {
        let text = r#"{
            "model": {"kind": "hydrogen", "m": 1.0, "gamma": 1.0, "n_max": 3},
            "pipeline": {"kind": "uwform", "f": {"kind": "exp", "params": [1.0]}},
            "tolerances": {"uw_ccr": 1e-9},
            "seed": 7
        }"#;
        let c: RunConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.p, 2.0);
        assert_eq!(c.effective_tolerances().unwrap()["uw_ccr"], 1e-9);
        let back: RunConfig = serde_json::from_value(serde_json::to_value(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_tolerances_and_missing_models() {
        let mut c = RunConfig::new(None, Pipeline::TimeOp);
        assert!(c.validate().is_err());
        c.model = Some(Model::Oscillator { omega: vec![1.0], n_max: 3 });
        assert!(c.validate().is_ok());
        c.tolerances.insert("ccr".into(), -1.0);
        assert!(c.validate().is_err());
        c.tolerances.clear();
        c.tolerances.insert("nonsense".into(), 1.0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn grid_params_use_physics_names() {
        let v = serde_json::to_value(Pipeline::ABWeyl(GridParams::default())).unwrap();
        assert_eq!(v["kind"], "abweyl");
        assert_eq!(v["L"], 50.0);
        assert_eq!(v["N"], 1024);
    }
}
