//! JSON run configuration. One document carries the circuit, the
//! controller gains, the scenario, the training hyperparameters, and the
//! default file paths; command-line flags override individual values.
//! Unknown keys anywhere in the document are rejected with the offending
//! key named.

use std::path::{Path, PathBuf};

use bucksim_core::{
    ConverterParams, Disturbance, Event, PlantModel, Scenario, SmcConfig, TrainConfig,
};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Top-level configuration document. Every section is optional and falls
/// back to the published defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub circuit: ConverterParams,
    pub smc: SmcConfig,
    pub scenario: ScenarioConfig,
    pub training: TrainConfig,
    pub paths: PathsConfig,
}

/// Scenario section: everything in a [`Scenario`] except the circuit,
/// which comes from the `circuit` section.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub dt_s: f64,
    pub model: PlantModel,
    pub events: Vec<Event>,
    pub additive_disturbance: Disturbance,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            duration_s: 0.06,
            dt_s: 1e-6,
            model: PlantModel::Averaged,
            events: Vec::new(),
            additive_disturbance: Disturbance::none(),
            seed: 42,
        }
    }
}

impl ScenarioConfig {
    pub fn to_scenario(&self, params: ConverterParams) -> Scenario {
        Scenario {
            params,
            duration_s: self.duration_s,
            dt_s: self.dt_s,
            model: self.model,
            events: self.events.clone(),
            additive_disturbance: self.additive_disturbance,
            seed: self.seed,
        }
    }
}

/// Default input/output locations, each overridable per command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub model: PathBuf,
    pub dataset: PathBuf,
    /// Primary output of the invoked command; every command has its own
    /// fallback name when this is absent.
    pub out: Option<PathBuf>,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            model: PathBuf::from("model.json"),
            dataset: PathBuf::from("dataset.csv"),
            out: None,
        }
    }
}

impl RunConfig {
    /// Loads a configuration document, or the defaults when no path is
    /// given. Parse and layout problems are configuration failures.
    pub fn load(path: Option<&Path>) -> Result<RunConfig, Failure> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("invalid config {}: {e}", path.display())))
    }
}
