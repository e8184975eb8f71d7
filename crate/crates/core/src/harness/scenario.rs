//! Scenario files: versioned TOML describing one experiment.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::PolicyConfig;
use crate::sensor::SensorConfig;
use crate::sim::{GripGeometry, HeldObject, SurfaceModel, Vec2, WorldConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario serialize error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unsupported schema_version {found}, expected {expected}")]
    Schema { found: u32, expected: u32 },
    #[error("scenario field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ZeroOffset,
    OffsetRecovery,
    Ramp,
    MultiStack,
    FingerPress,
    NoiseSweep,
}

/// Where each trial's first guess comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlacementSpec {
    pub initial_guess: Vec2,
    /// Cycled over trials and added to `initial_guess`.
    pub offsets: Vec<Vec2>,
    /// Random offset radius range `[min, max]` in a random direction.
    pub random_offset: Option<[f64; 2]>,
    /// Uniform disk jitter radius added on top.
    pub guess_jitter: f64,
    /// Known stable placement, used for accuracy statistics.
    pub stable_point: Option<Vec2>,
}

impl Default for PlacementSpec {
    fn default() -> Self {
        Self {
            initial_guess: Vec2::zeros(),
            offsets: Vec::new(),
            random_offset: None,
            guess_jitter: 0.0,
            stable_point: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackSpec {
    pub levels: usize,
    /// Each level's guess is perturbed uniformly within this radius (m).
    #[serde(default)]
    pub perturbation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepDirection {
    /// Independent random direction per seed, shared across offsets.
    Random,
    /// Centered, +x and +y shifts for every offset.
    Pattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Offset magnitudes from the stable point (m).
    pub offsets: Vec<f64>,
    pub seeds: usize,
    pub direction: SweepDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerPressSpec {
    /// Random cases with torque magnitudes drawn from `torque_range`.
    pub cases: usize,
    pub torque_range: [f64; 2],
    /// Lever arm range from the assumed COM to the finger (m).
    pub lever_range: [f64; 2],
    /// Torque magnitudes for the error-vs-magnitude curve.
    #[serde(default)]
    pub curve_torques: Vec<f64>,
    #[serde(default = "default_curve_repeats")]
    pub curve_repeats: usize,
}

fn default_curve_repeats() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSweepSpec {
    /// Release thresholds to try (N·m).
    pub release_thresholds: Vec<f64>,
    /// Multipliers on the sensor noise.
    #[serde(default = "default_noise_scales")]
    pub noise_scales: Vec<f64>,
}

fn default_noise_scales() -> Vec<f64> {
    vec![1.0]
}

/// Thresholds a run must meet for the CLI to exit 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Acceptance {
    pub min_success_rate: Option<f64>,
    pub max_success_rate: Option<f64>,
    /// Every stable trial releases within this many iterations.
    pub max_iterations_per_success: Option<usize>,
    /// Every trial (or placement) ends with this outcome label.
    pub required_outcome: Option<String>,
    /// Distance from the COM after the first proposal to the stable point.
    pub max_first_proposal_error: Option<f64>,
    /// Sweep: offsets at or above `far_offset` have median angle error below this.
    pub far_offset: Option<f64>,
    pub far_max_median_deg: Option<f64>,
    /// Sweep: offsets at or below `near_offset` have median angle error above this.
    pub near_offset: Option<f64>,
    pub near_min_median_deg: Option<f64>,
    /// Sweep: median error never decreases as the offset shrinks.
    pub monotone: bool,
    /// Finger press: every case's direction error is below this.
    pub max_direction_error_deg: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub family: Family,
    pub trials: usize,
    /// Seeds every stochastic element: sensor noise, guesses, directions.
    pub seed: u64,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub world: WorldConfig,
    pub tower: SurfaceModel,
    pub object: HeldObject,
    #[serde(default)]
    pub grip: GripGeometry,
    /// The noise model; its `seed` is replaced by the scenario seed.
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    #[serde(default)]
    pub placement: PlacementSpec,
    pub stack: Option<StackSpec>,
    pub sweep: Option<SweepSpec>,
    pub finger_press: Option<FingerPressSpec>,
    pub noise_sweep: Option<NoiseSweepSpec>,
    #[serde(default)]
    pub acceptance: Acceptance,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let scenario: Scenario = toml::from_str(text)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String, ScenarioError> {
        Ok(toml::to_string(self)?)
    }

    /// Sensor configuration with the scenario seed applied.
    pub fn sensor_config(&self) -> SensorConfig {
        SensorConfig {
            seed: self.seed,
            ..self.sensor.clone()
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ScenarioError::Schema {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        self.world.validate().map_err(|e| invalid("world", e.to_string()))?;
        self.object.validate().map_err(|e| invalid("object", e.to_string()))?;
        self.sensor.validate().map_err(|e| invalid("sensor", e.to_string()))?;
        self.policy.validate().map_err(|e| invalid("policy", e.to_string()))?;
        self.grip.mount.to_matrix().map_err(|e| invalid("grip.mount", e.to_string()))?;
        if let Some([lo, hi]) = self.placement.random_offset {
            if !(0.0 <= lo && lo <= hi) {
                return Err(invalid("placement.random_offset", "need 0 <= min <= max"));
            }
        }
        match self.family {
            Family::MultiStack => {
                let stack = self.stack.as_ref().ok_or_else(|| invalid("stack", "required for multi_stack"))?;
                if stack.levels == 0 {
                    return Err(invalid("stack.levels", "must be >= 1"));
                }
            }
            Family::FingerPress => {
                let fp = self
                    .finger_press
                    .as_ref()
                    .ok_or_else(|| invalid("finger_press", "required for finger_press"))?;
                for (field, [lo, hi]) in [("finger_press.torque_range", fp.torque_range), ("finger_press.lever_range", fp.lever_range)] {
                    if !(0.0 < lo && lo <= hi) {
                        return Err(invalid(field, "need 0 < min <= max"));
                    }
                }
            }
            Family::NoiseSweep => {
                let ns = self
                    .noise_sweep
                    .as_ref()
                    .ok_or_else(|| invalid("noise_sweep", "required for noise_sweep"))?;
                if ns.release_thresholds.is_empty() || ns.release_thresholds.iter().any(|t| !(*t > 0.0)) {
                    return Err(invalid("noise_sweep.release_thresholds", "need positive values"));
                }
                if ns.noise_scales.is_empty() || ns.noise_scales.iter().any(|s| !(*s >= 0.0)) {
                    return Err(invalid("noise_sweep.noise_scales", "need non-negative values"));
                }
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            if sweep.seeds == 0 || sweep.offsets.is_empty() {
                return Err(invalid("sweep", "need at least one offset and one seed"));
            }
            if self.placement.stable_point.is_none() {
                return Err(invalid("placement.stable_point", "required for sweeps"));
            }
        }
        if let Some(label) = &self.acceptance.required_outcome {
            const LABELS: [&str; 4] = ["released_stable", "released_toppled", "max_iterations", "no_contact"];
            if !LABELS.contains(&label.as_str()) {
                return Err(invalid("acceptance.required_outcome", format!("unknown outcome `{label}`")));
            }
        }
        Ok(())
    }
}
