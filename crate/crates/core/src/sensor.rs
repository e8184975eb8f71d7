//! Simulated wrist force-torque sensor and the two-phase calibration.
//!
//! The sensor reports the wrench the payload (object plus gripper) exerts on
//! the wrist, expressed in the wrist frame. A hanging payload therefore reads
//! a downward force. Readings are the true wrench plus a constant bias, a
//! linear bias drift and independent Gaussian noise per axis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spatial::{transform_wrench, RigidTransform, Vec3, Wrench};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("reading window yields no samples ({average_time} s at {sample_rate} Hz)")]
    InsufficientSamples { average_time: f64, sample_rate: f64 },
    #[error("calibration incomplete: flat reference missing")]
    CalibrationIncomplete,
    #[error("hover baseline implies non-downward gravity {0:?}")]
    InvalidGravity([f64; 3]),
    #[error("invalid sensor configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// Read rate in Hz.
    pub sample_rate: f64,
    /// Per-axis standard deviation of force noise (N).
    pub force_noise_std: f64,
    /// Per-axis standard deviation of torque noise (N·m).
    pub torque_noise_std: f64,
    pub bias: Wrench,
    /// Bias change per second.
    pub bias_drift: Wrench,
    pub seed: u64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            sample_rate: 25.0,
            force_noise_std: 0.25,
            torque_noise_std: 0.01,
            bias: Wrench::zero(),
            bias_drift: Wrench::zero(),
            seed: 0,
        }
    }
}

impl SensorConfig {
    pub fn noiseless() -> Self {
        Self {
            force_noise_std: 0.0,
            torque_noise_std: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(SensorError::InvalidConfig(format!("sample_rate must be > 0, got {}", self.sample_rate)));
        }
        if !(self.force_noise_std >= 0.0) || !(self.torque_noise_std >= 0.0) {
            return Err(SensorError::InvalidConfig("noise std must be >= 0".into()));
        }
        if !self.bias.is_finite() || !self.bias_drift.is_finite() {
            return Err(SensorError::InvalidConfig("bias must be finite".into()));
        }
        Ok(())
    }
}

/// Settle-then-average reading protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadingWindow {
    /// Seconds of samples discarded after motion stops.
    pub settle_time: f64,
    /// Seconds of samples averaged.
    pub average_time: f64,
}

impl Default for ReadingWindow {
    fn default() -> Self {
        Self {
            settle_time: 0.1,
            average_time: 0.5,
        }
    }
}

// Guards floor() against products like 0.4 * 25 = 9.999999999999998.
fn sample_count(seconds: f64, rate: f64) -> usize {
    let n = (seconds * rate + 1e-9).floor();
    if n > 0.0 {
        n as usize
    } else {
        0
    }
}

impl ReadingWindow {
    /// `floor(settle_time * rate)`.
    pub fn settle_samples(&self, rate: f64) -> usize {
        sample_count(self.settle_time, rate)
    }

    /// `floor(average_time * rate)`; 12 at the default window and 25 Hz.
    pub fn average_samples(&self, rate: f64) -> usize {
        sample_count(self.average_time, rate)
    }
}

/// One sensor instance owns one RNG stream.
#[derive(Debug, Clone)]
pub struct ForceTorqueSensor {
    config: SensorConfig,
    rng: ChaCha8Rng,
    samples_taken: u64,
}

impl ForceTorqueSensor {
    /// Sensor seeded from `config.seed`, drawing from RNG stream `stream`
    /// (typically the trial index).
    pub fn new(config: SensorConfig, stream: u64) -> Result<Self, SensorError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        Ok(Self {
            config,
            rng,
            samples_taken: 0,
        })
    }

    pub fn config(&self) -> &SensorConfig {
        &self.config
    }

    pub fn samples_taken(&self) -> u64 {
        self.samples_taken
    }

    /// Time stamp of the next sample, in seconds since the sensor started.
    pub fn clock(&self) -> f64 {
        self.samples_taken as f64 / self.config.sample_rate
    }

    fn gaussian(&mut self, std: f64) -> Vec3 {
        let mut draw = || -> f64 { self.rng.sample(StandardNormal) };
        Vec3::new(draw(), draw(), draw()) * std
    }

    /// One reading of `true_wrench` at time `t`.
    pub fn sample(&mut self, true_wrench: &Wrench, t: f64) -> Wrench {
        let torque_noise = self.gaussian(self.config.torque_noise_std);
        let force_noise = self.gaussian(self.config.force_noise_std);
        self.samples_taken += 1;
        let bias = self.config.bias + self.config.bias_drift * t;
        Wrench::new(
            true_wrench.torque + bias.torque + torque_noise,
            true_wrench.force + bias.force + force_noise,
        )
    }

    /// Reads at the sensor's own clock.
    pub fn next_sample(&mut self, true_wrench: &Wrench) -> Wrench {
        let t = self.clock();
        self.sample(true_wrench, t)
    }

    /// Discards the settle samples, then averages the following window.
    ///
    /// `source` gives the true wrench at a sample time; during a quasi-static
    /// hold it is constant.
    pub fn settle_and_average<F>(&mut self, mut source: F, window: &ReadingWindow) -> Result<Wrench, SensorError>
    where
        F: FnMut(f64) -> Wrench,
    {
        let rate = self.config.sample_rate;
        let n = window.average_samples(rate);
        if n == 0 {
            return Err(SensorError::InsufficientSamples {
                average_time: window.average_time,
                sample_rate: rate,
            });
        }
        for _ in 0..window.settle_samples(rate) {
            let t = self.clock();
            let w = source(t);
            self.sample(&w, t);
        }
        let mut sum = Wrench::zero();
        for _ in 0..n {
            let t = self.clock();
            let w = source(t);
            sum += self.sample(&w, t);
        }
        Ok(sum * (1.0 / n as f64))
    }
}

/// Hover baseline and flat reference, both stored as raw wrist-frame readings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationState {
    pub hover_baseline: Wrench,
    pub flat_reference: Option<Wrench>,
    /// Weight of object and gripper in the base frame.
    pub gravity_estimate: Vec3,
    wrist_to_com: RigidTransform,
}

/// Phase one: payload held still in free space.
///
/// `wrist_pose` is `g_BW`; `wrist_to_com` is the assumed pose of the COM
/// frame in the wrist frame.
pub fn calibrate_hover(
    averaged_reading: Wrench,
    wrist_pose: &RigidTransform,
    wrist_to_com: RigidTransform,
) -> Result<CalibrationState, SensorError> {
    let gravity_estimate = wrist_pose.transform_vector(&averaged_reading.force);
    if !(gravity_estimate.z < 0.0) {
        return Err(SensorError::InvalidGravity(gravity_estimate.into()));
    }
    Ok(CalibrationState {
        hover_baseline: averaged_reading,
        flat_reference: None,
        gravity_estimate,
        wrist_to_com,
    })
}

impl CalibrationState {
    /// Phase two: payload pressed onto known flat ground.
    pub fn calibrate_flat_reference(mut self, averaged_reading: Wrench) -> CalibrationState {
        self.flat_reference = Some(averaged_reading);
        self
    }

    pub fn is_complete(&self) -> bool {
        self.flat_reference.is_some()
    }

    pub fn require_complete(&self) -> Result<(), SensorError> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(SensorError::CalibrationIncomplete)
        }
    }

    pub fn wrist_to_com(&self) -> &RigidTransform {
        &self.wrist_to_com
    }

    /// Hover-subtracted reading carried into the COM frame.
    pub fn to_com(&self, reading: &Wrench) -> Wrench {
        transform_wrench(&self.wrist_to_com, &(*reading - self.hover_baseline))
    }

    /// The flat reference in the same form as [`Self::to_com`].
    pub fn flat_reference_com(&self) -> Result<Wrench, SensorError> {
        self.flat_reference
            .map(|w| self.to_com(&w))
            .ok_or(SensorError::CalibrationIncomplete)
    }
}
