//! Lower, measure, release-or-shift, raise, repeat.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimate::{ContactEstimate, ContactEstimator, EstimateError};
use crate::sensor::{calibrate_hover, CalibrationState, ForceTorqueSensor, ReadingWindow, SensorError};
use crate::sim::{Bounds, ContactResult, Descent, HeldObject, ReleaseOutcome, SimError, Vec2, WorldState};
use crate::spatial::{Vec3, Wrench};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("invalid policy configuration: {0}")]
    InvalidConfig(String),
    #[error("initial guess ({x}, {y}) lies outside the workspace")]
    GuessOutsideWorkspace { x: f64, y: f64 },
    #[error("stack plan has no objects")]
    EmptyPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    /// Descent stops once the tower pushes back this hard (N).
    pub resistance_threshold: f64,
    /// Release when the torque differs from the flat reference by less (N·m).
    pub torque_release_threshold: f64,
    /// Gain on the flat-seeking direction; 0 disables it.
    pub step_gain: f64,
    pub raise_height: f64,
    pub max_iterations: usize,
    pub workspace: Bounds,
    pub force_floor: f64,
    pub window: ReadingWindow,
    /// Hover height above the pickup station during calibration.
    pub hover_clearance: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            resistance_threshold: 10.0,
            torque_release_threshold: 0.05,
            step_gain: 0.5,
            raise_height: 0.02,
            max_iterations: 10,
            workspace: Bounds::square(0.2),
            force_floor: crate::estimate::DEFAULT_FORCE_FLOOR,
            window: ReadingWindow::default(),
            hover_clearance: 0.05,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let positive = [
            ("resistance_threshold", self.resistance_threshold),
            ("torque_release_threshold", self.torque_release_threshold),
            ("raise_height", self.raise_height),
            ("force_floor", self.force_floor),
            ("hover_clearance", self.hover_clearance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(PolicyError::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.step_gain >= 0.0) {
            return Err(PolicyError::InvalidConfig(format!("step_gain must be >= 0, got {}", self.step_gain)));
        }
        if self.max_iterations == 0 {
            return Err(PolicyError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    pub fn estimator(&self) -> ContactEstimator {
        ContactEstimator::new(self.force_floor)
    }
}

/// Horizontal part of `r_T + step_gain * d`: moves the COM over the contact
/// and a little further uphill.
pub fn propose_shift(est: &ContactEstimate, cfg: &PolicyConfig) -> Vec2 {
    let s = est.contact_offset_tangent + est.flat_dir * cfg.step_gain;
    Vec2::new(s.x, s.y)
}

/// Next commanded position, kept inside the workspace.
pub fn apply_shift(from: &Vec2, shift: &Vec2, cfg: &PolicyConfig) -> Vec2 {
    cfg.workspace.clamp(&(from + shift))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Release,
    Shift,
    /// The press gave no usable normal force even after re-pressing.
    NoEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentSample {
    pub t: f64,
    pub z: f64,
    pub force_norm: f64,
    pub torque_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Commanded tip position at the bottom of the descent.
    pub commanded: Vec3,
    /// Hover-subtracted averaged wrench about the assumed COM.
    pub wrench: Wrench,
    pub torque_deviation: f64,
    pub estimate: Option<ContactEstimate>,
    pub shift: Vec2,
    pub decision: Decision,
    /// Ground truth, kept for analysis only.
    pub true_com: Vec3,
    pub true_contact: Vec3,
    /// Calibrated sensor readings taken on the way down.
    pub descent: Vec<DescentSample>,
}

impl IterationRecord {
    pub fn stop_height(&self) -> f64 {
        self.commanded.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlacementOutcome {
    ReleasedStable { final_com: Vec3 },
    ReleasedToppled,
    MaxIterations,
    NoContact,
}

impl PlacementOutcome {
    pub fn is_stable(&self) -> bool {
        matches!(self, PlacementOutcome::ReleasedStable { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            PlacementOutcome::ReleasedStable { .. } => "released_stable",
            PlacementOutcome::ReleasedToppled => "released_toppled",
            PlacementOutcome::MaxIterations => "max_iterations",
            PlacementOutcome::NoContact => "no_contact",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementTrace {
    pub initial_guess: Vec2,
    pub iterations: Vec<IterationRecord>,
    pub outcome: PlacementOutcome,
}

impl PlacementTrace {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }

    /// Commanded position at the final press.
    pub fn final_commanded(&self) -> Option<Vec2> {
        self.iterations.last().map(|r| Vec2::new(r.commanded.x, r.commanded.y))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackPlan {
    pub objects: Vec<HeldObject>,
    /// Where the first object is aimed.
    pub first_guess: Vec2,
    /// Added to each object's guess; missing entries mean no perturbation.
    #[serde(default)]
    pub perturbations: Vec<Vec2>,
}

impl StackPlan {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.objects.is_empty() {
            return Err(PolicyError::EmptyPlan);
        }
        Ok(())
    }

    pub fn perturbation(&self, i: usize) -> Vec2 {
        self.perturbations.get(i).copied().unwrap_or_else(Vec2::zeros)
    }
}

/// Averaged reading while the tip rests at `tip` with `contact` in place.
fn hold_reading(
    world: &WorldState,
    sensor: &mut ForceTorqueSensor,
    tip: &Vec3,
    contact: Option<&ContactResult>,
    window: &ReadingWindow,
) -> Result<Wrench, SensorError> {
    let truth = world.true_wrench_at_wrist(tip, contact);
    sensor.settle_and_average(|_| truth, window)
}

/// Both calibration phases at the world's pickup station.
pub fn calibrate(
    world: &WorldState,
    sensor: &mut ForceTorqueSensor,
    cfg: &PolicyConfig,
) -> Result<CalibrationState, PolicyError> {
    let station = world.pickup_station()?;
    let hover_tip = Vec3::new(0.0, 0.0, station.config().pickup_height + world.held().top_height + cfg.hover_clearance);
    let hover = hold_reading(&station, sensor, &hover_tip, None, &cfg.window)?;
    let calib = calibrate_hover(hover, &station.wrist_pose(&hover_tip), station.wrist_to_tip())?;

    let press = station.descend_until_contact(Vec2::zeros(), cfg.resistance_threshold, hover_tip.z)?;
    let flat = hold_reading(&station, sensor, &press.tip, Some(&press.contact), &cfg.window)?;
    Ok(calib.calibrate_flat_reference(flat))
}

fn descend(world: &WorldState, xy: Vec2, threshold: f64, start: f64) -> Result<Descent, SimError> {
    match world.descend_until_contact(xy, threshold, start) {
        Err(SimError::StartsInContact { .. }) => world.descend_until_contact(xy, threshold, world.config().approach_height),
        other => other,
    }
}

/// Replays the descent profile through the sensor as single calibrated
/// readings.
fn record_descent(
    world: &WorldState,
    sensor: &mut ForceTorqueSensor,
    calib: &CalibrationState,
    descent: &Descent,
) -> Vec<DescentSample> {
    descent
        .profile
        .iter()
        .map(|step| {
            let tip = Vec3::new(descent.tip.x, descent.tip.y, step.z);
            let contact = descent.contact.with_force(step.normal_force, step.penetration);
            let truth = world.true_wrench_at_wrist(&tip, Some(&contact));
            let t = sensor.clock();
            let w = calib.to_com(&sensor.sample(&truth, t));
            DescentSample {
                t,
                z: step.z,
                force_norm: w.force.norm(),
                torque_norm: w.torque.norm(),
            }
        })
        .collect()
}

/// One lowered-and-measured contact.
#[derive(Debug, Clone, PartialEq)]
pub struct Press {
    pub descent: Descent,
    /// Hover-subtracted averaged wrench about the assumed COM.
    pub wrench: Wrench,
    pub estimate: Result<ContactEstimate, EstimateError>,
    pub samples: Vec<DescentSample>,
}

/// Descends at `xy` from `start`, reads the sensor and estimates the
/// contact. A degenerate estimate triggers one harder re-press.
pub fn press(
    world: &WorldState,
    xy: Vec2,
    start: f64,
    cfg: &PolicyConfig,
    sensor: &mut ForceTorqueSensor,
    calib: &CalibrationState,
) -> Result<Press, PolicyError> {
    let estimator = cfg.estimator();
    let mut descent = descend(world, xy, cfg.resistance_threshold, start)?;
    let samples = record_descent(world, sensor, calib, &descent);
    let reading = hold_reading(world, sensor, &descent.tip, Some(&descent.contact), &cfg.window)?;
    let mut wrench = calib.to_com(&reading);
    let mut estimate = estimator.estimate_contact(&wrench, &calib.gravity_estimate);
    if estimate.is_err() {
        descent = descend(world, xy, cfg.resistance_threshold * 1.5, start)?;
        let reading = hold_reading(world, sensor, &descent.tip, Some(&descent.contact), &cfg.window)?;
        wrench = calib.to_com(&reading);
        estimate = estimator.estimate_contact(&wrench, &calib.gravity_estimate);
    }
    Ok(Press {
        descent,
        wrench,
        estimate,
        samples,
    })
}

/// One placement from `initial_xy` until release or `max_iterations`.
pub fn run_placement(
    world: &mut WorldState,
    initial_xy: Vec2,
    cfg: &PolicyConfig,
    sensor: &mut ForceTorqueSensor,
    calib: &CalibrationState,
) -> Result<PlacementTrace, PolicyError> {
    cfg.validate()?;
    calib.require_complete()?;
    if !cfg.workspace.contains(&initial_xy) {
        return Err(PolicyError::GuessOutsideWorkspace {
            x: initial_xy.x,
            y: initial_xy.y,
        });
    }
    let flat_torque = calib.flat_reference_com()?.torque;
    let mut trace = PlacementTrace {
        initial_guess: initial_xy,
        iterations: Vec::new(),
        outcome: PlacementOutcome::MaxIterations,
    };
    let mut xy = initial_xy;
    let mut start = world.config().approach_height;

    for _ in 0..cfg.max_iterations {
        let p = match press(world, xy, start, cfg, sensor, calib) {
            Ok(p) => p,
            Err(PolicyError::Sim(SimError::NoContactWithinRange { .. })) => {
                trace.outcome = PlacementOutcome::NoContact;
                return Ok(trace);
            }
            Err(e) => return Err(e),
        };
        let torque_deviation = (p.wrench.torque - flat_torque).norm();
        let estimate = p.estimate.ok();
        let (decision, shift) = match &estimate {
            None => (Decision::NoEstimate, Vec2::zeros()),
            Some(_) if torque_deviation < cfg.torque_release_threshold => (Decision::Release, Vec2::zeros()),
            Some(est) => (Decision::Shift, apply_shift(&xy, &propose_shift(est, cfg), cfg) - xy),
        };
        trace.iterations.push(IterationRecord {
            commanded: p.descent.tip,
            wrench: p.wrench,
            torque_deviation,
            estimate,
            shift,
            decision,
            true_com: world.true_com(&p.descent.tip),
            true_contact: p.descent.contact.contact_point,
            descent: p.samples,
        });
        if decision == Decision::Release {
            trace.outcome = match world.release(&p.descent) {
                ReleaseOutcome::Settled { final_com } => PlacementOutcome::ReleasedStable { final_com },
                ReleaseOutcome::Toppled => PlacementOutcome::ReleasedToppled,
            };
            return Ok(trace);
        }
        xy += shift;
        start = p.descent.tip.z + cfg.raise_height;
    }
    Ok(trace)
}

/// Places `plan.objects` in order. Each object is picked (swapped into the
/// gripper), calibrated and placed; a stable release seeds the next guess
/// with the position where the object was let go. Stops after a topple.
pub fn run_stack(
    world: &mut WorldState,
    plan: &StackPlan,
    cfg: &PolicyConfig,
    sensor: &mut ForceTorqueSensor,
) -> Result<Vec<PlacementTrace>, PolicyError> {
    plan.validate()?;
    let mut traces = Vec::with_capacity(plan.objects.len());
    let mut base = plan.first_guess;
    for (i, object) in plan.objects.iter().enumerate() {
        world.set_held(object.clone())?;
        let calib = calibrate(world, sensor, cfg)?;
        let guess = cfg.workspace.clamp(&(base + plan.perturbation(i)));
        let trace = run_placement(world, guess, cfg, sensor, &calib)?;
        let outcome = trace.outcome;
        if outcome.is_stable() {
            base = trace.final_commanded().unwrap_or(base);
        }
        traces.push(trace);
        if outcome == PlacementOutcome::ReleasedToppled {
            break;
        }
    }
    Ok(traces)
}
