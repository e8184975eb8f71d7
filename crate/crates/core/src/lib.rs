//! Force-torque guided placement of irregular objects onto irregular towers.
//!
//! A wrist force-torque sensor reading taken while the held object presses on
//! the tower gives the contact point relative to the object's COM. The
//! placement policy shifts the object toward the contact until pressing yields
//! the same torque as pressing on flat ground, then releases.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimate;
pub mod harness;
pub mod policy;
pub mod sensor;
pub mod sim;
pub mod spatial;

pub use estimate::{ContactEstimate, ContactEstimator, EstimateError, ForceBudget};
pub use policy::{PlacementOutcome, PlacementTrace, PolicyConfig, StackPlan};
pub use sensor::{CalibrationState, ForceTorqueSensor, ReadingWindow, SensorConfig, SensorError};
pub use sim::{
    Bounds, ContactResult, Descent, Footprint, GripGeometry, HeldObject, ReleaseOutcome, SimError, SurfaceModel,
    Vec2, WorldConfig, WorldState,
};
pub use spatial::{FrameId, RigidTransform, SpatialError, Twist, Vec3, Wrench};
