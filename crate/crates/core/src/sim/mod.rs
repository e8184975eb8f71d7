//! Quasi-static ground truth for placement experiments.
//!
//! The held object only ever translates vertically under a fixed
//! orientation, so the interference between its bottom and the tower at tip
//! height `z` is `max_i m_i - z` for per-sample constants `m_i`. Contact is a
//! linear spring on the deepest interference; flat-on-flat contact also
//! reports the patch of samples tied for deepest, and the force acts at the
//! patch centroid (uniform pressure). Contact is frictionless.

pub mod stability;
pub mod surface;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spatial::{transform_wrench, Mat3, RigidTransform, SpatialError, Vec3, Wrench};
pub use stability::{convex_hull, polygon_area, Support};
pub use surface::{HeightField, SurfaceModel, SurfaceSample, Vec2};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("no contact before reaching the descent floor at z = {floor} m")]
    NoContactWithinRange { floor: f64 },
    #[error("descent starts {penetration:e} m inside the tower")]
    StartsInContact { penetration: f64 },
    #[error("resistance threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("invalid world configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// Axis-aligned rectangle in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: Vec2,
    pub max: Vec2,
}

impl Bounds {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Self { min, max }
    }

    pub fn square(half: f64) -> Self {
        Self::new(Vec2::new(-half, -half), Vec2::new(half, half))
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn clamp(&self, p: &Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Footprint {
    Disk { radius: f64 },
    Square { half_width: f64 },
}

impl Footprint {
    pub fn contains(&self, u: f64, v: f64) -> bool {
        match *self {
            Footprint::Disk { radius } => u * u + v * v <= radius * radius,
            Footprint::Square { half_width } => u.abs() <= half_width && v.abs() <= half_width,
        }
    }

    /// Radius of the disk, half width of the square.
    pub fn radius(&self) -> f64 {
        match *self {
            Footprint::Disk { radius } => radius,
            Footprint::Square { half_width } => half_width,
        }
    }

    /// Half size of the bounding box.
    pub fn extent(&self) -> f64 {
        self.radius()
    }

    /// Interior grid at `pitch` plus points along the boundary.
    pub fn sample_points(&self, pitch: f64, boundary_samples: usize) -> Vec<Vec2> {
        let e = self.extent();
        let n = (e / pitch).floor() as i64;
        let mut pts = Vec::new();
        for j in -n..=n {
            for i in -n..=n {
                let (u, v) = (i as f64 * pitch, j as f64 * pitch);
                if self.contains(u, v) {
                    pts.push(Vec2::new(u, v));
                }
            }
        }
        match *self {
            Footprint::Disk { radius } => {
                for k in 0..boundary_samples {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / boundary_samples as f64;
                    pts.push(Vec2::new(radius * a.cos(), radius * a.sin()));
                }
            }
            Footprint::Square { half_width } => {
                let per_side = (boundary_samples / 4).max(1);
                for k in 0..per_side {
                    let t = -half_width + 2.0 * half_width * k as f64 / per_side as f64;
                    pts.push(Vec2::new(t, -half_width));
                    pts.push(Vec2::new(half_width, t));
                    pts.push(Vec2::new(-t, half_width));
                    pts.push(Vec2::new(-half_width, -t));
                }
            }
        }
        pts
    }
}

/// The object in the gripper. Geometry is given relative to its COM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeldObject {
    /// kg
    pub mass: f64,
    /// COM position relative to the gripper tip (m).
    #[serde(default = "Vec3::zeros")]
    pub true_com_offset: Vec3,
    /// Depth of the bottom below the COM as a function of horizontal offset.
    pub bottom: SurfaceModel,
    pub footprint: Footprint,
    /// Flat top surface height above the COM.
    pub top_height: f64,
}

impl HeldObject {
    /// A 5 mm thick flat disk.
    pub fn puck(radius: f64) -> Self {
        Self {
            mass: 0.2,
            true_com_offset: Vec3::zeros(),
            bottom: SurfaceModel::Plane { height: 0.005 },
            footprint: Footprint::Disk { radius },
            top_height: 0.005,
        }
    }

    /// A 6.35 mm thick flat square board.
    pub fn square_board(half_width: f64) -> Self {
        Self {
            mass: 0.05,
            true_com_offset: Vec3::zeros(),
            bottom: SurfaceModel::Plane { height: 0.003175 },
            footprint: Footprint::Square { half_width },
            top_height: 0.003175,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.mass > 0.0) {
            return Err(SimError::InvalidConfig(format!("object mass must be > 0, got {}", self.mass)));
        }
        if !(self.footprint.radius() > 0.0) {
            return Err(SimError::InvalidConfig("footprint radius must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RotationSpec {
    AxisAngle { axis: Vec3, angle_deg: f64 },
    Quaternion { w: f64, x: f64, y: f64, z: f64 },
}

impl Default for RotationSpec {
    fn default() -> Self {
        RotationSpec::AxisAngle {
            axis: Vec3::z(),
            angle_deg: 0.0,
        }
    }
}

impl RotationSpec {
    pub fn to_matrix(&self) -> Result<Mat3, SpatialError> {
        let g = match *self {
            RotationSpec::AxisAngle { axis, angle_deg } => {
                RigidTransform::from_axis_angle(axis, angle_deg.to_radians(), Vec3::zeros())?
            }
            RotationSpec::Quaternion { w, x, y, z } => RigidTransform::from_quaternion(w, x, y, z, Vec3::zeros())?,
        };
        Ok(*g.rotation())
    }
}

/// Sensor mounting and gripper between the wrist and the jaw center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GripGeometry {
    /// Vertical distance from the sensor origin down to the jaw center (m).
    pub wrist_to_tip: f64,
    /// Orientation of the sensor frame relative to the base.
    pub mount: RotationSpec,
    pub gripper_mass: f64,
    /// Gripper COM in the wrist frame.
    pub gripper_com: Vec3,
}

impl Default for GripGeometry {
    fn default() -> Self {
        Self {
            wrist_to_tip: 0.15,
            mount: RotationSpec::default(),
            gripper_mass: 1.0,
            gripper_com: Vec3::new(0.0, 0.0, -0.07),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    /// N/m
    pub spring_stiffness: f64,
    pub descent_step: f64,
    /// Known upper bound on tower height; first descents start here.
    pub approach_height: f64,
    pub floor_height: f64,
    pub stability_margin: f64,
    pub contact_pitch: f64,
    pub boundary_samples: usize,
    /// Samples within this much of the deepest interference join the patch.
    pub patch_tolerance: f64,
    /// Patches with smaller hull area count as point contacts (m^2).
    pub min_patch_area: f64,
    pub raster_pitch: f64,
    pub workspace: Bounds,
    /// Descent steps kept for contact plots.
    pub profile_steps: usize,
    pub gravity: f64,
    /// Height of the flat pickup station used for the flat reference.
    pub pickup_height: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            spring_stiffness: 1e5,
            descent_step: 5e-4,
            approach_height: 0.3,
            floor_height: -0.05,
            stability_margin: 1e-3,
            contact_pitch: 1e-3,
            boundary_samples: 256,
            patch_tolerance: 1e-7,
            min_patch_area: 4e-6,
            raster_pitch: 2e-3,
            workspace: Bounds::square(0.2),
            profile_steps: 40,
            gravity: STANDARD_GRAVITY,
            pickup_height: 0.0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("spring_stiffness", self.spring_stiffness),
            ("descent_step", self.descent_step),
            ("contact_pitch", self.contact_pitch),
            ("raster_pitch", self.raster_pitch),
            ("gravity", self.gravity),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.stability_margin >= 0.0) {
            return Err(SimError::InvalidConfig("stability_margin must be >= 0".into()));
        }
        if self.approach_height <= self.floor_height {
            return Err(SimError::InvalidConfig("approach_height must exceed floor_height".into()));
        }
        if self.workspace.min.x > self.workspace.max.x || self.workspace.min.y > self.workspace.max.y {
            return Err(SimError::InvalidConfig("workspace min exceeds max".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactResult {
    /// Point where the resultant normal force acts (base frame).
    pub contact_point: Vec3,
    pub surface_normal: Vec3,
    pub penetration: f64,
    pub normal_force_magnitude: f64,
    /// Tower points tied for deepest interference.
    pub contact_patch: Vec<Vec3>,
}

impl ContactResult {
    pub fn normal_force(&self) -> Vec3 {
        self.surface_normal * self.normal_force_magnitude
    }

    /// Same geometry under a different spring force.
    pub fn with_force(&self, normal_force_magnitude: f64, penetration: f64) -> ContactResult {
        ContactResult {
            contact_point: self.contact_point,
            surface_normal: self.surface_normal,
            penetration,
            normal_force_magnitude,
            contact_patch: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescentStep {
    /// Tip height.
    pub z: f64,
    pub penetration: f64,
    pub normal_force: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    /// Tip position when the descent stopped.
    pub tip: Vec3,
    pub contact: ContactResult,
    /// Final `profile_steps` steps, oldest first.
    pub profile: Vec<DescentStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ReleaseOutcome {
    Settled { final_com: Vec3 },
    Toppled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BottomSample {
    offset: Vec2,
    depth: f64,
}

/// Gravity, gripper push and tower reaction on the held object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceBalance {
    pub gravity: Vec3,
    pub push: Vec3,
    pub normal: Vec3,
}

impl ForceBalance {
    pub fn residual(&self) -> Vec3 {
        self.gravity + self.push + self.normal
    }
}

#[derive(Debug, Clone)]
pub struct WorldState {
    config: WorldConfig,
    tower: SurfaceModel,
    placed: HeightField,
    held: HeldObject,
    grip: GripGeometry,
    mount: Mat3,
    bottom: Vec<BottomSample>,
    placed_coms: Vec<Vec3>,
}

const RASTER_PAD: f64 = 0.1;

impl WorldState {
    pub fn new(config: WorldConfig, tower: SurfaceModel, held: HeldObject, grip: GripGeometry) -> Result<Self, SimError> {
        config.validate()?;
        held.validate()?;
        let mount = grip.mount.to_matrix()?;
        let pad = Vec2::new(RASTER_PAD, RASTER_PAD);
        let placed = HeightField::covering(config.workspace.min - pad, config.workspace.max + pad, config.raster_pitch);
        let mut world = Self {
            config,
            tower,
            placed,
            held: held.clone(),
            grip,
            mount,
            bottom: Vec::new(),
            placed_coms: Vec::new(),
        };
        world.set_held(held)?;
        Ok(world)
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn held(&self) -> &HeldObject {
        &self.held
    }

    pub fn grip(&self) -> &GripGeometry {
        &self.grip
    }

    pub fn tower(&self) -> &SurfaceModel {
        &self.tower
    }

    pub fn placed_coms(&self) -> &[Vec3] {
        &self.placed_coms
    }

    /// Swaps the object in the gripper (a pick in simulation).
    pub fn set_held(&mut self, held: HeldObject) -> Result<(), SimError> {
        held.validate()?;
        self.bottom = held
            .footprint
            .sample_points(self.config.contact_pitch, self.config.boundary_samples)
            .into_iter()
            .filter_map(|offset| {
                held.bottom
                    .height(offset.x, offset.y)
                    .map(|depth| BottomSample { offset, depth })
            })
            .collect();
        self.held = held;
        Ok(())
    }

    /// Tower height including everything placed so far.
    pub fn surface(&self, x: f64, y: f64) -> Option<SurfaceSample> {
        match (self.tower.sample(x, y), self.placed.sample(x, y)) {
            (Some(a), Some(b)) => Some(if b.height > a.height { b } else { a }),
            (a, b) => a.or(b),
        }
    }

    /// World with the same object and gripper over flat ground.
    pub fn pickup_station(&self) -> Result<WorldState, SimError> {
        WorldState::new(
            self.config,
            SurfaceModel::Plane {
                height: self.config.pickup_height,
            },
            self.held.clone(),
            self.grip,
        )
    }

    /// `g_BW` for a tip at `tip`.
    pub fn wrist_pose(&self, tip: &Vec3) -> RigidTransform {
        let origin = tip + Vec3::new(0.0, 0.0, self.grip.wrist_to_tip);
        RigidTransform::new(self.mount, origin).expect("mount rotation validated at construction")
    }

    /// Pose of the gripper tip in the wrist frame, the calibrated
    /// sensor-to-tip transform. The COM is assumed to sit at the tip.
    pub fn wrist_to_tip(&self) -> RigidTransform {
        self.wrist_pose(&Vec3::zeros()).inverse()
    }

    pub fn true_com(&self, tip: &Vec3) -> Vec3 {
        tip + self.held.true_com_offset
    }

    /// Lowers the object at `tip_xy` from `start_z` in `descent_step`
    /// increments until the spring force reaches `threshold`.
    pub fn descend_until_contact(&self, tip_xy: Vec2, threshold: f64, start_z: f64) -> Result<Descent, SimError> {
        if !(threshold > 0.0) {
            return Err(SimError::BadThreshold(threshold));
        }
        let c = self.held.true_com_offset;
        let com_xy = Vec2::new(tip_xy.x + c.x, tip_xy.y + c.y);

        // m_i: tip height at which sample i touches the tower.
        let touches: Vec<(usize, f64, SurfaceSample)> = self
            .bottom
            .iter()
            .enumerate()
            .filter_map(|(i, b)| {
                let p = com_xy + b.offset;
                self.surface(p.x, p.y).map(|s| (i, s.height + b.depth - c.z, s))
            })
            .collect();
        let floor = self.config.floor_height;
        let Some(&(_, top, deepest_surface)) = touches
            .iter()
            .fold(None, |best: Option<&(usize, f64, SurfaceSample)>, t| match best {
                Some(b) if b.1 >= t.1 => Some(b),
                _ => Some(t),
            })
        else {
            return Err(SimError::NoContactWithinRange { floor });
        };

        if top - start_z > 0.0 {
            return Err(SimError::StartsInContact {
                penetration: top - start_z,
            });
        }

        let k = self.config.spring_stiffness;
        let mut profile = VecDeque::with_capacity(self.config.profile_steps + 1);
        let mut step = 0u64;
        let (z, penetration, force) = loop {
            let z = start_z - step as f64 * self.config.descent_step;
            if z < floor {
                return Err(SimError::NoContactWithinRange { floor });
            }
            let penetration = (top - z).max(0.0);
            let force = k * penetration;
            if self.config.profile_steps > 0 {
                if profile.len() == self.config.profile_steps {
                    profile.pop_front();
                }
                profile.push_back(DescentStep {
                    z,
                    penetration,
                    normal_force: force,
                });
            }
            if force >= threshold {
                break (z, penetration, force);
            }
            step += 1;
        };

        let tol = self.config.patch_tolerance;
        let patch: Vec<Vec3> = touches
            .iter()
            .filter(|t| t.1 >= top - tol)
            .map(|&(i, _, s)| {
                let p = com_xy + self.bottom[i].offset;
                Vec3::new(p.x, p.y, s.height)
            })
            .collect();
        let contact_point = patch.iter().sum::<Vec3>() / patch.len() as f64;
        Ok(Descent {
            tip: Vec3::new(tip_xy.x, tip_xy.y, z),
            contact: ContactResult {
                contact_point,
                surface_normal: deepest_surface.normal(),
                penetration,
                normal_force_magnitude: force,
                contact_patch: patch,
            },
            profile: profile.into(),
        })
    }

    /// Wrench the payload puts on the wrist, in the wrist frame.
    ///
    /// The tower reaction and the object's weight are formed about the true
    /// COM and carried to the wrist through the true grip geometry; the
    /// gripper's own weight is added in the wrist frame.
    pub fn true_wrench_at_wrist(&self, tip: &Vec3, contact: Option<&ContactResult>) -> Wrench {
        let g = self.config.gravity;
        let com = self.true_com(tip);
        let g_bw = self.wrist_pose(tip);
        let g_rw = RigidTransform::from_translation(com).inverse().compose(&g_bw);

        let mut at_com = Wrench::from_force(Vec3::new(0.0, 0.0, -self.held.mass * g));
        if let Some(contact) = contact {
            let r = contact.contact_point - com;
            let f = contact.normal_force();
            at_com += Wrench::new(r.cross(&f), f);
        }
        let gripper_force = g_bw
            .rotation()
            .transpose()
            * Vec3::new(0.0, 0.0, -self.grip.gripper_mass * g);
        transform_wrench(&g_rw, &at_com) + Wrench::point_force(&self.grip.gripper_com, &gripper_force)
    }

    /// Forces on the held object in the base frame; the gripper push closes
    /// the balance.
    pub fn force_balance(&self, contact: Option<&ContactResult>) -> ForceBalance {
        let gravity = Vec3::new(0.0, 0.0, -self.held.mass * self.config.gravity);
        let normal = contact.map_or(Vec3::zeros(), |c| c.normal_force());
        ForceBalance {
            gravity,
            push: -(gravity + normal),
            normal,
        }
    }

    pub fn support(&self, contact: &ContactResult) -> Support {
        let patch: Vec<Vec2> = contact.contact_patch.iter().map(|p| Vec2::new(p.x, p.y)).collect();
        let point = Vec2::new(contact.contact_point.x, contact.contact_point.y);
        Support::classify(&patch, point, self.config.min_patch_area)
    }

    /// Ground-truth stability of opening the gripper with the tip at `tip`.
    pub fn stability_oracle(&self, tip: &Vec3, contact: &ContactResult) -> bool {
        let com = self.true_com(tip);
        self.support(contact)
            .holds(&Vec2::new(com.x, com.y), self.config.stability_margin)
    }

    /// Opens the gripper at the end of `descent`.
    pub fn release(&mut self, descent: &Descent) -> ReleaseOutcome {
        if !self.stability_oracle(&descent.tip, &descent.contact) {
            return ReleaseOutcome::Toppled;
        }
        let rest_tip = descent.tip + Vec3::new(0.0, 0.0, descent.contact.penetration);
        let final_com = self.true_com(&rest_tip);
        let top = final_com.z + self.held.top_height;
        let footprint = self.held.footprint;
        let e = Vec2::new(footprint.extent(), footprint.extent());
        let center = Vec2::new(final_com.x, final_com.y);
        self.placed.raise_where(center - e, center + e, |x, y| {
            footprint.contains(x - center.x, y - center.y).then_some(top)
        });
        self.placed_coms.push(final_com);
        ReleaseOutcome::Settled { final_com }
    }
}
