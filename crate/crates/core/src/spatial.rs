//! Frames, rigid transforms and wrench algebra.
//!
//! A [`RigidTransform`] `g_ab` is the pose of frame B expressed in frame A:
//! a point with coordinates `q_b` in B has coordinates `q_a = R q_b + p` in A.
//! Wrenches are stored torque first and are always taken about the origin of
//! the frame they are expressed in.
//!
//! With twists ordered (angular, linear) the adjoint of `g_ab` is
//!
//! ```text
//!   Ad = | R      0 |
//!        | [p]R   R |
//! ```
//!
//! so a body twist maps as `V_a = Ad V_b`, and a wrench is carried from A to B
//! by the transpose, `F_b = Ad^T F_a`:
//!
//! ```text
//!   tau_b = R^T (tau_a - p x f_a)
//!   f_b   = R^T f_a
//! ```
//!
//! The pairing `F . V` is frame independent under this pair of maps.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::{Matrix3, Matrix6, Rotation3, Unit, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthonormality tolerance checked when a transform is constructed.
pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Drift that triggers re-orthonormalization after composition.
pub const RENORMALIZE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    #[error("rotation is not orthonormal (|R^T R - I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("rotation has determinant {det}, expected +1")]
    NotProperRotation { det: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("frame mismatch: expected {expected}, found {found}")]
    FrameMismatch { expected: FrameId, found: FrameId },
    #[error("rotation axis has zero length")]
    ZeroAxis,
}

/// Named frames used throughout the placement pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameId {
    /// Robot base, the workspace frame.
    Base,
    /// Wrist, where the force-torque sensor reports.
    Wrist,
    /// Center of the gripper jaws.
    GripperTip,
    /// Center of mass of the held object.
    RockCom,
    /// Contact point on the tower.
    Contact,
}

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FrameId::Base => "B",
            FrameId::Wrist => "W",
            FrameId::GripperTip => "T",
            FrameId::RockCom => "R",
            FrameId::Contact => "C",
        };
        f.write_str(s)
    }
}

/// Element of SE(3) stored as a rotation matrix and a translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Mat3,
    translation: Vec3,
}

fn orthonormal_deviation(r: &Mat3) -> f64 {
    (r.transpose() * r - Mat3::identity()).norm()
}

fn orthonormalize(r: &Mat3) -> Mat3 {
    let svd = r.svd(true, true);
    let (u, v_t) = (svd.u.expect("svd u"), svd.v_t.expect("svd v_t"));
    let mut out = u * v_t;
    if out.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        out = u * v_t;
    }
    out
}

impl RigidTransform {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, SpatialError> {
        if !rotation.iter().all(|v| v.is_finite()) {
            return Err(SpatialError::NonFinite("rotation"));
        }
        if !translation.iter().all(|v| v.is_finite()) {
            return Err(SpatialError::NonFinite("translation"));
        }
        let deviation = orthonormal_deviation(&rotation);
        if deviation >= ORTHONORMAL_TOL {
            return Err(SpatialError::NotOrthonormal { deviation });
        }
        let det = rotation.determinant();
        if det <= 0.0 {
            return Err(SpatialError::NotProperRotation { det });
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation,
        }
    }

    /// Rotation of `angle` radians about `axis`, followed by `translation`.
    pub fn from_axis_angle(axis: Vec3, angle: f64, translation: Vec3) -> Result<Self, SpatialError> {
        if axis.norm() == 0.0 {
            return Err(SpatialError::ZeroAxis);
        }
        let rot = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self::new(*rot.matrix(), translation)
    }

    /// Rotation from a (not necessarily normalized) quaternion `w + xi + yj + zk`.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64, translation: Vec3) -> Result<Self, SpatialError> {
        let q = nalgebra::Quaternion::new(w, x, y, z);
        if q.norm() == 0.0 {
            return Err(SpatialError::ZeroAxis);
        }
        let uq = UnitQuaternion::from_quaternion(q);
        Self::new(*uq.to_rotation_matrix().matrix(), translation)
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// `g_ab * g_bc = g_ac`.
    pub fn compose(&self, g_bc: &RigidTransform) -> RigidTransform {
        let mut rotation = self.rotation * g_bc.rotation;
        if orthonormal_deviation(&rotation) > RENORMALIZE_TOL {
            rotation = orthonormalize(&rotation);
        }
        RigidTransform {
            rotation,
            translation: self.rotation * g_bc.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    /// 6x6 adjoint with (angular, linear) ordering.
    pub fn adjoint(&self) -> Matrix6<f64> {
        let mut ad = Matrix6::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.rotation);
        ad.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&(skew(&self.translation) * self.rotation));
        ad
    }

    /// Max absolute entry difference to `other`.
    pub fn max_abs_diff(&self, other: &RigidTransform) -> f64 {
        let dr = (self.rotation - other.rotation).amax();
        let dp = (self.translation - other.translation).amax();
        dr.max(dp)
    }
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Mul for RigidTransform {
    type Output = RigidTransform;

    fn mul(self, rhs: RigidTransform) -> RigidTransform {
        self.compose(&rhs)
    }
}

pub fn compose(g_ab: &RigidTransform, g_bc: &RigidTransform) -> RigidTransform {
    g_ab.compose(g_bc)
}

pub fn invert(g: &RigidTransform) -> RigidTransform {
    g.inverse()
}

/// Cross-product matrix: `skew(a) * b == a.cross(&b)`.
pub fn skew(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Torque and force, torque first.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub torque: Vec3,
    pub force: Vec3,
}

impl Wrench {
    pub fn new(torque: Vec3, force: Vec3) -> Self {
        Self { torque, force }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_force(force: Vec3) -> Self {
        Self {
            torque: Vec3::zeros(),
            force,
        }
    }

    /// Wrench about the frame origin produced by `force` acting at `point`.
    pub fn point_force(point: &Vec3, force: &Vec3) -> Self {
        Self {
            torque: point.cross(force),
            force: *force,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.torque.iter().chain(self.force.iter()).all(|v| v.is_finite())
    }

    pub fn to_vector6(&self) -> Vector6<f64> {
        Vector6::new(
            self.torque.x,
            self.torque.y,
            self.torque.z,
            self.force.x,
            self.force.y,
            self.force.z,
        )
    }

    pub fn from_vector6(v: &Vector6<f64>) -> Self {
        Self {
            torque: Vec3::new(v[0], v[1], v[2]),
            force: Vec3::new(v[3], v[4], v[5]),
        }
    }

    pub fn max_abs_diff(&self, other: &Wrench) -> f64 {
        (self.torque - other.torque)
            .amax()
            .max((self.force - other.force).amax())
    }
}

impl Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.torque + rhs.torque, self.force + rhs.force)
    }
}

impl AddAssign for Wrench {
    fn add_assign(&mut self, rhs: Wrench) {
        self.torque += rhs.torque;
        self.force += rhs.force;
    }
}

impl Sub for Wrench {
    type Output = Wrench;
    fn sub(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.torque - rhs.torque, self.force - rhs.force)
    }
}

impl SubAssign for Wrench {
    fn sub_assign(&mut self, rhs: Wrench) {
        self.torque -= rhs.torque;
        self.force -= rhs.force;
    }
}

impl Neg for Wrench {
    type Output = Wrench;
    fn neg(self) -> Wrench {
        Wrench::new(-self.torque, -self.force)
    }
}

impl Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, s: f64) -> Wrench {
        Wrench::new(self.torque * s, self.force * s)
    }
}

/// Rigid body velocity, angular first. Only used to check power invariance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist {
    pub angular: Vec3,
    pub linear: Vec3,
}

impl Twist {
    pub fn new(angular: Vec3, linear: Vec3) -> Self {
        Self { angular, linear }
    }

    /// Instantaneous power `tau . w + f . v`.
    pub fn power(&self, wrench: &Wrench) -> f64 {
        wrench.torque.dot(&self.angular) + wrench.force.dot(&self.linear)
    }
}

/// Carries a wrench expressed in A to the statically equivalent wrench in B
/// (`F_b = Ad_{g_ab}^T F_a`).
pub fn transform_wrench(g_ab: &RigidTransform, wrench_a: &Wrench) -> Wrench {
    let rt = g_ab.rotation.transpose();
    let p = &g_ab.translation;
    Wrench {
        torque: rt * (wrench_a.torque - p.cross(&wrench_a.force)),
        force: rt * wrench_a.force,
    }
}

/// Carries a body twist expressed in B into A (`V_a = Ad_{g_ab} V_b`).
pub fn transform_twist(g_ab: &RigidTransform, twist_b: &Twist) -> Twist {
    let angular = g_ab.rotation * twist_b.angular;
    Twist {
        angular,
        linear: g_ab.rotation * twist_b.linear + g_ab.translation.cross(&angular),
    }
}

/// Component of `v` orthogonal to the unit vector `n_hat`.
pub fn tangent_projection(v: &Vec3, n_hat: &Vec3) -> Vec3 {
    debug_assert!((n_hat.norm() - 1.0).abs() < 1e-9, "n_hat must be unit");
    v - n_hat * v.dot(n_hat)
}

/// A transform tagged with the frames it relates; `pose` is the target frame
/// expressed in `reference`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramedTransform {
    pub reference: FrameId,
    pub target: FrameId,
    pub pose: RigidTransform,
}

/// A wrench tagged with the frame it is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramedWrench {
    pub frame: FrameId,
    pub wrench: Wrench,
}

impl FramedTransform {
    pub fn new(reference: FrameId, target: FrameId, pose: RigidTransform) -> Self {
        Self {
            reference,
            target,
            pose,
        }
    }

    /// `g_ab ∘ g_bc`; fails unless the inner frames agree.
    pub fn then(&self, next: &FramedTransform) -> Result<FramedTransform, SpatialError> {
        if self.target != next.reference {
            return Err(SpatialError::FrameMismatch {
                expected: self.target,
                found: next.reference,
            });
        }
        Ok(FramedTransform {
            reference: self.reference,
            target: next.target,
            pose: self.pose.compose(&next.pose),
        })
    }

    pub fn inverse(&self) -> FramedTransform {
        FramedTransform {
            reference: self.target,
            target: self.reference,
            pose: self.pose.inverse(),
        }
    }

    /// Re-expresses a wrench given in `reference` in `target`.
    pub fn carry(&self, w: &FramedWrench) -> Result<FramedWrench, SpatialError> {
        if w.frame != self.reference {
            return Err(SpatialError::FrameMismatch {
                expected: self.reference,
                found: w.frame,
            });
        }
        Ok(FramedWrench {
            frame: self.target,
            wrench: transform_wrench(&self.pose, &w.wrench),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn rz(theta: f64) -> RigidTransform {
        RigidTransform::from_axis_angle(Vec3::z(), theta, Vec3::zeros()).unwrap()
    }

    #[test]
    fn compose_identity_and_inverse() {
        let g = RigidTransform::from_axis_angle(Vec3::new(1.0, 2.0, -0.5), 0.7, Vec3::new(0.3, -0.1, 2.0)).unwrap();
        assert_eq!(compose(&RigidTransform::identity(), &g), g);
        let id = compose(&g, &invert(&g));
        assert!(id.max_abs_diff(&RigidTransform::identity()) < 1e-12);
    }

    #[test]
    fn compose_translations_add() {
        let a = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.1));
        let b = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.2));
        let c = a.compose(&b);
        assert_eq!(*c.rotation(), Mat3::identity());
        assert_abs_diff_eq!(c.translation().z, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&RigidTransform::identity()), RigidTransform::identity());
        let t = invert(&RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0)));
        assert_eq!(*t.translation(), Vec3::new(-1.0, -2.0, -3.0));
        let r = invert(&rz(0.4));
        assert!(r.max_abs_diff(&rz(-0.4)) < 1e-15);
    }

    #[test]
    fn rejects_bad_rotation() {
        let mut m = Mat3::identity();
        m[(0, 1)] = 1e-6;
        assert!(matches!(RigidTransform::new(m, Vec3::zeros()), Err(SpatialError::NotOrthonormal { .. })));
        let reflect = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0));
        assert!(matches!(
            RigidTransform::new(reflect, Vec3::zeros()),
            Err(SpatialError::NotProperRotation { .. })
        ));
        assert!(RigidTransform::from_axis_angle(Vec3::zeros(), 1.0, Vec3::zeros()).is_err());
    }

    #[test]
    fn long_chain_stays_orthonormal() {
        let step = RigidTransform::from_axis_angle(Vec3::new(0.3, -1.0, 0.2), 0.123, Vec3::new(0.01, 0.0, 0.0)).unwrap();
        let mut g = RigidTransform::identity();
        for _ in 0..100_000 {
            g = g.compose(&step);
        }
        assert!(orthonormal_deviation(g.rotation()) < 1e-11);
        assert!(g.rotation().determinant() > 0.0);
    }

    #[test]
    fn identity_wrench_transform() {
        let w = Wrench::new(Vec3::new(0.1, -0.2, 0.3), Vec3::new(1.0, 2.0, -3.0));
        assert_eq!(transform_wrench(&RigidTransform::identity(), &w), w);
    }

    #[test]
    fn offset_force_produces_moment() {
        // 10 N along x applied at A, whose origin sits 0.1 m above B.
        let g_ab = RigidTransform::from_translation(Vec3::new(0.0, 0.0, -0.1));
        let w = transform_wrench(&g_ab, &Wrench::from_force(Vec3::new(10.0, 0.0, 0.0)));
        let direct = Vec3::new(0.0, 0.0, 0.1).cross(&Vec3::new(10.0, 0.0, 0.0));
        assert_abs_diff_eq!(w.torque, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(w.torque, Vec3::new(0.0, 1.0, 0.0), epsilon = 1e-15);
        assert_eq!(w.force, Vec3::new(10.0, 0.0, 0.0));
    }

    #[test]
    fn pure_rotation_rotates_parts_independently() {
        // B is A rotated +90 deg about z: A's x axis is B's -y axis.
        let g_ab = rz(FRAC_PI_2);
        let w_a = Wrench::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 0.0));
        let w_b = transform_wrench(&g_ab, &w_a);
        assert_abs_diff_eq!(w_b.torque, Vec3::new(0.0, -1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(w_b.force, Vec3::new(2.0, 0.0, 0.0), epsilon = 1e-15);
        let v_b = Twist::new(Vec3::new(0.3, 0.1, -0.2), Vec3::new(1.0, -1.0, 0.5));
        let v_a = transform_twist(&g_ab, &v_b);
        assert_abs_diff_eq!(v_b.power(&w_b), v_a.power(&w_a), epsilon = 1e-15);
    }

    #[test]
    fn adjoint_matrix_matches_closed_form() {
        let g = RigidTransform::from_axis_angle(Vec3::new(0.2, 0.4, 1.0), 1.1, Vec3::new(0.5, -0.3, 0.2)).unwrap();
        let w = Wrench::new(Vec3::new(0.5, -1.0, 0.25), Vec3::new(3.0, 1.0, -2.0));
        let via_matrix = Wrench::from_vector6(&(g.adjoint().transpose() * w.to_vector6()));
        assert!(via_matrix.max_abs_diff(&transform_wrench(&g, &w)) < 1e-14);
    }

    #[test]
    fn tangent_projection_examples() {
        let z = Vec3::z();
        assert_eq!(tangent_projection(&Vec3::new(1.0, 2.0, 3.0), &z), Vec3::new(1.0, 2.0, 0.0));
        assert_eq!(tangent_projection(&Vec3::new(0.0, 0.0, -4.0), &z), Vec3::zeros());
        let v = Vec3::new(1.0, -2.0, 0.0);
        assert_eq!(tangent_projection(&v, &z), v);
    }

    #[test]
    fn framed_transforms_check_inner_frames() {
        let g_bw = FramedTransform::new(FrameId::Base, FrameId::Wrist, RigidTransform::from_translation(Vec3::z()));
        let g_wt = FramedTransform::new(FrameId::Wrist, FrameId::GripperTip, RigidTransform::from_translation(-Vec3::z()));
        let g_bt = g_bw.then(&g_wt).unwrap();
        assert_eq!((g_bt.reference, g_bt.target), (FrameId::Base, FrameId::GripperTip));
        assert!(g_bt.pose.max_abs_diff(&RigidTransform::identity()) < 1e-15);
        assert!(matches!(g_wt.then(&g_bw), Err(SpatialError::FrameMismatch { .. })));

        let w = FramedWrench { frame: FrameId::Base, wrench: Wrench::from_force(Vec3::x()) };
        assert!(g_wt.carry(&w).is_err());
        let carried = g_bw.carry(&w).unwrap();
        assert_eq!(carried.frame, FrameId::Wrist);
        assert_eq!(g_bw.inverse().reference, FrameId::Wrist);
    }
}
