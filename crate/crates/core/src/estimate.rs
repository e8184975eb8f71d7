//! Contact estimation from a calibrated wrench at the object's center of mass.
//!
//! Everything here works in the COM frame `R`, which shares its orientation
//! with the base frame because the end effector never rotates. Quasi-static
//! force balance gives the normal force, the moment `tau = r x F_N` gives the
//! tangent-plane part of the contact offset, and the normal itself gives the
//! direction within the tangent plane that climbs fastest.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spatial::{Vec3, Wrench};

/// Below this normal-force magnitude (N) the estimate is noise dominated.
pub const DEFAULT_FORCE_FLOOR: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("normal force {magnitude:.4} N is at or below the floor {floor} N")]
    DegenerateNormalForce { magnitude: f64, floor: f64 },
}

/// Forces acting on the held object other than the tower's reaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceBudget {
    /// Weight of the object and gripper, measured while hovering.
    pub gravity: Vec3,
    /// Force the gripper applies on the object.
    pub push: Vec3,
}

impl ForceBudget {
    /// Builds the budget from a hover-subtracted COM-frame reading.
    ///
    /// The sensor reports the load the payload puts on the wrist, so the
    /// gripper's push is the negated total load, and the total load is the
    /// calibrated force plus the hover weight.
    pub fn from_calibrated(calibrated_force: &Vec3, gravity: &Vec3) -> Self {
        Self {
            gravity: *gravity,
            push: -(calibrated_force + gravity),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEstimate {
    pub normal_force: Vec3,
    pub normal_dir: Vec3,
    /// Tangent-plane part of the contact point relative to the COM (m).
    pub contact_offset_tangent: Vec3,
    /// Unnormalized flat-seeking direction; zero at a flat contact.
    pub flat_dir: Vec3,
    pub press_magnitude: f64,
}

/// `F_N = -(F_g + F_push)`.
pub fn solve_normal_force(budget: &ForceBudget) -> Vec3 {
    -(budget.gravity + budget.push)
}

/// `d = z - (n . z) n`, equal to `-n x (n x z)`.
///
/// Left unnormalized so the step it drives shrinks as the contact flattens.
pub fn flat_direction(n_hat: &Vec3) -> Vec3 {
    debug_assert!((n_hat.norm() - 1.0).abs() < 1e-9, "n_hat must be unit");
    let d = Vec3::z() - n_hat * n_hat.z;
    // n = ±z exactly leaves rounding dust in x/y; report a clean zero.
    if n_hat.x == 0.0 && n_hat.y == 0.0 {
        Vec3::zeros()
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEstimator {
    pub force_floor: f64,
}

impl Default for ContactEstimator {
    fn default() -> Self {
        Self {
            force_floor: DEFAULT_FORCE_FLOOR,
        }
    }
}

impl ContactEstimator {
    pub fn new(force_floor: f64) -> Self {
        Self { force_floor }
    }

    fn check(&self, f_n: &Vec3) -> Result<f64, EstimateError> {
        let magnitude = f_n.norm();
        if !(magnitude > self.force_floor) {
            return Err(EstimateError::DegenerateNormalForce {
                magnitude,
                floor: self.force_floor,
            });
        }
        Ok(magnitude)
    }

    /// `r_T = (F_N x tau) / |F_N|^2`.
    pub fn recover_contact_offset(&self, f_n: &Vec3, torque: &Vec3) -> Result<Vec3, EstimateError> {
        let magnitude = self.check(f_n)?;
        Ok(f_n.cross(torque) / (magnitude * magnitude))
    }

    /// Full estimate from a hover-subtracted wrench in the COM frame.
    pub fn estimate_contact(&self, calibrated: &Wrench, gravity: &Vec3) -> Result<ContactEstimate, EstimateError> {
        let budget = ForceBudget::from_calibrated(&calibrated.force, gravity);
        let normal_force = solve_normal_force(&budget);
        let press_magnitude = self.check(&normal_force)?;
        let normal_dir = normal_force / press_magnitude;
        let contact_offset_tangent = self.recover_contact_offset(&normal_force, &calibrated.torque)?;
        Ok(ContactEstimate {
            normal_force,
            normal_dir,
            contact_offset_tangent,
            flat_dir: flat_direction(&normal_dir),
            press_magnitude,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::tangent_projection;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vertical_balance() {
        let b = ForceBudget { gravity: Vec3::new(0.0, 0.0, -5.0), push: Vec3::new(0.0, 0.0, -5.0) };
        assert_eq!(solve_normal_force(&b), Vec3::new(0.0, 0.0, 10.0));
        let held = ForceBudget { gravity: Vec3::new(0.0, 0.0, -5.0), push: Vec3::new(0.0, 0.0, 5.0) };
        assert_eq!(solve_normal_force(&held), Vec3::zeros());
    }

    #[test]
    fn offset_recovery_drops_normal_component() {
        let est = ContactEstimator::default();
        let f_n = Vec3::new(0.0, 0.0, 10.0);
        let r = Vec3::new(0.02, -0.01, -0.05);
        let tau = r.cross(&f_n);
        // Worked by hand: (ry Fz - rz Fy, rz Fx - rx Fz, rx Fy - ry Fx).
        assert_abs_diff_eq!(tau, Vec3::new(-0.1, -0.2, 0.0), epsilon = 1e-15);
        let r_t = est.recover_contact_offset(&f_n, &tau).unwrap();
        assert_abs_diff_eq!(r_t, Vec3::new(0.02, -0.01, 0.0), epsilon = 1e-15);
        assert_eq!(est.recover_contact_offset(&f_n, &Vec3::zeros()).unwrap(), Vec3::zeros());
    }

    #[test]
    fn positive_y_moment_means_contact_behind_com() {
        // F x tau = (0,0,10) x (0,0.2,0) = (-2,0,0); divided by 100.
        let r_t = ContactEstimator::default()
            .recover_contact_offset(&Vec3::new(0.0, 0.0, 10.0), &Vec3::new(0.0, 0.2, 0.0))
            .unwrap();
        assert_abs_diff_eq!(r_t, Vec3::new(-0.02, 0.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn degenerate_force_is_rejected() {
        let est = ContactEstimator::default();
        assert!(matches!(
            est.recover_contact_offset(&Vec3::zeros(), &Vec3::x()),
            Err(EstimateError::DegenerateNormalForce { .. })
        ));
        assert!(est.recover_contact_offset(&Vec3::new(0.0, 0.0, 1.0), &Vec3::x()).is_err());
        assert!(est.recover_contact_offset(&Vec3::new(0.0, 0.0, f64::NAN), &Vec3::x()).is_err());
    }

    #[test]
    fn flat_direction_examples() {
        assert_eq!(flat_direction(&Vec3::z()), Vec3::zeros());
        assert_eq!(flat_direction(&-Vec3::z()), Vec3::zeros());
        assert_eq!(flat_direction(&Vec3::x()), Vec3::z());
        let a = 30f64.to_radians();
        let n = Vec3::new(a.sin(), 0.0, a.cos());
        let d = flat_direction(&n);
        assert!(d.z > 0.0 && d.x < 0.0);
        assert!(d.dot(&n).abs() < 1e-12);
    }

    #[test]
    fn estimate_bundles_pieces() {
        let est = ContactEstimator::default();
        let g = Vec3::new(0.0, 0.0, -12.0);
        let flat = est
            .estimate_contact(&Wrench::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 10.0)), &g)
            .unwrap();
        assert_eq!(flat.contact_offset_tangent, Vec3::zeros());
        assert_eq!(flat.flat_dir, Vec3::zeros());
        assert_abs_diff_eq!(flat.press_magnitude, 10.0, epsilon = 1e-12);

        let tilted = Vec3::new(3.0, -1.0, 9.0);
        let r = Vec3::new(0.01, 0.03, -0.02);
        let e = est.estimate_contact(&Wrench::new(r.cross(&tilted), tilted), &g).unwrap();
        let n = tilted.normalize();
        assert_abs_diff_eq!(e.contact_offset_tangent, tangent_projection(&r, &n), epsilon = 1e-14);
        assert!(e.contact_offset_tangent.dot(&e.normal_dir).abs() < 1e-12);
        assert!(e.flat_dir.dot(&e.normal_dir).abs() < 1e-12);

        let none = est.estimate_contact(&Wrench::zero(), &g);
        assert!(none.is_err());
    }
}
