//! Human reference frame, limb geometry and the vector algebra behind them.
//!
//! The body frame is fixed to the wearer's trunk: x forward, y left, z up,
//! with the origin at the T10 vertebra. Every limb is a single revolute joint
//! carrying a point mass at the tip of its link.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Result, SimError};

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        cross(self, other)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Right-handed cross product `a × b`.
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    Vec3::new(
        a.y * b.z - a.z * b.y,
        a.z * b.x - a.x * b.z,
        a.x * b.y - a.y * b.x,
    )
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl std::iter::Sum for Vec3 {
    fn sum<I: Iterator<Item = Vec3>>(iter: I) -> Vec3 {
        iter.fold(Vec3::ZERO, |acc, v| acc + v)
    }
}

/// Anthropometric parameters of the wearer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumanModel {
    pub body_mass: f64,
    pub thumb_tip_reach: f64,
    /// Moment reference point (T10), body frame.
    pub reference_point: Vec3,
    pub gravity: Vec3,
}

impl HumanModel {
    pub const DEFAULT_BODY_MASS: f64 = 80.0;
    pub const DEFAULT_THUMB_TIP_REACH: f64 = 0.80;

    /// Builds a model whose gravity norm must lie in [9.0, 10.5] m/s².
    pub fn new(
        body_mass: f64,
        thumb_tip_reach: f64,
        reference_point: Vec3,
        gravity: Vec3,
    ) -> Result<Self> {
        let human = HumanModel {
            body_mass,
            thumb_tip_reach,
            reference_point,
            gravity,
        };
        human.validate()?;
        let g = gravity.norm();
        if !(9.0..=10.5).contains(&g) {
            return Err(SimError::invalid(
                "gravity",
                format!("norm {g} m/s² outside [9.0, 10.5]"),
            ));
        }
        Ok(human)
    }

    /// Same as [`HumanModel::new`] but accepts any finite gravity vector.
    pub fn with_any_gravity(
        body_mass: f64,
        thumb_tip_reach: f64,
        reference_point: Vec3,
        gravity: Vec3,
    ) -> Result<Self> {
        let human = HumanModel {
            body_mass,
            thumb_tip_reach,
            reference_point,
            gravity,
        };
        human.validate()?;
        Ok(human)
    }

    fn validate(&self) -> Result<()> {
        if !(self.body_mass > 0.0 && self.body_mass.is_finite()) {
            return Err(SimError::invalid("body_mass", "must be positive"));
        }
        if !(self.thumb_tip_reach > 0.0 && self.thumb_tip_reach.is_finite()) {
            return Err(SimError::invalid("thumb_tip_reach", "must be positive"));
        }
        if !self.reference_point.is_finite() || !self.gravity.is_finite() {
            return Err(SimError::invalid("human model", "non-finite vector"));
        }
        Ok(())
    }
}

impl Default for HumanModel {
    fn default() -> Self {
        HumanModel {
            body_mass: Self::DEFAULT_BODY_MASS,
            thumb_tip_reach: Self::DEFAULT_THUMB_TIP_REACH,
            reference_point: Vec3::ZERO,
            gravity: Vec3::new(0.0, 0.0, -STANDARD_GRAVITY),
        }
    }
}

/// One revolute limb: a point mass at the end of a link that rotates about a
/// body-fixed axis through `mount_point`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimbModel {
    pub id: u32,
    pub mount_point: Vec3,
    pub rotation_axis: Vec3,
    /// Link direction at zero joint angle; perpendicular to `rotation_axis`.
    pub zero_direction: Vec3,
    pub length: f64,
    pub mass: f64,
}

impl LimbModel {
    pub fn new(
        id: u32,
        mount_point: Vec3,
        rotation_axis: Vec3,
        zero_direction: Vec3,
        length: f64,
        mass: f64,
    ) -> Result<Self> {
        let limb = LimbModel {
            id,
            mount_point,
            rotation_axis,
            zero_direction,
            length,
            mass,
        };
        limb.validate()?;
        Ok(limb)
    }

    pub fn validate(&self) -> Result<()> {
        let what = || format!("limb {}", self.id);
        if !self.mount_point.is_finite()
            || !self.rotation_axis.is_finite()
            || !self.zero_direction.is_finite()
        {
            return Err(SimError::invalid(what(), "non-finite vector"));
        }
        if (self.rotation_axis.norm() - 1.0).abs() > UNIT_TOL {
            return Err(SimError::invalid(
                what(),
                "rotation_axis is not a unit vector",
            ));
        }
        if (self.zero_direction.norm() - 1.0).abs() > UNIT_TOL {
            return Err(SimError::invalid(
                what(),
                "zero_direction is not a unit vector",
            ));
        }
        if self.rotation_axis.dot(self.zero_direction).abs() > UNIT_TOL {
            return Err(SimError::invalid(
                what(),
                "zero_direction is not perpendicular to rotation_axis",
            ));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(SimError::invalid(what(), "length must be positive"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(SimError::invalid(what(), "mass must be positive"));
        }
        Ok(())
    }

    /// The four-limb layout used when a scenario does not list its limbs.
    ///
    /// Upper pair at z = +0.25 m, lower pair at z = -0.25 m, odd ids on the
    /// left. At zero angle every link points straight out to its side, so the
    /// neutral posture exerts no static moment. Left limbs yaw about +z and
    /// right limbs about -z, which makes a positive angle sweep the link
    /// toward the wearer's back on either side.
    pub fn default_set(human: &HumanModel, mass_fraction: f64) -> Vec<LimbModel> {
        [
            (1, 0.25, 0.25),
            (2, -0.25, 0.25),
            (3, 0.25, -0.25),
            (4, -0.25, -0.25),
        ]
        .into_iter()
        .map(|(id, y, z): (u32, f64, f64)| {
            let side = y.signum();
            LimbModel {
                id,
                mount_point: Vec3::new(0.0, y, z),
                rotation_axis: Vec3::new(0.0, 0.0, side),
                zero_direction: Vec3::new(0.0, side, 0.0),
                length: human.thumb_tip_reach,
                mass: mass_fraction * human.body_mass,
            }
        })
        .collect()
    }
}

/// Angle (rad), rate (rad/s) and acceleration (rad/s²) of a 1-DOF joint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointState {
    pub angle: f64,
    pub velocity: f64,
    pub acceleration: f64,
}

impl JointState {
    pub const fn new(angle: f64, velocity: f64, acceleration: f64) -> Self {
        JointState {
            angle,
            velocity,
            acceleration,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.angle.is_finite() && self.velocity.is_finite() && self.acceleration.is_finite()
    }
}

/// Rodrigues rotation of `v` about the unit vector `axis` by `angle`.
pub fn rotate(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + cross(axis, v) * s + axis * (axis.dot(v) * (1.0 - c))
}

/// Center of mass of the limb at `angle`, body frame.
pub fn limb_com_position(limb: &LimbModel, angle: f64) -> Vec3 {
    limb.mount_point + rotate(limb.zero_direction, limb.rotation_axis, angle) * limb.length
}

/// Acceleration of the limb's center of mass relative to the body frame:
/// tangential `α × ρ` plus centripetal `ω × (ω × ρ)`.
pub fn limb_com_acceleration(limb: &LimbModel, state: &JointState) -> Vec3 {
    let rho = limb_com_position(limb, state.angle) - limb.mount_point;
    let omega = limb.rotation_axis * state.velocity;
    let alpha = limb.rotation_axis * state.acceleration;
    cross(alpha, rho) + cross(omega, cross(omega, rho))
}

/// Vector from the wearer's reference point to the limb's center of mass.
pub fn moment_arm(limb: &LimbModel, angle: f64, human: &HumanModel) -> Vec3 {
    limb_com_position(limb, angle) - human.reference_point
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn planar_limb() -> LimbModel {
        LimbModel::new(
            1,
            Vec3::ZERO,
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::new(1.0, 0.0, 0.0),
            0.8,
            8.0,
        )
        .unwrap()
    }

    fn assert_vec_eq(a: Vec3, b: Vec3, tol: f64) {
        assert_abs_diff_eq!(a.x, b.x, epsilon = tol);
        assert_abs_diff_eq!(a.y, b.y, epsilon = tol);
        assert_abs_diff_eq!(a.z, b.z, epsilon = tol);
    }

    #[test]
    fn cross_examples() {
        assert_eq!(
            cross(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)),
            Vec3::new(0.0, 0.0, 1.0)
        );
        assert_eq!(
            cross(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.0, -9.81)),
            Vec3::new(0.0, 9.81, 0.0)
        );
        let a = Vec3::new(0.3, -1.7, 2.2);
        assert_eq!(cross(a, a), Vec3::ZERO);
    }

    #[test]
    fn com_position_quarter_turns() {
        let limb = planar_limb();
        assert_vec_eq(
            limb_com_position(&limb, 0.0),
            Vec3::new(0.8, 0.0, 0.0),
            1e-15,
        );
        assert_vec_eq(
            limb_com_position(&limb, FRAC_PI_2),
            Vec3::new(0.0, 0.8, 0.0),
            1e-15,
        );
        assert_vec_eq(
            limb_com_position(&limb, PI),
            Vec3::new(-0.8, 0.0, 0.0),
            1e-15,
        );
    }

    #[test]
    fn com_acceleration_examples() {
        let limb = planar_limb();
        assert_eq!(
            limb_com_acceleration(&limb, &JointState::default()),
            Vec3::ZERO
        );
        let centripetal = limb_com_acceleration(&limb, &JointState::new(0.0, 1.0, 0.0));
        assert_vec_eq(centripetal, Vec3::new(-0.8, 0.0, 0.0), 1e-15);
        let tangential = limb_com_acceleration(&limb, &JointState::new(0.0, 0.0, 2.0));
        assert_vec_eq(tangential, Vec3::new(0.0, 1.6, 0.0), 1e-15);
    }

    #[test]
    fn moment_arm_examples() {
        let human = HumanModel::default();
        assert_vec_eq(
            moment_arm(&planar_limb(), 0.0, &human),
            Vec3::new(0.8, 0.0, 0.0),
            1e-15,
        );

        let mut at_com = human;
        at_com.reference_point = Vec3::new(0.8, 0.0, 0.0);
        assert_eq!(moment_arm(&planar_limb(), 0.0, &at_com), Vec3::ZERO);

        // COM placed at (0.5, 0.2, -0.1) by the mount point at zero angle.
        let mut limb = planar_limb();
        limb.mount_point = Vec3::new(-0.3, 0.2, -0.1);
        let mut raised = human;
        raised.reference_point = Vec3::new(0.0, 0.0, 0.3);
        assert_vec_eq(
            moment_arm(&limb, 0.0, &raised),
            Vec3::new(0.5, 0.2, -0.4),
            1e-15,
        );
    }

    #[test]
    fn limb_validation_rejects_bad_geometry() {
        let ok = planar_limb();
        let mut bad = ok;
        bad.rotation_axis = Vec3::new(0.0, 0.0, 2.0);
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.zero_direction = Vec3::new(0.0, 0.0, 1.0);
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.mass = 0.0;
        assert!(bad.validate().is_err());
        let mut bad = ok;
        bad.length = -1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn default_layout() {
        let human = HumanModel::default();
        let limbs = LimbModel::default_set(&human, 0.1);
        assert_eq!(limbs.len(), 4);
        for limb in &limbs {
            limb.validate().unwrap();
            assert_eq!(limb.mass, 8.0);
            assert_eq!(limb.length, 0.8);
            // A quarter turn puts every link directly behind its mount.
            let back = limb_com_position(limb, FRAC_PI_2) - limb.mount_point;
            assert_vec_eq(back, Vec3::new(-0.8, 0.0, 0.0), 1e-15);
        }
    }

    #[test]
    fn human_validation() {
        assert!(HumanModel::new(80.0, 0.8, Vec3::ZERO, Vec3::new(0.0, 0.0, -9.81)).is_ok());
        assert!(HumanModel::new(80.0, 0.8, Vec3::ZERO, Vec3::new(0.0, 0.0, -1.0)).is_err());
        assert!(HumanModel::with_any_gravity(80.0, 0.8, Vec3::ZERO, Vec3::ZERO).is_ok());
        assert!(HumanModel::new(0.0, 0.8, Vec3::ZERO, Vec3::new(0.0, 0.0, -9.81)).is_err());
    }

    fn unit_vec() -> impl Strategy<Value = Vec3> {
        (0.0..2.0 * PI, -1.0f64..1.0).prop_map(|(phi, z)| {
            let r = (1.0 - z * z).sqrt();
            Vec3::new(r * phi.cos(), r * phi.sin(), z)
        })
    }

    /// An axis plus a unit vector perpendicular to it.
    fn frame() -> impl Strategy<Value = (Vec3, Vec3)> {
        (unit_vec(), unit_vec()).prop_filter_map("degenerate", |(axis, v)| {
            let perp = v - axis * axis.dot(v);
            let n = perp.norm();
            (n > 1e-3).then(|| (axis, perp * (1.0 / n)))
        })
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-10.0f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn rotation_preserves_length(
            (axis, zero) in frame(),
            mount in vec3(),
            length in 0.05f64..2.0,
            angle in -10.0f64..10.0,
        ) {
            let limb = LimbModel::new(1, mount, axis, zero, length, 1.0).unwrap();
            let d = (limb_com_position(&limb, angle) - mount).norm();
            prop_assert!((d - length).abs() <= 1e-9 * length);
        }

        #[test]
        fn position_is_two_pi_periodic((axis, zero) in frame(), angle in -10.0f64..10.0) {
            let limb = LimbModel::new(1, Vec3::ZERO, axis, zero, 0.8, 1.0).unwrap();
            let a = limb_com_position(&limb, angle);
            let b = limb_com_position(&limb, angle + 2.0 * PI);
            prop_assert!((a - b).norm() < 1e-9);
        }

        #[test]
        fn cross_identities(a in vec3(), b in vec3()) {
            let c = cross(a, b);
            let scale = a.norm() * b.norm() + f64::MIN_POSITIVE;
            prop_assert!((c + cross(b, a)).norm() <= 1e-12 * scale);
            prop_assert!(c.dot(a).abs() <= 1e-12 * scale * a.norm());
            prop_assert!(c.dot(b).abs() <= 1e-12 * scale * b.norm());
        }

        #[test]
        fn acceleration_scaling(
            (axis, zero) in frame(),
            angle in -3.0f64..3.0,
            velocity in -3.0f64..3.0,
            accel in -3.0f64..3.0,
            c in 0.1f64..5.0,
        ) {
            let limb = LimbModel::new(1, Vec3::ZERO, axis, zero, 0.8, 1.0).unwrap();
            let at = |w: f64, a: f64| limb_com_acceleration(&limb, &JointState::new(angle, w, a));
            // Linear in the joint acceleration at fixed angle and rate.
            let tangential = at(velocity, accel) - at(velocity, 0.0);
            let scaled = at(velocity, c * accel) - at(velocity, 0.0);
            prop_assert!((scaled - tangential * c).norm() <= 1e-12 * (1.0 + scaled.norm()));
            // Quadratic in the rate at zero acceleration.
            let centripetal = at(velocity, 0.0);
            let faster = at(c * velocity, 0.0);
            prop_assert!((faster - centripetal * (c * c)).norm() <= 1e-12 * (1.0 + faster.norm()));
        }
    }
}
