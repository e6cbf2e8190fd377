//! Plane-stress state descriptors.
//!
//! A material point of a thin sheet is described by the in-plane Cauchy
//! stress components `(s11, s22, t12)` in the rolling/transverse frame
//! (RD = 1-axis, TD = 2-axis); the through-thickness stress is zero.
//!
//! The descriptors computed here locate a stress state on the
//! (triaxiality, Lode angle parameter) plane:
//!
//! * triaxiality `eta = sigma_m / sigma_eq` with
//!   `sigma_m = (s11 + s22) / 3`,
//! * Lode angle parameter
//!   `theta_bar = 1 - (2/pi) * acos(27/2 * J3 / sigma_eq^3)`,
//!   where `J3` is the third invariant of the 3-D stress deviator
//!   (with `s33 = 0`).
//!
//! Canonical anchors (plane stress): uniaxial tension `(1/3, 1)`,
//! equibiaxial tension `(2/3, -1)`, pure shear `(0, 0)`.  For plane stress
//! `eta` is confined to `[-2/3, 2/3]` and `theta_bar` to `[-1, 1]`.
//!
//! Both descriptors are undefined at zero equivalent stress; the
//! corresponding accessors return `None` and callers must exclude such
//! degenerate points.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

/// In-plane Cauchy stress components in the material (RD/TD) frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlaneStress {
    pub s11: f64,
    pub s22: f64,
    pub t12: f64,
}

/// In-plane small-strain components in the material frame.
///
/// `e12` is the *tensorial* shear strain; the engineering shear is
/// `gamma = 2 * e12`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlaneStrain {
    pub e11: f64,
    pub e22: f64,
    pub e12: f64,
}

/// Principal decomposition of a plane-stress state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Principal {
    /// Major principal stress, `s1 >= s2`.
    pub s1: f64,
    /// Minor principal stress.
    pub s2: f64,
    /// Direction of the major principal stress w.r.t. RD, in
    /// `(-pi/2, pi/2]` radians.
    pub angle: f64,
}

/// Full descriptor of a (non-degenerate) plane-stress state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressDescriptor {
    pub s1: f64,
    pub s2: f64,
    /// Major principal direction w.r.t. RD, `(-pi/2, pi/2]` radians.
    pub angle: f64,
    pub sigma_eq: f64,
    pub eta: f64,
    pub theta_bar: f64,
}

impl PlaneStress {
    pub fn new(s11: f64, s22: f64, t12: f64) -> Self {
        Self { s11, s22, t12 }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// Principal stresses and major principal direction.
    ///
    /// For an isotropic state (`s11 == s22`, `t12 == 0`) the direction is
    /// indeterminate and `0` is returned by convention.
    pub fn principal(&self) -> Principal {
        let avg = 0.5 * (self.s11 + self.s22);
        let diff = 0.5 * (self.s11 - self.s22);
        let r = diff.hypot(self.t12);
        // atan2 lands in (-pi, pi], so the half-angle is in (-pi/2, pi/2].
        let angle = 0.5 * f64::atan2(2.0 * self.t12, self.s11 - self.s22);
        Principal {
            s1: avg + r,
            s2: avg - r,
            angle,
        }
    }

    /// Von Mises equivalent stress (plane stress).
    pub fn sigma_eq(&self) -> f64 {
        let Self { s11, s22, t12 } = *self;
        (s11 * s11 - s11 * s22 + s22 * s22 + 3.0 * t12 * t12)
            .max(0.0)
            .sqrt()
    }

    /// Stress triaxiality `eta`, or `None` at zero equivalent stress.
    pub fn triaxiality(&self) -> Option<f64> {
        let se = self.sigma_eq();
        if se > 0.0 {
            Some((self.s11 + self.s22) / (3.0 * se))
        } else {
            None
        }
    }

    /// Lode angle parameter `theta_bar`, or `None` at zero equivalent
    /// stress.
    ///
    /// Computed from the third invariant of the 3-D deviator with
    /// `s33 = 0`; the `acos` argument is clamped to `[-1, 1]` so that
    /// round-off near the uniaxial/equibiaxial anchors cannot produce NaN.
    pub fn lode_angle_parameter(&self) -> Option<f64> {
        let se = self.sigma_eq();
        if se <= 0.0 {
            return None;
        }
        // 27/2 * J3 regrouped as an integer-weighted polynomial so the
        // canonical anchors (uniaxial, equibiaxial, shear) evaluate exactly
        // in floating point; acos is ill-conditioned at +-1, so exactness
        // of the argument matters there.
        let Self { s11, s22, t12 } = *self;
        let num = -0.5
            * (s11 + s22)
            * ((2.0 * s11 - s22) * (2.0 * s22 - s11) - 9.0 * t12 * t12);
        let arg = (num / (se * se * se)).clamp(-1.0, 1.0);
        Some(1.0 - (2.0 / PI) * arg.acos())
    }

    /// All descriptors at once; `None` for a degenerate (zero-stress) point.
    pub fn descriptor(&self) -> Option<StressDescriptor> {
        let se = self.sigma_eq();
        if se <= 0.0 {
            return None;
        }
        let p = self.principal();
        Some(StressDescriptor {
            s1: p.s1,
            s2: p.s2,
            angle: p.angle,
            sigma_eq: se,
            eta: self.triaxiality()?,
            theta_bar: self.lode_angle_parameter()?,
        })
    }

    /// State rotated bodily by `phi` radians (counter-clockwise), expressed
    /// in the unrotated frame: `sigma' = Q sigma Q^T`.
    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let (c2, s2, cs) = (c * c, s * s, c * s);
        Self {
            s11: c2 * self.s11 + s2 * self.s22 - 2.0 * cs * self.t12,
            s22: s2 * self.s11 + c2 * self.s22 + 2.0 * cs * self.t12,
            t12: cs * (self.s11 - self.s22) + (c2 - s2) * self.t12,
        }
    }
}

impl PlaneStrain {
    pub fn new(e11: f64, e22: f64, e12: f64) -> Self {
        Self { e11, e22, e12 }
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

/// Distance between two principal *axes* (undirected lines), in radians,
/// in `[0, pi/2]`.  Axes are periodic with period `pi`.
pub fn axis_distance(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(PI);
    if d > FRAC_PI_2 {
        d = PI - d;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn uniaxial_tension_rd_anchor() {
        let d = PlaneStress::new(250.0, 0.0, 0.0).descriptor().unwrap();
        assert_abs_diff_eq!(d.s1, 250.0);
        assert_abs_diff_eq!(d.s2, 0.0);
        assert_abs_diff_eq!(d.angle, 0.0);
        assert_abs_diff_eq!(d.sigma_eq, 250.0);
        assert_abs_diff_eq!(d.eta, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.theta_bar, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn uniaxial_tension_td_angle() {
        let p = PlaneStress::new(0.0, 180.0, 0.0).principal();
        assert_abs_diff_eq!(p.s1, 180.0);
        assert_abs_diff_eq!(p.s2, 0.0);
        assert_abs_diff_eq!(p.angle, FRAC_PI_2);
    }

    #[test]
    fn equibiaxial_anchor() {
        let d = PlaneStress::new(100.0, 100.0, 0.0).descriptor().unwrap();
        assert_abs_diff_eq!(d.sigma_eq, 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.eta, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.theta_bar, -1.0, epsilon = 1e-12);
        // Indeterminate direction resolves to 0 by convention.
        assert_abs_diff_eq!(d.angle, 0.0);
    }

    #[test]
    fn pure_shear_anchor() {
        let d = PlaneStress::new(0.0, 0.0, 60.0).descriptor().unwrap();
        assert_abs_diff_eq!(d.s1, 60.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.s2, -60.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.angle, FRAC_PI_4, epsilon = 1e-15);
        assert_abs_diff_eq!(d.sigma_eq, 60.0 * 3.0_f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.eta, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.theta_bar, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn uniaxial_compression() {
        let d = PlaneStress::new(-120.0, 0.0, 0.0).descriptor().unwrap();
        assert_abs_diff_eq!(d.eta, -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.theta_bar, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_stress_without_shear() {
        let p = PlaneStress::new(300.0, 100.0, 0.0).principal();
        assert_abs_diff_eq!(p.s1, 300.0);
        assert_abs_diff_eq!(p.s2, 100.0);
        assert_abs_diff_eq!(p.angle, 0.0);
    }

    #[test]
    fn zero_stress_is_degenerate() {
        let s = PlaneStress::zero();
        assert!(s.triaxiality().is_none());
        assert!(s.lode_angle_parameter().is_none());
        assert!(s.descriptor().is_none());
    }

    #[test]
    fn rotation_by_quarter_turn_swaps_axes() {
        let s = PlaneStress::new(200.0, 50.0, 10.0).rotated(FRAC_PI_2);
        assert_abs_diff_eq!(s.s11, 50.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.s22, 200.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.t12, -10.0, epsilon = 1e-10);
    }

    #[test]
    fn axis_distance_wraps_mod_pi() {
        let deg = |d: f64| d.to_radians();
        assert_abs_diff_eq!(axis_distance(deg(-80.0), deg(90.0)), deg(10.0), epsilon = 1e-12);
        assert_abs_diff_eq!(axis_distance(deg(0.0), deg(0.0)), 0.0);
        assert_abs_diff_eq!(axis_distance(deg(89.0), deg(-89.0)), deg(2.0), epsilon = 1e-12);
    }

    fn stress_strategy() -> impl Strategy<Value = PlaneStress> {
        (-500.0..500.0f64, -500.0..500.0f64, -500.0..500.0f64)
            .prop_map(|(s11, s22, t12)| PlaneStress::new(s11, s22, t12))
    }

    proptest! {
        #[test]
        fn descriptor_bounds(s in stress_strategy()) {
            if let Some(d) = s.descriptor() {
                prop_assert!(d.eta >= -2.0 / 3.0 - 1e-12 && d.eta <= 2.0 / 3.0 + 1e-12);
                prop_assert!(d.theta_bar >= -1.0 && d.theta_bar <= 1.0);
                prop_assert!(d.angle > -FRAC_PI_2 - 1e-15 && d.angle <= FRAC_PI_2 + 1e-15);
                prop_assert!(d.s1 >= d.s2);
                prop_assert!(d.theta_bar.is_finite());
            }
        }

        #[test]
        fn descriptor_scale_invariant(s in stress_strategy(), lambda in 1e-3..1e3f64) {
            let scaled = PlaneStress::new(lambda * s.s11, lambda * s.s22, lambda * s.t12);
            if let (Some(a), Some(b)) = (s.descriptor(), scaled.descriptor()) {
                prop_assert!((a.eta - b.eta).abs() < 1e-9);
                prop_assert!((a.theta_bar - b.theta_bar).abs() < 1e-9);
                prop_assert!((a.angle - b.angle).abs() < 1e-12);
            }
        }

        #[test]
        fn descriptor_rotation_invariant(s in stress_strategy(), phi in -3.0..3.0f64) {
            let r = s.rotated(phi);
            if let (Some(a), Some(b)) = (s.descriptor(), r.descriptor()) {
                prop_assert!((a.eta - b.eta).abs() < 1e-9);
                prop_assert!((a.theta_bar - b.theta_bar).abs() < 1e-9);
                prop_assert!((a.sigma_eq - b.sigma_eq).abs() < 1e-6 * a.sigma_eq.max(1.0));
                // Principal axis follows the rotation (mod pi).
                if (a.s1 - a.s2).abs() > 1e-6 * a.sigma_eq {
                    prop_assert!(axis_distance(a.angle + phi, b.angle) < 1e-6);
                }
            }
        }
    }
}
