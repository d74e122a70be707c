//! Rigid 2-D transforms.
//!
//! A [`Pose`] is an element of SE(2) stored as `(x, y, theta)` with the
//! heading in radians, always wrapped to `(-pi, pi]`. Relative poses follow
//! the convention `rel(j -> i) = inverse(pose_i) * pose_j`: the transform that
//! maps a point expressed in frame `j` into frame `i`.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    // rem_euclid can land on exactly -pi after the shift for inputs near pi.
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// An SE(2) element.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        x: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    /// Builds a pose, wrapping the heading.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn from_degrees(x: f64, y: f64, theta_deg: f64) -> Self {
        Pose::new(x, y, theta_deg.to_radians())
    }

    pub fn theta_degrees(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Pose::new(v[0], v[1], v[2])
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.theta)
    }

    /// `self * other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let (s, c) = self.theta.sin_cos();
        Pose::new(
            c * other.x - s * other.y + self.x,
            s * other.x + c * other.y + self.y,
            self.theta + other.theta,
        )
    }

    pub fn inverse(&self) -> Pose {
        let (s, c) = self.theta.sin_cos();
        Pose::new(
            -(c * self.x + s * self.y),
            s * self.x - c * self.y,
            -self.theta,
        )
    }

    /// `R(theta) * pt + t`.
    pub fn transform_point(&self, pt: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [c * pt[0] - s * pt[1] + self.x, s * pt[0] + c * pt[1] + self.y]
    }

    /// Element-wise closeness with absolute tolerance; headings compared modulo 2*pi.
    pub fn approx_eq(&self, other: &Pose, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && wrap_angle(self.theta - other.theta).abs() <= tol
    }
}

impl fmt::Display for Pose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.4}, {:.4}, {:.4} deg)",
            self.x,
            self.y,
            self.theta.to_degrees()
        )
    }
}

/// Error between two poses, as reported in the evaluation tables.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseDelta {
    /// Meters.
    pub translation_error: f64,
    /// Degrees, in `[0, 180]`.
    pub rotation_error: f64,
}

pub fn compose(a: &Pose, b: &Pose) -> Pose {
    a.compose(b)
}

pub fn inverse(a: &Pose) -> Pose {
    a.inverse()
}

/// Relative pose `j -> i` given absolute poses of `i` and `j`.
pub fn relative(xi_i: &Pose, xi_j: &Pose) -> Pose {
    xi_i.inverse().compose(xi_j)
}

/// Applies a predicted correction to a noisy relative pose: `c * noisy_rel`.
pub fn apply_correction(c: &Pose, noisy_rel: &Pose) -> Pose {
    c.compose(noisy_rel)
}

pub fn pose_delta(a: &Pose, b: &Pose) -> PoseDelta {
    PoseDelta {
        translation_error: (a.x - b.x).hypot(a.y - b.y),
        rotation_error: wrap_angle(a.theta - b.theta).abs().to_degrees(),
    }
}

pub fn transform_point(p: &Pose, pt: [f64; 2]) -> [f64; 2] {
    p.transform_point(pt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix3;
    use proptest::prelude::*;

    fn mat(p: &Pose) -> Matrix3<f64> {
        let (s, c) = p.theta.sin_cos();
        Matrix3::new(c, -s, p.x, s, c, p.y, 0.0, 0.0, 1.0)
    }

    fn from_mat(m: &Matrix3<f64>) -> Pose {
        Pose::new(m[(0, 2)], m[(1, 2)], m[(1, 0)].atan2(m[(0, 0)]))
    }

    fn deg(x: f64, y: f64, t: f64) -> Pose {
        Pose::from_degrees(x, y, t)
    }

    #[test]
    fn wrap_stays_in_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn compose_examples() {
        let p = deg(1.5, -2.0, 33.0);
        assert!(Pose::IDENTITY.compose(&p).approx_eq(&p, 1e-12));
        let got = deg(1.0, 0.0, 90.0).compose(&deg(1.0, 0.0, 0.0));
        let oracle = from_mat(&(mat(&deg(1.0, 0.0, 90.0)) * mat(&deg(1.0, 0.0, 0.0))));
        assert!(got.approx_eq(&deg(1.0, 1.0, 90.0), 1e-12));
        assert!(got.approx_eq(&oracle, 1e-12));
        assert!(p.compose(&p.inverse()).approx_eq(&Pose::IDENTITY, 1e-12));
    }

    #[test]
    fn inverse_examples() {
        assert!(Pose::IDENTITY.inverse().approx_eq(&Pose::IDENTITY, 0.0));
        let inv = deg(1.0, 0.0, 90.0).inverse();
        assert!(inv.approx_eq(&deg(0.0, 1.0, -90.0), 1e-12));
        let oracle = from_mat(&mat(&deg(1.0, 0.0, 90.0)).try_inverse().unwrap());
        assert!(inv.approx_eq(&oracle, 1e-12));
    }

    #[test]
    fn relative_examples() {
        let p = deg(4.0, -1.0, 120.0);
        assert!(relative(&p, &p).approx_eq(&Pose::IDENTITY, 1e-12));
        assert!(relative(&Pose::IDENTITY, &deg(3.0, 4.0, 0.0)).approx_eq(&deg(3.0, 4.0, 0.0), 0.0));
        let r = relative(&deg(1.0, 0.0, 90.0), &deg(2.0, 2.0, 0.0));
        assert!(r.approx_eq(&deg(2.0, -1.0, -90.0), 1e-12));
    }

    #[test]
    fn correction_examples() {
        let r = deg(5.0, 1.0, 12.0);
        assert!(apply_correction(&Pose::IDENTITY, &r).approx_eq(&r, 1e-12));
        let true_rel = deg(3.0, -2.0, 40.0);
        let c = true_rel.compose(&r.inverse());
        assert!(apply_correction(&c, &r).approx_eq(&true_rel, 1e-12));
    }

    #[test]
    fn delta_examples() {
        let p = deg(1.0, 2.0, 3.0);
        assert_eq!(pose_delta(&p, &p), PoseDelta::default());
        let d = pose_delta(&deg(0.0, 0.0, 179.0), &deg(0.0, 0.0, -179.0));
        assert!(d.translation_error == 0.0 && (d.rotation_error - 2.0).abs() < 1e-9);
        let d = pose_delta(&Pose::IDENTITY, &deg(3.0, 4.0, 90.0));
        assert!((d.translation_error - 5.0).abs() < 1e-12 && (d.rotation_error - 90.0).abs() < 1e-9);
    }

    #[test]
    fn transform_point_examples() {
        assert_eq!(Pose::IDENTITY.transform_point([2.0, 3.0]), [2.0, 3.0]);
        assert_eq!(Pose::new(1.0, 1.0, 0.0).transform_point([0.0, 0.0]), [1.0, 1.0]);
        let q = deg(0.0, 0.0, 90.0).transform_point([1.0, 0.0]);
        assert!(q[0].abs() < 1e-12 && (q[1] - 1.0).abs() < 1e-12);
    }

    fn pose_strategy() -> impl Strategy<Value = Pose> {
        (-50.0..50.0f64, -50.0..50.0f64, -10.0..10.0f64).prop_map(|(x, y, t)| Pose::new(x, y, t))
    }

    proptest! {
        #[test]
        fn associativity(a in pose_strategy(), b in pose_strategy(), c in pose_strategy()) {
            let l = a.compose(&b).compose(&c);
            let r = a.compose(&b.compose(&c));
            prop_assert!(l.approx_eq(&r, 1e-9));
        }

        #[test]
        fn relative_reverse_is_inverse(a in pose_strategy(), b in pose_strategy()) {
            prop_assert!(relative(&a, &b).approx_eq(&relative(&b, &a).inverse(), 1e-9));
        }

        #[test]
        fn headings_wrapped(a in pose_strategy(), b in pose_strategy()) {
            for p in [a.compose(&b), a.inverse(), relative(&a, &b)] {
                prop_assert!(p.theta > -PI && p.theta <= PI);
            }
        }

        #[test]
        fn double_inverse(a in pose_strategy()) {
            prop_assert!(a.inverse().inverse().approx_eq(&a, 1e-9));
        }
    }
}
