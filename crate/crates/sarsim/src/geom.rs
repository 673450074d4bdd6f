//! Minimal 2D vector and rigid-transform math shared by mapping and planning.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Vec2 {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn dist2(self, other: Vec2) -> f64 {
        (self - other).norm2()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

/// A planar rigid transform / robot pose: rotation by `theta` followed by a
/// translation of `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2 {
    pub const IDENTITY: Pose2 = Pose2 { x: 0.0, y: 0.0, theta: 0.0 };

    pub fn new(x: f64, y: f64, theta: f64) -> Pose2 {
        Pose2 { x, y, theta }
    }

    pub fn position(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Apply the transform to a point.
    pub fn transform(self, p: Vec2) -> Vec2 {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(c * p.x - s * p.y + self.x, s * p.x + c * p.y + self.y)
    }

    /// `self ∘ other`: the transform that applies `other` first, then `self`.
    pub fn compose(self, other: Pose2) -> Pose2 {
        let (s, c) = self.theta.sin_cos();
        Pose2 {
            x: c * other.x - s * other.y + self.x,
            y: s * other.x + c * other.y + self.y,
            theta: self.theta + other.theta,
        }
    }

    /// Inverse transform.
    ///
    /// The arithmetic mirrors [`Pose2::compose`] term for term, so
    /// `p.inverse().compose(p)` cancels exactly to the identity (no rounding
    /// residue). Pose corrections rely on this to be reversible bit-exactly.
    pub fn inverse(self) -> Pose2 {
        let t = -self.theta;
        let (s, c) = t.sin_cos();
        Pose2 {
            x: -(c * self.x - s * self.y),
            y: -(s * self.x + c * self.y),
            theta: t,
        }
    }
}

/// Wrap an angle into `(-pi, pi]`. In-range values are returned untouched.
pub fn normalize_angle(a: f64) -> f64 {
    if a > PI || a <= -PI {
        let r = a.rem_euclid(2.0 * PI);
        if r > PI {
            r - 2.0 * PI
        } else {
            r
        }
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transform_rotates_then_translates() {
        let p = Pose2::new(1.0, 2.0, PI / 2.0);
        let v = p.transform(Vec2::new(1.0, 0.0));
        assert!((v.x - 1.0).abs() < 1e-12);
        assert!((v.y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_compose_is_exact_identity() {
        let cases = [
            Pose2::new(0.5, -0.25, 0.0),
            Pose2::new(3.125, 7.5, 1.1),
            Pose2::new(-2.0, 0.3, -2.9),
        ];
        for p in cases {
            let id = p.inverse().compose(p);
            assert_eq!(id.x.to_bits(), 0.0_f64.to_bits());
            assert_eq!(id.y.to_bits(), 0.0_f64.to_bits());
            assert_eq!(id.theta.to_bits(), 0.0_f64.to_bits());
        }
    }

    #[test]
    fn identity_compose_preserves_pose_bits() {
        let p = Pose2::new(4.75, -1.5, 0.625);
        let q = Pose2::IDENTITY.compose(p);
        assert_eq!(q.x.to_bits(), p.x.to_bits());
        assert_eq!(q.y.to_bits(), p.y.to_bits());
        assert_eq!(q.theta.to_bits(), p.theta.to_bits());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(0.5), 0.5);
        assert!((normalize_angle(2.0 * PI + 0.5) - 0.5).abs() < 1e-12);
        assert!(normalize_angle(PI) == PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-12);
        assert!((normalize_angle(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-12);
    }
}
