//! Points, unit directions and the ambient dimension.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of R^n stored in three slots; the third is zero when n = 2.
pub type Point = [f64; 3];

/// Ambient dimension n of R^n. Only the plane and space are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn n(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn nf(self) -> f64 {
        self.n() as f64
    }

    /// Lebesgue measure of the unit sphere S^{n-1}.
    pub fn sphere_area(self) -> f64 {
        match self {
            Dim::Two => 2.0 * PI,
            Dim::Three => 4.0 * PI,
        }
    }

    /// Volume of the unit ball.
    pub fn ball_volume(self) -> f64 {
        self.sphere_area() / self.nf()
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::Config {
                field: "dim",
                message: format!("dimension must be 2 or 3, got {n}"),
            }),
        }
    }
}

impl From<Dim> for usize {
    fn from(d: Dim) -> usize {
        d.n()
    }
}

pub fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

pub fn scale(p: &Point, a: f64) -> Point {
    [a * p[0], a * p[1], a * p[2]]
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// A unit vector ν ∈ S^{n-1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction(Point);

impl Direction {
    /// Normalizes `p`. Fails on the zero vector.
    pub fn from_point(p: &Point) -> Result<Self> {
        let r = norm(p);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("cannot take the direction of {p:?}")));
        }
        Ok(Direction(scale(p, 1.0 / r)))
    }

    /// Direction at angle θ (radians, counterclockwise from +x) on S¹.
    pub fn from_angle(theta: f64) -> Self {
        Direction([theta.cos(), theta.sin(), 0.0])
    }

    /// Direction with colatitude θ ∈ [0, π] and azimuth φ on S².
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let st = theta.sin();
        Direction([st * phi.cos(), st * phi.sin(), theta.cos()])
    }

    /// Direction on S² from z = cos θ and azimuth φ.
    pub fn from_z_phi(z: f64, phi: f64) -> Self {
        let st = (1.0 - z * z).max(0.0).sqrt();
        Direction([st * phi.cos(), st * phi.sin(), z])
    }

    pub fn coords(&self) -> &Point {
        &self.0
    }

    /// Polar angle in [0, 2π) of the projection onto the x–y plane.
    pub fn azimuth(&self) -> f64 {
        let a = self.0[1].atan2(self.0[0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    /// Colatitude in [0, π] measured from +z.
    pub fn colatitude(&self) -> f64 {
        self.0[2].clamp(-1.0, 1.0).acos()
    }

    /// Geodesic distance on the sphere.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        // atan2 form stays accurate near 0 and π
        let c = dot(&self.0, &other.0);
        let x = &self.0;
        let y = &other.0;
        let cross = [
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ];
        norm(&cross).atan2(c)
    }

    /// The point r·ν.
    pub fn at_radius(&self, r: f64) -> Point {
        scale(&self.0, r)
    }
}
