use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    // rem_euclid can return exactly 2π for tiny negative inputs
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

/// Platform pose: position of the operation point and orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Pose { x, y, phi: wrap_angle(phi) }
    }

    pub fn orientation(&self) -> OrientationParam {
        OrientationParam::from_angle(self.phi)
    }

    /// `max(|Δx|, |Δy|, |wrap(Δφ)|)`.
    pub fn distance(&self, other: &Pose) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs()).max(wrap_angle(self.phi - other.phi).abs())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.phi.is_finite()
    }
}

/// Half-angle orientation parameter `t = tan(φ/2)`; `φ = π` maps to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrientationParam {
    Finite(f64),
    Infinite,
}

impl OrientationParam {
    pub fn from_angle(phi: f64) -> Self {
        let phi = wrap_angle(phi);
        if phi == PI {
            OrientationParam::Infinite
        } else {
            OrientationParam::Finite((phi / 2.0).tan())
        }
    }

    pub fn angle(&self) -> f64 {
        match *self {
            OrientationParam::Finite(t) => wrap_angle(2.0 * t.atan()),
            OrientationParam::Infinite => PI,
        }
    }

    /// `(sin φ/2, cos φ/2)` scaled to unit length.
    pub fn half_angle(&self) -> (f64, f64) {
        match *self {
            OrientationParam::Finite(t) => {
                let n = t.hypot(1.0);
                (t / n, 1.0 / n)
            }
            OrientationParam::Infinite => (1.0, 0.0),
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            OrientationParam::Finite(t) => Some(t),
            OrientationParam::Infinite => None,
        }
    }
}

/// Actuated leg lengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointVector {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
}

impl JointVector {
    pub fn new(rho1: f64, rho2: f64, rho3: f64) -> Result<Self> {
        for (name, v) in [("rho1", rho1), ("rho2", rho2), ("rho3", rho3)] {
            if !v.is_finite() {
                return Err(Error::InvalidJoints(format!("{name} is not finite")));
            }
            if v < 0.0 {
                return Err(Error::InvalidJoints(format!("joint lengths must be non-negative, {name} = {v}")));
            }
        }
        Ok(JointVector { rho1, rho2, rho3 })
    }

    /// Builds a joint vector without the sign check; used by solvers that
    /// iterate on signed lengths internally.
    pub(crate) fn unchecked(rho1: f64, rho2: f64, rho3: f64) -> Self {
        JointVector { rho1, rho2, rho3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.rho1, self.rho2, self.rho3]
    }

    pub fn squares(&self) -> [f64; 3] {
        [self.rho1 * self.rho1, self.rho2 * self.rho2, self.rho3 * self.rho3]
    }

    pub fn norm(&self) -> f64 {
        let [a, b, c] = self.squares();
        (a + b + c).sqrt()
    }

    pub fn max_abs_diff(&self, other: &JointVector) -> f64 {
        (self.rho1 - other.rho1).abs().max((self.rho2 - other.rho2).abs()).max((self.rho3 - other.rho3).abs())
    }
}

impl fmt::Display for JointVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.rho1, self.rho2, self.rho3)
    }
}

impl FromStr for JointVector {
    type Err = Error;

    /// Parses `rho1,rho2,rho3`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidJoints(format!("expected three comma-separated lengths, got {s:?}")));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p.parse().map_err(|_| Error::InvalidJoints(format!("cannot parse {p:?} as a number")))?;
        }
        JointVector::new(v[0], v[1], v[2])
    }
}
