//! Manipulator geometry and the analytic-class test.
//!
//! The base frame is centred at `A1` with the x-axis through `A2`, so the
//! base anchors are `A1 = (0, 0)`, `A2 = (c2, 0)` and `A3 = (c3, d3)`. The
//! platform is described from the operation point `P` (attachment of leg 1):
//! `B2 = P + l2 (cos φ, sin φ)` and `B3 = P + l3 (cos(φ+β), sin(φ+β))`.

use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{wrap_angle, Pose};

/// Default absolute tolerance for the analytic-class conditions.
pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

/// The six geometric constants of a planar 3-RPR manipulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryParams {
    pub c2: f64,
    pub c3: f64,
    pub d3: f64,
    pub l2: f64,
    pub l3: f64,
    pub beta: f64,
}

/// Non-fatal remarks about a geometry that was accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryWarning {
    /// `d3 = 0`: the three base anchors are aligned.
    AlignedBase,
    /// `d3 < 0`, i.e. `sin β > 0` for an analytic platform; this is the mirror
    /// image of the reflected class and is not claimed as a member of it.
    NonReflected,
}

impl GeometryParams {
    /// Validates the parameter invariants and normalizes `beta` into `(-π, π]`.
    pub fn new(c2: f64, c3: f64, d3: f64, l2: f64, l3: f64, beta: f64) -> Result<Self> {
        let g = GeometryParams { c2, c3, d3, l2, l3, beta };
        g.validated()
    }

    /// The manipulator used throughout the worked examples:
    /// `c2 = l2 = 1`, `c3 = 0`, `d3 = 1`, `l3 = 1`, `β = -π/2`.
    pub fn example() -> Self {
        GeometryParams { c2: 1.0, c3: 0.0, d3: 1.0, l2: 1.0, l3: 1.0, beta: -PI / 2.0 }
    }

    /// Builds the analytic geometry with congruent base and platform whose
    /// third base anchor is `(c3, d3)`.
    pub fn analytic(c2: f64, c3: f64, d3: f64) -> Result<Self> {
        let l3 = c3.hypot(d3);
        GeometryParams::new(c2, c3, d3, c2, l3, (-d3).atan2(c3))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: GeometryParams = serde_json::from_str(text)?;
        g.validated()
    }

    fn validated(mut self) -> Result<Self> {
        let fields =
            [("c2", self.c2), ("c3", self.c3), ("d3", self.d3), ("l2", self.l2), ("l3", self.l3), ("beta", self.beta)];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidGeometry(format!("{name} is not finite ({v})")));
        }
        for (name, v) in [("c2", self.c2), ("l2", self.l2), ("l3", self.l3)] {
            if v <= 0.0 {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        self.beta = wrap_angle(self.beta);
        Ok(self)
    }

    pub fn warnings(&self) -> Vec<GeometryWarning> {
        let mut w = Vec::new();
        if self.d3 == 0.0 {
            w.push(GeometryWarning::AlignedBase);
        } else if self.d3 < 0.0 {
            w.push(GeometryWarning::NonReflected);
        }
        w
    }

    /// Base anchors `A1`, `A2`, `A3`.
    pub fn base_points(&self) -> [[f64; 2]; 3] {
        [[0.0, 0.0], [self.c2, 0.0], [self.c3, self.d3]]
    }

    /// Platform anchors `B1 = P`, `B2`, `B3` at the given pose.
    pub fn platform_points(&self, p: &Pose) -> [[f64; 2]; 3] {
        let (s2, c2) = p.phi.sin_cos();
        let (s3, c3) = (p.phi + self.beta).sin_cos();
        [[p.x, p.y], [p.x + self.l2 * c2, p.y + self.l2 * s2], [p.x + self.l3 * c3, p.y + self.l3 * s3]]
    }

    /// Uniformly rescales all lengths by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        GeometryParams::new(
            self.c2 * factor,
            self.c3 * factor,
            self.d3 * factor,
            self.l2 * factor,
            self.l3 * factor,
            self.beta,
        )
    }

    /// Rescales so that `c2 = 1`.
    pub fn with_unit_base(&self) -> Result<Self> {
        self.scaled(1.0 / self.c2)
    }

    /// A length scale used for relative tolerances.
    pub fn length_scale(&self) -> f64 {
        1.0 + self.c2.abs().max(self.c3.abs()).max(self.d3.abs()).max(self.l2).max(self.l3)
    }
}

/// Condition names, in the order of [`ClassVerdict::residuals`].
pub const CLASS_CONDITIONS: [&str; 3] = ["l2 = c2", "l3 sin(beta) = -d3", "l3 cos(beta) = c3"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub is_analytic: bool,
    /// Residuals of the three conditions.
    pub residuals: [f64; 3],
    /// Conditions whose residual is not below the tolerance.
    pub violations: Vec<(String, f64)>,
    pub warnings: Vec<GeometryWarning>,
}

pub fn check_analytic_class(g: &GeometryParams, tol: f64) -> ClassVerdict {
    let (sb, cb) = g.beta.sin_cos();
    let residuals = [(g.l2 - g.c2).abs(), (g.l3 * sb + g.d3).abs(), (g.l3 * cb - g.c3).abs()];
    let violations: Vec<(String, f64)> = CLASS_CONDITIONS
        .iter()
        .zip(residuals)
        .filter(|(_, r)| !(*r < tol))
        .map(|(name, r)| (name.to_string(), r))
        .collect();
    ClassVerdict { is_analytic: violations.is_empty(), residuals, violations, warnings: g.warnings() }
}

/// A geometry that has passed [`check_analytic_class`].
///
/// Operations that rely on the cubic characteristic polynomial take this
/// type, so the class check happens once at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AnalyticGeometry(GeometryParams);

impl AnalyticGeometry {
    pub fn new(g: GeometryParams) -> Result<Self> {
        Self::with_tolerance(g, DEFAULT_CLASS_TOL)
    }

    pub fn with_tolerance(g: GeometryParams, tol: f64) -> Result<Self> {
        let verdict = check_analytic_class(&g, tol);
        if verdict.is_analytic {
            Ok(AnalyticGeometry(g))
        } else {
            let max_residual = verdict.residuals.iter().cloned().fold(0.0, f64::max);
            Err(Error::NotAnalytic { max_residual })
        }
    }

    pub fn example() -> Self {
        AnalyticGeometry(GeometryParams::example())
    }

    pub fn params(&self) -> &GeometryParams {
        &self.0
    }
}

impl Deref for AnalyticGeometry {
    type Target = GeometryParams;

    fn deref(&self) -> &GeometryParams {
        &self.0
    }
}
