//! Parallel singularities in the workspace and in the joint space.
//!
//! In the workspace the determinant of the constraint-gradient matrix factors,
//! up to a non-vanishing cofactor, into `f1 = x + t y` and a factor `f2` that
//! is cubic in `t`. In the joint space the singular set is the union of the
//! discriminant surface of the characteristic cubic (repeated orientations)
//! and the branch surface on which the position solve has a double root
//! (the line is tangent to the circle `x² + y² = ρ1²`).

use num_complex::Complex64;
use serde::Serialize;

use crate::cubic::DEFAULT_ROOT_EPS;
use crate::geometry::{AnalyticGeometry, GeometryParams};
use crate::kinematics::{characteristic_cubic, constraint_gradient, homogeneous_lines};
use crate::pose::{JointVector, OrientationParam, Pose};

/// Relative threshold under which a surface value counts as zero.
pub const DEFAULT_SURFACE_TOL: f64 = 1e-6;

/// Determinant of the gradients of `ρi²/2` with respect to `(x, y, φ)`.
pub fn jacobian_parallel_det(g: &GeometryParams, p: &Pose) -> f64 {
    constraint_gradient(g, p).determinant()
}

/// Product of the row norms of the constraint gradient, a bound on `|detM|`.
pub fn jacobian_det_scale(g: &GeometryParams, p: &Pose) -> f64 {
    let m = constraint_gradient(g, p);
    (0..3).map(|i| m.row(i).norm()).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkspaceSingularitySample {
    pub f1: f64,
    pub f2: f64,
    pub det_m: f64,
}

/// Coefficients of `f2` as a cubic in `t`, highest degree first.
fn f2_coefficients(g: &GeometryParams, x: f64, y: f64) -> [f64; 4] {
    let (c2, c3, d3) = (g.c2, g.c3, g.d3);
    [
        -2.0 * c3 * d3 + x * d3,
        -2.0 * c3 * c3 + 2.0 * c2 * c3 + 2.0 * d3 * d3 - y * d3,
        2.0 * c3 * d3 - 2.0 * c2 * d3 + x * d3,
        -d3 * y,
    ]
}

/// `(f1, f2)` at the pose. At `φ = π` the leading coefficients in `t`
/// (the limits of `f1 / t` and `f2 / t³`) are returned.
pub fn workspace_singularity_factors(g: &AnalyticGeometry, p: &Pose) -> (f64, f64) {
    let k = f2_coefficients(g, p.x, p.y);
    match p.orientation() {
        OrientationParam::Finite(t) => (p.x + t * p.y, ((k[0] * t + k[1]) * t + k[2]) * t + k[3]),
        OrientationParam::Infinite => (p.y, k[0]),
    }
}

/// `(f1 cos(φ/2), f2 cos³(φ/2))`, bounded for every orientation.
pub fn homogeneous_factors(g: &AnalyticGeometry, p: &Pose) -> (f64, f64) {
    let (s, c) = p.orientation().half_angle();
    let k = f2_coefficients(g, p.x, p.y);
    (p.x * c + p.y * s, k[0] * s * s * s + k[1] * s * s * c + k[2] * s * c * c + k[3] * c * c * c)
}

/// Magnitude scale for `f1 f2` in homogeneous form.
pub fn homogeneous_factor_scale(g: &AnalyticGeometry, p: &Pose) -> f64 {
    let (s, c) = p.orientation().half_angle();
    let k = f2_coefficients(g, p.x, p.y);
    let f1 = (p.x * c).abs() + (p.y * s).abs();
    let f2 = (k[0] * s * s * s).abs() + (k[1] * s * s * c).abs() + (k[2] * s * c * c).abs() + (k[3] * c * c * c).abs();
    f1 * f2
}

pub fn sample_workspace(g: &AnalyticGeometry, p: &Pose) -> WorkspaceSingularitySample {
    let (f1, f2) = workspace_singularity_factors(g, p);
    WorkspaceSingularitySample { f1, f2, det_m: jacobian_parallel_det(g, p) }
}

/// A polynomial surface value with a magnitude it can be judged against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceValue {
    pub value: f64,
    pub scale: f64,
}

impl SurfaceValue {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.value / self.scale
        } else {
            0.0
        }
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.value.abs() <= tol * self.scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointSpaceSurfaceSample {
    pub delta: SurfaceValue,
    pub branch: SurfaceValue,
}

/// Discriminant of the characteristic cubic, degree 8 in the joints.
pub fn discriminant_surface(g: &AnalyticGeometry, j: &JointVector) -> SurfaceValue {
    let c = characteristic_cubic(g, j);
    SurfaceValue { value: c.discriminant(), scale: c.discriminant_scale() }
}

/// Tangency condition of the position solve at homogeneous orientation
/// `(s, c)`, with the magnitude of its terms.
fn tangency(g: &GeometryParams, j: &JointVector, s: Complex64, c: Complex64) -> (Complex64, f64) {
    let lines = homogeneous_lines(g, j, s, c);
    let weight = |l: &[Complex64; 3]| l[0].norm_sqr() + l[1].norm_sqr();
    let [a, b, k] = if weight(&lines[0]) >= weight(&lines[1]) { lines[0] } else { lines[1] };
    let r1 = j.rho1 * j.rho1;
    (k * k - (a * a + b * b) * r1, k.norm_sqr() + r1 * (a.norm_sqr() + b.norm_sqr()))
}

/// Resultant, with respect to the orientation, of the characteristic cubic
/// and the tangency condition of the position solve.
///
/// Both are binary forms in `(sin φ/2, cos φ/2)`: writing the cubic as
/// `κ Π (γi s − σi c)` over its roots, the resultant is `κ⁴ Π D(σi, γi)`
/// where `D` is the quartic tangency form. Roots at infinity (`φ = π`) enter
/// as `(σ, γ) = (1, 0)`.
pub fn branch_surface(g: &AnalyticGeometry, j: &JointVector) -> SurfaceValue {
    let cubic = characteristic_cubic(g, j);
    let Ok(roots) = cubic.complex_roots(DEFAULT_ROOT_EPS) else {
        return SurfaceValue { value: 0.0, scale: 0.0 };
    };
    let kappa = match roots.infinity_multiplicity {
        0 => cubic.a3,
        1 => cubic.a2,
        2 => cubic.a1,
        _ => cubic.a0,
    };
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut value = Complex64::new(kappa.powi(4), 0.0);
    let mut scale = kappa.abs().powi(4);
    let at_infinity = std::iter::repeat_n((one, zero), roots.infinity_multiplicity as usize);
    for (s, c) in roots.finite.iter().map(|t| (*t, one)).chain(at_infinity) {
        let (d, mag) = tangency(g, j, s, c);
        value *= d;
        scale *= mag;
    }
    SurfaceValue { value: value.re, scale }
}

pub fn sample_joint_space(g: &AnalyticGeometry, j: &JointVector) -> JointSpaceSurfaceSample {
    JointSpaceSurfaceSample { delta: discriminant_surface(g, j), branch: branch_surface(g, j) }
}
