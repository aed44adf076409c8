//! Inverse kinematics, the linear reduction of the constraint equations, the
//! cubic characteristic polynomial and the analytic forward kinematics.
//!
//! Forward kinematics runs in two stages. The real roots of the cubic in
//! `t = tan(φ/2)` give the feasible orientations (a vanishing leading
//! coefficient stands for the orientation `φ = π`). For each orientation the
//! two linear equations coincide, and the position is found by writing
//! `(x, y) = ρ1 (cos z, sin z)` in the better conditioned of the two and
//! solving `a cos z + b sin z = −c`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::cubic::{CharacteristicCubic, DEFAULT_ROOT_EPS};
use crate::error::{Error, Result};
use crate::geometry::{AnalyticGeometry, GeometryParams};
use crate::pose::{wrap_angle, JointVector, OrientationParam, Pose};

/// Poses closer than this (max-norm in `x`, `y`, wrapped `φ`) are merged.
pub const DEDUP_TOL: f64 = 1e-7;

/// Relative residual accepted for a forward-kinematics solution.
pub const FK_RESIDUAL_TOL: f64 = 1e-8;

/// Leg lengths for the pose; each component is the Euclidean distance between
/// a base anchor and its platform anchor.
pub fn inverse_kinematics(g: &GeometryParams, p: &Pose) -> JointVector {
    let [f1, f2, f3] = constraint_squares(g, p);
    JointVector::unchecked(f1.sqrt(), f2.sqrt(), f3.sqrt())
}

/// Squared leg lengths `ρi²` at the pose.
pub fn constraint_squares(g: &GeometryParams, p: &Pose) -> [f64; 3] {
    let (s, c) = p.phi.sin_cos();
    let (sb, cb) = (p.phi + g.beta).sin_cos();
    let leg2 = [p.x + g.l2 * c - g.c2, p.y + g.l2 * s];
    let leg3 = [p.x + g.l3 * cb - g.c3, p.y + g.l3 * sb - g.d3];
    [p.x * p.x + p.y * p.y, leg2[0] * leg2[0] + leg2[1] * leg2[1], leg3[0] * leg3[0] + leg3[1] * leg3[1]]
}

/// `max_i |ρi(p) − ρi|`.
pub fn joint_residual(g: &GeometryParams, p: &Pose, j: &JointVector) -> f64 {
    inverse_kinematics(g, p).max_abs_diff(j)
}

/// Gradients of `ρi²/2` with respect to `(x, y, φ)`, one row per leg.
pub fn constraint_gradient(g: &GeometryParams, p: &Pose) -> Matrix3<f64> {
    let (s, c) = p.phi.sin_cos();
    let (sb, cb) = (p.phi + g.beta).sin_cos();
    let (ax, ay) = (p.x + g.l2 * c - g.c2, p.y + g.l2 * s);
    let (bx, by) = (p.x + g.l3 * cb - g.c3, p.y + g.l3 * sb - g.d3);
    Matrix3::new(p.x, p.y, 0.0, ax, ay, g.l2 * (ay * c - ax * s), bx, by, g.l3 * (by * cb - bx * sb))
}

/// Coefficients of `R x + S y + Q = 0` and `U x + V y + W = 0`, obtained by
/// subtracting the first constraint from the second and third.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearReduction {
    pub r: f64,
    pub s: f64,
    pub q: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl LinearReduction {
    /// `RV − SU`, identically zero for the analytic class.
    pub fn determinant(&self) -> f64 {
        self.r * self.v - self.s * self.u
    }

    pub fn first(&self) -> [f64; 3] {
        [self.r, self.s, self.q]
    }

    pub fn second(&self) -> [f64; 3] {
        [self.u, self.v, self.w]
    }
}

/// The two lines in homogeneous half-angle coordinates `(s, c)`, each
/// coefficient a quadratic form. With `s² + c² = 1` this is exactly the
/// linear reduction at `φ = 2 atan2(s, c)`; with `(s, c) = (t, 1)` it is the
/// reduction multiplied through by `1 + t²`, valid for complex `t` as well.
pub(crate) fn homogeneous_lines<T>(g: &GeometryParams, j: &JointVector, s: T, c: T) -> [[T; 3]; 2]
where
    T: Copy + From<f64> + Add<Output = T> + Sub<Output = T> + Mul<Output = T>,
{
    let k = |v: f64| T::from(v);
    let [r1, r2, r3] = j.squares();
    let one = c * c + s * s;
    let cos = c * c - s * s;
    let sin = k(2.0) * s * c;
    let (sb, cb) = g.beta.sin_cos();
    let cos_b = cos * k(cb) - sin * k(sb);
    let sin_b = sin * k(cb) + cos * k(sb);
    let r = k(2.0) * (k(g.l2) * cos - k(g.c2) * one);
    let s_coef = k(2.0 * g.l2) * sin;
    let q = k(g.l2 * g.l2 + g.c2 * g.c2 - (r2 - r1)) * one - k(2.0 * g.l2 * g.c2) * cos;
    let u = k(2.0) * (k(g.l3) * cos_b - k(g.c3) * one);
    let v = k(2.0) * (k(g.l3) * sin_b - k(g.d3) * one);
    let w = k(g.l3 * g.l3 + g.c3 * g.c3 + g.d3 * g.d3 - (r3 - r1)) * one
        - k(2.0 * g.l3) * (k(g.c3) * cos_b + k(g.d3) * sin_b);
    [[r, s_coef, q], [u, v, w]]
}

pub fn linear_reduction(g: &GeometryParams, t: OrientationParam, j: &JointVector) -> LinearReduction {
    let (s, c) = t.half_angle();
    let [[r, s_coef, q], [u, v, w]] = homogeneous_lines(g, j, s, c);
    LinearReduction { r, s: s_coef, q, u, v, w }
}

/// Coefficients of the characteristic cubic as affine functions of the
/// squared joints `(ρ1², ρ2², ρ3²)`; row `k` holds the coefficient of `t^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicFamily {
    pub constant: [f64; 4],
    pub linear: [[f64; 3]; 4],
}

impl CubicFamily {
    pub fn new(g: &AnalyticGeometry) -> Self {
        let (c2, c3, d3) = (g.c2, g.c3, g.d3);
        CubicFamily {
            constant: [
                0.0,
                -4.0 * d3 * d3 * c2,
                d3 * (8.0 * c3 * c2 - 4.0 * c2 * c2),
                c3 * (4.0 * c2 * c2 - 4.0 * c3 * c2),
            ],
            linear: [[-d3, d3, 0.0], [c3 - c2, -c3, c2], [-d3, d3, 0.0], [c3 - c2, -c3, c2]],
        }
    }

    /// Coefficients `[a0, a1, a2, a3]` at the squared joints.
    pub fn coefficients(&self, squares: [f64; 3]) -> [f64; 4] {
        let mut a = self.constant;
        for (ak, row) in a.iter_mut().zip(&self.linear) {
            *ak += row.iter().zip(&squares).map(|(l, r)| l * r).sum::<f64>();
        }
        a
    }

    pub fn cubic(&self, squares: [f64; 3]) -> CharacteristicCubic {
        let [a0, a1, a2, a3] = self.coefficients(squares);
        CharacteristicCubic::new(a3, a2, a1, a0)
    }
}

/// The cubic characteristic polynomial in `t = tan(φ/2)` for an analytic
/// geometry.
pub fn characteristic_cubic(g: &AnalyticGeometry, j: &JointVector) -> CharacteristicCubic {
    let (c2, c3, d3) = (g.c2, g.c3, g.d3);
    let [r1, r2, r3] = j.squares();
    CharacteristicCubic {
        a3: c3 * (r1 - r2 + 4.0 * c2 * c2 - 4.0 * c3 * c2) + c2 * (r3 - r1),
        a2: d3 * (8.0 * c3 * c2 - 4.0 * c2 * c2 + r2 - r1),
        a1: c3 * (r1 - r2) + r3 * c2 - 4.0 * d3 * d3 * c2 - r1 * c2,
        a0: d3 * (r2 - r1),
    }
}

/// A position found for one orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionSolution {
    pub pose: Pose,
    /// 2 when the line is tangent to the circle `x² + y² = ρ1²`.
    pub multiplicity: u8,
}

/// Solves for the positions compatible with orientation `t`.
///
/// Returns up to two positions, each satisfying all three constraints within
/// `tol · (1 + ‖j‖)`.
pub fn orientation_to_positions(
    g: &GeometryParams,
    j: &JointVector,
    t: OrientationParam,
    tol: f64,
) -> Result<Vec<PositionSolution>> {
    let lr = linear_reduction(g, t, j);
    let phi = t.angle();
    let [r, s, q] = lr.first();
    let [u, v, w] = lr.second();
    let (n4, n5) = (r.hypot(s), u.hypot(v));
    let (a, b, konst, n) = if n4 >= n5 { (r, s, q, n4) } else { (u, v, w, n5) };

    let len = g.length_scale();
    let coef_floor = 1e-12 * len;
    let const_floor = 1e-12 * (len * len + j.norm().powi(2));
    if n < coef_floor {
        return if q.abs() < const_floor && w.abs() < const_floor {
            Err(Error::BothEquationsDegenerate)
        } else {
            Err(Error::Inconsistent)
        };
    }

    let mut candidates = Vec::with_capacity(2);
    if j.rho1 == 0.0 {
        candidates.push((0.0, 0.0, 1));
    } else {
        let k = -konst / (j.rho1 * n);
        if k.abs() > 1.0 + 1e-12 {
            return Ok(Vec::new());
        }
        let alpha = b.atan2(a);
        if k.abs() >= 1.0 {
            let z = alpha + if k > 0.0 { 0.0 } else { PI };
            candidates.push((j.rho1 * z.cos(), j.rho1 * z.sin(), 2));
        } else {
            let delta = k.acos();
            for z in [alpha + delta, alpha - delta] {
                candidates.push((j.rho1 * z.cos(), j.rho1 * z.sin(), 1));
            }
        }
    }

    let limit = tol * (1.0 + j.norm());
    Ok(candidates
        .into_iter()
        .filter_map(|(x, y, multiplicity)| {
            let pose = polish_pose(g, j, Pose::new(x, y, phi));
            (joint_residual(g, &pose, j) < limit).then_some(PositionSolution { pose, multiplicity })
        })
        .collect())
}

/// A few Newton steps on the three constraints, kept only while they reduce
/// the residual.
pub(crate) fn polish_pose(g: &GeometryParams, j: &JointVector, mut pose: Pose) -> Pose {
    let target = j.squares();
    let residual = |p: &Pose| {
        let f = constraint_squares(g, p);
        Vector3::new(f[0] - target[0], f[1] - target[1], f[2] - target[2]) * 0.5
    };
    let mut f = residual(&pose);
    for _ in 0..4 {
        let norm = f.amax();
        if norm == 0.0 {
            break;
        }
        let Some(inv) = constraint_gradient(g, &pose).try_inverse() else { break };
        let step = inv * f;
        if !(step.amax() < 1e-4) {
            break;
        }
        let next = Pose::new(pose.x - step[0], pose.y - step[1], pose.phi - step[2]);
        let fn_ = residual(&next);
        if !(fn_.amax() < norm) {
            break;
        }
        pose = next;
        f = fn_;
    }
    pose
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FkPose {
    pub pose: Pose,
    pub t: OrientationParam,
    /// `max_i |ρi(pose) − ρi|`.
    pub residual: f64,
    /// Multiplicity of the orientation root times that of the position solve.
    pub multiplicity: u8,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FkSolutionSet {
    pub poses: Vec<FkPose>,
    /// A continuum of solutions was detected.
    pub degenerate: bool,
    /// Set by the reference solver when two solutions came from one grid cell.
    pub grid_too_coarse: bool,
}

impl FkSolutionSet {
    pub fn count(&self) -> usize {
        self.poses.len()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.poses.iter().map(|p| p.residual).collect()
    }

    pub fn contains(&self, pose: &Pose, tol: f64) -> bool {
        self.poses.iter().any(|p| p.pose.distance(pose) < tol)
    }

    /// Index of the solution nearest to `pose`.
    pub fn nearest(&self, pose: &Pose) -> Option<(usize, f64)> {
        self.poses.iter().enumerate().map(|(i, p)| (i, p.pose.distance(pose))).min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Adds a pose, merging it with an existing one closer than `DEDUP_TOL`.
    pub(crate) fn insert(&mut self, candidate: FkPose) -> bool {
        if let Some(existing) = self.poses.iter_mut().find(|p| p.pose.distance(&candidate.pose) < DEDUP_TOL) {
            existing.multiplicity = existing.multiplicity.saturating_add(candidate.multiplicity);
            if candidate.residual < existing.residual {
                existing.pose = candidate.pose;
                existing.residual = candidate.residual;
            }
            false
        } else {
            self.poses.push(candidate);
            true
        }
    }

    pub(crate) fn sort(&mut self) {
        self.poses.sort_by(|a, b| {
            a.pose.phi.total_cmp(&b.pose.phi).then(a.pose.x.total_cmp(&b.pose.x)).then(a.pose.y.total_cmp(&b.pose.y))
        });
    }
}

impl Serialize for FkSolutionSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry {
            x: f64,
            y: f64,
            phi: f64,
            t_or_inf: serde_json::Value,
            residual: f64,
            multiplicity: u8,
        }
        let poses: Vec<Entry> = self
            .poses
            .iter()
            .map(|p| Entry {
                x: p.pose.x,
                y: p.pose.y,
                phi: p.pose.phi,
                t_or_inf: match p.t {
                    OrientationParam::Finite(t) => serde_json::json!(t),
                    OrientationParam::Infinite => serde_json::json!("inf"),
                },
                residual: p.residual,
                multiplicity: p.multiplicity,
            })
            .collect();
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("count", &self.count())?;
        map.serialize_entry("poses", &poses)?;
        map.serialize_entry("degenerate", &self.degenerate)?;
        map.end()
    }
}

/// Forward kinematics through the characteristic cubic.
pub fn forward_kinematics_analytic(g: &AnalyticGeometry, j: &JointVector) -> FkSolutionSet {
    let mut out = FkSolutionSet::default();
    let cubic = characteristic_cubic(g, j);
    let len = g.length_scale();
    let coef_scale = len * (len * len + j.norm().powi(2));
    if cubic.max_abs() < 1e-12 * coef_scale {
        out.degenerate = true;
        return out;
    }
    let Ok(roots) = cubic.real_roots(DEFAULT_ROOT_EPS) else {
        out.degenerate = true;
        return out;
    };

    let orientations =
        roots.roots.iter().map(|r| (OrientationParam::Finite(r.t), r.multiplicity)).chain(
            (roots.infinity_multiplicity > 0).then_some((OrientationParam::Infinite, roots.infinity_multiplicity)),
        );

    for (t, root_mult) in orientations {
        match orientation_to_positions(g, j, t, FK_RESIDUAL_TOL) {
            Ok(positions) => {
                for sol in positions {
                    out.insert(FkPose {
                        pose: sol.pose,
                        t: OrientationParam::from_angle(sol.pose.phi),
                        residual: joint_residual(g, &sol.pose, j),
                        multiplicity: root_mult * sol.multiplicity,
                    });
                }
            }
            Err(Error::BothEquationsDegenerate) => out.degenerate = true,
            Err(_) => {}
        }
    }
    out.sort();
    out
}

/// Orientation of a pose as used in output: `t` or the infinity marker.
pub fn orientation_label(phi: f64) -> String {
    match OrientationParam::from_angle(wrap_angle(phi)) {
        OrientationParam::Finite(t) => format!("{t}"),
        OrientationParam::Infinite => "inf".to_string(),
    }
}
