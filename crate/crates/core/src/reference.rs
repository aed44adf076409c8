//! Brute-force forward kinematics, valid for any geometry.
//!
//! For each orientation on a uniform grid over `(-π, π]`, two of the leg
//! circles are intersected and the third constraint is evaluated at the (at
//! most two) intersection points. Sign changes of that residual along the grid
//! bracket solutions, which are then polished by Newton iteration on the full
//! system. All three leg pairs are scanned: a single pair can degenerate into
//! coincident circles at an isolated orientation (legs 1 and 2 of an analytic
//! manipulator at `φ = 0`), hiding the solutions that live exactly there.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::geometry::GeometryParams;
use crate::kinematics::{
    constraint_gradient, constraint_squares, joint_residual, FkPose, FkSolutionSet, FK_RESIDUAL_TOL,
};
use crate::pose::{JointVector, OrientationParam, Pose};

pub const DEFAULT_PHI_SAMPLES: usize = 3600;

const PAIRS: [(usize, usize, usize); 3] = [(0, 1, 2), (0, 2, 1), (1, 2, 0)];

/// Centre of the circle traced by the operation point for leg `leg` at
/// orientation `phi`.
fn leg_centre(g: &GeometryParams, leg: usize, phi: f64) -> [f64; 2] {
    match leg {
        0 => [0.0, 0.0],
        1 => [g.c2 - g.l2 * phi.cos(), -g.l2 * phi.sin()],
        _ => [g.c3 - g.l3 * (phi + g.beta).cos(), g.d3 - g.l3 * (phi + g.beta).sin()],
    }
}

/// Intersections of two circles, ordered by side of the centre line.
fn circle_intersections(ca: [f64; 2], ra: f64, cb: [f64; 2], rb: f64, scale: f64) -> Option<[[f64; 2]; 2]> {
    let (dx, dy) = (cb[0] - ca[0], cb[1] - ca[1]);
    let d = dx.hypot(dy);
    if d < 1e-12 * scale {
        return None;
    }
    let a = (ra * ra - rb * rb + d * d) / (2.0 * d);
    let h2 = ra * ra - a * a;
    if h2 < 0.0 {
        return None;
    }
    let h = h2.sqrt();
    let (ux, uy) = (dx / d, dy / d);
    let (mx, my) = (ca[0] + a * ux, ca[1] + a * uy);
    Some([[mx - h * uy, my + h * ux], [mx + h * uy, my - h * ux]])
}

struct Sample {
    phi: f64,
    points: Option<[[f64; 2]; 2]>,
    residual: [f64; 2],
}

/// Newton iteration on the three constraints with backtracking.
pub fn newton_polish(g: &GeometryParams, j: &JointVector, start: Pose) -> Option<Pose> {
    let target = j.squares();
    let residual = |p: &Pose| {
        let f = constraint_squares(g, p);
        Vector3::new(f[0] - target[0], f[1] - target[1], f[2] - target[2]) * 0.5
    };
    let scale = (1.0 + j.norm()).powi(2);
    let mut pose = start;
    let mut f = residual(&pose);
    for _ in 0..60 {
        let norm = f.norm();
        if norm < 1e-15 * scale {
            break;
        }
        let Some(step) = constraint_gradient(g, &pose).lu().solve(&f) else { break };
        let mut lambda = 1.0;
        let mut improved = false;
        while lambda > 1e-4 {
            let s = step * lambda;
            let next = Pose::new(pose.x - s[0], pose.y - s[1], pose.phi - s[2]);
            let fnext = residual(&next);
            if fnext.norm() < norm {
                pose = next;
                f = fnext;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    pose.is_finite().then_some(pose)
}

pub fn forward_kinematics_reference(g: &GeometryParams, j: &JointVector, phi_samples: usize) -> FkSolutionSet {
    let n = phi_samples.max(8);
    let rho = j.as_array();
    let scale = g.length_scale() + j.norm();
    let tol = FK_RESIDUAL_TOL * (1.0 + j.norm());
    let mut out = FkSolutionSet::default();
    // (pair, cell) of every accepted distinct solution
    let mut origins: Vec<(usize, usize)> = Vec::new();

    for (pair_idx, &(a, b, c)) in PAIRS.iter().enumerate() {
        let samples: Vec<Sample> = (0..n)
            .map(|k| {
                let phi = -PI + (k as f64 + 1.0) * 2.0 * PI / n as f64;
                let (ca, cb, cc) = (leg_centre(g, a, phi), leg_centre(g, b, phi), leg_centre(g, c, phi));
                let points = circle_intersections(ca, rho[a], cb, rho[b], scale);
                let mut residual = [0.0; 2];
                if let Some(pts) = &points {
                    for (r, p) in residual.iter_mut().zip(pts) {
                        let (dx, dy) = (p[0] - cc[0], p[1] - cc[1]);
                        *r = dx * dx + dy * dy - rho[c] * rho[c];
                    }
                }
                Sample { phi, points, residual }
            })
            .collect();

        for k in 0..n {
            let (s0, s1) = (&samples[k], &samples[(k + 1) % n]);
            let (Some(p0), Some(p1)) = (&s0.points, &s1.points) else { continue };
            let phi1 = if k + 1 == n { s1.phi + 2.0 * PI } else { s1.phi };
            for branch in 0..2 {
                let (r0, r1) = (s0.residual[branch], s1.residual[branch]);
                if r0 == 0.0 || r0.signum() == r1.signum() {
                    continue;
                }
                let w = r0 / (r0 - r1);
                let start = Pose::new(
                    p0[branch][0] + w * (p1[branch][0] - p0[branch][0]),
                    p0[branch][1] + w * (p1[branch][1] - p0[branch][1]),
                    s0.phi + w * (phi1 - s0.phi),
                );
                let Some(pose) = newton_polish(g, j, start) else { continue };
                let residual = joint_residual(g, &pose, j);
                if residual >= tol {
                    continue;
                }
                let fresh =
                    out.insert(FkPose { pose, t: OrientationParam::from_angle(pose.phi), residual, multiplicity: 1 });
                if fresh {
                    if origins.contains(&(pair_idx, k)) {
                        out.grid_too_coarse = true;
                    }
                    origins.push((pair_idx, k));
                }
            }
        }
    }
    // one multiplicity per distinct solution: several pairs see the same one
    for p in &mut out.poses {
        p.multiplicity = 1;
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::inverse_kinematics;

    #[test]
    fn finds_the_six_solutions() {
        let g = GeometryParams::example();
        let s = std::f64::consts::SQRT_2;
        let fk = forward_kinematics_reference(&g, &JointVector::new(s, s, s).unwrap(), 3600);
        assert_eq!(fk.count(), 6, "{fk:?}");
        assert!(fk.contains(&Pose::new(1.0, 1.0, 0.0), 1e-10));
        assert!(fk.contains(&Pose::new(1.0, -1.0, PI), 1e-10));
    }

    #[test]
    fn contains_ik_preimage() {
        let g = GeometryParams::example();
        let fk = forward_kinematics_reference(&g, &JointVector::new(2.0, 2.0, 8f64.sqrt()).unwrap(), 720);
        assert!(fk.contains(&Pose::new(2.0, 0.0, 0.0), 1e-10), "{fk:?}");
    }

    #[test]
    fn tiny_legs_are_infeasible() {
        let g = GeometryParams::example();
        let fk = forward_kinematics_reference(&g, &JointVector::new(0.01, 0.01, 0.01).unwrap(), 3600);
        assert_eq!(fk.count(), 0);
    }

    #[test]
    fn works_for_general_geometry() {
        let g = GeometryParams::new(1.5, 0.4, 1.2, 0.8, 0.9, 0.6).unwrap();
        let p = Pose::new(0.3, 0.9, -0.4);
        let j = inverse_kinematics(&g, &p);
        let fk = forward_kinematics_reference(&g, &j, 3600);
        assert!(fk.contains(&p, 1e-9), "{fk:?}");
        assert!(fk.count().is_multiple_of(2) && fk.count() <= 6);
    }
}
