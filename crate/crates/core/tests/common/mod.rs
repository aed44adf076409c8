#![allow(dead_code)]

use rand::Rng;
use rpr_analytic::kinematics::CubicFamily;
use rpr_analytic::singularity::{homogeneous_factor_scale, homogeneous_factors, jacobian_det_scale};
use rpr_analytic::{jacobian_parallel_det, AnalyticGeometry, GeometryParams, JointVector, Pose};
use std::f64::consts::PI;

pub fn analytic(c2: f64, c3: f64, d3: f64) -> AnalyticGeometry {
    AnalyticGeometry::new(GeometryParams::analytic(c2, c3, d3).unwrap()).unwrap()
}

pub fn random_pose(rng: &mut impl Rng, half_width: f64) -> Pose {
    Pose::new(rng.gen_range(-half_width..half_width), rng.gen_range(-half_width..half_width), rng.gen_range(-PI..PI))
}

/// Printed quadratics of the example geometry, as `(sign of ρ1ρ2, sign of ρ1ρ3)`.
pub const PRINTED_QUADRATICS: [(f64, f64); 4] = [(-1.0, 1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];

pub fn printed_quadratic(i: usize, r1: f64, r2: f64, r3: f64) -> f64 {
    let (a, b) = PRINTED_QUADRATICS[i];
    0.5 * r2 * r2 - 2.0 + a * r1 * r2 + r1 * r1 + b * r1 * r3 + 0.5 * r3 * r3
}

/// `n` points with positive joints on the printed quadratic `i` at `ρ2 = 1`,
/// solving for `ρ3` on a sweep of `ρ1`.
pub fn printed_quadratic_points(i: usize, n: usize) -> Vec<JointVector> {
    let (a, b) = PRINTED_QUADRATICS[i];
    // ½ρ3² + bρ1 ρ3 + (ρ1² + aρ1 − 3/2) = 0
    let roots = |r1: f64| -> Vec<f64> {
        let (p, q) = (b * r1, r1 * r1 + a * r1 - 1.5);
        let disc = p * p - 2.0 * q;
        if disc < 0.0 {
            return vec![];
        }
        [-p - disc.sqrt(), -p + disc.sqrt()].into_iter().filter(|r| *r > 1e-3).collect()
    };
    let feasible: Vec<f64> = (1..4000).map(|k| k as f64 * 1e-3).filter(|r1| !roots(*r1).is_empty()).collect();
    let (lo, hi) = (feasible[0], feasible[feasible.len() - 1]);
    let mut out = Vec::new();
    let mut k = 0;
    while out.len() < n {
        let r1 = lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        k = (k + 1) % n;
        for r3 in roots(r1) {
            if out.len() < n {
                out.push(JointVector::new(r1, 1.0, r3).unwrap());
            }
        }
    }
    out
}

/// A joint vector whose characteristic cubic has a double root at `t0`,
/// found by solving `P(t0) = P'(t0) = 0` for `(R1, R3)` at the given `R2`.
pub fn double_root_instance(g: &AnalyticGeometry, t0: f64, r2_sq: f64) -> Option<JointVector> {
    let fam = CubicFamily::new(g);
    let row = |d: usize| -> ([f64; 3], f64) {
        // coefficients of P^(d)(t0) in (R1, R2, R3) and its constant part
        let mut lin = [0.0; 3];
        let mut c = 0.0;
        for k in d..4 {
            let factor = if d == 0 { 1.0 } else { k as f64 } * t0.powi((k - d) as i32);
            c += fam.constant[k] * factor;
            for (l, f) in lin.iter_mut().zip(fam.linear[k]) {
                *l += f * factor;
            }
        }
        (lin, c)
    };
    let (l0, c0) = row(0);
    let (l1, c1) = row(1);
    let (b0, b1) = (-(c0 + l0[1] * r2_sq), -(c1 + l1[1] * r2_sq));
    let det = l0[0] * l1[2] - l0[2] * l1[0];
    if det.abs() < 1e-9 {
        return None;
    }
    let solve = |u: f64, v: f64| ((u * l1[2] - l0[2] * v) / det, (l0[0] * v - u * l1[0]) / det);
    let (mut r1, mut r3) = solve(b0, b1);
    // iterative refinement against the cubic as the library builds it
    for _ in 0..3 {
        if r1 <= 0.0 || r3 <= 0.0 {
            return None;
        }
        let j = JointVector::new(r1.sqrt(), r2_sq.sqrt(), r3.sqrt()).unwrap();
        let [p, dp, _] = rpr_analytic::characteristic_cubic(g, &j).eval_with_derivatives(t0);
        let (e1, e3) = solve(p, dp);
        r1 -= e1;
        r3 -= e3;
    }
    (r1 > 0.0 && r3 > 0.0).then(|| JointVector::new(r1.sqrt(), r2_sq.sqrt(), r3.sqrt()).unwrap())
}

pub struct CrossingCheck {
    pub det_roots: usize,
    pub det_roots_on_factors: usize,
    pub factor_roots: usize,
    pub factor_roots_on_det: usize,
    pub worst_factor_at_det_root: f64,
    pub worst_det_at_factor_root: f64,
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `detM` and of `f1 f2` along random workspace lines,
/// refined by bisection; each root of one must be a root of the other.
pub fn workspace_line_crossings(g: &AnalyticGeometry, rng: &mut impl Rng, wanted: usize, tol: f64) -> CrossingCheck {
    let mut out = CrossingCheck {
        det_roots: 0,
        det_roots_on_factors: 0,
        factor_roots: 0,
        factor_roots_on_det: 0,
        worst_factor_at_det_root: 0.0,
        worst_det_at_factor_root: 0.0,
    };
    while out.det_roots < wanted || out.factor_roots < wanted {
        let p0 = random_pose(rng, 2.5);
        let mut d: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        d.iter_mut().for_each(|v| *v /= n);
        let at = |s: f64| Pose::new(p0.x + s * d[0], p0.y + s * d[1], p0.phi + s * d[2]);
        let det = |s: f64| jacobian_parallel_det(g, &at(s));
        let fac = |s: f64| {
            let (a, b) = homogeneous_factors(g, &at(s));
            a * b
        };
        let samples = 200;
        let s_of = |k: usize| -1.5 + 3.0 * k as f64 / samples as f64;
        for k in 0..samples {
            let (a, b) = (s_of(k), s_of(k + 1));
            if out.det_roots < wanted && (det(a) > 0.0) != (det(b) > 0.0) {
                let s = bisect(&det, a, b);
                let p = at(s);
                let (h1, h2) = homogeneous_factors(g, &p);
                let rel = (h1 * h2).abs() / homogeneous_factor_scale(g, &p);
                out.det_roots += 1;
                out.worst_factor_at_det_root = out.worst_factor_at_det_root.max(rel);
                if rel < tol {
                    out.det_roots_on_factors += 1;
                }
            }
            if out.factor_roots < wanted && (fac(a) > 0.0) != (fac(b) > 0.0) {
                let s = bisect(&fac, a, b);
                let p = at(s);
                let rel = jacobian_parallel_det(g, &p).abs() / jacobian_det_scale(g, &p);
                out.factor_roots += 1;
                out.worst_det_at_factor_root = out.worst_det_at_factor_root.max(rel);
                if rel < tol {
                    out.factor_roots_on_det += 1;
                }
            }
        }
    }
    out
}

/// Pose with `f1 = 0` (`x = −t y`) at a random `(y, φ)`.
pub fn pose_on_f1(rng: &mut impl Rng) -> Pose {
    let phi = rng.gen_range(-3.0..3.0);
    let y = rng.gen_range(-2.0..2.0);
    Pose::new(-(phi / 2.0f64).tan() * y, y, phi)
}

/// Pose with `f2 = 0`, using that `f2` is affine in `x`.
pub fn pose_on_f2(g: &AnalyticGeometry, rng: &mut impl Rng) -> Option<Pose> {
    let phi = rng.gen_range(-3.0..3.0);
    let y = rng.gen_range(-2.0..2.0);
    let f = |x: f64| rpr_analytic::workspace_singularity_factors(g, &Pose::new(x, y, phi)).1;
    let (f0, f1) = (f(0.0), f(1.0));
    if (f1 - f0).abs() < 1e-9 {
        return None;
    }
    let x = -f0 / (f1 - f0);
    (x.abs() < 10.0).then(|| Pose::new(x, y, phi))
}
