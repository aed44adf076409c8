//! Second-order singularities: joint vectors at which the characteristic
//! cubic has a triple root.
//!
//! The triple-root conditions `P = P' = P'' = 0` form a square polynomial
//! system once one joint is fixed. It is solved by multistart Newton with
//! exact Jacobians from a deterministic seed grid; converged points are
//! polished, filtered and deduplicated sequentially in seed order.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::AnalyticGeometry;
use crate::kinematics::{characteristic_cubic, CubicFamily};
use crate::pose::JointVector;

/// Residual every reported cusp satisfies, relative to the coefficient scale.
pub const CUSP_RESIDUAL_TOL: f64 = 1e-10;
/// Cusps closer than this in the searched joint plane are merged.
pub const CUSP_DEDUP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CuspPoint {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub t_triple: f64,
    /// `(|P|, |P'|, |P''|)` at the triple root.
    pub residuals: [f64; 3],
}

impl CuspPoint {
    pub fn joints(&self) -> JointVector {
        JointVector::unchecked(self.rho1, self.rho2, self.rho3)
    }
}

/// `(P, P', P'')` of the characteristic cubic at `t`.
pub fn triple_root_residuals(g: &AnalyticGeometry, j: &JointVector, t: f64) -> [f64; 3] {
    characteristic_cubic(g, j).eval_with_derivatives(t)
}

/// Rectangle in a joint-space section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl SearchBox {
    pub fn square(lo: f64, hi: f64) -> Self {
        SearchBox { min: [lo, lo], max: [hi, hi] }
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        a >= self.min[0] && a <= self.max[0] && b >= self.min[1] && b <= self.max[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedGrid {
    pub per_axis: usize,
    pub t_range: [f64; 2],
}

impl Default for SeedGrid {
    fn default() -> Self {
        SeedGrid { per_axis: 40, t_range: [-10.0, 10.0] }
    }
}

impl SeedGrid {
    fn values(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        if n <= 1 {
            return vec![0.5 * (lo + hi)];
        }
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CuspSearch {
    pub points: Vec<CuspPoint>,
    /// Seeds whose Newton iteration did not converge.
    pub non_converged: usize,
    /// Converged seeds rejected as spurious or outside the box.
    pub discarded: usize,
}

/// Which joint is held fixed while the other two and `t` are solved for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fixed {
    Rho1,
    Rho2,
}

impl Fixed {
    /// Indices of the two free joints.
    fn free(self) -> [usize; 2] {
        match self {
            Fixed::Rho2 => [0, 2],
            Fixed::Rho1 => [1, 2],
        }
    }
}

/// Triple-root system with one fixed joint.
struct TripleSystem {
    family: CubicFamily,
    fixed: Fixed,
    fixed_value: f64,
}

impl TripleSystem {
    fn joints(&self, free: [f64; 2]) -> [f64; 3] {
        let mut rho = [0.0; 3];
        let fixed_idx = match self.fixed {
            Fixed::Rho1 => 0,
            Fixed::Rho2 => 1,
        };
        rho[fixed_idx] = self.fixed_value;
        for (idx, v) in self.fixed.free().into_iter().zip(free) {
            rho[idx] = v;
        }
        rho
    }

    fn coefficient_scale(&self, rho: [f64; 3]) -> f64 {
        let sq = rho.map(|r| r * r);
        1.0 + self.family.coefficients(sq).iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    /// Values and Jacobian in `(t, free0, free1)`.
    fn eval(&self, x: Vector3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
        let t = x[0];
        let rho = self.joints([x[1], x[2]]);
        let a = self.family.coefficients(rho.map(|r| r * r));
        // rows: t^k and its first three derivatives, k = 0..3
        let powers = |k: usize| -> [f64; 4] {
            let kf = k as f64;
            let p = |e: i32| if e < 0 { 0.0 } else { t.powi(e) };
            [
                p(k as i32),
                kf * p(k as i32 - 1),
                kf * (kf - 1.0) * p(k as i32 - 2),
                kf * (kf - 1.0) * (kf - 2.0) * p(k as i32 - 3),
            ]
        };
        let mut f = Vector3::zeros();
        let mut jac = Matrix3::zeros();
        for (k, ak) in a.iter().enumerate() {
            let pw = powers(k);
            for d in 0..3 {
                f[d] += ak * pw[d];
                jac[(d, 0)] += ak * pw[d + 1];
                for (col, idx) in self.fixed.free().into_iter().enumerate() {
                    jac[(d, col + 1)] += self.family.linear[k][idx] * 2.0 * rho[idx] * pw[d];
                }
            }
        }
        (f, jac)
    }

    /// Damped Newton from `x0`; returns the converged point.
    fn solve(&self, x0: Vector3<f64>) -> Option<Vector3<f64>> {
        let mut x = x0;
        let (mut f, mut jac) = self.eval(x);
        for _ in 0..60 {
            let scale = self.coefficient_scale(self.joints([x[1], x[2]])) * (1.0 + x[0].abs()).powi(3);
            if f.amax() < 1e-14 * scale {
                break;
            }
            let step = jac.lu().solve(&f)?;
            let mut lambda = 1.0;
            loop {
                let next = x - step * lambda;
                let (fn_, jn) = self.eval(next);
                if fn_.norm() < f.norm() || lambda < 1e-3 {
                    x = next;
                    f = fn_;
                    jac = jn;
                    break;
                }
                lambda *= 0.5;
            }
            if !x.iter().all(|v| v.is_finite()) || x.amax() > 1e6 {
                return None;
            }
        }
        let scale = self.coefficient_scale(self.joints([x[1], x[2]])) * (1.0 + x[0].abs()).powi(3);
        (f.amax() < CUSP_RESIDUAL_TOL * scale).then_some(x)
    }

    fn point(&self, x: Vector3<f64>) -> CuspPoint {
        // the system only sees squared joints
        let x = Vector3::new(x[0], x[1].abs(), x[2].abs());
        let rho = self.joints([x[1], x[2]]);
        let (f, _) = self.eval(x);
        CuspPoint {
            rho1: rho[0],
            rho2: rho[1],
            rho3: rho[2],
            t_triple: x[0],
            residuals: [f[0].abs(), f[1].abs(), f[2].abs()],
        }
    }

    fn run(&self, seeds: Vec<Vector3<f64>>, accept: impl Fn(&CuspPoint) -> bool + Sync) -> CuspSearch {
        let results: Vec<Option<CuspPoint>> = seeds.par_iter().map(|s| self.solve(*s).map(|x| self.point(x))).collect();
        let free = self.fixed.free();
        let mut out = CuspSearch { points: Vec::new(), non_converged: 0, discarded: 0 };
        for r in results {
            let Some(p) = r else {
                out.non_converged += 1;
                continue;
            };
            let rho = [p.rho1, p.rho2, p.rho3];
            if !p.t_triple.is_finite() || rho.iter().any(|r| !(*r > 0.0)) || !accept(&p) {
                out.discarded += 1;
                continue;
            }
            let dup = out.points.iter().any(|q| {
                let qr = [q.rho1, q.rho2, q.rho3];
                free.iter().all(|&i| (qr[i] - rho[i]).abs() < CUSP_DEDUP_TOL)
            });
            if !dup {
                out.points.push(p);
            }
        }
        out.points.sort_by(|a, b| {
            let (ka, kb) = ([a.rho1, a.rho2, a.rho3], [b.rho1, b.rho2, b.rho3]);
            ka[free[0]].total_cmp(&kb[free[0]]).then(ka[free[1]].total_cmp(&kb[free[1]]))
        });
        out
    }
}

fn seed_grid(seeds: &SeedGrid, a: [f64; 2], b: [f64; 2]) -> Vec<Vector3<f64>> {
    let ts = SeedGrid::values(seeds.t_range[0], seeds.t_range[1], seeds.per_axis);
    let us = SeedGrid::values(a[0], a[1], seeds.per_axis);
    let vs = SeedGrid::values(b[0], b[1], seeds.per_axis);
    let mut out = Vec::with_capacity(ts.len() * us.len() * vs.len());
    for &t in &ts {
        for &u in &us {
            for &v in &vs {
                out.push(Vector3::new(t, u, v));
            }
        }
    }
    out
}

/// Cusps of the section at fixed `ρ2`, searched in `(ρ1, ρ3)` over the box.
pub fn find_cusps_in_section(g: &AnalyticGeometry, rho2: f64, search: &SearchBox, seeds: &SeedGrid) -> CuspSearch {
    let system = TripleSystem { family: CubicFamily::new(g), fixed: Fixed::Rho2, fixed_value: rho2 };
    let grid = seed_grid(seeds, [search.min[0], search.max[0]], [search.min[1], search.max[1]]);
    system.run(grid, |p| search.contains(p.rho1, p.rho3))
}

/// Points of the cusp locus above a fixed `ρ1`, one per distinct `ρ3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectionPoint {
    pub rho2: f64,
    pub rho3: f64,
    pub t_triple: f64,
}

/// Projection of the cusp locus onto `(ρ1, ρ3)` at a fixed `ρ1`: solves the
/// triple-root system in `(t, ρ2, ρ3)` and returns the distinct `ρ3` found
/// with a real positive `ρ2`.
pub fn cusp_projection_probe(
    g: &AnalyticGeometry,
    rho1: f64,
    joint_range: [f64; 2],
    seeds: &SeedGrid,
) -> Result<Vec<ProjectionPoint>> {
    if (g.c2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "projection probe expects a geometry scaled to c2 = 1, got c2 = {}",
            g.c2
        )));
    }
    let system = TripleSystem { family: CubicFamily::new(g), fixed: Fixed::Rho1, fixed_value: rho1 };
    let grid = seed_grid(seeds, joint_range, joint_range);
    let search = system.run(grid, |_| true);
    let mut out: Vec<ProjectionPoint> = Vec::new();
    for p in search.points {
        if out.iter().all(|q| (q.rho3 - p.rho3).abs() >= CUSP_DEDUP_TOL) {
            out.push(ProjectionPoint { rho2: p.rho2, rho3: p.rho3, t_triple: p.t_triple });
        }
    }
    out.sort_by(|a, b| a.rho3.total_cmp(&b.rho3));
    Ok(out)
}

/// A plane cubic `Σ c_ab R1^a R3^b = 0` (`a + b ≤ 3`) through the projected
/// cusp locus, in squared joints `R1 = ρ1²`, `R3 = ρ3²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionFit {
    /// `((a, b), c_ab)` normalized so the largest coefficient has magnitude 1.
    pub coefficients: Vec<((u8, u8), f64)>,
    /// Largest `|F(R1, R3)|` over the fitted points, relative to the sum of
    /// term magnitudes.
    pub max_relative_residual: f64,
    /// Smallest over second-smallest singular value of the design matrix.
    pub singular_ratio: f64,
    pub points: Vec<[f64; 2]>,
}

impl ProjectionFit {
    pub fn coefficient(&self, a: u8, b: u8) -> f64 {
        self.coefficients.iter().find(|(k, _)| *k == (a, b)).map(|(_, c)| *c).unwrap_or(0.0)
    }

    /// Evaluates the fitted cubic.
    pub fn eval(&self, r1: f64, r3: f64) -> f64 {
        self.coefficients.iter().map(|((a, b), c)| c * r1.powi(*a as i32) * r3.powi(*b as i32)).sum()
    }
}

const MONOMIALS: [(u8, u8); 10] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)];

/// Fits the plane cubic through the cusp projection sampled at `rho1_samples`.
pub fn fit_projection_cubic(
    g: &AnalyticGeometry,
    rho1_samples: &[f64],
    joint_range: [f64; 2],
    seeds: &SeedGrid,
) -> Result<ProjectionFit> {
    let mut points = Vec::new();
    for &r1 in rho1_samples {
        for p in cusp_projection_probe(g, r1, joint_range, seeds)? {
            points.push([r1 * r1, p.rho3 * p.rho3]);
        }
    }
    if points.len() < MONOMIALS.len() {
        return Err(Error::InvalidInput(format!(
            "only {} projection points found; need at least {}",
            points.len(),
            MONOMIALS.len()
        )));
    }
    // column scaling keeps the design matrix well conditioned
    let scale = points.iter().fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
    let design = DMatrix::from_fn(points.len(), MONOMIALS.len(), |i, k| {
        let (a, b) = MONOMIALS[k];
        let (u, v) = (points[i][0] / scale, points[i][1] / scale);
        u.powi(a as i32) * v.powi(b as i32)
    });
    let svd = design.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|a, b| sv[*a].total_cmp(&sv[*b]));
    let null = v_t.row(order[0]);
    let singular_ratio = sv[order[0]] / sv[order[1]];

    // undo the column scaling: c_ab (R1/s)^a (R3/s)^b = (c_ab / s^(a+b)) R1^a R3^b
    let mut coefs: Vec<((u8, u8), f64)> =
        MONOMIALS.iter().zip(null.iter()).map(|(&(a, b), &c)| ((a, b), c / scale.powi((a + b) as i32))).collect();
    let biggest = coefs.iter().fold(0.0f64, |m, (_, c)| m.max(c.abs()));
    let lead = coefs.iter().find(|(k, _)| *k == (0, 3)).map(|(_, c)| *c).unwrap_or(1.0);
    let norm = if lead.abs() > 1e-8 * biggest { lead } else { biggest };
    for (_, c) in coefs.iter_mut() {
        *c /= norm;
    }
    let mut fit = ProjectionFit { coefficients: coefs, max_relative_residual: 0.0, singular_ratio, points };
    fit.max_relative_residual = fit
        .points
        .iter()
        .map(|p| {
            let mag: f64 = fit
                .coefficients
                .iter()
                .map(|((a, b), c)| (c * p[0].powi(*a as i32) * p[1].powi(*b as i32)).abs())
                .sum();
            fit.eval(p[0], p[1]).abs() / mag.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::JointVector;

    #[test]
    fn residual_examples() {
        let g = AnalyticGeometry::example();
        let cusp = JointVector::new(3f64.sqrt(), 1.0, 1.0).unwrap();
        let r = triple_root_residuals(&g, &cusp, -1.0);
        assert!(r.iter().all(|v| v.abs() < 1e-14), "{r:?}");
        let s = std::f64::consts::SQRT_2;
        let r = triple_root_residuals(&g, &JointVector::new(s, s, s).unwrap(), 0.0);
        assert!(r[0].abs() < 1e-14 && (r[1] + 4.0).abs() < 1e-14 && (r[2] + 8.0).abs() < 1e-14, "{r:?}");
        let r = triple_root_residuals(&g, &cusp, 0.0);
        assert!((r[0] + 2.0).abs() < 1e-14 && (r[1] + 6.0).abs() < 1e-14 && (r[2] + 12.0).abs() < 1e-14);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = AnalyticGeometry::new(crate::geometry::GeometryParams::analytic(1.0, 0.4, 0.9).unwrap()).unwrap();
        for fixed in [Fixed::Rho1, Fixed::Rho2] {
            let sys = TripleSystem { family: CubicFamily::new(&g), fixed, fixed_value: 1.3 };
            let x = Vector3::new(0.7, 1.1, 2.3);
            let (_, jac) = sys.eval(x);
            for col in 0..3 {
                let h = 1e-6;
                let mut xp = x;
                let mut xm = x;
                xp[col] += h;
                xm[col] -= h;
                let fd = (sys.eval(xp).0 - sys.eval(xm).0) / (2.0 * h);
                for row in 0..3 {
                    assert!((fd[row] - jac[(row, col)]).abs() < 1e-6 * (1.0 + fd[row].abs()), "{fixed:?} {row} {col}");
                }
            }
        }
    }

    #[test]
    fn empty_box_has_no_cusps() {
        let g = AnalyticGeometry::example();
        let r = find_cusps_in_section(
            &g,
            1.0,
            &SearchBox::square(3.5, 4.0),
            &SeedGrid { per_axis: 12, ..Default::default() },
        );
        assert!(r.points.is_empty(), "{r:?}");
    }

    #[test]
    fn probe_requires_unit_base() {
        let g = AnalyticGeometry::new(crate::geometry::GeometryParams::analytic(2.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(cusp_projection_probe(&g, 1.0, [0.1, 5.0], &SeedGrid::default()).is_err());
    }
}
