//! Joint-space region maps and workspace aspects.

use std::collections::VecDeque;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::AnalyticGeometry;
use crate::kinematics::forward_kinematics_analytic;
use crate::pose::{JointVector, Pose};
use crate::singularity::{
    branch_surface, discriminant_surface, jacobian_det_scale, jacobian_parallel_det, DEFAULT_SURFACE_TOL,
};

/// Cell-centred uniform axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidInput(format!("axis needs min < max, got [{min}, {max}]")));
        }
        if n == 0 {
            return Err(Error::InvalidInput("axis needs at least one cell".into()));
        }
        Ok(Axis { min, max, n })
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    pub fn centre(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }

    /// Cell containing `v`.
    pub fn index_of(&self, v: f64) -> Option<usize> {
        if !(v >= self.min && v <= self.max) {
            return None;
        }
        Some((((v - self.min) / self.width()) as usize).min(self.n - 1))
    }
}

/// Grid over a `(ρ1, ρ3)` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionGrid {
    pub rho1: Axis,
    pub rho3: Axis,
}

impl SectionGrid {
    pub fn square(min: f64, max: f64, n: usize) -> Result<Self> {
        let a = Axis::new(min, max, n)?;
        Ok(SectionGrid { rho1: a, rho3: a })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellClass {
    pub count: u8,
    /// Centre is on (or numerically too close to) a singularity surface.
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionMap {
    pub rho2: f64,
    pub grid: SectionGrid,
    /// Row-major with `ρ3` as the row index.
    pub cells: Vec<CellClass>,
}

impl SectionMap {
    pub fn get(&self, i1: usize, i3: usize) -> CellClass {
        self.cells[i3 * self.grid.rho1.n + i1]
    }

    pub fn centre(&self, i1: usize, i3: usize) -> (f64, f64) {
        (self.grid.rho1.centre(i1), self.grid.rho3.centre(i3))
    }

    pub fn cell_at(&self, rho1: f64, rho3: f64) -> Option<CellClass> {
        Some(self.get(self.grid.rho1.index_of(rho1)?, self.grid.rho3.index_of(rho3)?))
    }

    /// Number of non-boundary cells per solution count `0..=6`.
    pub fn histogram(&self) -> [usize; 7] {
        let mut h = [0; 7];
        for c in self.cells.iter().filter(|c| !c.boundary) {
            h[(c.count as usize).min(6)] += 1;
        }
        h
    }

    pub fn boundary_count(&self) -> usize {
        self.cells.iter().filter(|c| c.boundary).count()
    }
}

/// `true` when `value(centre)` is negligible against its neighbourhood.
fn near_zero(values: [f64; 5], tol: f64) -> bool {
    let local = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values[0].abs() <= tol * local
}

fn classify_cell(g: &AnalyticGeometry, rho2: f64, r1: f64, r3: f64, h1: f64, h3: f64, tol: f64) -> CellClass {
    let j = JointVector::unchecked(r1, rho2, r3);
    let fk = forward_kinematics_analytic(g, &j);
    let mut boundary = fk.degenerate || fk.poses.iter().any(|p| p.multiplicity > 1);
    if !boundary {
        let stencil = [(0.0, 0.0), (h1, 0.0), (-h1, 0.0), (0.0, h3), (0.0, -h3)];
        let joints = stencil.map(|(a, b)| JointVector::unchecked((r1 + a).abs(), rho2, (r3 + b).abs()));
        boundary = near_zero(joints.map(|j| discriminant_surface(g, &j).value), tol)
            || near_zero(joints.map(|j| branch_surface(g, &j).value), tol);
    }
    let count = fk.poses.iter().map(|p| p.multiplicity as usize).sum::<usize>().min(255) as u8;
    CellClass { count, boundary }
}

/// Classifies every cell centre of the section by its number of real FK
/// solutions. Cells on or next to a singularity surface are flagged as
/// boundary.
pub fn classify_section(g: &AnalyticGeometry, rho2: f64, grid: &SectionGrid) -> Result<SectionMap> {
    if !(rho2.is_finite() && rho2 >= 0.0) {
        return Err(Error::InvalidJoints(format!("rho2 must be a non-negative number, got {rho2}")));
    }
    let (n1, n3) = (grid.rho1.n, grid.rho3.n);
    let (h1, h3) = (0.5 * grid.rho1.width(), 0.5 * grid.rho3.width());
    let cells = (0..n1 * n3)
        .into_par_iter()
        .map(|idx| {
            let (i1, i3) = (idx % n1, idx / n1);
            classify_cell(g, rho2, grid.rho1.centre(i1), grid.rho3.centre(i3), h1, h3, DEFAULT_SURFACE_TOL)
        })
        .collect();
    Ok(SectionMap { rho2, grid: *grid, cells })
}

fn fk_count(g: &AnalyticGeometry, rho2: f64, p: [f64; 2]) -> u8 {
    forward_kinematics_analytic(g, &JointVector::unchecked(p[0], rho2, p[1])).count() as u8
}

/// A change of the FK solution count located to within the bisection tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountJump {
    pub before: [f64; 2],
    pub after: [f64; 2],
    pub count_before: u8,
    pub count_after: u8,
    pub delta_flips: bool,
    pub branch_flips: bool,
}

impl CountJump {
    pub fn change(&self) -> i32 {
        self.count_after as i32 - self.count_before as i32
    }

    pub fn has_sign_change(&self) -> bool {
        self.delta_flips || self.branch_flips
    }
}

/// Locates count changes along the segment `a → b` in the `(ρ1, ρ3)` section
/// by bisection down to `tol`. A change between equal end counts is missed.
pub fn refine_count_changes(g: &AnalyticGeometry, rho2: f64, a: [f64; 2], b: [f64; 2], tol: f64) -> Vec<CountJump> {
    let mut out = Vec::new();
    let mut stack = vec![(a, fk_count(g, rho2, a), b, fk_count(g, rho2, b))];
    while let Some((p, cp, q, cq)) = stack.pop() {
        if cp == cq {
            continue;
        }
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        if len <= tol {
            let jp = JointVector::unchecked(p[0], rho2, p[1]);
            let jq = JointVector::unchecked(q[0], rho2, q[1]);
            let flips = |f: &dyn Fn(&JointVector) -> f64| {
                let (u, v) = (f(&jp), f(&jq));
                u == 0.0 || v == 0.0 || u.signum() != v.signum()
            };
            out.push(CountJump {
                before: p,
                after: q,
                count_before: cp,
                count_after: cq,
                delta_flips: flips(&|j| discriminant_surface(g, j).value),
                branch_flips: flips(&|j| branch_surface(g, j).value),
            });
            continue;
        }
        let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        let cm = fk_count(g, rho2, m);
        // second half first so the output runs from a to b
        stack.push((m, cm, q, cq));
        stack.push((p, cp, m, cm));
    }
    out
}

/// Count changes between every pair of edge-adjacent non-boundary cells with
/// different counts.
pub fn section_count_jumps(g: &AnalyticGeometry, map: &SectionMap, tol: f64) -> Vec<CountJump> {
    let (n1, n3) = (map.grid.rho1.n, map.grid.rho3.n);
    let mut pairs = Vec::new();
    for i3 in 0..n3 {
        for i1 in 0..n1 {
            let c = map.get(i1, i3);
            if c.boundary {
                continue;
            }
            for (k1, k3) in [(i1 + 1, i3), (i1, i3 + 1)] {
                if k1 >= n1 || k3 >= n3 {
                    continue;
                }
                let d = map.get(k1, k3);
                if !d.boundary && d.count != c.count {
                    pairs.push((map.centre(i1, i3), map.centre(k1, k3)));
                }
            }
        }
    }
    pairs.par_iter().flat_map_iter(|&(a, b)| refine_count_changes(g, map.rho2, [a.0, a.1], [b.0, b.1], tol)).collect()
}

/// Workspace box with cell-centred sampling; the orientation axis always
/// spans the full circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkspaceGrid {
    pub x: Axis,
    pub y: Axis,
    pub phi_cells: usize,
}

impl WorkspaceGrid {
    pub fn new(x: Axis, y: Axis, phi_cells: usize) -> Result<Self> {
        if phi_cells < 3 {
            return Err(Error::InvalidInput("orientation axis needs at least 3 cells".into()));
        }
        Ok(WorkspaceGrid { x, y, phi_cells })
    }

    pub fn phi_centre(&self, k: usize) -> f64 {
        -PI + (k as f64 + 0.5) * 2.0 * PI / self.phi_cells as f64
    }

    fn len(&self) -> usize {
        self.x.n * self.y.n * self.phi_cells
    }

    fn index(&self, ix: usize, iy: usize, k: usize) -> usize {
        (k * self.y.n + iy) * self.x.n + ix
    }

    fn unpack(&self, idx: usize) -> (usize, usize, usize) {
        (idx % self.x.n, (idx / self.x.n) % self.y.n, idx / (self.x.n * self.y.n))
    }

    fn cell_of(&self, p: &Pose) -> Option<usize> {
        let ix = self.x.index_of(p.x)?;
        let iy = self.y.index_of(p.y)?;
        let u = (p.phi + PI) / (2.0 * PI) * self.phi_cells as f64;
        let k = (u.floor() as isize).rem_euclid(self.phi_cells as isize) as usize;
        Some(self.index(ix, iy, k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AspectReport {
    pub component_count: usize,
    /// Sizes of the kept components, largest first.
    pub component_sizes: Vec<usize>,
    /// Sizes of components below the noise floor.
    pub discarded_sizes: Vec<usize>,
    pub nonsingular_cells: usize,
    pub total_cells: usize,
    pub noise_floor: usize,
    pub caveat: String,
}

/// Component labelling of the non-singular workspace cells.
#[derive(Debug, Clone)]
pub struct AspectMap {
    pub grid: WorkspaceGrid,
    /// Component label per cell, `None` on singular cells or noise components.
    labels: Vec<Option<u32>>,
    pub report: AspectReport,
}

impl AspectMap {
    pub fn label_of(&self, p: &Pose) -> Option<u32> {
        self.labels[self.grid.cell_of(p)?]
    }
}

pub const ASPECT_NOISE_FRACTION: f64 = 0.005;

/// Labels the connected components of cells whose `|detM|` exceeds
/// `threshold` times the local row-norm scale. Neighbours are connected only
/// when `detM` has the same sign at both, so components never straddle a
/// singular surface the grid steps over. `φ = -π` and `φ = π` are identified.
pub fn label_aspects(g: &AnalyticGeometry, grid: &WorkspaceGrid, threshold: f64) -> AspectMap {
    let det: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (ix, iy, k) = grid.unpack(idx);
            let p = Pose::new(grid.x.centre(ix), grid.y.centre(iy), grid.phi_centre(k));
            let d = jacobian_parallel_det(g, &p);
            if d.abs() > threshold * jacobian_det_scale(g, &p) {
                d
            } else {
                0.0
            }
        })
        .collect();

    let mut raw = vec![u32::MAX; det.len()];
    let mut sizes: Vec<usize> = Vec::new();
    let mut queue = VecDeque::new();
    for seed in 0..det.len() {
        if det[seed] == 0.0 || raw[seed] != u32::MAX {
            continue;
        }
        let label = sizes.len() as u32;
        let sign = det[seed] > 0.0;
        raw[seed] = label;
        let mut size = 0;
        queue.push_back(seed);
        while let Some(idx) = queue.pop_front() {
            size += 1;
            let (ix, iy, k) = grid.unpack(idx);
            let mut nbrs = Vec::with_capacity(6);
            if ix > 0 {
                nbrs.push(grid.index(ix - 1, iy, k));
            }
            if ix + 1 < grid.x.n {
                nbrs.push(grid.index(ix + 1, iy, k));
            }
            if iy > 0 {
                nbrs.push(grid.index(ix, iy - 1, k));
            }
            if iy + 1 < grid.y.n {
                nbrs.push(grid.index(ix, iy + 1, k));
            }
            nbrs.push(grid.index(ix, iy, (k + 1) % grid.phi_cells));
            nbrs.push(grid.index(ix, iy, (k + grid.phi_cells - 1) % grid.phi_cells));
            for n in nbrs {
                if raw[n] == u32::MAX && det[n] != 0.0 && (det[n] > 0.0) == sign {
                    raw[n] = label;
                    queue.push_back(n);
                }
            }
        }
        sizes.push(size);
    }

    let nonsingular = det.iter().filter(|d| **d != 0.0).count();
    let floor = (ASPECT_NOISE_FRACTION * nonsingular as f64).ceil() as usize;
    // relabel kept components by decreasing size, ties by first appearance
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|a, b| sizes[*b].cmp(&sizes[*a]).then(a.cmp(b)));
    let mut remap = vec![None; sizes.len()];
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    for &c in &order {
        if sizes[c] >= floor.max(1) {
            remap[c] = Some(kept.len() as u32);
            kept.push(sizes[c]);
        } else {
            discarded.push(sizes[c]);
        }
    }
    let labels = raw.iter().map(|&l| if l == u32::MAX { None } else { remap[l as usize] }).collect();
    let report = AspectReport {
        component_count: kept.len(),
        component_sizes: kept,
        discarded_sizes: discarded,
        nonsingular_cells: nonsingular,
        total_cells: det.len(),
        noise_floor: floor,
        caveat: "components are counted inside a bounded box; pieces connected only outside it are counted separately"
            .into(),
    };
    AspectMap { grid: *grid, labels, report }
}

pub fn count_aspects(g: &AnalyticGeometry, grid: &WorkspaceGrid, threshold: f64) -> AspectReport {
    label_aspects(g, grid, threshold).report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_cells() {
        let a = Axis::new(0.1, 4.0, 200).unwrap();
        assert!((a.centre(0) - 0.10975).abs() < 1e-12);
        assert_eq!(a.index_of(4.0), Some(199));
        assert_eq!(a.index_of(0.1), Some(0));
        assert_eq!(a.index_of(4.1), None);
        assert!(Axis::new(1.0, 1.0, 3).is_err());
        assert!(Axis::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn section_examples() {
        let g = AnalyticGeometry::example();
        let map = classify_section(&g, 1.0, &SectionGrid::square(0.1, 4.0, 40).unwrap()).unwrap();
        let far = map.cell_at(3.9, 0.15).unwrap();
        assert_eq!(far.count, 0);
        let s = std::f64::consts::SQRT_2;
        let map = classify_section(&g, s, &SectionGrid::square(s - 0.01, s + 0.01, 1).unwrap()).unwrap();
        assert_eq!(map.cells[0].count, 6);
    }

    #[test]
    fn refinement_locates_a_known_jump() {
        let g = AnalyticGeometry::example();
        let jumps = refine_count_changes(&g, 1.0, [1.0, 2.5], [1.2, 2.5], 1e-6);
        for j in &jumps {
            assert!((j.after[0] - j.before[0]).abs() <= 1e-6);
            assert!(j.has_sign_change(), "{j:?}");
        }
    }

    #[test]
    fn threshold_above_everything_gives_no_aspects() {
        let g = AnalyticGeometry::example();
        let grid = WorkspaceGrid::new(Axis::new(-3.0, 3.0, 8).unwrap(), Axis::new(-3.0, 3.0, 8).unwrap(), 8).unwrap();
        assert_eq!(count_aspects(&g, &grid, 2.0).component_count, 0);
    }
}
