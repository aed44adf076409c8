//! Tracking an assembly mode along a joint-space path.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::AnalyticGeometry;
use crate::kinematics::{constraint_gradient, constraint_squares, forward_kinematics_analytic, joint_residual};
use crate::pose::{JointVector, Pose};
use crate::singularity::{branch_surface, discriminant_surface, jacobian_parallel_det};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointPath {
    pub points: Vec<JointVector>,
}

impl JointPath {
    pub fn new(points: Vec<JointVector>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("a joint path needs at least two points".into()));
        }
        Ok(JointPath { points })
    }

    pub fn is_closed(&self) -> bool {
        let (a, b) = (self.points[0], self.points[self.points.len() - 1]);
        a.max_abs_diff(&b) == 0.0
    }

    /// Circle of the given radius in the `(ρ1, ρ3)` plane through `centre`,
    /// sampled at `steps` points with the first repeated at the end.
    pub fn circle(centre: &JointVector, radius: f64, steps: usize) -> Result<Self> {
        Self::circle_from(centre, radius, steps, 0.0)
    }

    /// Like [`JointPath::circle`], starting at polar angle `phase`.
    pub fn circle_from(centre: &JointVector, radius: f64, steps: usize, phase: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("loop radius must be positive, got {radius}")));
        }
        if steps < 8 {
            return Err(Error::InvalidInput(format!("a loop needs at least 8 steps, got {steps}")));
        }
        let mut points = Vec::with_capacity(steps);
        for k in 0..steps - 1 {
            let a = phase + 2.0 * PI * k as f64 / (steps - 1) as f64;
            points.push(JointVector::new(centre.rho1 + radius * a.cos(), centre.rho2, centre.rho3 + radius * a.sin())?);
        }
        points.push(points[0]);
        JointPath::new(points)
    }
}

const STALL_DET_RATIO: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackOptions {
    /// Largest accepted pose change per continuation step.
    pub max_pose_step: f64,
    /// Abort when `|detM|` drops below this fraction of its median along the path.
    pub det_floor: f64,
    /// Smallest step, as a fraction of a waypoint interval, is `2^-max_halvings`.
    pub max_halvings: u32,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions { max_pose_step: 0.05, det_floor: 1e-6, max_halvings: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackSample {
    pub joints: JointVector,
    pub pose: Pose,
    pub det_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitReport {
    pub start_pose: Pose,
    pub end_pose: Pose,
    /// Smallest `|detM|` over the accepted continuation steps.
    pub min_abs_det_m: f64,
    pub mode_changed: bool,
    /// Index of the start pose among the sorted FK solutions of the first waypoint.
    pub start_solution: Option<usize>,
    /// Index of the end pose among the sorted FK solutions of the last waypoint.
    pub end_solution: Option<usize>,
    pub steps: usize,
    #[serde(skip)]
    pub trace: Vec<TrackSample>,
}

fn residual_vector(g: &AnalyticGeometry, p: &Pose, target: [f64; 3]) -> Vector3<f64> {
    let f = constraint_squares(g, p);
    Vector3::new(f[0] - target[0], f[1] - target[1], f[2] - target[2]) * 0.5
}

fn offset(p: &Pose, d: &Vector3<f64>) -> Pose {
    Pose::new(p.x + d[0], p.y + d[1], p.phi + d[2])
}

/// Plain Newton iteration from `start`; `None` unless it converges.
fn correct(g: &AnalyticGeometry, j: &JointVector, start: Pose) -> Option<Pose> {
    let target = j.squares();
    let tol = 1e-13 * (1.0 + j.norm()).powi(2);
    let mut p = start;
    for _ in 0..12 {
        let f = residual_vector(g, &p, target);
        if f.amax() <= tol {
            return Some(p);
        }
        let step = constraint_gradient(g, &p).lu().solve(&f)?;
        p = offset(&p, &-step);
    }
    (residual_vector(g, &p, target).amax() <= tol).then_some(p)
}

fn pose_step(a: &Pose, b: &Pose) -> f64 {
    a.distance(b)
}

fn lerp(a: &JointVector, b: &JointVector, s: f64) -> JointVector {
    JointVector::unchecked(
        a.rho1 + s * (b.rho1 - a.rho1),
        a.rho2 + s * (b.rho2 - a.rho2),
        a.rho3 + s * (b.rho3 - a.rho3),
    )
}

/// Index of the FK solution of `j` matching `p`.
fn solution_index(g: &AnalyticGeometry, j: &JointVector, p: &Pose) -> Option<usize> {
    let fk = forward_kinematics_analytic(g, j);
    fk.nearest(p).filter(|(_, d)| *d < 1e-6).map(|(i, _)| i)
}

/// Continues the assembly mode through `start` along the path with an Euler
/// predictor and Newton corrector. Steps are halved until every pose change
/// stays below `max_pose_step` and the corrector lands close to the
/// prediction.
pub fn track_branch(g: &AnalyticGeometry, path: &JointPath, start: Pose, opts: &TrackOptions) -> Result<TransitReport> {
    let first = path.points[0];
    let start_residual = joint_residual(g, &start, &first);
    if !(start_residual < 1e-6 * (1.0 + first.norm())) {
        return Err(Error::StartNotOnBranch { residual: start_residual });
    }
    let mut pose = correct(g, &first, start).ok_or(Error::StartNotOnBranch { residual: start_residual })?;
    let mut trace = vec![TrackSample { joints: first, pose, det_m: jacobian_parallel_det(g, &pose) }];
    let trust = 0.5 * opts.max_pose_step;
    let min_step = 0.5f64.powi(opts.max_halvings as i32);

    for w in path.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut s = 0.0f64;
        let mut h = 1.0f64;
        let mut current = a;
        while s < 1.0 {
            let mut halvings = 0;
            loop {
                let s_next = (s + h).min(1.0);
                let target = lerp(&a, &b, s_next);
                let m = constraint_gradient(g, &pose);
                let (ra, rb) = (current.as_array(), target.as_array());
                // d(ρ²/2) = ρ dρ, taken at the midpoint
                let rhs = Vector3::from_fn(|i, _| 0.5 * (ra[i] + rb[i]) * (rb[i] - ra[i]));
                let accepted = m.lu().solve(&rhs).and_then(|dq| {
                    let predicted = offset(&pose, &dq);
                    if pose_step(&pose, &predicted) > opts.max_pose_step {
                        return None;
                    }
                    let corrected = correct(g, &target, predicted)?;
                    (pose_step(&predicted, &corrected) <= trust && pose_step(&pose, &corrected) <= opts.max_pose_step)
                        .then_some(corrected)
                });
                match accepted {
                    Some(next) => {
                        pose = next;
                        current = target;
                        s = s_next;
                        trace.push(TrackSample { joints: target, pose, det_m: jacobian_parallel_det(g, &pose) });
                        if halvings == 0 {
                            h = (2.0 * h).min(1.0);
                        }
                        break;
                    }
                    None => {
                        halvings += 1;
                        h *= 0.5;
                        if h < min_step {
                            // a stall next to a fold shows as a collapsed determinant
                            let det = jacobian_parallel_det(g, &pose);
                            let mut seen: Vec<f64> = trace.iter().map(|t| t.det_m.abs()).collect();
                            seen.sort_by(f64::total_cmp);
                            if det.abs() < STALL_DET_RATIO * seen[seen.len() / 2] {
                                return Err(Error::SingularApproach { step: trace.len(), det });
                            }
                            return Err(Error::BranchJump { step: trace.len(), step_fraction: h });
                        }
                    }
                }
            }
        }
    }

    let mut dets: Vec<f64> = trace.iter().map(|t| t.det_m.abs()).collect();
    dets.sort_by(f64::total_cmp);
    let median = dets[dets.len() / 2];
    if let Some((step, t)) = trace.iter().enumerate().find(|(_, t)| t.det_m.abs() < opts.det_floor * median) {
        return Err(Error::SingularApproach { step, det: t.det_m });
    }
    let last = path.points[path.points.len() - 1];
    let end_pose = pose;
    Ok(TransitReport {
        start_pose: trace[0].pose,
        end_pose,
        min_abs_det_m: dets[0],
        mode_changed: path.is_closed() && pose_step(&trace[0].pose, &end_pose) > 1e-6,
        start_solution: solution_index(g, &first, &trace[0].pose),
        end_solution: solution_index(g, &last, &end_pose),
        steps: trace.len() - 1,
        trace,
    })
}

/// Surface crossings of a closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LoopCrossings {
    pub delta_sign_changes: usize,
    pub branch_sign_changes: usize,
}

pub fn loop_crossings(g: &AnalyticGeometry, path: &JointPath) -> LoopCrossings {
    let changes = |f: &dyn Fn(&JointVector) -> f64| {
        let vals: Vec<f64> = path.points.iter().map(f).collect();
        vals.windows(2).filter(|w| w[0] == 0.0 || w[0].signum() != w[1].signum()).count()
    };
    LoopCrossings {
        delta_sign_changes: changes(&|j| discriminant_surface(g, j).value),
        branch_sign_changes: changes(&|j| branch_surface(g, j).value),
    }
}

fn validate_loop(g: &AnalyticGeometry, path: JointPath, expected_delta: usize) -> Result<JointPath> {
    if let Some(near) = path.points.iter().find(|j| branch_surface(g, j).is_zero(1e-9)) {
        return Err(Error::LoopCrossesOtherSurface(format!("loop touches the branch surface at {near}")));
    }
    let c = loop_crossings(g, &path);
    if c.branch_sign_changes != 0 {
        return Err(Error::LoopCrossesOtherSurface(format!(
            "loop crosses the branch surface {} times",
            c.branch_sign_changes
        )));
    }
    if c.delta_sign_changes != expected_delta {
        return Err(Error::LoopCrossesOtherSurface(format!(
            "loop crosses the discriminant surface {} times, expected {expected_delta}",
            c.delta_sign_changes
        )));
    }
    Ok(path)
}

/// Closed loop around `centre` in its `(ρ1, ρ3)` section that crosses the
/// discriminant surface `expected_delta` times and never meets the branch
/// surface.
pub fn make_loop(
    g: &AnalyticGeometry,
    centre: &JointVector,
    radius: f64,
    steps: usize,
    expected_delta: usize,
) -> Result<JointPath> {
    validate_loop(g, JointPath::circle(centre, radius, steps)?, expected_delta)
}

/// Loop around a cusp: exactly the two discriminant crossings of the cusp's
/// two branches and nothing else. The loop starts in the middle of the arc
/// with more FK solutions, where the solutions that survive a full turn live.
pub fn make_cusp_loop(g: &AnalyticGeometry, cusp: &JointVector, radius: f64, steps: usize) -> Result<JointPath> {
    let probe = validate_loop(g, JointPath::circle(cusp, radius, steps)?, 2)?;
    let n = probe.points.len() - 1;
    let sign: Vec<bool> = probe.points[..n].iter().map(|j| discriminant_surface(g, j).value > 0.0).collect();
    let cuts: Vec<usize> = (0..n).filter(|&k| sign[k] != sign[(k + 1) % n]).collect();
    let (c0, c1) = (cuts[0], cuts[1]);
    let mid_inner = (c0 + c1).div_ceil(2);
    let mid_outer = (c1 + n + c0).div_ceil(2) % n;
    let count = |k: usize| forward_kinematics_analytic(g, &probe.points[k]).count();
    let start = if count(mid_inner) >= count(mid_outer) { mid_inner } else { mid_outer };
    let phase = 2.0 * PI * start as f64 / n as f64;
    validate_loop(g, JointPath::circle_from(cusp, radius, steps, phase)?, 2)
}

/// Tracks every FK solution of the first waypoint along the path.
pub fn track_all_starts(
    g: &AnalyticGeometry,
    path: &JointPath,
    opts: &TrackOptions,
) -> Vec<(Pose, Result<TransitReport>)> {
    forward_kinematics_analytic(g, &path.points[0])
        .poses
        .iter()
        .map(|p| (p.pose, track_branch(g, path, p.pose, opts)))
        .collect()
}
