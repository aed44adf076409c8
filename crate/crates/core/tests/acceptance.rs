//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the report is always printed. The process
//! fails when a criterion fails, except for the entries of `KNOWN_FAILURES`,
//! whose literal statements are contradicted by independent checks; their
//! corrected forms are checked as separate criteria.

mod common;

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpr_analytic::atlas::{label_aspects, section_count_jumps, Axis, WorkspaceGrid};
use rpr_analytic::cusp::fit_projection_cubic;
use rpr_analytic::motion::{make_loop, track_all_starts};
use rpr_analytic::singularity::{homogeneous_factor_scale, homogeneous_factors, jacobian_det_scale};
use rpr_analytic::{
    branch_surface, characteristic_cubic, classify_section, discriminant_surface, find_cusps_in_section,
    forward_kinematics_analytic, forward_kinematics_reference, inverse_kinematics, jacobian_parallel_det,
    linear_reduction, make_cusp_loop, AnalyticGeometry, GeometryParams, JointVector, OrientationParam, Pose, SearchBox,
    SectionGrid, SeedGrid, TrackOptions,
};

const KNOWN_FAILURES: &[&str] = &["9b"];

struct Outcome {
    id: &'static str,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, name, pass, detail }
}

fn cusp_reproduction() -> Outcome {
    let g = AnalyticGeometry::example();
    let clock = Instant::now();
    let r = find_cusps_in_section(&g, 1.0, &SearchBox::square(0.1, 4.0), &SeedGrid::default());
    let secs = clock.elapsed().as_secs_f64();
    let expected = [(1.04789131, 2.48920718), (1.73205080, 1.0)];
    let found: Vec<(f64, f64)> = r.points.iter().map(|p| (p.rho1, p.rho3)).collect();
    let matched = found.len() == 2
        && expected.iter().zip(&found).all(|(e, f)| (e.0 - f.0).abs() < 1e-6 && (e.1 - f.1).abs() < 1e-6);
    outcome("1", "cusp reproduction", matched && secs < 10.0, format!("found {found:.8?} in {secs:.2} s"))
}

fn exact_triple_root() -> Outcome {
    let g = AnalyticGeometry::example();
    let c = characteristic_cubic(&g, &JointVector::new(3f64.sqrt(), 1.0, 1.0).unwrap());
    let target = [-2.0, -6.0, -6.0, -2.0];
    let err = c.coefficients().iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let delta = discriminant_surface(&g, &JointVector::new(3f64.sqrt(), 1.0, 1.0).unwrap());
    let rel = delta.relative().abs();
    outcome(
        "2",
        "exact triple root",
        err <= 8.0 * f64::EPSILON * 6.0 && rel < 1e-10,
        format!("coefficient error {err:.2e}, relative discriminant {rel:.2e}"),
    )
}

fn six_solutions() -> Outcome {
    let g = AnalyticGeometry::example();
    let j = JointVector::new(SQRT_2, SQRT_2, SQRT_2).unwrap();
    let h = 3f64.sqrt() / 2.0;
    let expected = [
        Pose::new(1.0, 1.0, 0.0),
        Pose::new(-1.0, 1.0, 0.0),
        Pose::new(0.5 + h, 0.5 - h, -PI / 2.0),
        Pose::new(0.5 - h, 0.5 + h, -PI / 2.0),
        Pose::new(1.0, 1.0, PI),
        Pose::new(1.0, -1.0, PI),
    ];
    let fk = forward_kinematics_analytic(&g, &j);
    let oracle = forward_kinematics_reference(&g, &j, 3600);
    let analytic_ok = fk.count() == 6 && expected.iter().all(|p| fk.contains(p, 1e-8));
    let oracle_ok = oracle.count() == 6 && expected.iter().all(|p| oracle.contains(p, 1e-8));
    let at_infinity = fk.poses.iter().filter(|p| p.t == OrientationParam::Infinite).count();
    outcome(
        "3",
        "six-solution case",
        analytic_ok && oracle_ok && at_infinity == 2,
        format!("analytic {} poses ({at_infinity} at phi = pi), oracle {} poses", fk.count(), oracle.count()),
    )
}

fn oracle_equivalence() -> Outcome {
    let g = AnalyticGeometry::example();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let clock = Instant::now();
    let mut mismatches = 0;
    let mut solutions = 0;
    for _ in 0..100 {
        let j = JointVector::new(rng.gen_range(0.2..4.0), rng.gen_range(0.2..4.0), rng.gen_range(0.2..4.0)).unwrap();
        let a = forward_kinematics_analytic(&g, &j);
        let b = forward_kinematics_reference(&g, &j, 3600);
        solutions += a.count();
        let same = a.count() == b.count()
            && a.poses.iter().all(|p| b.contains(&p.pose, 1e-6))
            && b.poses.iter().all(|p| a.contains(&p.pose, 1e-6));
        if !same {
            mismatches += 1;
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    outcome(
        "4",
        "oracle equivalence",
        mismatches == 0 && secs < 60.0,
        format!("{mismatches} mismatches over 100 joint vectors ({solutions} solutions) in {secs:.2} s"),
    )
}

fn round_trip() -> Outcome {
    let g = AnalyticGeometry::example();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = 0;
    for _ in 0..10_000 {
        let r = 3.0 * rng.gen::<f64>().sqrt();
        let a = rng.gen_range(-PI..PI);
        let p = Pose::new(r * a.cos(), r * a.sin(), rng.gen_range(-PI..PI));
        let fk = forward_kinematics_analytic(&g, &inverse_kinematics(&g, &p));
        if !fk.contains(&p, 1e-7) {
            failures += 1;
        }
    }
    outcome("5", "round trip", failures == 0, format!("{failures} failures over 10000 poses"))
}

fn class_degeneracy() -> Outcome {
    let g = AnalyticGeometry::example();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let t = OrientationParam::from_angle(rng.gen_range(-PI..PI));
        let j = JointVector::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)).unwrap();
        worst = worst.max(linear_reduction(&g, t, &j).determinant().abs());
    }
    let mut off = GeometryParams::example();
    off.l2 = off.c2 + 0.1;
    let mut off_worst = 0.0f64;
    for _ in 0..10_000 {
        let t = OrientationParam::from_angle(rng.gen_range(-PI..PI));
        let j = JointVector::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)).unwrap();
        off_worst = off_worst.max(linear_reduction(&off, t, &j).determinant().abs());
    }
    outcome(
        "6",
        "class degeneracy",
        worst < 1e-9 && off_worst > 1e-3,
        format!("max |RV-SU| = {worst:.2e} on the example, {off_worst:.2e} with l2 = c2 + 0.1"),
    )
}

fn workspace_factorization() -> Outcome {
    let g = AnalyticGeometry::example();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let tol = 1e-6;
    let mut disagreements = 0;
    let mut on_zero_set = 0;
    for k in 0..1000 {
        let p = match k % 4 {
            0 => pose_on_f1(&mut rng),
            1 => pose_on_f2(&g, &mut rng).unwrap_or_else(|| random_pose(&mut rng, 3.0)),
            _ => random_pose(&mut rng, 3.0),
        };
        let (h1, h2) = homogeneous_factors(&g, &p);
        let f_zero = (h1 * h2).abs() < tol * homogeneous_factor_scale(&g, &p);
        let d_zero = jacobian_parallel_det(&g, &p).abs() < tol * jacobian_det_scale(&g, &p);
        on_zero_set += usize::from(f_zero);
        if f_zero != d_zero {
            disagreements += 1;
        }
    }
    let c = workspace_line_crossings(&g, &mut rng, 100, tol);
    let pass = disagreements == 0 && c.det_roots_on_factors == c.det_roots && c.factor_roots_on_det == c.factor_roots;
    outcome(
        "7",
        "workspace factorization",
        pass,
        format!(
            "{disagreements} disagreements over 1000 samples ({on_zero_set} on the zero set); detM roots on f1 f2: {}/{}, f1 f2 roots on detM: {}/{}",
            c.det_roots_on_factors, c.det_roots, c.factor_roots_on_det, c.factor_roots
        ),
    )
}

fn quadratic_anchors() -> Outcome {
    let g = AnalyticGeometry::example();
    let mut worst = 0.0f64;
    let mut bad = 0;
    for i in 0..4 {
        for j in printed_quadratic_points(i, 50) {
            let b = branch_surface(&g, &j);
            worst = worst.max(b.relative().abs());
            bad += usize::from(!b.is_zero(1e-6));
        }
    }
    outcome(
        "8",
        "quadratic-branch anchors",
        bad == 0,
        format!("{bad} of 200 points off the surface, worst |G|/scale = {worst:.2e}"),
    )
}

fn region_map() -> Vec<Outcome> {
    let g = AnalyticGeometry::example();
    let map = classify_section(&g, 1.0, &SectionGrid::square(0.1, 4.0, 200).unwrap()).unwrap();
    let h = map.histogram();
    let counts_ok = h[2] > 0 && h[4] > 0 && h[6] > 0 && h[1] + h[3] + h[5] == 0;
    let jumps = section_count_jumps(&g, &map, 1e-6);
    let literal = jumps.iter().all(|j| j.change().abs() == 2);
    let by = |size: i32, delta: bool, branch: bool| {
        jumps.iter().filter(|j| j.change().abs() == size && j.delta_flips == delta && j.branch_flips == branch).count()
    };
    let (g2, d4) = (by(2, false, true), by(4, true, false));
    let unexplained = jumps.len() - g2 - d4;
    vec![
        outcome(
            "9a",
            "region map counts",
            counts_ok,
            format!("non-boundary histogram 0..6 = {h:?}, {} boundary cells", map.boundary_count()),
        ),
        outcome(
            "9b",
            "region map jumps are +-2 (literal)",
            literal,
            format!(
                "{} refined jumps: {g2} of +-2 (G only), {d4} of +-4 (discriminant only), {unexplained} other",
                jumps.len()
            ),
        ),
        outcome(
            "9c",
            "region map jumps: +-2 across G, +-4 across the discriminant",
            !jumps.is_empty() && unexplained == 0,
            format!("{} jumps, every one with a sign change of exactly one surface", jumps.len()),
        ),
    ]
}

fn aspects() -> Outcome {
    let g = AnalyticGeometry::example();
    let grid = |n: usize| {
        WorkspaceGrid::new(Axis::new(-3.0, 3.0, 60 * n).unwrap(), Axis::new(-3.0, 3.0, 60 * n).unwrap(), 72 * n)
            .unwrap()
    };
    let coarse = label_aspects(&g, &grid(1), 1e-9);
    let fine = label_aspects(&g, &grid(2), 1e-9);
    let j = JointVector::new(SQRT_2, SQRT_2, SQRT_2).unwrap();
    let labels: Vec<_> =
        forward_kinematics_analytic(&g, &j).poses.iter().filter_map(|p| coarse.label_of(&p.pose)).collect();
    let shared = (0..labels.len()).any(|a| (a + 1..labels.len()).any(|b| labels[a] == labels[b]));
    outcome(
        "10",
        "aspects",
        coarse.report.component_count == 2 && fine.report.component_count == 2,
        format!(
            "{} components at 60x60x72, {} at 120x120x144; two assembly modes share an aspect: {shared}",
            coarse.report.component_count, fine.report.component_count
        ),
    )
}

fn mode_change() -> Outcome {
    let g = AnalyticGeometry::example();
    let opts = TrackOptions::default();
    let cusp = JointVector::new(3f64.sqrt(), 1.0, 1.0).unwrap();
    let cusp_runs = make_cusp_loop(&g, &cusp, 0.3, 720).map(|p| track_all_starts(&g, &p, &opts));
    let regular = JointVector::new(2.2, 1.0, 3.3).unwrap();
    let regular_runs = make_loop(&g, &regular, 0.3, 720, 0).map(|p| track_all_starts(&g, &p, &opts));
    let (Ok(cusp_runs), Ok(regular_runs)) = (cusp_runs, regular_runs) else {
        return outcome("11", "non-singular assembly-mode change", false, "loop construction failed".into());
    };
    let changed: Vec<_> = cusp_runs
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .filter(|r| {
            r.mode_changed && r.min_abs_det_m > 0.0 && r.end_solution.is_some() && r.end_solution != r.start_solution
        })
        .collect();
    let min_det = changed.iter().map(|r| r.min_abs_det_m).fold(f64::INFINITY, f64::min);
    let perm: Vec<String> = changed
        .iter()
        .map(|r| format!("{}->{}", r.start_solution.unwrap_or(usize::MAX), r.end_solution.unwrap_or(usize::MAX)))
        .collect();
    let regular_ok =
        !regular_runs.is_empty() && regular_runs.iter().all(|(_, r)| matches!(r, Ok(r) if !r.mode_changed));
    outcome(
        "11",
        "non-singular assembly-mode change",
        !changed.is_empty() && regular_ok,
        format!(
            "cusp loop: {} of {} starts change mode (solutions {}), min |detM| = {min_det:.3}; regular loop around (2.2, 3.3): no change for all {} starts: {regular_ok}",
            changed.len(),
            cusp_runs.len(),
            perm.join(", "),
            regular_runs.len()
        ),
    )
}

fn projection_structure() -> Outcome {
    let g = AnalyticGeometry::example();
    let samples: Vec<f64> = (0..20).map(|i| 0.3 + 0.15 * i as f64).collect();
    match fit_projection_cubic(&g, &samples, [0.05, 5.0], &SeedGrid { per_axis: 15, ..Default::default() }) {
        Ok(fit) => outcome(
            "note",
            "cusp projection is a plane cubic in (rho1^2, rho3^2)",
            fit.max_relative_residual < 1e-9 && fit.singular_ratio < 1e-9,
            format!(
                "{} points, relative residual {:.2e}, singular ratio {:.2e}",
                fit.points.len(),
                fit.max_relative_residual,
                fit.singular_ratio
            ),
        ),
        Err(e) => outcome("note", "cusp projection is a plane cubic in (rho1^2, rho3^2)", false, e.to_string()),
    }
}

fn main() {
    let mut results = vec![
        cusp_reproduction(),
        exact_triple_root(),
        six_solutions(),
        oracle_equivalence(),
        round_trip(),
        class_degeneracy(),
        workspace_factorization(),
        quadratic_anchors(),
    ];
    results.extend(region_map());
    results.push(aspects());
    results.push(mode_change());
    results.push(projection_structure());

    let mut unexpected = Vec::new();
    for r in &results {
        let known = KNOWN_FAILURES.contains(&r.id);
        let status = match (r.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {:>4} {status:<12} {}: {}", r.id, r.name, r.detail);
        if !r.pass && !known {
            unexpected.push(r.id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
