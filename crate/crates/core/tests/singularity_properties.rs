mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rpr_analytic::cubic::DEFAULT_ROOT_EPS;
use rpr_analytic::singularity::{homogeneous_factor_scale, homogeneous_factors, jacobian_det_scale};
use rpr_analytic::{
    branch_surface, characteristic_cubic, discriminant_surface, jacobian_parallel_det, AnalyticGeometry, JointVector,
};

fn geometries() -> Vec<AnalyticGeometry> {
    vec![AnalyticGeometry::example(), analytic(1.0, 0.6, 0.8), analytic(1.3, -0.4, 0.7)]
}

#[test]
fn small_factor_product_means_small_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for g in geometries() {
        for _ in 0..1000 {
            let p = random_pose(&mut rng, 3.0);
            let (h1, h2) = homogeneous_factors(&g, &p);
            let rel_f = (h1 * h2).abs() / homogeneous_factor_scale(&g, &p);
            let rel_d = jacobian_parallel_det(&g, &p).abs() / jacobian_det_scale(&g, &p);
            if rel_f < 1e-8 {
                assert!(rel_d < 1e-6, "{p:?} {rel_f} {rel_d}");
            }
            if rel_d < 1e-8 {
                assert!(rel_f < 1e-6, "{p:?} {rel_f} {rel_d}");
            }
        }
    }
}

#[test]
fn constructed_factor_zeros_are_singular() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for g in geometries() {
        for _ in 0..200 {
            let p = pose_on_f1(&mut rng);
            let rel = jacobian_parallel_det(&g, &p).abs() / jacobian_det_scale(&g, &p);
            assert!(rel < 1e-12, "f1 {p:?} {rel}");
            if let Some(p) = pose_on_f2(&g, &mut rng) {
                let rel = jacobian_parallel_det(&g, &p).abs() / jacobian_det_scale(&g, &p);
                assert!(rel < 1e-10, "f2 {p:?} {rel}");
            }
        }
    }
}

#[test]
fn determinant_and_factor_zeros_agree_along_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for g in geometries() {
        let c = workspace_line_crossings(&g, &mut rng, 100, 1e-6);
        assert_eq!(c.det_roots_on_factors, c.det_roots, "worst {}", c.worst_factor_at_det_root);
        assert_eq!(c.factor_roots_on_det, c.factor_roots, "worst {}", c.worst_det_at_factor_root);
    }
}

#[test]
fn discriminant_vanishes_exactly_at_repeated_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let g = AnalyticGeometry::example();
    for _ in 0..10_000 {
        let j = JointVector::new(rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)).unwrap();
        let rel = discriminant_surface(&g, &j).relative().abs();
        let repeated = characteristic_cubic(&g, &j).has_repeated_root(DEFAULT_ROOT_EPS);
        if rel > 1e-6 {
            assert!(!repeated, "{j:?} {rel}");
        }
        if repeated {
            assert!(rel < 1e-6, "{j:?} {rel}");
        }
    }
    let mut constructed = 0;
    for g in geometries() {
        for _ in 0..300 {
            let t0 = rng.gen_range(-3.0..3.0);
            let Some(j) = double_root_instance(&g, t0, rng.gen_range(0.1..9.0)) else {
                continue;
            };
            let cubic = characteristic_cubic(&g, &j);
            // a third root close to the double one makes the split from rounding
            // large against the root spread, so keep the instances well separated
            let third = -cubic.a2 / cubic.a3 - 2.0 * t0;
            if cubic.a3.abs() < 1e-9 || (third - t0).abs() < 0.25 * (1.0 + t0.abs()) {
                continue;
            }
            assert!(discriminant_surface(&g, &j).relative().abs() < 1e-9, "{j:?}");
            assert!(cubic.has_repeated_root(DEFAULT_ROOT_EPS), "{j:?} {cubic:?}");
            constructed += 1;
        }
    }
    assert!(constructed > 100, "{constructed}");
}

#[test]
fn printed_quadratics_lie_on_the_branch_surface() {
    let g = AnalyticGeometry::example();
    for i in 0..4 {
        let points = printed_quadratic_points(i, 50);
        assert_eq!(points.len(), 50);
        for j in points {
            assert!(printed_quadratic(i, j.rho1, j.rho2, j.rho3).abs() < 1e-12);
            let b = branch_surface(&g, &j);
            assert!(b.is_zero(1e-6), "Q{} {j:?} {b:?}", i + 1);
        }
    }
}

#[test]
fn branch_surface_is_nonzero_away_from_the_quadratics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = AnalyticGeometry::example();
    for _ in 0..2000 {
        let j = JointVector::new(rng.gen_range(0.1..4.0), 1.0, rng.gen_range(0.1..4.0)).unwrap();
        let nearest = (0..4).map(|i| printed_quadratic(i, j.rho1, 1.0, j.rho3).abs()).fold(f64::MAX, f64::min);
        if nearest > 0.05 {
            assert!(!branch_surface(&g, &j).is_zero(1e-12), "{j:?}");
        }
    }
}
