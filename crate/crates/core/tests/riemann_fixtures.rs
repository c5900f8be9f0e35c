mod common;

use common::*;
use jetcalc::testing::adaptive_partial;
use kropina::riemann::{christoffel, MetricPoint};
use kropina::MetricField;

fn finite_difference_christoffel(h: &MetricField, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let dh = |i: usize, j: usize, l: usize| {
        let f = |p: &[f64]| h.entry(i, j).eval(p).unwrap();
        adaptive_partial(&f, x, &[l])
    };
    let hv = h.values(x).unwrap();
    let inv = kropina::dense::spd_inverse(&hv, n).unwrap();
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] = (0..n).map(|l| 0.5 * inv[i * n + l] * (dh(l, k, j) + dh(l, j, k) - dh(j, k, l))).sum::<f64>();
            }
        }
    }
    out
}

#[test]
fn christoffel_symbols_match_finite_differences() {
    for name in ["hopf-s3", "prod-r-s2"] {
        let s = scene(name);
        let h = match &s.nav {
            kropina::NavigationData::Explicit { h, .. } => h.clone(),
            _ => unreachable!(),
        };
        for x in points(&s, 5, 21) {
            let g = christoffel(&h, &x).unwrap();
            let fd = finite_difference_christoffel(&h, &x);
            for (a, b) in g.as_slice().iter().zip(&fd) {
                assert!((a - b).abs() < 1e-7 * b.abs().max(1.0), "{name} {a} {b}");
            }
        }
    }
}

#[test]
fn hopf_connection_vanishes_at_origin() {
    let s = scene("hopf-s3");
    let g = christoffel(&s.nav, &[0.0, 0.0, 0.0]).unwrap();
    assert!(g.as_slice().iter().all(|v| v.abs() < 1e-15));
}

#[test]
fn hopf_field_is_unit_killing() {
    let s = scene("hopf-s3");
    for x in points(&s, 100, 5) {
        let cp = s.nav.chart_point(&x).unwrap();
        let d = cp.deform();
        assert!(frob(&d.r) <= 1e-9, "{:?}", d.r);
        assert!(frob(&cp.lie_derivative_metric()) <= 1e-9);
        assert!(frob(&d.s) > 1e-3);
        assert!(max_abs(&d.s_vec) < 1e-9);
        assert!(max_abs(&cp.unit_length_derivative()) < 1e-9);
    }
}

#[test]
fn lie_derivative_is_twice_the_symmetric_part() {
    for name in kropina::scene::BUILTINS {
        let s = scene(name);
        for x in points(&s, 30, 8) {
            let cp = s.nav.chart_point(&x).unwrap();
            let lie = cp.lie_derivative_metric();
            let r = cp.deform().r;
            let scale = frob(&lie).max(1.0);
            for (l, r) in lie.iter().zip(&r) {
                assert!((l - 2.0 * r).abs() <= 1e-10 * scale, "{name}");
            }
        }
    }
}

#[test]
fn connection_identities() {
    for name in kropina::scene::BUILTINS {
        let s = scene(name);
        for x in points(&s, 20, 9) {
            let p = MetricPoint::new(&s.nav, &x).unwrap();
            let g = p.christoffel();
            let n = s.dim;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        assert_eq!(g.get(i, j, k), g.get(i, k, j));
                    }
                }
            }
            assert!(p.compatibility_residual() < 1e-10, "{name}");
            assert!(p.riemann().symmetry_residual(p.h()) < 1e-10, "{name}");
        }
    }
}

#[test]
fn unit_wind_is_orthogonal_to_its_derivative() {
    for name in ["hopf-s3", "flat-const", "shear"] {
        let s = scene(name);
        for x in points(&s, 50, 10) {
            let cp = s.nav.chart_point(&x).unwrap();
            assert!(max_abs(&cp.unit_length_derivative()) <= 1e-9, "{name}");
        }
    }
}

#[test]
fn round_sphere_sectional_curvature() {
    let s = scene("hopf-s3");
    let mut rng = kropina::sampling::SplitMix64::new(77);
    for x in points(&s, 50, 11) {
        let p = MetricPoint::new(&s.nav, &x).unwrap();
        let r = p.riemann();
        let u = rng.normal_vec(3);
        let v = rng.normal_vec(3);
        let k = r.sectional(p.h(), &u, &v);
        assert!((k - 1.0).abs() <= 1e-7, "{k}");
    }
}

#[test]
fn second_covariant_derivative_identity() {
    for (name, killing) in [("hopf-s3", true), ("flat-const", true), ("prod-r-s2", true), ("shear", false)] {
        let s = scene(name);
        let mut worst = 0.0f64;
        for x in points(&s, 40, 12) {
            let cp = s.nav.chart_point(&x).unwrap();
            let res = cp.curvature_identity_residual(&cp.metric.riemann());
            worst = worst.max(res);
        }
        if killing {
            assert!(worst <= 1e-8, "{name}: {worst}");
        } else {
            assert!(worst >= 1e-2, "{name}: {worst}");
        }
    }
}

#[test]
fn hopf_quadratic_relation_with_unit_curvature() {
    let s = scene("hopf-s3");
    for x in points(&s, 50, 13) {
        let cp = s.nav.chart_point(&x).unwrap();
        let lhs = cp.hopf_form();
        let rhs = cp.transverse_metric();
        let d: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(frob(&d) <= 1e-7);
    }
}

#[test]
fn flat_second_derivative_vanishes() {
    let s = scene("flat-const");
    let cp = s.nav.chart_point(&[0.5, -0.3]).unwrap();
    assert!(cp.second_covariant().iter().all(|&v| v == 0.0));
}
