use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::{FieldExpr, ScalarFn};

fn torus() -> ChartMetric {
    ChartMetric::torus_of_revolution(2, 2.0).unwrap()
}

fn sphere() -> ChartMetric {
    ChartMetric::unit_sphere(0.2).unwrap()
}

fn all_charts() -> Vec<ChartMetric> {
    vec![
        ChartMetric::flat_torus(2),
        ChartMetric::flat_torus(3),
        torus(),
        ChartMetric::torus_of_revolution(3, 2.0).unwrap(),
        sphere(),
        ChartMetric::flat_patch(2),
        ChartMetric::flat_patch(3),
    ]
}

fn random_points(chart: &ChartMetric, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..chart.dim)
                .map(|a| {
                    let m = if chart.periodic[a] { 0.0 } else { 0.02 * chart.extent(a) };
                    rng.random_range(chart.lower[a] + m..chart.upper[a] - m)
                })
                .collect()
        })
        .collect()
}

#[test]
fn flat_christoffel_vanishes() {
    let g = christoffel(&ChartMetric::flat_torus(2), &[1.0, 2.0]).unwrap();
    assert!(g.data.iter().all(|v| *v == 0.0));
}

#[test]
fn sphere_christoffel_matches_levi_civita_oracle() {
    let g = christoffel(&sphere(), &[FRAC_PI_3, 0.4]).unwrap();
    // Γ^θ_{φφ} = −sinθ cosθ, Γ^φ_{θφ} = cotθ
    assert!((g.get(0, 1, 1) + FRAC_PI_3.sin() * FRAC_PI_3.cos()).abs() < 1e-14);
    assert!((g.get(1, 0, 1) - 1.0 / FRAC_PI_3.tan()).abs() < 1e-14);
    assert!((g.get(1, 1, 0) - 1.0 / FRAC_PI_3.tan()).abs() < 1e-14);
    assert!(g.get(0, 0, 0).abs() < 1e-15);
}

#[test]
fn torus_christoffel_matches_oracle() {
    let c = torus();
    let g0 = christoffel(&c, &[0.0, 1.0]).unwrap();
    assert!(g0.get(0, 1, 1).abs() < 1e-15);
    assert!(g0.get(1, 0, 1).abs() < 1e-15);
    let r = 1.0f64;
    let g1 = christoffel(&c, &[r, 0.3]).unwrap();
    // Γ^r_{θθ} = −f f', Γ^θ_{rθ} = f'/f with f = 2 + cos r
    let (f, fp) = (2.0 + r.cos(), -r.sin());
    assert!((g1.get(0, 1, 1) + f * fp).abs() < 1e-14);
    assert!((g1.get(1, 0, 1) - fp / f).abs() < 1e-14);
}

#[test]
fn flat_curvature_vanishes() {
    let c = riemann(&ChartMetric::flat_patch(3), &[0.1, -0.4, 1.0]).unwrap();
    assert!(c.riemann.data.iter().all(|v| *v == 0.0));
    assert_eq!(c.scalar, 0.0);
}

#[test]
fn sphere_scalar_curvature_is_two() {
    let s = sphere();
    for x in random_points(&s, 50, 3) {
        let r = riemann(&s, &x).unwrap().scalar;
        assert!((r - 2.0).abs() < 1e-6, "analytic path: {r}");
    }
    let fd = s.finite_difference_only();
    for x in random_points(&s, 10, 4) {
        let r = riemann(&fd, &x).unwrap().scalar;
        assert!((r - 2.0).abs() < 1e-4, "finite-difference path: {r}");
    }
}

#[test]
fn torus_scalar_curvature_is_twice_gauss_curvature() {
    let c = torus();
    let at = riemann(&c, &[FRAC_PI_2, 0.0]).unwrap().scalar;
    assert!(at.abs() < 1e-12);
    for r in [0.0f64, 0.7, 2.0, 3.5] {
        let k = r.cos() / (2.0 + r.cos());
        let s = riemann(&c, &[r, 1.0]).unwrap().scalar;
        assert!((s - 2.0 * k).abs() < 1e-12, "r={r}: {s} vs {}", 2.0 * k);
    }
}

#[test]
fn identities_hold_on_builtin_charts() {
    for chart in all_charts() {
        for x in random_points(&chart, 100, 11) {
            let geom = chart.geometry(&x).unwrap();
            let n = chart.dim;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        assert_eq!(geom.gamma.get(i, j, k), geom.gamma.get(i, k, j));
                    }
                }
            }
            let (anti, bianchi) = riemann_identity_residuals(&geom.curvature);
            assert!(anti <= 1e-10 && bianchi <= 1e-10, "{}: {anti} {bianchi}", chart.name);
            let id = &geom.g_inv * &geom.g;
            assert!((id - DMatrix::identity(n, n)).abs().max() <= 1e-12);
            assert!(metric_compatibility_residual(&chart, &x).unwrap() <= 1e-6);
        }
        let fd = chart.finite_difference_only();
        for x in random_points(&chart, 10, 12) {
            let (anti, bianchi) = riemann_identity_residuals(&riemann(&fd, &x).unwrap());
            assert!(anti <= 1e-6 && bianchi <= 1e-6, "{} fd: {anti} {bianchi}", chart.name);
        }
    }
}

#[test]
fn pair_symmetry_of_lowered_riemann() {
    let c = ChartMetric::torus_of_revolution(3, 2.0).unwrap();
    let geom = c.geometry(&[0.9, 0.2, 2.0]).unwrap();
    let low = geom.riemann().lowered(&geom.g);
    let n = 3;
    let at = |i: usize, j: usize, k: usize, l: usize| low[((i * n + j) * n + k) * n + l];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    assert!((at(i, j, k, l) - at(k, l, i, j)).abs() < 1e-12);
                    assert!((at(i, j, k, l) + at(i, j, l, k)).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn finite_difference_path_converges_at_second_order() {
    for chart in [torus(), sphere(), ChartMetric::torus_of_revolution(3, 2.0).unwrap()] {
        let x = random_points(&chart, 1, 21).remove(0);
        let exact = chart.connection(&x).unwrap().gamma;
        let err = |h: f64| {
            let c = chart.finite_difference_only().with_h_geom(h);
            let g = c.connection(&x).unwrap().gamma;
            g.data.iter().zip(&exact.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        };
        let h = chart.h_geom * 10.0;
        let ratio = err(h) / err(h / 2.0);
        assert!(ratio >= 3.5, "{}: ratio {ratio}", chart.name);
    }
}

#[test]
fn non_positive_metric_is_reported_with_eigenvalues() {
    let bad = ChartMetric::new(
        "bad",
        vec![0.0, 0.0],
        vec![1.0, 1.0],
        vec![true, true],
        Arc::new(|_x: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])),
    )
    .unwrap();
    match christoffel(&bad, &[0.5, 0.5]) {
        Err(crate::error::Error::NotPositiveDefinite { eigenvalues, .. }) => {
            assert!(eigenvalues.iter().any(|e| *e < 0.0))
        }
        other => panic!("expected refusal, got {other:?}"),
    }
}

#[test]
fn points_near_the_pole_are_refused() {
    let s = ChartMetric::unit_sphere(1e-7).unwrap();
    assert!(matches!(riemann(&s, &[1e-5, 0.0]), Err(crate::error::Error::ChartSingular { .. })));
    assert!(matches!(riemann(&sphere(), &[0.1, 0.0]), Err(crate::error::Error::OutsideDomain { .. })));
}

#[test]
fn covariant_derivative_examples() {
    let flat = ChartMetric::flat_torus(2);
    let conn = flat.connection(&[1.0, 1.0]).unwrap();
    let g = covariant_derivative_vector(&conn, &[0.3, -0.2], &DMatrix::zeros(2, 2));
    assert_eq!(g.div, 0.0);
    assert!(g.grad.iter().all(|v| *v == 0.0));
    // u^i = x^i has ∂_j u^i = δ
    let g = covariant_derivative_vector(&conn, &[1.0, 1.0], &DMatrix::identity(2, 2));
    assert_eq!(g.div, 2.0);

    let s = sphere();
    let conn = s.connection(&[FRAC_PI_3, 1.0]).unwrap();
    let g = covariant_derivative_vector(&conn, &[0.0, 1.0], &DMatrix::zeros(2, 2));
    assert!((g.grad[(1, 0)] - 1.0 / FRAC_PI_3.tan()).abs() < 1e-14);
}

#[test]
fn killing_examples() {
    let m1 = ChartMetric::flat_torus(2);
    let r = killing_residual(&m1, &builtin_field(&m1, "translation_0").unwrap(), &[1.0, 2.0]).unwrap();
    assert_eq!(r.abs().max(), 0.0);

    let m2 = torus();
    let axial = builtin_field(&m2, "axial").unwrap();
    for x in random_points(&m2, 100, 5) {
        assert!(killing_residual(&m2, &axial, &x).unwrap().abs().max() <= 1e-8);
    }
    // finite-difference oracle: the same field without a closed-form derivative
    let axial_fd = VectorFieldSpec::new("axial-fd", Arc::new(|_x: &[f64]| vec![0.0, 1.0]));
    assert!(killing_residual(&m2, &axial_fd, &[0.4, 0.1]).unwrap().abs().max() <= 1e-8);

    let m4 = ChartMetric::flat_patch(2);
    let q = builtin_field(&m4, "quadratic_0").unwrap();
    let x1 = 0.7;
    let r = killing_residual(&m4, &q, &[x1, -0.3]).unwrap();
    assert!((r[(0, 0)] - 4.0 * x1).abs() < 1e-14);
    let rot = builtin_field(&m4, "rotation_01").unwrap();
    assert!(killing_residual(&m4, &rot, &[0.3, -1.2]).unwrap().abs().max() <= 1e-14);

    let s = sphere();
    let az = builtin_field(&s, "azimuthal").unwrap();
    for x in random_points(&s, 100, 6) {
        assert!(killing_residual(&s, &az, &x).unwrap().abs().max() <= 1e-8);
    }
}

#[test]
fn random_polynomial_fields_are_not_killing() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for chart in all_charts() {
        let n = chart.dim;
        let coeffs: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let field = VectorFieldSpec::new(
            "random-poly",
            Arc::new(move |x: &[f64]| {
                (0..n).map(|i| coeffs[i][0] + coeffs[i][1] * x[(i + 1) % n] * x[i] + coeffs[i][2] * x[i] * x[i]).collect()
            }),
        );
        let worst = random_points(&chart, 20, 8)
            .iter()
            .map(|x| killing_residual(&chart, &field, x).unwrap().abs().max())
            .fold(0.0, f64::max);
        assert!(worst >= 1e-2, "{}: {worst}", chart.name);
    }
}

#[test]
fn homothety_examples() {
    let m4 = ChartMetric::flat_patch(2);
    let d = builtin_field(&m4, "dilation").unwrap();
    let x = [0.4, -1.1];
    assert!(homothety_residual(&m4, &d, 2.0, &x).unwrap().abs().max() < 1e-15);
    let r = homothety_residual(&m4, &d, 1.0, &x).unwrap();
    assert!((r - DMatrix::identity(2, 2)).abs().max() < 1e-15);
    let m2 = torus();
    let a = builtin_field(&m2, "axial").unwrap();
    assert!(homothety_residual(&m2, &a, 0.0, &[1.3, 0.2]).unwrap().abs().max() < 1e-12);
}

#[test]
fn curl_free_examples() {
    let m4 = ChartMetric::flat_patch(2);
    let grad = VectorFieldSpec::gradient_of(
        "grad a.x",
        &m4,
        potential_from_expr(FieldExpr::default().plus(0.5, 0, ScalarFn::identity()).plus(-2.0, 1, ScalarFn::identity())),
    );
    assert!(curl_free_residual(&m4, &grad, &[0.2, 0.3]).unwrap().abs().max() < 1e-12);
    let rot = builtin_field(&m4, "rotation_01").unwrap();
    let r = curl_free_residual(&m4, &rot, &[0.2, 0.3]).unwrap();
    assert!((r[(0, 1)] - 2.0).abs() < 1e-14 && (r[(1, 0)] + 2.0).abs() < 1e-14);

    let m2 = torus();
    let axial = builtin_field(&m2, "axial").unwrap();
    for r0 in [0.5f64, 1.0, 2.5] {
        let c = curl_free_residual(&m2, &axial, &[r0, 0.0]).unwrap();
        // oracle: ζ_θ = f², curl^{rθ} = g^{rr}g^{θθ} ∂_r f² = 2 f'/f
        let (f, fp) = (2.0 + r0.cos(), -r0.sin());
        assert!((c[(0, 1)] - 2.0 * fp / f).abs() < 1e-12);
    }
    assert!(curl_free_residual(&m2, &axial, &[0.0, 0.0]).unwrap().abs().max() < 1e-12);
    assert!(curl_free_residual(&m2, &axial, &[PI, 0.0]).unwrap().abs().max() < 1e-12);
}

#[test]
fn potential_agrees_with_field() {
    let m4 = ChartMetric::flat_patch(3);
    let pts = random_points(&m4, 20, 9);
    for name in ["translation_2", "dilation"] {
        let f = builtin_field(&m4, name).unwrap();
        assert!(f.potential().is_some());
        assert!(f.check_potential(&m4, &pts).unwrap() <= 1e-10);
    }
    let m2 = torus();
    let g = VectorFieldSpec::gradient_of(
        "grad cos r",
        &m2,
        potential_from_expr(FieldExpr::default().plus(1.0, 0, ScalarFn::cos(1.0, 1.0, 0.0, 0.0))),
    );
    assert!(g.check_potential(&m2, &random_points(&m2, 20, 10)).unwrap() <= 1e-10);
    assert!(curl_free_residual(&m2, &g, &[0.3, 0.2]).unwrap().abs().max() <= 1e-8);
}

#[test]
fn unknown_names_are_rejected() {
    assert!(ChartMetric::builtin("klein_bottle", 2, &Default::default()).is_err());
    assert!(builtin_field(&torus(), "translation_5").is_err());
    assert!(builtin_field(&torus(), "spiral").is_err());
    let mut params = std::collections::BTreeMap::new();
    params.insert("radius".to_string(), 3.0);
    assert!(ChartMetric::builtin("torus_of_revolution", 2, &params).is_err());
}

proptest! {
    #[test]
    fn christoffel_symmetric_and_inverse_exact(r in 0.0f64..6.28, th in 0.0f64..6.28, z in 0.0f64..6.28) {
        let c = ChartMetric::torus_of_revolution(3, 2.0).unwrap();
        let conn = c.connection(&[r, th, z]).unwrap();
        for i in 0..3 { for j in 0..3 { for k in 0..3 {
            prop_assert_eq!(conn.gamma.get(i, j, k), conn.gamma.get(i, k, j));
        }}}
        let id = &conn.g_inv * &conn.g;
        prop_assert!((id - DMatrix::identity(3, 3)).abs().max() <= 1e-12);
    }

    #[test]
    fn sphere_curvature_is_constant(th in 0.25f64..2.85, ph in 0.0f64..6.28) {
        let r = riemann(&sphere(), &[th, ph]).unwrap();
        prop_assert!((r.scalar - 2.0).abs() < 1e-10);
        let (anti, bianchi) = riemann_identity_residuals(&r);
        prop_assert!(anti < 1e-12 && bianchi < 1e-12);
    }
}
