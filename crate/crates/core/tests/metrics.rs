use std::f64::consts::PI;

use hopflab::charts::{ChartPoint, ManifoldSpec};
use hopflab::metrics::{fd_partials, hermitian_metric, real_metric, real_metric_matrix};
use hopflab::sampling::random_points;
use hopflab::GeometryError;
use nalgebra::DMatrix;

/// Real surface metric written out entry by entry.
fn surface_real_metric(eps: f64, x1: f64, x3: f64) -> DMatrix<f64> {
    let c = 1.0 + eps * eps;
    let a = 1.0 + x1 * x1 + x3 * x3;
    let diag = 1.0 / (4.0 * a) + (3.0 + eps * eps * (a - 1.0)) / (4.0 * a * a);
    let p3 = c / 2.0 * PI * x3 / a;
    let p1 = c / 2.0 * PI * x1 / a;
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            c * PI * PI, -p3, 0.0, -p1, //
            -p3, diag, p1, 0.0, //
            0.0, p1, c * PI * PI, -p3, //
            -p1, 0.0, -p3, diag,
        ],
    );
    m * 0.5
}

fn surface_real_inverse(eps: f64, x1: f64, x3: f64) -> DMatrix<f64> {
    let c = 1.0 + eps * eps;
    let a = 1.0 + x1 * x1 + x3 * x3;
    let diag = 1.0 / (4.0 * a) + (3.0 + eps * eps * (a - 1.0)) / (4.0 * a * a);
    let p3 = c / 2.0 * PI * x3 / a;
    let p1 = c / 2.0 * PI * x1 / a;
    let m = DMatrix::from_row_slice(
        4,
        4,
        &[
            diag, p3, 0.0, p1, //
            p3, c * PI * PI, -p1, 0.0, //
            0.0, -p1, diag, p3, //
            p1, 0.0, p3, c * PI * PI,
        ],
    );
    m * (2.0 * a * a / (c * PI * PI))
}

#[test]
fn sample_real_entries() {
    let spec = ManifoldSpec::hopf_surface(0.0).unwrap();
    let g = real_metric(&ChartPoint::new(&spec, 0, vec![0.0, 0.0, 0.0, 1.0]).unwrap(), &spec).unwrap().g;
    assert!((g[(0, 0)] - PI * PI / 2.0).abs() < 1e-14);
    assert!((g[(0, 1)] + PI / 8.0).abs() < 1e-14);
    assert!((g[(1, 1)] - 5.0 / 32.0).abs() < 1e-14);
}

#[test]
fn real_metric_matches_written_out_matrix_and_inverse() {
    for eps in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        for p in random_points(&spec, 21, 100, 3.0) {
            let m = real_metric(&p, &spec).unwrap();
            let (x1, x3) = (p.coords[1], p.coords[3]);
            assert!((&m.g - surface_real_metric(eps, x1, x3)).abs().max() < 1e-13);
            let inv = surface_real_inverse(eps, x1, x3);
            assert!((&m.g_inv - &inv).abs().max() < 1e-9 * inv.abs().max());
            let id = &m.g * &m.g_inv - DMatrix::identity(4, 4);
            assert!(id.abs().max() < 1e-12);
        }
    }
}

#[test]
fn hermitian_entries_and_determinant() {
    for eps in [0.0, 0.5, 1.0] {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        let h = hermitian_metric(&ChartPoint::new(&spec, 0, vec![0.3, 0.0, 0.8, 1.0]).unwrap(), &spec).unwrap();
        assert!((h.g_c[(0, 0)].re - (1.0 + eps * eps) * PI * PI).abs() < 1e-13);
        assert!((h.det_c - (1.0 + eps * eps) * PI * PI / 4.0).abs() < 1e-12);
        let h0 = hermitian_metric(&ChartPoint::new(&spec, 0, vec![0.3, 0.0, 0.8, 0.0]).unwrap(), &spec).unwrap();
        assert_eq!(h0.g_c[(0, 1)].norm(), 0.0);
        assert_eq!(h0.g_c[(1, 0)].norm(), 0.0);
    }
}

#[test]
fn determinant_formula_in_several_dimensions() {
    for n in [2, 3, 4] {
        for eps in [0.0, 0.3, 1.0] {
            let spec = ManifoldSpec::hopf(n, eps).unwrap();
            for p in random_points(&spec, 4, 100, 2.5) {
                let h = hermitian_metric(&p, &spec).unwrap();
                let expected = (1.0 + eps * eps) * PI * PI * p.a_factor(&spec).powi(-(n as i32));
                assert!(((h.det_c - expected) / expected).abs() < 1e-10, "n={n}");
                assert_eq!(h.g_c, h.g_c.adjoint());
            }
        }
    }
}

#[test]
fn fiber_directions_are_constant_and_flat() {
    for n in [2, 3] {
        let spec = ManifoldSpec::hopf(n, 0.6).unwrap();
        for p in random_points(&spec, 8, 50, 2.0) {
            let m = real_metric(&p, &spec).unwrap();
            let fiber = (1.0 + 0.36) * PI * PI / 2.0;
            assert!((m.g[(0, 0)] - fiber).abs() < 1e-13 && (m.g[(n, n)] - fiber).abs() < 1e-13);
            assert_eq!(m.g[(0, n)], 0.0);
            for i in 0..2 * n {
                for j in 0..2 * n {
                    assert_eq!(m.dg.get(i, j, 0), 0.0);
                    assert_eq!(m.dg.get(i, j, n), 0.0);
                }
            }
        }
    }
}

#[test]
fn analytic_partials_match_finite_differences() {
    for spec in [ManifoldSpec::hopf_surface(0.7).unwrap(), ManifoldSpec::hopf(3, 0.2).unwrap()] {
        for p in random_points(&spec, 13, 100, 2.0) {
            let m = real_metric(&p, &spec).unwrap();
            let (dg, _) = fd_partials(&p, &spec, 1e-5).unwrap();
            assert!(dg.max_abs_diff(&m.dg) < 1e-6);
            let (_, d2g) = fd_partials(&p, &spec, 1e-4).unwrap();
            assert!(d2g.max_abs_diff(&m.d2g) < 1e-4);
        }
    }
}

#[test]
fn constant_entries_have_vanishing_differences() {
    let spec = ManifoldSpec::hopf_surface(0.4).unwrap();
    let p = ChartPoint::new(&spec, 0, vec![0.1, 0.6, 0.3, -0.9]).unwrap();
    let (dg, _) = fd_partials(&p, &spec, 1e-5).unwrap();
    for k in 0..4 {
        assert!(dg.get(0, 0, k).abs() < 1e-9);
        assert!(dg.get(2, 2, k).abs() < 1e-9);
        assert!(dg.get(0, 2, k).abs() < 1e-9);
    }
}

#[test]
fn fd_step_outside_range_is_rejected() {
    let spec = ManifoldSpec::hopf_surface(0.4).unwrap();
    let p = ChartPoint::new(&spec, 0, vec![0.0; 4]).unwrap();
    assert!(fd_partials(&p, &spec, 1e-9).is_err());
    assert!(fd_partials(&p, &spec, 0.1).is_err());
}

#[test]
fn degenerate_three_fold() {
    let spec = ManifoldSpec::calabi_eckmann(0.0).unwrap();
    let p = ChartPoint::new(&spec, 0, vec![0.0, 0.4, -0.2, 0.0, 0.1, 0.9]).unwrap();
    let h = hermitian_metric(&p, &spec).unwrap();
    assert_eq!(h.det_c, 0.0);
    assert!(matches!(h.inverse(), Err(GeometryError::SingularMetric)));
    assert!(matches!(real_metric(&p, &spec), Err(GeometryError::SingularMetric)));
    // still usable as a quadratic form
    assert!(real_metric_matrix(&p, &spec).is_ok());
    let positive = ManifoldSpec::calabi_eckmann(0.5).unwrap();
    assert!(hermitian_metric(&p, &positive).unwrap().det_c > 0.0);
}
