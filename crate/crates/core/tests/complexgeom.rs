use std::f64::consts::PI;

use hopflab::charts::{ChartPoint, ManifoldSpec};
use hopflab::complexgeom::*;
use hopflab::exec::Execution;
use hopflab::metrics::hermitian_metric;
use hopflab::sampling::{random_points, stream};
use num_complex::Complex64;
use rand::Rng;

const EPS_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn point(spec: &ManifoldSpec, coords: &[f64]) -> ChartPoint {
    ChartPoint::new(spec, 0, coords.to_vec()).unwrap()
}

#[test]
fn fundamental_form_is_positive_on_complex_lines() {
    for eps in [0.1, 0.5, 1.0] {
        for n in [2, 3] {
            let spec = ManifoldSpec::hopf(n, eps).unwrap();
            let d = 2 * n;
            for (i, p) in random_points(&spec, 43, 50, 2.0).into_iter().enumerate() {
                let w = fundamental_form(&p, &spec).unwrap();
                let mut rng = stream(44, i as u64);
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let jx: Vec<f64> = (0..d).map(|k| if k < n { -x[k + n] } else { x[k - n] }).collect();
                assert!(w.pair(&x, &jx) > 0.0);
                assert_eq!(w.pair(&x, &x).abs() < 1e-12, true);
                assert_eq!(w.antisymmetry_residual(), 0.0);
            }
        }
    }
}

#[test]
fn fiber_pairing() {
    for eps in EPS_GRID {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        for p in random_points(&spec, 45, 20, 2.0) {
            let w = fundamental_form(&p, &spec).unwrap();
            assert!((w.get(&[0, 2]) - (1.0 + eps * eps) * PI * PI).abs() < 1e-12);
        }
    }
}

#[test]
fn top_form_equals_determinant() {
    for eps in EPS_GRID {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        for p in random_points(&spec, 47, 50, 3.0) {
            let top = omega_squared_half(&fundamental_form(&p, &spec).unwrap()).unwrap();
            let det = hermitian_metric(&p, &spec).unwrap().det_c;
            assert!(top > 0.0);
            assert!((top - det).abs() < 1e-12 * det.max(1.0));
        }
    }
}

#[test]
fn gauduchon_condition() {
    for eps in EPS_GRID {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        for p in random_points(&spec, 49, 200, 3.0) {
            let check = gauduchon_check(&p, &spec).unwrap();
            assert!(check.residual < 1e-10);
            assert_eq!(check.terms[0].norm(), 0.0);
        }
    }
}

#[test]
fn gauduchon_finite_difference_assembly_agrees() {
    let spec = ManifoldSpec::hopf_surface(0.6).unwrap();
    for p in random_points(&spec, 51, 30, 2.0) {
        let fd = gauduchon_fd(&p, &spec, 1e-4).unwrap();
        assert!((fd - gauduchon_check(&p, &spec).unwrap().residual).abs() < 1e-4);
    }
}

#[test]
fn lee_form_sample_value() {
    let spec = ManifoldSpec::hopf_surface(0.0).unwrap();
    let report = lee_form(&point(&spec, &[0.0, 0.0, 0.0, 1.0]), &spec).unwrap();
    let expected = [0.0, 0.0, -PI / 2.0, 1.0 / 8.0];
    for (a, b) in report.theta.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn lee_form_matches_closed_form_and_is_closed() {
    for eps in EPS_GRID {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        for p in random_points(&spec, 53, 100, 3.0) {
            let report = lee_form(&p, &spec).unwrap();
            let closed = LeeForm::closed_form(&p, &spec);
            assert!((report.form.a - closed.a).norm() < 1e-12);
            assert!((report.form.b - closed.b).norm() < 1e-12);
            assert!(report.defining_residual < 1e-10);
            assert!(report.closed_form_residual < 1e-10);
            assert!(report.closedness_residual < 1e-10);
        }
    }
}

#[test]
fn lee_form_base_part_vanishes_on_special_fiber() {
    let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
    let report = lee_form(&point(&spec, &[0.3, 0.0, 0.6, 0.0]), &spec).unwrap();
    assert!(report.form.b.norm() < 1e-14);
}

#[test]
fn lee_form_is_not_parallel_for_every_epsilon() {
    for eps in EPS_GRID {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        assert!(lee_form_not_parallel(&spec, &default_lee_grid(), Execution::Parallel).unwrap() > 1e-3);
    }
}

#[test]
fn chern_scalar_is_two() {
    for eps in EPS_GRID {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        for p in random_points(&spec, 55, 100, 3.0) {
            let cr = chern_ricci_and_scalar(&p, &spec).unwrap();
            assert!((cr.scalar - 2.0).abs() < 1e-9);
            let a = p.a_factor(&spec);
            // only the base entry survives
            assert!((cr.ricci[1][1] - Complex64::new(2.0 / (a * a), 0.0)).norm() < 1e-9);
            assert!(cr.ricci[0][0].norm() < 1e-9 && cr.ricci[0][1].norm() < 1e-9);
        }
        let cr = chern_ricci_and_scalar(&point(&spec, &[0.0; 4]), &spec).unwrap();
        assert!((cr.ricci[1][1].re - 2.0).abs() < 1e-12);
    }
}

#[test]
fn chern_ricci_in_higher_dimension() {
    for n in [3, 4] {
        let spec = ManifoldSpec::hopf(n, 0.4).unwrap();
        for p in random_points(&spec, 57, 30, 2.0) {
            let cr = chern_ricci_and_scalar(&p, &spec).unwrap();
            let a = p.a_factor(&spec);
            for k in 1..n {
                for l in 1..n {
                    let delta = if k == l { 1.0 / a } else { 0.0 };
                    let expected = (Complex64::new(delta, 0.0) - p.w(k).conj() * p.w(l) / (a * a)) * n as f64;
                    assert!((cr.ricci[k][l] - expected).norm() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn volume_converges_to_closed_form() {
    for eps in [0.0, 1.0] {
        let spec = ManifoldSpec::hopf_surface(eps).unwrap();
        let v = volume(&spec, VolumeQuadrature::default(), Execution::Parallel).unwrap();
        let exact = (1.0 + eps * eps) * PI.powi(3);
        assert!(((v.total - exact) / exact).abs() < 1e-2);
        assert!(v.samples >= 1_000_000);
    }
}

#[test]
fn volume_is_monotone_in_epsilon() {
    let q = VolumeQuadrature { radial_nodes: 2000, angular_nodes: 4, cutoff: 1e3 };
    let vols: Vec<f64> = EPS_GRID
        .iter()
        .map(|&e| volume(&ManifoldSpec::hopf_surface(e).unwrap(), q, Execution::Sequential).unwrap().total)
        .collect();
    assert!(vols.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn truncation_error_halves_as_the_cutoff_area_doubles() {
    let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
    let exact = 1.25 * PI.powi(3);
    let mut errors = Vec::new();
    for k in 0..5 {
        let cutoff = (10.0 * 2f64.powi(k)).sqrt();
        let q = VolumeQuadrature { radial_nodes: 20_000, angular_nodes: 4, cutoff };
        let v = volume(&spec, q, Execution::Parallel).unwrap();
        errors.push(exact - v.truncated);
        assert!(((v.total - exact) / exact).abs() < 1e-6);
    }
    for w in errors.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio - 0.5).abs() < 0.05, "{errors:?}");
    }
}

#[test]
fn sequential_and_parallel_volume_agree() {
    let spec = ManifoldSpec::hopf_surface(0.3).unwrap();
    let q = VolumeQuadrature { radial_nodes: 5000, angular_nodes: 6, cutoff: 100.0 };
    let a = volume(&spec, q, Execution::Sequential).unwrap();
    let b = volume(&spec, q, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}
