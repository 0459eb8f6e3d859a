use std::f64::consts::PI;

use hopflab::charts::{chart_transition, embed, ChartPoint, ManifoldSpec};
use hopflab::complexgeom::chern_ricci_and_scalar;
use hopflab::convergence::{c0_distance, frame_gram, null_direction_residual};
use hopflab::exec::Execution;
use hopflab::field::VariationField;
use hopflab::metrics::hermitian_metric;
use hopflab::stability::{index_form, index_form_quadrature, section_curvature_form, FiberInclusion};
use hopflab::tensor::{complex_curvature, riemann, symmetry_residual};
use num_complex::Complex64;
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn fiber() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

fn eps() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn surface_point() -> impl Strategy<Value = (f64, Vec<f64>)> {
    (eps(), fiber(), coord(), fiber(), coord()).prop_map(|(e, a, b, c, d)| (e, vec![a, b, c, d]))
}

fn hopf_point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(coord(), 2 * n).prop_map(move |mut v| {
        v[0] = v[0].rem_euclid(1.0);
        v[n] = v[n].rem_euclid(1.0);
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn embedding_lands_on_the_spheres(n in 2usize..5, e in eps(), seed in hopf_point(4)) {
        let spec = ManifoldSpec::hopf(n, e).unwrap();
        let mut coords: Vec<f64> = seed.into_iter().take(2 * n).collect();
        coords[n] = coords[n].rem_euclid(1.0);
        let p = ChartPoint::new(&spec, 0, coords).unwrap();
        prop_assert!(embed(&p, &spec).unwrap().sphere_residual() < 1e-12);
    }

    #[test]
    fn transitions_are_involutive((e, coords) in surface_point()) {
        prop_assume!(coords[1].hypot(coords[3]) > 1e-3);
        let spec = ManifoldSpec::hopf_surface(e).unwrap();
        let p = ChartPoint::new(&spec, 0, coords).unwrap();
        let q = chart_transition(&p, &spec, 1).unwrap();
        prop_assert!(chart_transition(&q, &spec, 0).unwrap().distance_mod_lattice(&p) < 1e-10);
    }

    #[test]
    fn determinant_formula(n in 2usize..5, e in eps(), coords in hopf_point(4)) {
        let spec = ManifoldSpec::hopf(n, e).unwrap();
        let coords: Vec<f64> = coords.into_iter().take(2 * n).map(|x| x.rem_euclid(1.0) * 2.0 - 1.0).collect();
        let p = ChartPoint::new(&spec, 0, coords).unwrap();
        let a = p.a_factor(&spec);
        let expected = (1.0 + e * e) * PI * PI * a.powi(-(n as i32));
        let det = hermitian_metric(&p, &spec).unwrap().det_c;
        prop_assert!((det - expected).abs() / expected < 1e-10);
    }

    #[test]
    fn chern_scalar_is_two((e, coords) in surface_point()) {
        let spec = ManifoldSpec::hopf_surface(e).unwrap();
        let p = ChartPoint::new(&spec, 0, coords).unwrap();
        prop_assert!((chern_ricci_and_scalar(&p, &spec).unwrap().scalar - 2.0).abs() < 1e-9);
    }

    #[test]
    fn curvature_symmetries_and_sign((e, coords) in surface_point()) {
        let spec = ManifoldSpec::hopf_surface(e).unwrap();
        let p = ChartPoint::new(&spec, 0, coords).unwrap();
        let r = riemann(&p, &spec).unwrap();
        prop_assert!(symmetry_residual(&r) < 1e-9 * (1.0 + r.max_abs()));
        prop_assert!(complex_curvature(&p, &spec).unwrap() >= -1e-12);
    }

    #[test]
    fn c0_distance_is_constant((e, coords) in surface_point()) {
        let spec = ManifoldSpec::hopf_surface(0.0).unwrap();
        let p = ChartPoint::new(&spec, 0, coords).unwrap();
        prop_assert!((c0_distance(&p, e).unwrap() - e.powi(4)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_frame_invariants(e in eps(), c in proptest::collection::vec(coord(), 6)) {
        let spec = ManifoldSpec::calabi_eckmann(e).unwrap();
        let mut c = c;
        c[0] = c[0].rem_euclid(1.0);
        c[3] = c[3].rem_euclid(1.0);
        let p = ChartPoint::new(&spec, 0, c).unwrap();
        prop_assert!(null_direction_residual(&p, &spec).unwrap() < 1e-12);
        let [a, b, x] = frame_gram(&p, &spec).unwrap();
        prop_assert!((a - e * e / 2.0).abs() < 1e-11 && (b - e * e / 2.0).abs() < 1e-11 && x.abs() < 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn index_form_is_quadratic_and_matches_quadrature(e in eps(), x1 in coord(), x3 in coord(), seed in 0u64..1000) {
        let f = FiberInclusion::surface_like(ManifoldSpec::hopf_surface(e).unwrap(), x1, x3).unwrap();
        let v = VariationField::random(4, 3, seed, 0);
        let i1 = index_form(&f, &v).unwrap();
        let scaled = v.modes().iter().map(|(&key, c)| (key, c.iter().map(|z| z * 2.0).collect())).collect();
        let doubled = VariationField::new(4, 3, scaled).unwrap();
        prop_assert!((index_form(&f, &doubled).unwrap() - 4.0 * i1).abs() < 1e-9 * (1.0 + i1.abs()));
        let q = index_form_quadrature(&f, &v, Execution::Sequential).unwrap();
        prop_assert!((q - i1).abs() < 1e-8 * (1.0 + i1.abs()));
    }

    #[test]
    fn section_curvature_is_nonnegative(e in eps(), x1 in coord(), x3 in coord(), w in proptest::collection::vec(-1.0..1.0f64, 8)) {
        let f = FiberInclusion::surface_like(ManifoldSpec::hopf_surface(e).unwrap(), x1, x3).unwrap();
        let w: Vec<Complex64> = (0..4).map(|i| Complex64::new(w[2 * i], w[2 * i + 1])).collect();
        prop_assert!(section_curvature_form(&f, &w).unwrap() >= -1e-12);
    }
}
