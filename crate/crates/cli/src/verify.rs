//! Identity suites behind `verify` and `higher-dim`.

use std::f64::consts::PI;

use hopflab::charts::{ChartPoint, ManifoldSpec};
use hopflab::complexgeom::{
    chern_ricci_and_scalar, gauduchon_check, lee_form, lee_form_covariant_derivative, volume, VolumeQuadrature,
};
use hopflab::convergence::{
    c0_distance_check, check_against_closed_form, frame_gram, integrate_collapse_curve, null_direction_residual,
    CollapseCurveState,
};
use hopflab::exec::{max_of, try_map_indexed, Execution};
use hopflab::field::VariationField;
use hopflab::metrics::{fd_partials, hermitian_matrix, hopf_determinant, real_metric};
use hopflab::sampling::random_points;
use hopflab::stability::{
    harmonicity_residual, index_form, index_form_quadrature, instability_integrand, stability_radius_scan,
    stability_spectrum, totally_geodesic_check, FiberInclusion, Ray,
};
use hopflab::tensor::{complex_curvature, symmetry_residual, PointGeometry};
use num_complex::Complex64;

use crate::records::IdentityRecord;
use crate::{CliError, CliResult};

/// Base coordinates of sampled points lie in `[-SAMPLE_RADIUS, SAMPLE_RADIUS]`.
pub const SAMPLE_RADIUS: f64 = 3.0;
/// Relative perturbation applied by the fault-injection hook.
pub const INJECTED_ERROR: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub epsilons: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub n: usize,
    pub fd_step: f64,
    pub fourier_cap: i32,
    pub r0: f64,
    pub tol: Option<f64>,
    pub inject_error: bool,
    pub exec: Execution,
}

impl SuiteConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(CliError::Config("--samples must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(CliError::Config("--tol must be positive".into()));
            }
        }
        if self.fourier_cap < 1 {
            return Err(CliError::Config("--fourier-cap must be at least 1".into()));
        }
        if !(self.r0 > 0.0) {
            return Err(CliError::Config("--r0 must be positive".into()));
        }
        Ok(())
    }
}

/// Max over the epsilon grid of a per-point residual.
fn over_points<F>(cfg: &SuiteConfig, n: usize, f: F) -> CliResult<f64>
where
    F: Fn(&ChartPoint, &ManifoldSpec) -> hopflab::Result<f64> + Sync + Send,
{
    let mut worst = 0.0_f64;
    for &eps in &cfg.epsilons {
        let spec = ManifoldSpec::hopf(n, eps)?;
        let points = random_points(&spec, cfg.seed, cfg.samples, SAMPLE_RADIUS);
        let values = try_map_indexed(cfg.exec, points.len(), |i| f(&points[i], &spec))?;
        worst = max_of([worst, max_of(values)]);
    }
    Ok(worst)
}

fn fiber_at(p: &ChartPoint, spec: &ManifoldSpec) -> hopflab::Result<FiberInclusion> {
    FiberInclusion::new(*spec, p.base())
}

fn determinant_residual(p: &ChartPoint, spec: &ManifoldSpec, inject: bool) -> hopflab::Result<f64> {
    let mut g = hermitian_matrix(p, spec)?;
    if inject {
        g[(0, 0)] *= 1.0 + INJECTED_ERROR;
    }
    let expected = hopf_determinant(p, spec);
    Ok((g.determinant().re - expected).abs() / expected)
}

/// The surface suite.
pub fn run_verify(cfg: &SuiteConfig) -> CliResult<Vec<IdentityRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut push = |r: IdentityRecord| records.push(r.with_tolerance(cfg.tol));

    push(IdentityRecord::upper(
        "chern_scalar",
        "R(g_eps) = 2",
        over_points(cfg, 2, |p, s| Ok((chern_ricci_and_scalar(p, s)?.scalar - 2.0).abs()))?,
        1e-9,
    ));
    let mut det = 0.0_f64;
    for n in dimensions(cfg.n) {
        det = det.max(over_points(cfg, n, |p, s| determinant_residual(p, s, cfg.inject_error))?);
    }
    push(IdentityRecord::upper("determinant", "detC(g_eps) = (1+eps^2) pi^2 A^(-n)", det, 1e-10));
    let h = cfg.fd_step;
    push(IdentityRecord::upper(
        "metric_partials_fd",
        "dg = central difference of g",
        over_points(cfg, 2, |p, s| {
            let (dg_fd, _) = fd_partials(p, s, h)?;
            Ok(dg_fd.max_abs_diff(&real_metric(p, s)?.dg))
        })?,
        1e-6,
    ));
    push(IdentityRecord::upper(
        "gauduchon",
        "d dbar omega = 0",
        over_points(cfg, 2, |p, s| Ok(gauduchon_check(p, s)?.residual))?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "lee_form_closed",
        "d theta = 0",
        over_points(cfg, 2, |p, s| Ok(lee_form(p, s)?.closedness_residual))?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "lee_form_defining",
        "d omega + 2 theta ^ omega = 0",
        over_points(cfg, 2, |p, s| Ok(lee_form(p, s)?.defining_residual))?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "lee_form_closed_form",
        "theta = closed form in (w0, w1)",
        over_points(cfg, 2, |p, s| Ok(lee_form(p, s)?.closed_form_residual))?,
        1e-10,
    ));
    let mut weakest = f64::INFINITY;
    for &eps in &cfg.epsilons {
        let spec = ManifoldSpec::hopf_surface(eps)?;
        let points = random_points(&spec, cfg.seed, cfg.samples, SAMPLE_RADIUS);
        let sups =
            try_map_indexed(cfg.exec, points.len(), |i| Ok::<_, hopflab::GeometryError>(lee_form_covariant_derivative(&points[i], &spec)?.abs().max()))?;
        weakest = weakest.min(max_of(sups));
    }
    push(IdentityRecord::lower("lee_form_not_parallel", "sup |nabla theta| > 0", weakest, 1e-3));
    push(IdentityRecord::upper(
        "riemann_symmetries",
        "R_ijkl = -R_jikl = -R_ijlk = R_klij, R_i[jkl] = 0",
        over_points(cfg, 2, |p, s| {
            let geo = PointGeometry::at(p, s)?;
            Ok(symmetry_residual(geo.riemann()) / (1.0 + geo.riemann().max_abs()))
        })?,
        1e-9,
    ));
    push(IdentityRecord::upper(
        "surface_curvature_closed_forms",
        "R_0101 = g^33 (g_03,1 - g_01,3)^2 / 4 and three companions",
        over_points(cfg, 2, |p, s| Ok(surface_identity_residuals(p, s)?.0))?,
        1e-9,
    ));
    push(IdentityRecord::upper(
        "surface_curvature_zeros",
        "R_0103 = R_2123 = R_0213 = R_0321 = R_0123 = 0",
        over_points(cfg, 2, |p, s| Ok(surface_identity_residuals(p, s)?.1))?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "complex_curvature_closed_form",
        "R(dw0, dw1, dw0b, dw1b) = g^11 pi^2 (1+eps^2)^2 |w1|^4 / (8 A^4)",
        over_points(cfg, 2, |p, s| {
            let (x1, x3) = (p.coords[1], p.coords[3]);
            let a = p.a_factor(s);
            let c = s.fiber_scale();
            let g_inv = real_metric(p, s)?.g_inv;
            let closed = 0.5 * g_inv[(1, 1)] * PI * PI * c * c * (x1 * x1 + x3 * x3).powi(2) / (4.0 * a.powi(4));
            Ok((complex_curvature(p, s)? - closed).abs())
        })?,
        1e-9,
    ));
    push(IdentityRecord::upper(
        "complex_curvature_nonnegative",
        "R(dw0, dw1, dw0b, dw1b) >= 0",
        over_points(cfg, 2, |p, s| Ok((-complex_curvature(p, s)?).max(0.0)))?,
        1e-12,
    ));
    let mut harmonic = 0.0_f64;
    let mut geodesic = 0.0_f64;
    for n in dimensions(cfg.n) {
        harmonic = harmonic.max(over_points(cfg, n, |p, s| harmonicity_residual(&fiber_at(p, s)?))?);
        geodesic = geodesic.max(over_points(cfg, n, |p, s| totally_geodesic_check(&fiber_at(p, s)?))?);
    }
    push(IdentityRecord::upper("fiber_harmonic", "tau(f_p) = 0", harmonic, 1e-12));
    push(IdentityRecord::upper("fiber_totally_geodesic", "II(f_p) = 0", geodesic, 1e-12));

    let fields = cfg.samples.clamp(1, 10);
    let mut gap = 0.0_f64;
    let mut constant = 0.0_f64;
    let mut special = f64::INFINITY;
    for &eps in &cfg.epsilons {
        let spec = ManifoldSpec::hopf_surface(eps)?;
        let points = random_points(&spec, cfg.seed, fields, SAMPLE_RADIUS);
        for (i, p) in points.iter().enumerate() {
            let f = fiber_at(p, &spec)?;
            let v = VariationField::random(4, cfg.fourier_cap, cfg.seed, i as u64);
            let a = index_form(&f, &v)?;
            gap = gap.max((a - index_form_quadrature(&f, &v, cfg.exec)?).abs() / (1.0 + a.abs()));
            let c = VariationField::constant(&[1.0, -0.5, 0.25, 2.0], cfg.fourier_cap);
            constant = constant.max(index_form(&f, &c)?.abs()).max(index_form_quadrature(&f, &c, cfg.exec)?.abs());
        }
        let f0 = FiberInclusion::surface_like(spec, 0.0, 0.0)?;
        special = special.min(stability_spectrum(&f0, cfg.fourier_cap, cfg.exec)?.overall_min);
    }
    push(IdentityRecord::upper("index_form_quadrature", "I(V,V) by quadrature = I(V,V) by modes", gap, 1e-8));
    push(IdentityRecord::upper("index_form_constant_fields", "I(V,V) = 0 for constant V", constant, 1e-10));
    push(IdentityRecord::upper(
        "special_fiber_stable",
        "min spec I >= 0 at w' = 0",
        (-special).max(0.0),
        1e-10,
    ));

    let step = 0.01;
    let mut root_gap = 0.0_f64;
    for &eps in &cfg.epsilons {
        let spec = ManifoldSpec::hopf_surface(eps)?;
        let scan = stability_radius_scan(&spec, Ray::along_imaginary(), 1, step, 3.0, cfg.exec)?;
        let root = 2.0 / (1.0 + eps * eps).sqrt();
        root_gap = root_gap.max(match scan.witness_bracket {
            Some((lo, hi)) => (root - 0.5 * (lo + hi)).abs(),
            None => f64::INFINITY,
        });
    }
    push(IdentityRecord::upper(
        "witness_root",
        "-(1+eps^2)/(8A) + (5+eps^2)/(8A^2) changes sign at |x3| = 2/sqrt(1+eps^2)",
        root_gap,
        0.5 * step + 1e-12,
    ));

    let grid = random_points(&ManifoldSpec::hopf_surface(0.0)?, cfg.seed, cfg.samples, SAMPLE_RADIUS);
    let mut c0 = 0.0_f64;
    let mut gram = 0.0_f64;
    let mut null = 0.0_f64;
    let mut ode = 0.0_f64;
    for &eps in &cfg.epsilons {
        let r = c0_distance_check(&grid, eps, cfg.exec)?;
        c0 = c0.max(r.max_deviation);
        let spec = ManifoldSpec::calabi_eckmann(eps)?;
        for p in random_points(&spec, cfg.seed, cfg.samples, SAMPLE_RADIUS) {
            let [a, b, c] = frame_gram(&p, &spec)?;
            let half = eps * eps / 2.0;
            gram = gram.max((a - half).abs()).max((b - half).abs()).max(c.abs());
            null = null.max(null_direction_residual(&p, &spec)?);
        }
        let start = CollapseCurveState::from_polar(cfg.r0, 0.0)?;
        let traj = integrate_collapse_curve(&start, &spec, start.a1, 10_000)?;
        let check = check_against_closed_form(&traj);
        ode = ode.max(check.radius_error).max(check.end_radius);
    }
    push(IdentityRecord::upper("c0_distance", "|g_eps - g_0|^2_(g_0) = eps^4", c0, 1e-12));
    push(IdentityRecord::upper("degenerate_direction_null", "g_0(alpha, .) = 0", null, 1e-12));
    push(IdentityRecord::upper("collapse_frame_gram", "g_eps(zeta_i, zeta_j) = eps^2 delta_ij / 2", gram, 1e-12));
    push(IdentityRecord::upper("collapse_curve", "r(t) = tan(a1 - t), r(a1) = 0", ode, 1e-6));

    let mut vol = 0.0_f64;
    for &eps in &cfg.epsilons {
        let v = volume(&ManifoldSpec::hopf_surface(eps)?, VolumeQuadrature::default(), cfg.exec)?;
        let exact = (1.0 + eps * eps) * PI.powi(3);
        vol = vol.max(((v.total - exact) / exact).abs());
    }
    push(IdentityRecord::upper("volume", "Vol(g_eps) = (1+eps^2) pi^3", vol, 1e-2));
    Ok(records)
}

fn dimensions(n: usize) -> Vec<usize> {
    if n == 2 {
        vec![2]
    } else {
        vec![2, n]
    }
}

/// `(closed-form residual, zero residual)` for the surface curvature identities.
fn surface_identity_residuals(p: &ChartPoint, spec: &ManifoldSpec) -> hopflab::Result<(f64, f64)> {
    let geo = PointGeometry::at(p, spec)?;
    let r = geo.riemann();
    let m = &geo.metric;
    let gi = &m.g_inv;
    let dg = |i, j, k| m.dg.get(i, j, k);
    let scale = 1.0 + r.max_abs();
    let q1 = dg(0, 3, 1) - dg(0, 1, 3);
    let q2 = dg(2, 1, 3) - dg(3, 2, 1);
    let closed = [
        (r.get(0, 1, 0, 1), 0.25 * gi[(3, 3)] * q1 * q1),
        (r.get(0, 3, 0, 3), 0.25 * gi[(1, 1)] * q1 * q1),
        (r.get(2, 1, 2, 1), 0.25 * gi[(3, 3)] * q2 * q2),
        (r.get(2, 3, 2, 3), 0.25 * gi[(1, 1)] * q2 * q2),
        (r.get(0, 1, 0, 1), gamma_product(&geo, (1, 0), (1, 0))),
        (r.get(0, 3, 0, 3), gamma_product(&geo, (3, 0), (3, 0))),
        (r.get(2, 1, 2, 1), gamma_product(&geo, (1, 2), (1, 2))),
        (r.get(2, 3, 2, 3), gamma_product(&geo, (3, 2), (3, 2))),
    ];
    let a = max_of(closed.iter().map(|(v, e)| (v - e).abs() / scale));
    let zeros = [r.get(0, 1, 0, 3), r.get(2, 1, 2, 3), r.get(0, 2, 1, 3), r.get(0, 3, 2, 1), r.get(0, 1, 2, 3)];
    let b = max_of(zeros.iter().map(|z| z.abs() / scale));
    Ok((a, b))
}

/// `Γ^p_{a} Γ^q_{b} g_pq` for index pairs `a`, `b`.
fn gamma_product(geo: &PointGeometry, a: (usize, usize), b: (usize, usize)) -> f64 {
    let d = geo.dim();
    let (g, gam) = (&geo.metric.g, geo.gamma());
    let mut s = 0.0;
    for p in 0..d {
        for q in 0..d {
            s += gam.get(p, a.0, a.1) * gam.get(q, b.0, b.1) * g[(p, q)];
        }
    }
    s
}

/// The suite for `S^(2n-1) x S^1` with `n >= 3`.
pub fn run_higher_dim(cfg: &SuiteConfig) -> CliResult<Vec<IdentityRecord>> {
    cfg.validate()?;
    let n = cfg.n;
    if n < 3 {
        return Err(CliError::Config("higher-dim needs --n 3 or larger".into()));
    }
    let mut records = Vec::new();
    let mut push = |r: IdentityRecord| records.push(r.with_tolerance(cfg.tol));
    push(IdentityRecord::upper(
        "determinant",
        "detC(g_eps) = (1+eps^2) pi^2 A^(-n)",
        over_points(cfg, n, |p, s| determinant_residual(p, s, cfg.inject_error))?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "fiber_christoffel_zero",
        "Gamma^p_kl = 0 for k, l in {0, n}",
        over_points(cfg, n, |p, s| {
            let geo = PointGeometry::at(p, s)?;
            let gam = geo.gamma();
            Ok(max_of((0..2 * n).flat_map(|i| {
                [(0, 0), (0, n), (n, 0), (n, n)].into_iter().map(move |(k, l)| gam.get(i, k, l).abs())
            })))
        })?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "curvature_gamma_products",
        "R_0r0s = Gamma^p_r0 Gamma^q_s0 g_pq, R_0rns, R_nrns likewise",
        over_points(cfg, n, |p, s| {
            let geo = PointGeometry::at(p, s)?;
            let r = geo.riemann();
            let scale = 1.0 + r.max_abs();
            let base: Vec<usize> = (1..2 * n).filter(|&i| i != n).collect();
            let mut worst = 0.0_f64;
            for &a in &base {
                for &b in &base {
                    for (v, e) in [
                        (r.get(0, a, 0, b), gamma_product(&geo, (a, 0), (b, 0))),
                        (r.get(0, a, n, b), gamma_product(&geo, (a, n), (b, 0))),
                        (r.get(n, a, n, b), gamma_product(&geo, (a, n), (b, n))),
                    ] {
                        worst = worst.max((v - e).abs() / scale);
                    }
                }
            }
            Ok(worst)
        })?,
        1e-9,
    ));
    push(IdentityRecord::upper(
        "curvature_mixed_zero",
        "R_0n0r = R_n0nr = 0",
        over_points(cfg, n, |p, s| {
            let geo = PointGeometry::at(p, s)?;
            let r = geo.riemann();
            let scale = 1.0 + r.max_abs();
            Ok(max_of((1..2 * n).filter(|&a| a != n).map(|a| r.get(0, n, 0, a).abs().max(r.get(n, 0, n, a).abs()) / scale)))
        })?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "chern_ricci",
        "Ric_kl = n (delta_kl / A - conj(w_k) w_l / A^2)",
        over_points(cfg, n, |p, s| {
            let cr = chern_ricci_and_scalar(p, s)?;
            let a = p.a_factor(s);
            let mut worst = 0.0_f64;
            for k in 1..n {
                for l in 1..n {
                    let delta = if k == l { 1.0 / a } else { 0.0 };
                    let expected = (Complex64::new(delta, 0.0) - p.w(k).conj() * p.w(l) / (a * a)) * n as f64;
                    worst = worst.max((cr.ricci[k][l] - expected).norm());
                }
            }
            Ok(worst)
        })?,
        1e-9,
    ));
    push(IdentityRecord::upper(
        "fiber_harmonic",
        "tau(f_p) = 0",
        over_points(cfg, n, |p, s| harmonicity_residual(&fiber_at(p, s)?))?,
        1e-10,
    ));
    push(IdentityRecord::upper(
        "fiber_totally_geodesic",
        "II(f_p) = 0",
        over_points(cfg, n, |p, s| totally_geodesic_check(&fiber_at(p, s)?))?,
        1e-10,
    ));
    let mut special = 0.0_f64;
    let mut witness = 0.0_f64;
    for &eps in &cfg.epsilons {
        let spec = ManifoldSpec::hopf(n, eps)?;
        let f0 = FiberInclusion::new(spec, vec![Complex64::new(0.0, 0.0); n - 1])?;
        let geo = f0.geometry()?;
        let r = geo.riemann();
        for i in 0..2 * n {
            for j in 0..2 * n {
                special = special.max(r.get(0, i, 0, j).abs()).max(r.get(0, i, n, j).abs()).max(r.get(n, i, n, j).abs());
            }
        }
        for x3 in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let mut base = vec![Complex64::new(0.0, 0.0); n - 1];
            base[0] = Complex64::new(0.0, x3);
            let a = 1.0 + x3 * x3;
            let expected = -(1.0 + eps * eps) / (8.0 * a) + (5.0 + eps * eps) / (8.0 * a * a);
            witness = witness.max((instability_integrand(&FiberInclusion::new(spec, base)?)? - expected).abs());
        }
    }
    push(IdentityRecord::upper("special_fiber_curvature", "R_0i0j = R_0inj = R_ninj = 0 at w' = 0", special, 1e-10));
    push(IdentityRecord::upper(
        "witness_integrand",
        "I(witness) = -(1+eps^2)/(8A) + (5+eps^2)/(8A^2)",
        witness,
        1e-12,
    ));
    Ok(records)
}
