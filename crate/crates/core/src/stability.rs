//! Torus fibers as harmonic maps and minimal surfaces: harmonicity,
//! the index form, per-mode spectra, instability witnesses, holomorphic
//! sections and the area second variation.
//!
//! The metric, connection and curvature do not depend on the fiber
//! coordinates, so each Fourier mode `(m, k)` of a variation field
//! contributes an independent Hermitian form
//! `H(m,k) = D₀ᴴ g D₀ + D_nᴴ g D_n − R⁰ − Rⁿ` with
//! `D₀ = 2πi m + Γ^·_{0·}`, `D_n = 2πi k + Γ^·_{n·}`,
//! `R⁰_ij = R_{0i0j}` and `Rⁿ_ij = R_{nin j}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::charts::{ChartPoint, ManifoldSpec};
use crate::error::{GeometryError, Result};
use crate::exec::{map_indexed, max_of, Execution};
use crate::field::VariationField;
use crate::tensor::PointGeometry;

/// Tolerance below which a negative eigenvalue counts as noise.
pub const WITNESS_TOLERANCE: f64 = 1e-8;
/// Threshold for `|∇_{∂w̄₀} ∂x_j|` in the holomorphic-frame classification.
pub const HOLOMORPHIC_TOLERANCE: f64 = 1e-10;
/// Largest tangential g-norm accepted for a normal field.
pub const NORMAL_TOLERANCE: f64 = 1e-10;

/// Inclusion of the torus fiber over a base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberInclusion {
    #[serde(serialize_with = "serialize_complex_vec")]
    pub base: Vec<Complex64>,
    pub chart: usize,
    pub spec: ManifoldSpec,
}

fn serialize_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    pairs.serialize(s)
}

impl FiberInclusion {
    pub fn new(spec: ManifoldSpec, base: Vec<Complex64>) -> Result<Self> {
        Self::in_chart(spec, 0, base)
    }

    pub fn in_chart(spec: ManifoldSpec, chart: usize, base: Vec<Complex64>) -> Result<Self> {
        if !spec.is_hopf() {
            return Err(GeometryError::PreconditionViolated("fiber inclusions are defined on the Hopf family".into()));
        }
        if base.len() != spec.n() - 1 {
            return Err(GeometryError::CoordinateLength { expected: spec.n() - 1, got: base.len() });
        }
        if chart >= spec.chart_count() {
            return Err(GeometryError::InvalidChart { chart, charts: spec.chart_count() });
        }
        Ok(Self { base, chart, spec })
    }

    /// Fiber over `w₁ = x1 + i x3`, other base coordinates zero.
    pub fn surface_like(spec: ManifoldSpec, x1: f64, x3: f64) -> Result<Self> {
        let mut base = vec![Complex64::new(0.0, 0.0); spec.n().saturating_sub(1)];
        if let Some(w) = base.first_mut() {
            *w = Complex64::new(x1, x3);
        }
        Self::new(spec, base)
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn dim(&self) -> usize {
        self.spec.real_dim()
    }

    /// Chart point of the fiber at `(x₀, x_n)`.
    pub fn point(&self, x0: f64, xn: f64) -> ChartPoint {
        let n = self.n();
        let mut coords = vec![0.0; 2 * n];
        coords[0] = x0;
        coords[n] = xn;
        for (j, w) in self.base.iter().enumerate() {
            coords[j + 1] = w.re;
            coords[j + 1 + n] = w.im;
        }
        ChartPoint { chart: self.chart, coords }
    }

    pub fn geometry(&self) -> Result<PointGeometry> {
        PointGeometry::at(&self.point(0.0, 0.0), &self.spec)
    }

    pub fn base_radius(&self) -> f64 {
        self.base.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Fiber-constant coefficient data for the per-mode forms.
#[derive(Debug, Clone)]
pub struct FiberData {
    pub g: DMatrix<f64>,
    /// `m0[(p, i)] = Γ^p_{0i}`.
    pub m0: DMatrix<f64>,
    /// `mn[(p, i)] = Γ^p_{ni}`.
    pub mn: DMatrix<f64>,
    /// `r0[(i, j)] = R_{0i0j}`.
    pub r0: DMatrix<f64>,
    /// `rn[(i, j)] = R_{nin j}`.
    pub rn: DMatrix<f64>,
}

impl FiberData {
    pub fn from_geometry(geo: &PointGeometry, n: usize) -> Self {
        let d = geo.dim();
        let gam = geo.gamma();
        let r = geo.riemann();
        Self {
            g: geo.metric.g.clone(),
            m0: DMatrix::from_fn(d, d, |p, i| gam.get(p, 0, i)),
            mn: DMatrix::from_fn(d, d, |p, i| gam.get(p, n, i)),
            r0: DMatrix::from_fn(d, d, |i, j| r.get(0, i, 0, j)),
            rn: DMatrix::from_fn(d, d, |i, j| r.get(n, i, n, j)),
        }
    }

    pub fn of(f: &FiberInclusion) -> Result<Self> {
        Ok(Self::from_geometry(&f.geometry()?, f.n()))
    }

    fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `H(m,k)` with the kinetic part weighted by `weight` (g itself, or
    /// g composed with the normal projection).
    fn mode_matrix_weighted(&self, m: i32, k: i32, weight: &DMatrix<f64>) -> DMatrix<Complex64> {
        let d = self.dim();
        let cplx = |a: &DMatrix<f64>| a.map(|v| Complex64::new(v, 0.0));
        let ident = DMatrix::<Complex64>::identity(d, d);
        let d0 = &ident * Complex64::new(0.0, 2.0 * PI * m as f64) + cplx(&self.m0);
        let dn = &ident * Complex64::new(0.0, 2.0 * PI * k as f64) + cplx(&self.mn);
        let w = cplx(weight);
        let h = d0.adjoint() * &w * &d0 + dn.adjoint() * &w * &dn - cplx(&self.r0) - cplx(&self.rn);
        // symmetrize against roundoff
        (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn mode_matrix(&self, m: i32, k: i32) -> DMatrix<Complex64> {
        self.mode_matrix_weighted(m, k, &self.g)
    }
}

/// Smallest eigenvalue and a unit eigenvector of a Hermitian matrix, via
/// the real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]`.
pub fn min_eigenpair(h: &DMatrix<Complex64>) -> (f64, Vec<Complex64>) {
    let d = h.nrows();
    let real = DMatrix::from_fn(2 * d, 2 * d, |a, b| {
        let z = h[(a % d, b % d)];
        match (a < d, b < d) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = SymmetricEigen::new(real);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    let col = eig.eigenvectors.column(idx);
    let mut c: Vec<Complex64> = (0..d).map(|i| Complex64::new(col[i], col[i + d])).collect();
    let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut c {
        *z /= norm;
    }
    (lambda, c)
}

fn quadratic(h: &DMatrix<Complex64>, c: &[Complex64]) -> f64 {
    let d = c.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += c[i].conj() * h[(i, j)] * c[j];
        }
    }
    acc.re
}

fn check_field(f: &FiberInclusion, v: &VariationField, cap: Option<i32>) -> Result<()> {
    if v.dim() != f.dim() {
        return Err(GeometryError::CoordinateLength { expected: f.dim(), got: v.dim() });
    }
    let cap = cap.unwrap_or(v.cap());
    for &(m, k) in v.modes().keys() {
        if m.abs() > cap || k.abs() > cap {
            return Err(GeometryError::ModeCapExceeded { m, k, cap });
        }
    }
    Ok(())
}

/// Index form by exact per-mode assembly.
pub fn index_form(f: &FiberInclusion, v: &VariationField) -> Result<f64> {
    check_field(f, v, None)?;
    let data = FiberData::of(f)?;
    Ok(v.modes().iter().map(|(&(m, k), c)| quadratic(&data.mode_matrix(m, k), c)).sum())
}

/// Number of quadrature nodes per direction that integrates products of
/// trigonometric polynomials of degree `cap` exactly.
pub fn exact_grid_size(cap: i32) -> usize {
    (2 * cap.max(1) + 2) as usize
}

/// Index form by direct quadrature of the full integrand, evaluating the
/// connection and curvature at every node.
pub fn index_form_quadrature(f: &FiberInclusion, v: &VariationField, exec: Execution) -> Result<f64> {
    check_field(f, v, None)?;
    quadrature(f, v, exec, None)
}

/// `∫ |P(∇₀V)|² + |P(∇_nV)|² − R(∂₀,V,∂₀,V) − R(∂_n,V,∂_n,V)`, with `P`
/// the identity or the normal projection.
fn quadrature(f: &FiberInclusion, v: &VariationField, exec: Execution, normal: Option<&DMatrix<f64>>) -> Result<f64> {
    let n = f.n();
    let d = f.dim();
    let nodes = exact_grid_size(v.highest_mode().max(1));
    let h = 1.0 / nodes as f64;
    let rows = map_indexed(exec, nodes, |s| -> Result<f64> {
        let x0 = s as f64 * h;
        let mut row = 0.0;
        for t in 0..nodes {
            let xn = t as f64 * h;
            let geo = PointGeometry::at(&f.point(x0, xn), &f.spec)?;
            let g = &geo.metric.g;
            let gam = geo.gamma();
            let r = geo.riemann();
            let a = v.value(x0, xn);
            let mut total = 0.0;
            for (dir, da) in [(0, v.d_fiber0(x0, xn)), (n, v.d_fiber1(x0, xn))] {
                let mut cov: Vec<f64> =
                    (0..d).map(|p| da[p] + (0..d).map(|i| gam.get(p, dir, i) * a[i]).sum::<f64>()).collect();
                if let Some(proj) = normal {
                    cov = (0..d).map(|p| (0..d).map(|q| proj[(p, q)] * cov[q]).sum()).collect();
                }
                let mut kinetic = 0.0;
                let mut curv = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        kinetic += cov[i] * g[(i, j)] * cov[j];
                        curv += a[i] * a[j] * r.get(dir, i, dir, j);
                    }
                }
                total += kinetic - curv;
            }
            row += total;
        }
        Ok(row)
    });
    let mut sum = 0.0;
    for r in rows {
        sum += r?;
    }
    Ok(sum * h * h)
}

/// Harmonicity of an affine map `(s, t) ↦ origin + s·d0 + t·dn` into a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub origin: ChartPoint,
    pub d0: Vec<f64>,
    pub dn: Vec<f64>,
}

/// `max_i |∂²f^i/∂w∂w̄ + Γ^i_jk ∂f^j ∂f̄^k|` for an affine map at `(0, 0)`.
pub fn map_harmonicity_residual(map: &AffineMap, spec: &ManifoldSpec) -> Result<f64> {
    let geo = PointGeometry::at(&map.origin, spec)?;
    let gam = geo.gamma();
    let d = geo.dim();
    Ok(max_of((0..d).map(|i| {
        let mut tau = 0.0;
        for j in 0..d {
            for k in 0..d {
                tau += gam.get(i, j, k) * (map.d0[j] * map.d0[k] + map.dn[j] * map.dn[k]);
            }
        }
        (0.25 * tau).abs()
    })))
}

/// Fiber coordinates sampled by the fiber-wide checks.
fn fiber_samples() -> Vec<(f64, f64)> {
    let v = [0.0, 0.25, 0.5, 0.75];
    v.iter().flat_map(|&a| v.iter().map(move |&b| (a, b))).collect()
}

fn fiber_directions(f: &FiberInclusion) -> (Vec<f64>, Vec<f64>) {
    let d = f.dim();
    let mut e0 = vec![0.0; d];
    let mut en = vec![0.0; d];
    e0[0] = 1.0;
    en[f.n()] = 1.0;
    (e0, en)
}

/// Harmonic-map residual of the fiber inclusion, maximized over sample
/// points of the fiber.
pub fn harmonicity_residual(f: &FiberInclusion) -> Result<f64> {
    let (e0, en) = fiber_directions(f);
    let mut worst = 0.0_f64;
    for (x0, xn) in fiber_samples() {
        let map = AffineMap { origin: f.point(x0, xn), d0: e0.clone(), dn: en.clone() };
        worst = worst.max(map_harmonicity_residual(&map, &f.spec)?);
    }
    Ok(worst)
}

/// The pointwise integrand `|∇_{∂x₀}V|² − R(∂x₀,V,∂x₀,V)` along the
/// circular witness in the `w₁`-plane, evaluated from the general tensors.
/// On the axis `x₁ = 0` the witness is `(cos, sin)(2πx₀)/(2π)` in
/// `(∂x₁, ∂x_{n+1})`; on the axis `x_{n+1} = 0` the roles are swapped.
pub fn instability_integrand(f: &FiberInclusion) -> Result<f64> {
    let v = circular_witness(f)?;
    let geo = f.geometry()?;
    Ok(witness_integrand_at(&geo, &v, f.n(), 0.0))
}

fn witness_integrand_at(geo: &PointGeometry, v: &VariationField, n: usize, x0: f64) -> f64 {
    let d = geo.dim();
    let a = v.value(x0, 0.0);
    let da = v.d_fiber0(x0, 0.0);
    let gam = geo.gamma();
    let cov: Vec<f64> = (0..d).map(|p| da[p] + (0..d).map(|i| gam.get(p, 0, i) * a[i]).sum::<f64>()).collect();
    let g = &geo.metric.g;
    let r = geo.riemann();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            total += cov[i] * g[(i, j)] * cov[j] - a[i] * a[j] * r.get(0, i, 0, j);
        }
    }
    let _ = n;
    total
}

/// The circular witness field of [`instability_integrand`].
pub fn circular_witness(f: &FiberInclusion) -> Result<VariationField> {
    let n = f.n();
    if f.base.iter().skip(1).any(|w| w.norm() != 0.0) {
        return Err(GeometryError::PreconditionViolated("witness needs w₂ = … = w_{n−1} = 0".into()));
    }
    let w1 = f.base[0];
    let (cos_slot, sin_slot) = if w1.re == 0.0 {
        (1, n + 1)
    } else if w1.im == 0.0 {
        (n + 1, 1)
    } else {
        return Err(GeometryError::PreconditionViolated("witness needs x₁ = 0 or x_{n+1} = 0".into()));
    };
    let mut c = vec![Complex64::new(0.0, 0.0); f.dim()];
    // cos(2πx)/(2π) and sin(2πx)/(2π) as mode (1,0) coefficients
    c[cos_slot] = Complex64::new(1.0 / (4.0 * PI), 0.0);
    c[sin_slot] = Complex64::new(0.0, -1.0 / (4.0 * PI));
    VariationField::single_mode(f.dim(), 1, 1, 0, &c)
}

/// Per-fiber spectral summary.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub fiber: FiberInclusion,
    pub epsilon: f64,
    pub cap: i32,
    #[serde(serialize_with = "serialize_mode_map")]
    pub min_eigenvalue_per_mode: BTreeMap<(i32, i32), f64>,
    pub overall_min: f64,
    /// Minimum over modes with `max(|m|,|k|) = s`, indexed by `s`.
    pub shell_minima: Vec<f64>,
    pub witness_mode: Option<(i32, i32)>,
    pub witness: Option<VariationField>,
    /// Direct-quadrature index form of the witness.
    pub witness_index_form: Option<f64>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.witness.is_none()
    }

    pub fn mode_min(&self, m: i32, k: i32) -> Option<f64> {
        self.min_eigenvalue_per_mode.get(&(m, k)).copied()
    }
}

fn serialize_mode_map<S: Serializer>(map: &BTreeMap<(i32, i32), f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        m: i32,
        k: i32,
        min_eig: f64,
    }
    map.iter().map(|(&(m, k), &v)| Entry { m, k, min_eig: v }).collect::<Vec<_>>().serialize(s)
}

fn all_modes(cap: i32) -> Vec<(i32, i32)> {
    (-cap..=cap).flat_map(|m| (-cap..=cap).map(move |k| (m, k))).collect()
}

pub fn stability_spectrum(f: &FiberInclusion, cap: i32, exec: Execution) -> Result<StabilityReport> {
    if cap < 1 {
        return Err(GeometryError::PreconditionViolated("mode cap must be at least 1".into()));
    }
    let data = FiberData::of(f)?;
    let modes = all_modes(cap);
    let pairs = map_indexed(exec, modes.len(), |i| {
        let (m, k) = modes[i];
        min_eigenpair(&data.mode_matrix(m, k))
    });
    let mut per_mode = BTreeMap::new();
    let mut shell_minima = vec![f64::INFINITY; cap as usize + 1];
    for (i, (lambda, _)) in pairs.iter().enumerate() {
        let (m, k) = modes[i];
        per_mode.insert((m, k), *lambda);
        let s = m.abs().max(k.abs()) as usize;
        shell_minima[s] = shell_minima[s].min(*lambda);
    }
    let overall_min = pairs.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    // witness: lowest-frequency destabilizing mode, then positive m, then positive k
    let witness_idx = (0..modes.len())
        .filter(|&i| pairs[i].0 < -WITNESS_TOLERANCE)
        .min_by_key(|&i| {
            let (m, k) = modes[i];
            (m.abs() + k.abs(), -m, -k)
        });
    let (mut witness, mut witness_mode, mut witness_index_form) = (None, None, None);
    if let Some(i) = witness_idx {
        let (m, k) = modes[i];
        let v = VariationField::single_mode(f.dim(), cap, m, k, &pairs[i].1)?;
        witness_index_form = Some(index_form_quadrature(f, &v, exec)?);
        witness = Some(v);
        witness_mode = Some((m, k));
    }
    Ok(StabilityReport {
        fiber: f.clone(),
        epsilon: f.spec.epsilon,
        cap,
        min_eigenvalue_per_mode: per_mode,
        overall_min,
        shell_minima,
        witness_mode,
        witness,
        witness_index_form,
    })
}

/// Direction of a base ray for the radius scan, as an angle in the
/// `w₁`-plane (`π/2` is the axis `x₁ = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ray {
    pub angle: f64,
}

impl Ray {
    /// The axis `x₁ = 0`, moving along `x_{n+1}`.
    pub fn along_imaginary() -> Self {
        Self { angle: PI / 2.0 }
    }

    /// The axis `x_{n+1} = 0`, moving along `x₁`.
    pub fn along_real() -> Self {
        Self { angle: 0.0 }
    }

    pub fn point(&self, r: f64) -> Complex64 {
        if self.angle == PI / 2.0 {
            Complex64::new(0.0, r)
        } else if self.angle == 0.0 {
            Complex64::new(r, 0.0)
        } else {
            Complex64::from_polar(r, self.angle)
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub radius: f64,
    pub x1: f64,
    pub x3: f64,
    pub overall_min: f64,
    #[serde(serialize_with = "serialize_mode_map")]
    pub mode_minima: BTreeMap<(i32, i32), f64>,
    /// Witness integrand, when the ray lies on a coordinate axis.
    pub witness_integrand: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusScan {
    pub epsilon: f64,
    pub cap: i32,
    pub ray: Ray,
    pub rows: Vec<ScanRow>,
    /// Last radius before the first index-unstable row.
    pub last_stable: Option<f64>,
    pub first_unstable: Option<f64>,
    /// Bracket of the first sign change of the witness integrand.
    pub witness_bracket: Option<(f64, f64)>,
}

/// Scan `r = 0, step, 2·step, …, r_max` along a base ray.
pub fn stability_radius_scan(
    spec: &ManifoldSpec,
    ray: Ray,
    cap: i32,
    step: f64,
    r_max: f64,
    exec: Execution,
) -> Result<RadiusScan> {
    if !(step > 0.0) || !(r_max >= 0.0) {
        return Err(GeometryError::PreconditionViolated("scan needs a positive step and a non-negative range".into()));
    }
    if cap < 1 {
        return Err(GeometryError::PreconditionViolated("mode cap must be at least 1".into()));
    }
    let count = (r_max / step + 1e-9).floor() as usize + 1;
    let modes = all_modes(cap);
    let rows = map_indexed(exec, count, |i| -> Result<ScanRow> {
        let radius = i as f64 * step;
        let w = ray.point(radius);
        let f = FiberInclusion::surface_like(*spec, w.re, w.im)?;
        let data = FiberData::of(&f)?;
        let mut mode_minima = BTreeMap::new();
        let mut overall = f64::INFINITY;
        for &(m, k) in &modes {
            let (lambda, _) = min_eigenpair(&data.mode_matrix(m, k));
            overall = overall.min(lambda);
            mode_minima.insert((m, k), lambda);
        }
        let witness_integrand = instability_integrand(&f).ok();
        Ok(ScanRow { radius, x1: w.re, x3: w.im, overall_min: overall, mode_minima, witness_integrand })
    });
    let rows: Vec<ScanRow> = rows.into_iter().collect::<Result<_>>()?;
    let first_bad = rows.iter().position(|r| r.overall_min < -WITNESS_TOLERANCE);
    let (last_stable, first_unstable) = match first_bad {
        Some(0) => (None, Some(rows[0].radius)),
        Some(i) => (Some(rows[i - 1].radius), Some(rows[i].radius)),
        None => (rows.last().map(|r| r.radius), None),
    };
    let witness_bracket = rows.windows(2).find_map(|w| match (w[0].witness_integrand, w[1].witness_integrand) {
        (Some(a), Some(b)) if a >= 0.0 && b < 0.0 => Some((w[0].radius, w[1].radius)),
        _ => None,
    });
    Ok(RadiusScan { epsilon: spec.epsilon, cap, ray, rows, last_stable, first_unstable, witness_bracket })
}

/// `R(∂f/∂w₀, W, conj, conj)` for a complex frame vector `W`:
/// `Σ W_r W̄_s (R_{0r0s} + i R_{0rns} − i R_{nr0s} + R_{nrns})`.
pub fn section_curvature_form(f: &FiberInclusion, w: &[Complex64]) -> Result<f64> {
    if w.len() != f.dim() {
        return Err(GeometryError::CoordinateLength { expected: f.dim(), got: w.len() });
    }
    let geo = f.geometry()?;
    let r = geo.riemann();
    let n = f.n();
    let i1 = Complex64::new(0.0, 1.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, wa) in w.iter().enumerate() {
        for (b, wb) in w.iter().enumerate() {
            let k = Complex64::new(r.get(0, a, 0, b) + r.get(n, a, n, b), 0.0) + i1 * r.get(0, a, n, b)
                - i1 * r.get(n, a, 0, b);
            acc += wa * wb.conj() * k;
        }
    }
    Ok(acc.re)
}

/// The same form as `|β + iγ|²_g` with `β = Γ^·_{0·}W`, `γ = Γ^·_{n·}W`.
pub fn section_curvature_form_decomposed(f: &FiberInclusion, w: &[Complex64]) -> Result<f64> {
    let data = FiberData::of(f)?;
    let d = f.dim();
    let i1 = Complex64::new(0.0, 1.0);
    let v: Vec<Complex64> = (0..d)
        .map(|p| (0..d).map(|j| (data.m0[(p, j)] + i1 * data.mn[(p, j)]) * w[j]).sum())
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..d {
        for q in 0..d {
            acc += v[p] * data.g[(p, q)] * v[q].conj();
        }
    }
    Ok(acc.re)
}

/// `max_k ½|Γ^k_{0j} + i Γ^k_{nj}|` for each frame index `j`.
pub fn antiholomorphic_derivative_norms(f: &FiberInclusion) -> Result<Vec<f64>> {
    let data = FiberData::of(f)?;
    let d = f.dim();
    Ok((0..d)
        .map(|j| max_of((0..d).map(|k| 0.5 * Complex64::new(data.m0[(k, j)], data.mn[(k, j)]).norm())))
        .collect())
}

/// Frame indices `j` with `∇_{∂/∂w̄₀} ∂x_j = 0`.
pub fn holomorphic_frame_classification(f: &FiberInclusion) -> Result<Vec<usize>> {
    Ok(antiholomorphic_derivative_norms(f)?
        .into_iter()
        .enumerate()
        .filter(|&(_, v)| v < HOLOMORPHIC_TOLERANCE)
        .map(|(j, _)| j)
        .collect())
}

/// g-orthogonal projection onto the fiber tangent plane `span(∂x₀, ∂x_n)`.
pub fn tangent_projection(g: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let d = g.nrows();
    let t = DMatrix::from_fn(d, 2, |i, c| if (c == 0 && i == 0) || (c == 1 && i == n) { 1.0 } else { 0.0 });
    let gram = t.transpose() * g * &t;
    let gram_inv = gram.try_inverse().expect("fiber metric is positive definite");
    &t * gram_inv * t.transpose() * g
}

pub fn normal_projection(g: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::identity(g.nrows(), g.nrows()) - tangent_projection(g, n)
}

/// g-orthonormal normal frame: Gram-Schmidt of `∂x₁, ∂x_{n+1}, ∂x₂, …`
/// against the fiber tangent plane. Columns are the frame vectors.
pub fn normal_frame(f: &FiberInclusion) -> Result<DMatrix<f64>> {
    let geo = f.geometry()?;
    let g = &geo.metric.g;
    let n = f.n();
    let d = f.dim();
    let order: Vec<usize> = (1..n).flat_map(|j| [j, j + n]).collect();
    let p_normal = normal_projection(g, n);
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        (0..d).map(|i| (0..d).map(|j| a[i] * g[(i, j)] * b[j]).sum::<f64>()).sum()
    };
    let mut frame: Vec<Vec<f64>> = Vec::new();
    for &idx in &order {
        let mut v: Vec<f64> = (0..d).map(|i| p_normal[(i, idx)]).collect();
        for e in &frame {
            let c = ip(&v, e);
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
        let norm = ip(&v, &v).sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        frame.push(v);
    }
    Ok(DMatrix::from_fn(d, frame.len(), |i, c| frame[c][i]))
}

/// Normal field `Σ_β b_β(x) N_β` from Fourier data over the normal frame.
pub fn normal_field_from_frame(f: &FiberInclusion, coeffs: &VariationField) -> Result<VariationField> {
    let frame = normal_frame(f)?;
    if coeffs.dim() != frame.ncols() {
        return Err(GeometryError::CoordinateLength { expected: frame.ncols(), got: coeffs.dim() });
    }
    let d = f.dim();
    let modes = coeffs
        .modes()
        .iter()
        .map(|(&key, c)| {
            let v: Vec<Complex64> =
                (0..d).map(|i| (0..frame.ncols()).map(|b| c[b] * frame[(i, b)]).sum()).collect();
            (key, v)
        })
        .collect();
    VariationField::new(d, coeffs.cap(), modes)
}

fn tangential_size(data: &FiberData, n: usize, v: &VariationField) -> f64 {
    let pt = tangent_projection(&data.g, n);
    let d = data.dim();
    max_of(v.modes().values().map(|c| {
        let t: Vec<Complex64> = (0..d).map(|i| (0..d).map(|j| c[j] * pt[(i, j)]).sum()).collect();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                s += t[i].conj() * data.g[(i, j)] * t[j];
            }
        }
        s.re.max(0.0).sqrt()
    }))
}

/// Second variation of area along a normal field, by per-mode assembly.
pub fn area_second_variation(f: &FiberInclusion, x: &VariationField) -> Result<f64> {
    check_field(f, x, None)?;
    let data = FiberData::of(f)?;
    let tangential = tangential_size(&data, f.n(), x);
    if tangential > NORMAL_TOLERANCE {
        return Err(GeometryError::NotNormal(tangential));
    }
    let weight = &data.g * normal_projection(&data.g, f.n());
    Ok(x.modes().iter().map(|(&(m, k), c)| quadratic(&data.mode_matrix_weighted(m, k, &weight), c)).sum())
}

/// Second variation of area by direct quadrature.
pub fn area_second_variation_quadrature(f: &FiberInclusion, x: &VariationField, exec: Execution) -> Result<f64> {
    check_field(f, x, None)?;
    let data = FiberData::of(f)?;
    let tangential = tangential_size(&data, f.n(), x);
    if tangential > NORMAL_TOLERANCE {
        return Err(GeometryError::NotNormal(tangential));
    }
    let proj = normal_projection(&data.g, f.n());
    quadrature(f, x, exec, Some(&proj))
}

/// Smallest eigenvalue of the area form per mode, restricted to normal fields.
pub fn area_stability_spectrum(f: &FiberInclusion, cap: i32, exec: Execution) -> Result<BTreeMap<(i32, i32), f64>> {
    let data = FiberData::of(f)?;
    let frame = normal_frame(f)?.map(|v| Complex64::new(v, 0.0));
    let weight = &data.g * normal_projection(&data.g, f.n());
    let modes = all_modes(cap);
    let mins = map_indexed(exec, modes.len(), |i| {
        let (m, k) = modes[i];
        let h = frame.adjoint() * data.mode_matrix_weighted(m, k, &weight) * &frame;
        min_eigenpair(&h).0
    });
    Ok(modes.into_iter().zip(mins).collect())
}

/// `max_{i,j ∈ {0,n}} |P_N(Γ^·_{ij})|_g`, the second fundamental form of the fiber.
pub fn totally_geodesic_check(f: &FiberInclusion) -> Result<f64> {
    let n = f.n();
    let d = f.dim();
    let mut worst = 0.0_f64;
    for (x0, xn) in fiber_samples() {
        let geo = PointGeometry::at(&f.point(x0, xn), &f.spec)?;
        let g = &geo.metric.g;
        let proj = normal_projection(g, n);
        for &i in &[0, n] {
            for &j in &[0, n] {
                let gam: Vec<f64> = (0..d).map(|k| geo.gamma().get(k, i, j)).collect();
                let nv: Vec<f64> = (0..d).map(|p| (0..d).map(|q| proj[(p, q)] * gam[q]).sum()).collect();
                let norm2: f64 = (0..d).map(|p| (0..d).map(|q| nv[p] * g[(p, q)] * nv[q]).sum::<f64>()).sum();
                worst = worst.max(norm2.max(0.0).sqrt());
            }
        }
    }
    Ok(worst)
}

/// Induced metric on the fiber in `(x₀, x_n)`.
pub fn induced_fiber_metric(f: &FiberInclusion) -> Result<[[f64; 2]; 2]> {
    let g = f.geometry()?.metric.g;
    let n = f.n();
    Ok([[g[(0, 0)], g[(0, n)]], [g[(n, 0)], g[(n, n)]]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn surface(eps: f64, x1: f64, x3: f64) -> FiberInclusion {
        FiberInclusion::surface_like(ManifoldSpec::hopf_surface(eps).unwrap(), x1, x3).unwrap()
    }

    #[test]
    fn zero_mode_form_vanishes() {
        let f = surface(0.6, 0.8, -1.1);
        let h = FiberData::of(&f).unwrap().mode_matrix(0, 0);
        assert!(h.iter().all(|z| z.norm() < 1e-14), "{h}");
    }

    #[test]
    fn witness_integrand_sample_values() {
        for (eps, x3, expected) in [(1.0, 2.0, -0.02), (0.0, 3.0, -0.00625), (0.0, 2.0, 0.0)] {
            let v = instability_integrand(&surface(eps, 0.0, x3)).unwrap();
            assert!((v - expected).abs() < 1e-12, "ε={eps} x3={x3}: {v}");
        }
        assert!(instability_integrand(&surface(0.0, 0.0, 0.0)).unwrap() > 0.0);
        assert!(matches!(instability_integrand(&surface(0.5, 0.3, 0.4)), Err(GeometryError::PreconditionViolated(_))));
    }

    #[test]
    fn min_eigenpair_of_diagonal() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(3.0, 0.0),
            Complex64::new(-2.0, 0.0),
        ]));
        let (l, v) = min_eigenpair(&h);
        assert!((l + 2.0).abs() < 1e-14);
        assert!((v[1].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_geodesic_map_is_detected() {
        let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
        let origin = ChartPoint::new(&spec, 0, vec![0.0, 0.4, 0.0, 0.3]).unwrap();
        let map = AffineMap { origin, d0: vec![1.0, 1.0, 0.0, 0.0], dn: vec![0.0, 0.0, 1.0, 0.0] };
        assert!(map_harmonicity_residual(&map, &spec).unwrap() > 0.01);
    }

    #[test]
    fn fiber_inclusion_rejects_three_fold() {
        let spec = ManifoldSpec::calabi_eckmann(0.5).unwrap();
        assert!(FiberInclusion::new(spec, vec![Complex64::new(0.0, 0.0); 2]).is_err());
    }
}
