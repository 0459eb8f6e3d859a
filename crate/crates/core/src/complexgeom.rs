//! Fundamental form, Lee form, Gauduchon and LCK checks, Chern-Ricci
//! curvature and the total volume.
//!
//! The fundamental form is `ω = (i/2) g_{ij̄} dw_i ∧ dw̄_j`. In the real
//! coframe `(dx_0..dx_{n-1}, dy_0..dy_{n-1})` with `w_j = x_j + i y_j` its
//! component matrix is `[[−Im G, Re G], [−Re G, −Im G]]`, so that
//! `ω(∂x_0, ∂y_0) = g_{00̄}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::arrays::{Array3, Array4};
use crate::charts::{ChartPoint, ManifoldSpec};
use crate::error::{GeometryError, Result};
use crate::exec::{map_indexed, max_of, Execution};
use crate::metrics::{hermitian_matrix, hermitian_metric, real_metric, RealMetricAtPoint};
use crate::tensor::{christoffel_from, covariant_derivative_from};

/// Differential form at a point, with full antisymmetric component storage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormAtPoint {
    pub degree: usize,
    pub dim: usize,
    /// Row-major over `dim^degree` indices.
    pub components: Vec<f64>,
}

impl FormAtPoint {
    pub fn zeros(degree: usize, dim: usize) -> Self {
        Self { degree, dim, components: vec![0.0; dim.pow(degree as u32)] }
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    /// Evaluate a 2-form on a pair of vectors.
    pub fn pair(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(self.degree, 2);
        let d = self.dim;
        (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).map(|(a, b)| x[a] * self.get(&[a, b]) * y[b]).sum()
    }

    /// Largest violation of antisymmetry under any transposition.
    pub fn antisymmetry_residual(&self) -> f64 {
        let mut worst = 0.0_f64;
        let total = self.components.len();
        for flat in 0..total {
            let idx = unflatten(flat, self.degree, self.dim);
            for s in 0..self.degree {
                for t in (s + 1)..self.degree {
                    let mut swapped = idx.clone();
                    swapped.swap(s, t);
                    worst = worst.max((self.components[flat] + self.get(&swapped)).abs());
                }
            }
        }
        worst
    }
}

fn unflatten(mut flat: usize, degree: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; degree];
    for slot in (0..degree).rev() {
        idx[slot] = flat % dim;
        flat /= dim;
    }
    idx
}

/// Component `Ω_ab` of ω given accessors for the block entries of the real metric.
fn omega_entry(n: usize, a: usize, b: usize, g: &dyn Fn(usize, usize) -> f64) -> f64 {
    // Re G_ij = 2 g[i][j], Im G_ij = 2 g[n+i][j]
    let (i, j) = (a % n, b % n);
    let re = 2.0 * g(i, j);
    let im = 2.0 * g(n + i, j);
    match (a < n, b < n) {
        (true, true) | (false, false) => -im,
        (true, false) => re,
        (false, true) => -re,
    }
}

fn omega_from_metric(metric: &RealMetricAtPoint) -> (DMatrix<f64>, Array3, Array4) {
    let d = metric.g.nrows();
    let n = d / 2;
    let omega = DMatrix::from_fn(d, d, |a, b| omega_entry(n, a, b, &|i, j| metric.g[(i, j)]));
    let mut domega = Array3::zeros(d);
    let mut d2omega = Array4::zeros(d);
    for a in 0..d {
        for b in 0..d {
            for k in 0..d {
                domega.set(a, b, k, omega_entry(n, a, b, &|i, j| metric.dg.get(i, j, k)));
                for l in 0..d {
                    d2omega.set(a, b, k, l, omega_entry(n, a, b, &|i, j| metric.d2g.get(i, j, k, l)));
                }
            }
        }
    }
    (omega, domega, d2omega)
}

pub fn fundamental_form(p: &ChartPoint, spec: &ManifoldSpec) -> Result<FormAtPoint> {
    let g = hermitian_matrix(p, spec)?;
    let n = g.nrows();
    let d = 2 * n;
    let mut form = FormAtPoint::zeros(2, d);
    for a in 0..d {
        for b in 0..d {
            let (i, j) = (a % n, b % n);
            let v = match (a < n, b < n) {
                (true, true) | (false, false) => -g[(i, j)].im,
                (true, false) => g[(i, j)].re,
                (false, true) => -g[(i, j)].re,
            };
            form.components[a * d + b] = v;
        }
    }
    Ok(form)
}

/// Top-degree coefficient of `ω∧ω/2` on a surface, i.e. the Pfaffian of ω
/// in the ordering `(x_0, y_0, x_1, y_1)`.
pub fn omega_squared_half(form: &FormAtPoint) -> Result<f64> {
    if form.dim != 4 {
        return Err(GeometryError::PreconditionViolated("ω∧ω/2 is the top form only on a surface".into()));
    }
    // complex ordering (x0, y0, x1, y1) = real indices (0, 2, 1, 3)
    let o = [0, 2, 1, 3];
    let w = |a: usize, b: usize| form.get(&[o[a], o[b]]);
    Ok(w(0, 1) * w(2, 3) - w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2))
}

/// `∂_k ∂̄_l` of the complex metric entry `G_ij`, from real second partials.
fn wirtinger_second(metric: &RealMetricAtPoint, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
    let n = metric.g.nrows() / 2;
    let f = |a: usize, b: usize| {
        Complex64::new(2.0 * metric.d2g.get(i, j, a, b), 2.0 * metric.d2g.get(n + i, j, a, b))
    };
    let (xk, yk, xl, yl) = (k, k + n, l, l + n);
    let i1 = Complex64::new(0.0, 1.0);
    (f(xk, xl) + i1 * f(xk, yl) - i1 * f(yk, xl) + f(yk, yl)) * 0.25
}

/// `∂_k` (or `∂̄_k` when `bar`) of the complex metric matrix.
fn wirtinger_first(metric: &RealMetricAtPoint, k: usize, bar: bool) -> DMatrix<Complex64> {
    let n = metric.g.nrows() / 2;
    let s = if bar { 1.0 } else { -1.0 };
    DMatrix::from_fn(n, n, |i, j| {
        let dx = Complex64::new(2.0 * metric.dg.get(i, j, k), 2.0 * metric.dg.get(n + i, j, k));
        let dy = Complex64::new(2.0 * metric.dg.get(i, j, k + n), 2.0 * metric.dg.get(n + i, j, k + n));
        (dx + Complex64::new(0.0, s) * dy) * 0.5
    })
}

/// Gauduchon residual on a surface: the single (2,2) coefficient of ∂∂̄ω.
#[derive(Debug, Clone, Serialize)]
pub struct GauduchonResidual {
    pub residual: f64,
    /// Contributions of the entries `(0,0)`, `(1,1)`, `(0,1)`, `(1,0)`.
    pub terms: [Complex64; 4],
}

pub fn gauduchon_check(p: &ChartPoint, spec: &ManifoldSpec) -> Result<GauduchonResidual> {
    require_surface(spec)?;
    let m = real_metric(p, spec)?;
    // ∂_k ∂̄_l g_{ij̄} dw_k∧dw̄_l∧dw_i∧dw̄_j reordered to dw0∧dw̄0∧dw1∧dw̄1
    let terms = [
        wirtinger_second(&m, 0, 0, 1, 1),
        wirtinger_second(&m, 1, 1, 0, 0),
        -wirtinger_second(&m, 0, 1, 1, 0),
        -wirtinger_second(&m, 1, 0, 0, 1),
    ];
    let total: Complex64 = terms.iter().sum();
    Ok(GauduchonResidual { residual: total.norm(), terms })
}

/// Same coefficient from central differences of the complex entries.
pub fn gauduchon_fd(p: &ChartPoint, spec: &ManifoldSpec, h: f64) -> Result<f64> {
    require_surface(spec)?;
    let at = |shift: &[(usize, f64)]| -> Result<DMatrix<Complex64>> {
        let mut q = p.clone();
        for &(k, s) in shift {
            q.coords[k] += s;
        }
        hermitian_matrix(&q, spec)
    };
    let n = 2;
    let second = |i: usize, j: usize, a: usize, b: usize| -> Result<Complex64> {
        let v = (at(&[(a, h), (b, h)])?[(i, j)] - at(&[(a, h), (b, -h)])?[(i, j)] - at(&[(a, -h), (b, h)])?[(i, j)]
            + at(&[(a, -h), (b, -h)])?[(i, j)])
            / (4.0 * h * h);
        Ok(v)
    };
    let wirt = |i: usize, j: usize, k: usize, l: usize| -> Result<Complex64> {
        let i1 = Complex64::new(0.0, 1.0);
        Ok((second(i, j, k, l)? + i1 * second(i, j, k, l + n)? - i1 * second(i, j, k + n, l)? + second(i, j, k + n, l + n)?)
            * 0.25)
    };
    let total = wirt(0, 0, 1, 1)? + wirt(1, 1, 0, 0)? - wirt(0, 1, 1, 0)? - wirt(1, 0, 0, 1)?;
    Ok(total.norm())
}

fn require_surface(spec: &ManifoldSpec) -> Result<()> {
    if spec.is_hopf() && spec.n() == 2 {
        Ok(())
    } else {
        Err(GeometryError::PreconditionViolated("this check is defined on the Hopf surface".into()))
    }
}

/// Lee form `θ = a dw₀ + b dw₁ + conjugates`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeeForm {
    pub a: Complex64,
    pub b: Complex64,
}

impl LeeForm {
    /// Closed form `a = (1+ε²) iπ/4`, `b = (1+ε²) w̄₁/(8A)`.
    pub fn closed_form(p: &ChartPoint, spec: &ManifoldSpec) -> Self {
        let c = spec.fiber_scale();
        let a = p.a_factor(spec);
        Self { a: Complex64::new(0.0, c * PI / 4.0), b: p.w(1).conj() * (c / (8.0 * a)) }
    }

    /// Real components over `(dx_0, dx_1, dx_2, dx_3)`.
    pub fn real_components(&self) -> [f64; 4] {
        [2.0 * self.a.re, 2.0 * self.b.re, -2.0 * self.a.im, -2.0 * self.b.im]
    }

    fn from_real(theta: &[f64]) -> Self {
        Self { a: Complex64::new(theta[0], -theta[2]) * 0.5, b: Complex64::new(theta[1], -theta[3]) * 0.5 }
    }
}

/// Lee form at a point with its residual checks.
#[derive(Debug, Clone, Serialize)]
pub struct LeeFormReport {
    pub form: LeeForm,
    /// Real components θ_i.
    pub theta: Vec<f64>,
    /// `dtheta[i][j] = ∂_i θ_j`.
    pub dtheta: Vec<Vec<f64>>,
    /// max |dω + 2θ∧ω| for the solved θ.
    pub defining_residual: f64,
    /// max |dω + 2θ∧ω| for the closed-form θ.
    pub closed_form_residual: f64,
    /// max |∂_i θ_j − ∂_j θ_i|.
    pub closedness_residual: f64,
}

const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

/// Row of the linear map θ ↦ (θ∧ω)_{abc}.
fn wedge_row(omega: &DMatrix<f64>, [a, b, c]: [usize; 3]) -> [f64; 4] {
    let mut row = [0.0; 4];
    row[a] += omega[(b, c)];
    row[b] += omega[(c, a)];
    row[c] += omega[(a, b)];
    row
}

fn d_omega(domega: &Array3, [a, b, c]: [usize; 3]) -> f64 {
    domega.get(b, c, a) + domega.get(c, a, b) + domega.get(a, b, c)
}

fn defining_residual(omega: &DMatrix<f64>, domega: &Array3, theta: &[f64]) -> f64 {
    max_of(TRIPLES.iter().map(|&t| {
        let row = wedge_row(omega, t);
        let wedge: f64 = row.iter().zip(theta).map(|(r, th)| r * th).sum();
        (d_omega(domega, t) + 2.0 * wedge).abs()
    }))
}

/// Solve `dω = −2θ∧ω` for θ and differentiate the solution implicitly.
pub fn lee_form(p: &ChartPoint, spec: &ManifoldSpec) -> Result<LeeFormReport> {
    require_surface(spec)?;
    let m = real_metric(p, spec)?;
    let (omega, domega, d2omega) = omega_from_metric(&m);
    let system = DMatrix::from_fn(4, 4, |r, col| -2.0 * wedge_row(&omega, TRIPLES[r])[col]);
    let rhs = DVector::from_fn(4, |r, _| d_omega(&domega, TRIPLES[r]));
    let lu = system.clone().lu();
    let theta = lu.solve(&rhs).ok_or(GeometryError::SingularMetric)?;

    // ∂_k: L ∂_kθ = ∂_k r − (∂_k L) θ
    let mut dtheta = vec![vec![0.0; 4]; 4];
    for k in 0..4 {
        let d_omega_k = DMatrix::from_fn(4, 4, |a, b| domega.get(a, b, k));
        let mut slice = Array3::zeros(4);
        for a in 0..4 {
            for b in 0..4 {
                for l in 0..4 {
                    slice.set(a, b, l, d2omega.get(a, b, l, k));
                }
            }
        }
        let d_system = DMatrix::from_fn(4, 4, |r, col| -2.0 * wedge_row(&d_omega_k, TRIPLES[r])[col]);
        let d_rhs = DVector::from_fn(4, |r, _| d_omega(&slice, TRIPLES[r]));
        let sol = lu.solve(&(d_rhs - d_system * &theta)).ok_or(GeometryError::SingularMetric)?;
        for j in 0..4 {
            dtheta[k][j] = sol[j];
        }
    }
    let theta_vec: Vec<f64> = theta.iter().copied().collect();
    let closed = LeeForm::closed_form(p, spec).real_components();
    let mut closedness = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            closedness = closedness.max((dtheta[i][j] - dtheta[j][i]).abs());
        }
    }
    Ok(LeeFormReport {
        form: LeeForm::from_real(&theta_vec),
        defining_residual: defining_residual(&omega, &domega, &theta_vec),
        closed_form_residual: defining_residual(&omega, &domega, &closed),
        closedness_residual: closedness,
        theta: theta_vec,
        dtheta,
    })
}

/// `∇θ` at a point.
pub fn lee_form_covariant_derivative(p: &ChartPoint, spec: &ManifoldSpec) -> Result<DMatrix<f64>> {
    let report = lee_form(p, spec)?;
    let m = real_metric(p, spec)?;
    let gamma = christoffel_from(&m.g_inv, &m.dg);
    let dtheta = DMatrix::from_fn(4, 4, |i, j| report.dtheta[i][j]);
    Ok(covariant_derivative_from(&gamma, &report.theta, &dtheta))
}

/// Fixed base grid used for the non-parallelism check.
pub fn default_lee_grid() -> Vec<(f64, f64)> {
    let vals = [-1.5, -0.5, 0.0, 0.5, 1.5];
    vals.iter().flat_map(|&x1| vals.iter().map(move |&x3| (x1, x3))).collect()
}

/// `sup |(∇θ)_ij|` over a grid of base points `(x₁, x₃)`.
pub fn lee_form_not_parallel(spec: &ManifoldSpec, grid: &[(f64, f64)], exec: Execution) -> Result<f64> {
    require_surface(spec)?;
    let values = map_indexed(exec, grid.len(), |i| -> Result<f64> {
        let (x1, x3) = grid[i];
        let p = ChartPoint::new(spec, 0, vec![0.0, x1, 0.0, x3])?;
        Ok(lee_form_covariant_derivative(&p, spec)?.abs().max())
    });
    Ok(max_of(values.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Chern-Ricci form components `Ric_{kl̄}` and the Chern scalar curvature.
#[derive(Debug, Clone, Serialize)]
pub struct ChernRicci {
    pub ricci: Vec<Vec<Complex64>>,
    pub scalar: f64,
}

/// `Ric_{kl̄} = −∂_k∂̄_l log det G`, via
/// `∂_k∂̄_l log det G = tr(G⁻¹ ∂_k∂̄_l G) − tr(G⁻¹ ∂_k G G⁻¹ ∂̄_l G)`.
pub fn chern_ricci_and_scalar(p: &ChartPoint, spec: &ManifoldSpec) -> Result<ChernRicci> {
    if !spec.is_hopf() {
        return Err(GeometryError::PreconditionViolated("Chern-Ricci is computed on the Hopf family".into()));
    }
    let h = hermitian_metric(p, spec)?;
    if h.det_c <= 0.0 {
        return Err(GeometryError::SingularMetric);
    }
    let g_inv = h.inverse()?;
    let m = real_metric(p, spec)?;
    let n = spec.n();
    let d: Vec<DMatrix<Complex64>> = (0..n).map(|k| wirtinger_first(&m, k, false)).collect();
    let dbar: Vec<DMatrix<Complex64>> = (0..n).map(|k| wirtinger_first(&m, k, true)).collect();
    let mut ricci = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            let dd = DMatrix::from_fn(n, n, |i, j| wirtinger_second(&m, i, j, k, l));
            let v = (g_inv * dd).trace() - (g_inv * &d[k] * g_inv * &dbar[l]).trace();
            ricci[(k, l)] = -v;
        }
    }
    let scalar = (g_inv * &ricci).trace().re;
    Ok(ChernRicci { ricci: (0..n).map(|k| (0..n).map(|l| ricci[(k, l)]).collect()).collect(), scalar })
}

/// Quadrature settings for the volume integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeQuadrature {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
    /// Radius of the base disc in the `w₁`-plane.
    pub cutoff: f64,
}

impl Default for VolumeQuadrature {
    fn default() -> Self {
        Self { radial_nodes: 125_000, angular_nodes: 8, cutoff: 1e3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeReport {
    /// Integral over the disc `|w₁| ≤ cutoff`.
    pub truncated: f64,
    /// Analytic tail beyond the cutoff.
    pub tail: f64,
    pub total: f64,
    pub samples: usize,
}

/// `∫ ω∧ω/2` over the chart `V₀₀` (fiber area 1). With `u = r²` the disc
/// integral is `½ ∫∫ det G du dφ`; the further substitution `s = u/(1+u)`
/// spreads the nodes evenly over the rational integrand.
pub fn volume(spec: &ManifoldSpec, q: VolumeQuadrature, exec: Execution) -> Result<VolumeReport> {
    require_surface(spec)?;
    if q.radial_nodes == 0 || q.angular_nodes == 0 || !(q.cutoff > 0.0) {
        return Err(GeometryError::PreconditionViolated("volume quadrature needs positive resolution and cutoff".into()));
    }
    let u_max = q.cutoff * q.cutoff;
    let s_max = u_max / (1.0 + u_max);
    let ds = s_max / q.radial_nodes as f64;
    let dphi = 2.0 * PI / q.angular_nodes as f64;
    let density = |u: f64, phi: f64| -> Result<f64> {
        let r = u.sqrt();
        let p = ChartPoint::new(spec, 0, vec![0.0, r * phi.cos(), 0.0, r * phi.sin()])?;
        Ok(hermitian_metric(&p, spec)?.det_c)
    };
    let annuli = map_indexed(exec, q.radial_nodes, |i| -> Result<f64> {
        let s = (i as f64 + 0.5) * ds;
        let u = s / (1.0 - s);
        let jac = 1.0 / ((1.0 - s) * (1.0 - s));
        let mut acc = 0.0;
        for j in 0..q.angular_nodes {
            acc += density(u, (j as f64 + 0.5) * dphi)?;
        }
        Ok(0.5 * acc * dphi * jac * ds)
    });
    let mut truncated = 0.0;
    for a in annuli {
        truncated += a?;
    }
    // beyond the cutoff the density is det(u_max)·((1+u_max)/(1+u))²
    let edge = density(u_max, 0.0)? * (1.0 + u_max) * (1.0 + u_max);
    let tail = 0.5 * 2.0 * PI * edge / (1.0 + u_max);
    Ok(VolumeReport { truncated, tail, total: truncated + tail, samples: q.radial_nodes * q.angular_nodes })
}
