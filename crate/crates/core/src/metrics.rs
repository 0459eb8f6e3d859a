//! The Hermitian metrics g̃_ε (3-fold) and g_ε (Hopf manifolds), their
//! underlying Riemannian metrics and exact partial derivatives.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::arrays::{Array3, Array4};
use crate::charts::{ChartPoint, Family, ManifoldSpec};
use crate::error::{GeometryError, Result};
use crate::jet::Jet;

/// Complex metric matrix `g_{ij̄}` at a point.
#[derive(Debug, Clone)]
pub struct HermitianMetricAtPoint {
    pub g_c: DMatrix<Complex64>,
    /// `None` where the matrix is singular (the 3-fold at ε = 0).
    pub g_c_inv: Option<DMatrix<Complex64>>,
    pub det_c: f64,
}

impl HermitianMetricAtPoint {
    pub fn inverse(&self) -> Result<&DMatrix<Complex64>> {
        self.g_c_inv.as_ref().ok_or(GeometryError::SingularMetric)
    }
}

/// Underlying Riemannian metric with exact first and second partials.
#[derive(Debug, Clone)]
pub struct RealMetricAtPoint {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    /// `dg.get(i, j, k) = ∂_k g_ij`.
    pub dg: Array3,
    /// `d2g.get(i, j, k, l) = ∂_k ∂_l g_ij`.
    pub d2g: Array4,
}

/// Real and imaginary parts of the complex metric entries as jets.
struct EntryJets {
    re: Vec<Vec<Jet>>,
    im: Vec<Vec<Jet>>,
}

fn coordinate_jets(coords: &[f64], derivatives: bool) -> Vec<Jet> {
    let d = if derivatives { coords.len() } else { 0 };
    coords
        .iter()
        .enumerate()
        .map(|(i, &v)| if derivatives { Jet::variable(v, i, d) } else { Jet::constant(v, 0) })
        .collect()
}

fn sum_of_squares(x: &[Jet], idx: &[usize], dim: usize) -> Jet {
    idx.iter().fold(Jet::constant(1.0, dim), |acc, &i| &acc + &x[i].square())
}

fn entry_jets(spec: &ManifoldSpec, x: &[Jet]) -> EntryJets {
    let n = spec.n();
    let d = x[0].dim();
    let c = spec.fiber_scale();
    let eps2 = spec.epsilon * spec.epsilon;
    let zero = || Jet::constant(0.0, d);
    let mut re: Vec<Vec<Jet>> = (0..n).map(|_| (0..n).map(|_| zero()).collect()).collect();
    let mut im = re.clone();

    let a = sum_of_squares(x, &spec.a_indices(), d);
    let inv_a = a.recip();
    let inv_a2 = inv_a.square();
    re[0][0] = Jet::constant(c * PI * PI, d);

    match spec.family {
        Family::CalabiEckmann3Fold => {
            let b = sum_of_squares(x, &spec.b_indices(), d);
            let inv_b = b.recip();
            let inv_b2 = inv_b.square();
            let inv_ab = &inv_a * &inv_b;
            let (x1, y1, x2, y2) = (&x[1], &x[1 + n], &x[2], &x[2 + n]);
            // i c π w1 / (2A)
            re[0][1] = (y1 * &inv_a).scale(-c * PI / 2.0);
            im[0][1] = (x1 * &inv_a).scale(c * PI / 2.0);
            // c π w2 / (2B)
            re[0][2] = (x2 * &inv_b).scale(c * PI / 2.0);
            im[0][2] = (y2 * &inv_b).scale(c * PI / 2.0);
            // 1/(4A) + 3/(4A²) + ε²|w1|²/(4A²)
            let w1sq = &x1.square() + &y1.square();
            re[1][1] = &(&inv_a.scale(0.25) + &inv_a2.scale(0.75)) + &(&w1sq * &inv_a2).scale(eps2 / 4.0);
            // -i c/4 · w̄1 w2 / (AB)
            let p = &(x1 * x2) + &(y1 * y2);
            let q = &(x1 * y2) - &(y1 * x2);
            re[1][2] = (&q * &inv_ab).scale(c / 4.0);
            im[1][2] = (&p * &inv_ab).scale(-c / 4.0);
            // |w2|²/(4B²) + ε²/(4B) + 3ε²/(4B²)
            let w2sq = &x2.square() + &y2.square();
            re[2][2] = &(&(&w2sq * &inv_b2).scale(0.25) + &inv_b.scale(eps2 / 4.0)) + &inv_b2.scale(0.75 * eps2);
        }
        _ => {
            let kappa = (eps2 - 3.0) / 4.0;
            for i in 1..n {
                let (xi, yi) = (&x[i], &x[i + n]);
                // i c π w_i / (2A)
                re[0][i] = (yi * &inv_a).scale(-c * PI / 2.0);
                im[0][i] = (xi * &inv_a).scale(c * PI / 2.0);
                for j in i..n {
                    let (xj, yj) = (&x[j], &x[j + n]);
                    // δ_ij/A + κ w̄_i w_j / A²
                    let p = &(xi * xj) + &(yi * yj);
                    let q = &(xi * yj) - &(yi * xj);
                    let mut r = (&p * &inv_a2).scale(kappa);
                    if i == j {
                        r = &r + &inv_a;
                    }
                    re[i][j] = r;
                    im[i][j] = (&q * &inv_a2).scale(kappa);
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            re[i][j] = re[j][i].clone();
            im[i][j] = -&im[j][i];
        }
    }
    EntryJets { re, im }
}

/// Complex metric matrix only, without inverse or determinant.
pub fn hermitian_matrix(p: &ChartPoint, spec: &ManifoldSpec) -> Result<DMatrix<Complex64>> {
    let p = ChartPoint::new(spec, p.chart, p.coords.clone())?;
    let e = entry_jets(spec, &coordinate_jets(&p.coords, false));
    let n = spec.n();
    Ok(DMatrix::from_fn(n, n, |i, j| Complex64::new(e.re[i][j].value, e.im[i][j].value)))
}

pub fn hermitian_metric(p: &ChartPoint, spec: &ManifoldSpec) -> Result<HermitianMetricAtPoint> {
    let g_c = hermitian_matrix(p, spec)?;
    if structurally_singular(spec) {
        return Ok(HermitianMetricAtPoint { g_c, g_c_inv: None, det_c: 0.0 });
    }
    let chol = Cholesky::new(g_c.clone()).ok_or(GeometryError::SingularMetric)?;
    let det_c = chol.l_dirty().diagonal().iter().map(|d| d.re * d.re).product();
    let g_c_inv = Some(chol.inverse());
    Ok(HermitianMetricAtPoint { g_c, g_c_inv, det_c })
}

/// Block rule `½[[Re G, −Im G], [Im G, Re G]]`.
fn realify<T: Clone>(n: usize, re: &dyn Fn(usize, usize) -> T, im: &dyn Fn(usize, usize) -> T, half: &dyn Fn(T) -> T, neg: &dyn Fn(T) -> T) -> Vec<Vec<T>> {
    (0..2 * n)
        .map(|a| {
            (0..2 * n)
                .map(|b| {
                    let (i, j) = (a % n, b % n);
                    match (a < n, b < n) {
                        (true, true) | (false, false) => half(re(i, j)),
                        (true, false) => half(neg(im(i, j))),
                        (false, true) => half(im(i, j)),
                    }
                })
                .collect()
        })
        .collect()
}

/// Underlying real metric matrix only. Defined even where the metric
/// degenerates.
pub fn real_metric_matrix(p: &ChartPoint, spec: &ManifoldSpec) -> Result<DMatrix<f64>> {
    let gc = hermitian_matrix(p, spec)?;
    Ok(real_from_hermitian(&gc))
}

/// Realify a complex Hermitian matrix with the block rule.
pub fn real_from_hermitian(gc: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = gc.nrows();
    let rows = realify(n, &|i, j| gc[(i, j)].re, &|i, j| gc[(i, j)].im, &|v| 0.5 * v, &|v: f64| -v);
    DMatrix::from_fn(2 * n, 2 * n, |a, b| rows[a][b])
}

fn structurally_singular(spec: &ManifoldSpec) -> bool {
    spec.family == Family::CalabiEckmann3Fold && spec.epsilon == 0.0
}

pub fn real_metric(p: &ChartPoint, spec: &ManifoldSpec) -> Result<RealMetricAtPoint> {
    let p = ChartPoint::new(spec, p.chart, p.coords.clone())?;
    if structurally_singular(spec) {
        return Err(GeometryError::SingularMetric);
    }
    let dim = spec.real_dim();
    let e = entry_jets(spec, &coordinate_jets(&p.coords, true));
    let rows = realify(
        spec.n(),
        &|i, j| e.re[i][j].clone(),
        &|i, j| e.im[i][j].clone(),
        &|v: Jet| v.scale(0.5),
        &|v: Jet| -&v,
    );
    let g = DMatrix::from_fn(dim, dim, |a, b| rows[a][b].value);
    let mut dg = Array3::zeros(dim);
    let mut d2g = Array4::zeros(dim);
    for a in 0..dim {
        for b in 0..dim {
            let jet = &rows[a][b];
            for k in 0..dim {
                dg.set(a, b, k, jet.grad[k]);
                for l in 0..dim {
                    d2g.set(a, b, k, l, jet.d2(k, l));
                }
            }
        }
    }
    let g_inv = Cholesky::new(g.clone()).ok_or(GeometryError::SingularMetric)?.inverse();
    Ok(RealMetricAtPoint { g, g_inv, dg, d2g })
}

/// Central-difference partials of the real metric; a test oracle.
pub fn fd_partials(p: &ChartPoint, spec: &ManifoldSpec, h: f64) -> Result<(Array3, Array4)> {
    if !(1e-7..=1e-2).contains(&h) {
        return Err(GeometryError::PreconditionViolated(format!("finite-difference step {h} outside [1e-7, 1e-2]")));
    }
    let dim = spec.real_dim();
    let at = |shift: &[(usize, f64)]| -> Result<DMatrix<f64>> {
        let mut q = p.clone();
        for &(k, s) in shift {
            q.coords[k] += s;
        }
        real_metric_matrix(&q, spec)
    };
    let g0 = at(&[])?;
    let mut dg = Array3::zeros(dim);
    let mut d2g = Array4::zeros(dim);
    for k in 0..dim {
        let gp = at(&[(k, h)])?;
        let gm = at(&[(k, -h)])?;
        for a in 0..dim {
            for b in 0..dim {
                dg.set(a, b, k, (gp[(a, b)] - gm[(a, b)]) / (2.0 * h));
                d2g.set(a, b, k, k, (gp[(a, b)] - 2.0 * g0[(a, b)] + gm[(a, b)]) / (h * h));
            }
        }
        for l in (k + 1)..dim {
            let gpp = at(&[(k, h), (l, h)])?;
            let gpm = at(&[(k, h), (l, -h)])?;
            let gmp = at(&[(k, -h), (l, h)])?;
            let gmm = at(&[(k, -h), (l, -h)])?;
            for a in 0..dim {
                for b in 0..dim {
                    let v = (gpp[(a, b)] - gpm[(a, b)] - gmp[(a, b)] + gmm[(a, b)]) / (4.0 * h * h);
                    d2g.set(a, b, k, l, v);
                    d2g.set(a, b, l, k, v);
                }
            }
        }
    }
    Ok((dg, d2g))
}

/// Closed-form determinant `(1+ε²)π² A^(−n)` for the Hopf family.
pub fn hopf_determinant(p: &ChartPoint, spec: &ManifoldSpec) -> f64 {
    spec.fiber_scale() * PI * PI * p.a_factor(spec).powi(-(spec.n() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::random_points;

    fn point(spec: &ManifoldSpec, coords: &[f64]) -> ChartPoint {
        ChartPoint::new(spec, 0, coords.to_vec()).unwrap()
    }

    #[test]
    fn real_metric_sample_entries() {
        let spec = ManifoldSpec::hopf_surface(0.0).unwrap();
        let m = real_metric(&point(&spec, &[0.0, 0.0, 0.0, 1.0]), &spec).unwrap();
        assert!((m.g[(0, 0)] - PI * PI / 2.0).abs() < 1e-15);
        assert!((m.g[(0, 1)] + PI / 8.0).abs() < 1e-15);
        assert!((m.g[(1, 1)] - 5.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn surface_entries_and_determinant() {
        let spec = ManifoldSpec::hopf_surface(0.0).unwrap();
        let h = hermitian_metric(&point(&spec, &[0.3, 0.0, 0.8, 1.0]), &spec).unwrap();
        assert!((h.det_c - PI * PI / 4.0).abs() < 1e-14);
        let spec = ManifoldSpec::hopf_surface(0.6).unwrap();
        let h = hermitian_metric(&point(&spec, &[0.3, 0.0, 0.8, 0.0]), &spec).unwrap();
        assert!((h.g_c[(0, 0)].re - 1.36 * PI * PI).abs() < 1e-13);
        assert!(h.g_c[(0, 1)].norm() < 1e-15 && h.g_c[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn hermitian_is_exactly_hermitian() {
        for spec in [ManifoldSpec::hopf(4, 0.3).unwrap(), ManifoldSpec::calabi_eckmann(0.7).unwrap()] {
            for p in random_points(&spec, 3, 20, 2.0) {
                let g = hermitian_matrix(&p, &spec).unwrap();
                assert_eq!(g, g.adjoint());
            }
        }
    }

    #[test]
    fn three_fold_at_zero_epsilon_is_singular() {
        let spec = ManifoldSpec::calabi_eckmann(0.0).unwrap();
        let p = point(&spec, &[0.1, 0.4, 0.5, 0.2, -0.3, 0.7]);
        let h = hermitian_metric(&p, &spec).unwrap();
        assert_eq!(h.det_c, 0.0);
        assert_eq!(h.inverse().unwrap_err(), GeometryError::SingularMetric);
        let lu_det = h.g_c.clone().determinant().norm();
        assert!(lu_det < 1e-14, "numerical determinant {lu_det}");
        assert!(real_metric(&p, &spec).is_err());
    }

    #[test]
    fn real_inverse_matches_closed_form() {
        let spec = ManifoldSpec::hopf_surface(0.45).unwrap();
        let (x1, x3) = (0.7, -1.1);
        let m = real_metric(&point(&spec, &[0.2, x1, 0.9, x3]), &spec).unwrap();
        let c = spec.fiber_scale();
        let a = 1.0 + x1 * x1 + x3 * x3;
        let d = 1.0 / (4.0 * a) + (3.0 + 0.45 * 0.45 * (x1 * x1 + x3 * x3)) / (4.0 * a * a);
        let f = c * PI * PI;
        let u = c / 2.0 * PI * x3 / a;
        let v = c / 2.0 * PI * x1 / a;
        let closed = DMatrix::from_row_slice(4, 4, &[d, u, 0.0, v, u, f, -v, 0.0, 0.0, -v, d, u, v, 0.0, u, f])
            * (2.0 * a * a / (c * PI * PI));
        assert!((m.g_inv - closed).abs().max() < 1e-11);
    }

    #[test]
    fn fiber_directions_have_zero_partials() {
        let spec = ManifoldSpec::hopf(3, 0.8).unwrap();
        for p in random_points(&spec, 11, 10, 1.5) {
            let m = real_metric(&p, &spec).unwrap();
            for a in 0..6 {
                for b in 0..6 {
                    assert_eq!(m.dg.get(a, b, 0), 0.0);
                    assert_eq!(m.dg.get(a, b, 3), 0.0);
                }
            }
        }
    }

    #[test]
    fn fd_step_is_range_checked() {
        let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
        let p = point(&spec, &[0.0, 0.1, 0.0, 0.2]);
        assert!(fd_partials(&p, &spec, 1.0).is_err());
        assert!(fd_partials(&p, &spec, 1e-9).is_err());
    }
}
