//! Levi-Civita connection and Riemann tensor of the real metric.
//!
//! Sign convention:
//! `R_ijkl = −½(g_ik,jl + g_jl,ik − g_jk,il − g_il,jk) − Γ^p_ik Γ^q_jl g_pq + Γ^p_jk Γ^q_il g_pq`,
//! so that `R_ijij` is the sectional curvature numerator (positive on a round sphere).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::arrays::{Array3, Array4};
use crate::charts::{ChartPoint, ManifoldSpec};
use crate::error::{GeometryError, Result};
use crate::metrics::{real_metric, RealMetricAtPoint};

/// Christoffel symbols and curvature at a point.
#[derive(Debug, Clone)]
pub struct ConnectionAndCurvature {
    /// `gamma.get(p, i, j) = Γ^p_ij`.
    pub gamma: Array3,
    /// `riemann.get(i, j, k, l) = R_ijkl`.
    pub riemann: Array4,
}

/// Metric, connection and curvature together.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub metric: RealMetricAtPoint,
    pub curvature: ConnectionAndCurvature,
}

impl PointGeometry {
    pub fn at(p: &ChartPoint, spec: &ManifoldSpec) -> Result<Self> {
        let metric = real_metric(p, spec)?;
        let gamma = christoffel_from(&metric.g_inv, &metric.dg);
        let riemann = riemann_from(&metric.g, &metric.d2g, &gamma);
        Ok(Self { metric, curvature: ConnectionAndCurvature { gamma, riemann } })
    }

    pub fn dim(&self) -> usize {
        self.metric.g.nrows()
    }

    pub fn gamma(&self) -> &Array3 {
        &self.curvature.gamma
    }

    pub fn riemann(&self) -> &Array4 {
        &self.curvature.riemann
    }
}

/// `Γ^p_ij = ½ g^pq (g_iq,j + g_jq,i − g_ij,q)` from an inverse metric and first partials.
pub fn christoffel_from(g_inv: &DMatrix<f64>, dg: &Array3) -> Array3 {
    let d = dg.dim;
    // first kind: Γ_{q;ij}
    let mut first = Array3::zeros(d);
    for q in 0..d {
        for i in 0..d {
            for j in i..d {
                let v = 0.5 * (dg.get(i, q, j) + dg.get(j, q, i) - dg.get(i, j, q));
                first.set(q, i, j, v);
                first.set(q, j, i, v);
            }
        }
    }
    let mut gamma = Array3::zeros(d);
    for p in 0..d {
        for i in 0..d {
            for j in i..d {
                let v: f64 = (0..d).map(|q| g_inv[(p, q)] * first.get(q, i, j)).sum();
                gamma.set(p, i, j, v);
                gamma.set(p, j, i, v);
            }
        }
    }
    gamma
}

/// Riemann tensor from the metric, its second partials and the connection.
pub fn riemann_from(g: &DMatrix<f64>, d2g: &Array4, gamma: &Array3) -> Array4 {
    let d = gamma.dim;
    // lowered: low.get(q, j, l) = g_qp Γ^p_jl
    let mut low = Array3::zeros(d);
    for q in 0..d {
        for j in 0..d {
            for l in 0..d {
                low.set(q, j, l, (0..d).map(|p| g[(q, p)] * gamma.get(p, j, l)).sum());
            }
        }
    }
    let quad = |i: usize, k: usize, j: usize, l: usize| -> f64 {
        (0..d).map(|p| gamma.get(p, i, k) * low.get(p, j, l)).sum()
    };
    let mut r = Array4::zeros(d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let second = d2g.get(i, k, j, l) + d2g.get(j, l, i, k) - d2g.get(j, k, i, l) - d2g.get(i, l, j, k);
                    r.set(i, j, k, l, -0.5 * second - quad(i, k, j, l) + quad(j, k, i, l));
                }
            }
        }
    }
    r
}

pub fn christoffel(p: &ChartPoint, spec: &ManifoldSpec) -> Result<Array3> {
    let m = real_metric(p, spec)?;
    Ok(christoffel_from(&m.g_inv, &m.dg))
}

pub fn riemann(p: &ChartPoint, spec: &ManifoldSpec) -> Result<Array4> {
    Ok(PointGeometry::at(p, spec)?.curvature.riemann)
}

/// Evaluate `R(a, b, c, d)` on complex vectors, multilinearly.
pub fn riemann_multilinear(r: &Array4, a: &[Complex64], b: &[Complex64], c: &[Complex64], d: &[Complex64]) -> Complex64 {
    let n = r.dim;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let ab = a[i] * b[j];
            if ab == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    acc += ab * c[k] * d[l] * r.get(i, j, k, l);
                }
            }
        }
    }
    acc
}

/// `R(∂w₀, ∂w₁, ∂w̄₀, ∂w̄₁)` on the surface, assembled from real components
/// as `R0101 + R0303 + R2121 + R2323 − 2 R0213` (real indices 0..3 with
/// `w₀ = x₀ + i x₂`, `w₁ = x₁ + i x₃`).
pub fn complex_curvature(p: &ChartPoint, spec: &ManifoldSpec) -> Result<f64> {
    if spec.n() != 2 || !spec.is_hopf() {
        return Err(GeometryError::PreconditionViolated("complex curvature is defined for the Hopf surface".into()));
    }
    Ok(complex_curvature_from(&riemann(p, spec)?))
}

pub fn complex_curvature_from(r: &Array4) -> f64 {
    r.get(0, 1, 0, 1) + r.get(0, 3, 0, 3) + r.get(2, 1, 2, 1) + r.get(2, 3, 2, 3) - 2.0 * r.get(0, 2, 1, 3)
}

/// `(∇θ)_ij = ∂_i θ_j − Γ^p_ij θ_p`, with `dtheta[(i, j)] = ∂_i θ_j`.
pub fn covariant_derivative_of_oneform(
    p: &ChartPoint,
    spec: &ManifoldSpec,
    theta: &[f64],
    dtheta: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let gamma = christoffel(p, spec)?;
    Ok(covariant_derivative_from(&gamma, theta, dtheta))
}

pub fn covariant_derivative_from(gamma: &Array3, theta: &[f64], dtheta: &DMatrix<f64>) -> DMatrix<f64> {
    let d = gamma.dim;
    DMatrix::from_fn(d, d, |i, j| dtheta[(i, j)] - (0..d).map(|p| gamma.get(p, i, j) * theta[p]).sum::<f64>())
}

/// Largest violation of the Riemann symmetries and first Bianchi identity.
pub fn symmetry_residual(r: &Array4) -> f64 {
    let d = r.dim;
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let v = r.get(i, j, k, l);
                    worst = worst
                        .max((v + r.get(j, i, k, l)).abs())
                        .max((v + r.get(i, j, l, k)).abs())
                        .max((v - r.get(k, l, i, j)).abs())
                        .max((v + r.get(j, k, i, l) + r.get(k, i, j, l)).abs());
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_sphere_has_positive_sectional_curvature() {
        // stereographic metric 4/(1+|x|²)² δ on R², curvature +1
        let (x, y) = (0.3, -0.4);
        let s = 1.0 + x * x + y * y;
        let f = |x: f64, y: f64| 4.0 / (1.0 + x * x + y * y).powi(2);
        let h = 1e-4;
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h);
        let g = DMatrix::from_diagonal_element(2, 2, f(x, y));
        let g_inv = DMatrix::from_diagonal_element(2, 2, 1.0 / f(x, y));
        let mut dg = Array3::zeros(2);
        let mut d2g = Array4::zeros(2);
        for i in 0..2 {
            dg.set(i, i, 0, fx);
            dg.set(i, i, 1, fy);
            d2g.set(i, i, 0, 0, fxx);
            d2g.set(i, i, 1, 1, fyy);
            d2g.set(i, i, 0, 1, fxy);
            d2g.set(i, i, 1, 0, fxy);
        }
        let gamma = christoffel_from(&g_inv, &dg);
        let r = riemann_from(&g, &d2g, &gamma);
        let sectional = r.get(0, 1, 0, 1) / (g[(0, 0)] * g[(1, 1)]);
        assert!((sectional - 1.0).abs() < 1e-6, "K = {sectional}, conformal factor {}", 4.0 / (s * s));
    }

    #[test]
    fn complex_curvature_sample_value() {
        let spec = ManifoldSpec::hopf_surface(0.0).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let v = complex_curvature(&p, &spec).unwrap();
        assert!((v - PI * PI / 16.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn complex_curvature_requires_surface() {
        let spec = ManifoldSpec::hopf(3, 0.0).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.0; 6]).unwrap();
        assert!(matches!(complex_curvature(&p, &spec), Err(GeometryError::PreconditionViolated(_))));
    }

    #[test]
    fn constant_form_with_vanishing_connection_term() {
        // At w1 = 0 every Γ^p_{0j} and Γ^p_{2j} vanishes, so the fiber rows of ∇θ vanish.
        let spec = ManifoldSpec::hopf_surface(0.4).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.5, 0.0, 0.25, 0.0]).unwrap();
        let theta = [1.0, 0.0, 0.0, 0.0];
        let nabla = covariant_derivative_of_oneform(&p, &spec, &theta, &DMatrix::zeros(4, 4)).unwrap();
        for i in [0, 2] {
            assert!(nabla.row(i).abs().max() < 1e-15);
        }
        assert!(nabla.abs().max() > 0.1);
    }
}
