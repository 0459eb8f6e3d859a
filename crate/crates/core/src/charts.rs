//! Coordinate charts, the sphere embeddings and chart transitions.
//!
//! Real coordinates are ordered so that complex coordinate `j` is
//! `w_j = x_j + i x_{j+n}` with `n` the complex dimension of the chart.
//! `w_0` is the torus fiber coordinate. For the Hopf manifolds the base
//! coordinates are `w_1..w_{n-1}`; for the Calabi-Eckmann 3-fold `w_1`
//! belongs to the first sphere and `w_2` to the second.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

/// Which manifold family a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// S³×S¹.
    HopfSurface,
    /// S³×S³ with the Calabi-Eckmann complex structure.
    CalabiEckmann3Fold,
    /// S^(2n-1)×S¹.
    HopfGeneral(usize),
}

/// Family plus the metric parameter epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub family: Family,
    pub epsilon: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(GeometryError::InvalidEpsilon(epsilon))
    }
}

impl ManifoldSpec {
    pub fn new(family: Family, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if let Family::HopfGeneral(n) = family {
            if n < 2 {
                return Err(GeometryError::InvalidDimension(format!("n must be at least 2, got {n}")));
            }
        }
        Ok(Self { family, epsilon })
    }

    pub fn hopf_surface(epsilon: f64) -> Result<Self> {
        Self::new(Family::HopfSurface, epsilon)
    }

    /// S^(2n-1)×S¹; `n = 2` gives the surface.
    pub fn hopf(n: usize, epsilon: f64) -> Result<Self> {
        if n == 2 {
            Self::hopf_surface(epsilon)
        } else {
            Self::new(Family::HopfGeneral(n), epsilon)
        }
    }

    pub fn calabi_eckmann(epsilon: f64) -> Result<Self> {
        Self::new(Family::CalabiEckmann3Fold, epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.family, epsilon)
    }

    /// Complex dimension of a chart.
    pub fn n(&self) -> usize {
        match self.family {
            Family::HopfSurface => 2,
            Family::CalabiEckmann3Fold => 3,
            Family::HopfGeneral(n) => n,
        }
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n()
    }

    pub fn is_hopf(&self) -> bool {
        !matches!(self.family, Family::CalabiEckmann3Fold)
    }

    /// Number of charts `V_α0`.
    pub fn chart_count(&self) -> usize {
        match self.family {
            Family::CalabiEckmann3Fold => 2,
            _ => self.n(),
        }
    }

    /// The factor 1 + ε² that scales the fiber block.
    pub fn fiber_scale(&self) -> f64 {
        1.0 + self.epsilon * self.epsilon
    }

    /// Real coordinate indices contributing to `A`.
    pub fn a_indices(&self) -> Vec<usize> {
        let n = self.n();
        match self.family {
            Family::CalabiEckmann3Fold => vec![1, 1 + n],
            _ => (1..n).flat_map(|j| [j, j + n]).collect(),
        }
    }

    /// Real coordinate indices contributing to `B` (3-fold only).
    pub fn b_indices(&self) -> Vec<usize> {
        match self.family {
            Family::CalabiEckmann3Fold => vec![2, 5],
            _ => Vec::new(),
        }
    }
}

/// A point given by chart index α (chart `V_α0`) and real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(spec: &ManifoldSpec, chart: usize, coords: Vec<f64>) -> Result<Self> {
        if chart >= spec.chart_count() {
            return Err(GeometryError::InvalidChart { chart, charts: spec.chart_count() });
        }
        if coords.len() != spec.real_dim() {
            return Err(GeometryError::CoordinateLength { expected: spec.real_dim(), got: coords.len() });
        }
        Ok(Self { chart, coords })
    }

    /// Chart-0 point on the fiber over the given base coordinates,
    /// with fiber coordinate zero.
    pub fn from_base(spec: &ManifoldSpec, base: &[Complex64]) -> Result<Self> {
        let n = spec.n();
        if base.len() != n - 1 {
            return Err(GeometryError::CoordinateLength { expected: n - 1, got: base.len() });
        }
        let mut coords = vec![0.0; 2 * n];
        for (j, w) in base.iter().enumerate() {
            coords[j + 1] = w.re;
            coords[j + 1 + n] = w.im;
        }
        Self::new(spec, 0, coords)
    }

    fn n(&self) -> usize {
        self.coords.len() / 2
    }

    /// Complex coordinate `w_j`.
    pub fn w(&self, j: usize) -> Complex64 {
        let n = self.n();
        Complex64::new(self.coords[j], self.coords[j + n])
    }

    /// Base coordinates `(w_1, …, w_{n-1})`.
    pub fn base(&self) -> Vec<Complex64> {
        (1..self.n()).map(|j| self.w(j)).collect()
    }

    pub fn a_factor(&self, spec: &ManifoldSpec) -> f64 {
        1.0 + spec.a_indices().iter().map(|&i| self.coords[i] * self.coords[i]).sum::<f64>()
    }

    pub fn b_factor(&self, spec: &ManifoldSpec) -> f64 {
        1.0 + spec.b_indices().iter().map(|&i| self.coords[i] * self.coords[i]).sum::<f64>()
    }

    /// Same point with the fiber coordinate reduced into [0,1)².
    pub fn reduced(&self) -> Self {
        let n = self.n();
        let mut out = self.clone();
        out.coords[0] = out.coords[0].rem_euclid(1.0);
        out.coords[n] = out.coords[n].rem_euclid(1.0);
        // rem_euclid can return 1.0 for tiny negative inputs
        for i in [0, n] {
            if out.coords[i] >= 1.0 {
                out.coords[i] -= 1.0;
            }
        }
        out
    }

    /// Coordinate distance with the fiber part compared modulo the lattice.
    pub fn distance_mod_lattice(&self, other: &Self) -> f64 {
        let n = self.n();
        self.coords
            .iter()
            .zip(&other.coords)
            .enumerate()
            .map(|(i, (a, b))| {
                let d = a - b;
                if i == 0 || i == n {
                    (d - d.round()).abs()
                } else {
                    d.abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Point of the ambient sphere product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbientPoint {
    pub z: Vec<Complex64>,
    pub zprime: Vec<Complex64>,
}

impl AmbientPoint {
    /// Largest violation of the unit-sphere constraints.
    pub fn sphere_residual(&self) -> f64 {
        let nz: f64 = self.z.iter().map(|c| c.norm_sqr()).sum();
        let nzp: f64 = self.zprime.iter().map(|c| c.norm_sqr()).sum();
        (nz - 1.0).abs().max((nzp - 1.0).abs())
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.z
            .iter()
            .zip(&other.z)
            .chain(self.zprime.iter().zip(&other.zprime))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn unit_phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// Map a chart point to the ambient spheres.
pub fn embed(p: &ChartPoint, spec: &ManifoldSpec) -> Result<AmbientPoint> {
    let p = ChartPoint::new(spec, p.chart, p.coords.clone())?;
    let n = spec.n();
    let a = p.a_factor(spec);
    let x0 = p.coords[0];
    let xn = p.coords[n];
    match spec.family {
        Family::CalabiEckmann3Fold => {
            let b = p.b_factor(spec);
            let za = unit_phase(2.0 * PI * x0 + 0.5 * b.ln()) / a.sqrt();
            let zp0 = unit_phase(2.0 * PI * xn - 0.5 * a.ln()) / b.sqrt();
            let mut z = vec![Complex64::new(0.0, 0.0); 2];
            z[p.chart] = za;
            z[1 - p.chart] = za * p.w(1);
            Ok(AmbientPoint { z, zprime: vec![zp0, zp0 * p.w(2)] })
        }
        _ => {
            let za = unit_phase(2.0 * PI * x0) / a.sqrt();
            let mut z = Vec::with_capacity(n);
            let mut base = p.base().into_iter();
            for j in 0..n {
                if j == p.chart {
                    z.push(za);
                } else {
                    z.push(za * base.next().expect("n-1 base coordinates"));
                }
            }
            let zp0 = unit_phase(2.0 * PI * xn - 0.5 * a.ln());
            Ok(AmbientPoint { z, zprime: vec![zp0] })
        }
    }
}

/// Inverse of [`embed`] into chart `chart`, principal log branch.
pub fn chart_of(q: &AmbientPoint, spec: &ManifoldSpec, chart: usize) -> Result<ChartPoint> {
    if chart >= spec.chart_count() {
        return Err(GeometryError::InvalidChart { chart, charts: spec.chart_count() });
    }
    let n = spec.n();
    let za = q.z[chart];
    if za.norm() < 1e-12 {
        return Err(GeometryError::OutsideOverlap(chart));
    }
    let zp0 = q.zprime[0];
    let mut coords = vec![0.0; 2 * n];
    // t = (log z_α + i log z'_0) / (2πi)
    coords[0] = (za.arg() + zp0.norm().ln()) / (2.0 * PI);
    coords[n] = (zp0.arg() - za.norm().ln()) / (2.0 * PI);
    let ratios: Vec<Complex64> =
        q.z.iter().enumerate().filter(|&(j, _)| j != chart).map(|(_, z)| z / za).collect();
    for (j, w) in ratios.iter().enumerate() {
        coords[j + 1] = w.re;
        coords[j + 1 + n] = w.im;
    }
    if let Family::CalabiEckmann3Fold = spec.family {
        if zp0.norm() < 1e-12 {
            return Err(GeometryError::OutsideOverlap(chart));
        }
        let w2 = q.zprime[1] / zp0;
        coords[2] = w2.re;
        coords[2 + n] = w2.im;
    }
    Ok(ChartPoint { chart, coords }.reduced())
}

/// Re-express `p` in chart `target`.
pub fn chart_transition(p: &ChartPoint, spec: &ManifoldSpec, target: usize) -> Result<ChartPoint> {
    chart_of(&embed(p, spec)?, spec, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_embeds_to_north_pole() {
        let spec = ManifoldSpec::hopf_surface(0.3).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.0; 4]).unwrap();
        let q = embed(&p, &spec).unwrap();
        assert!(q.distance(&AmbientPoint { z: vec![c(1.0, 0.0), c(0.0, 0.0)], zprime: vec![c(1.0, 0.0)] }) < 1e-15);
    }

    #[test]
    fn w1_equal_i() {
        let spec = ManifoldSpec::hopf_surface(0.0).unwrap();
        let p = ChartPoint::from_base(&spec, &[c(0.0, 1.0)]).unwrap();
        let q = embed(&p, &spec).unwrap();
        let s = 0.5_f64.sqrt();
        assert!((q.z[0] - c(s, 0.0)).norm() < 1e-15);
        assert!((q.z[1] - c(0.0, s)).norm() < 1e-15);
        let expected = Complex64::from_polar(1.0, -0.5 * 2.0_f64.ln());
        assert!((q.zprime[0] - expected).norm() < 1e-15);
        assert!(q.sphere_residual() < 1e-15);
    }

    #[test]
    fn transition_round_trip() {
        let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.2, 1.0, 0.7, 0.0]).unwrap();
        let q = chart_transition(&p, &spec, 1).unwrap();
        assert!((q.w(1) - c(1.0, 0.0)).norm() < 1e-12);
        let back = chart_transition(&q, &spec, 0).unwrap();
        assert!(back.distance_mod_lattice(&p) < 1e-12);
    }

    #[test]
    fn zero_denominator_is_outside_overlap() {
        let spec = ManifoldSpec::hopf_surface(0.5).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.2, 0.0, 0.7, 0.0]).unwrap();
        assert_eq!(chart_transition(&p, &spec, 1), Err(GeometryError::OutsideOverlap(1)));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(ManifoldSpec::hopf_surface(1.25), Err(GeometryError::InvalidEpsilon(_))));
        assert!(ManifoldSpec::hopf(1, 0.5).is_err());
        let spec = ManifoldSpec::hopf(3, 0.5).unwrap();
        assert!(ChartPoint::new(&spec, 3, vec![0.0; 6]).is_err());
        assert!(ChartPoint::new(&spec, 0, vec![0.0; 4]).is_err());
    }

    #[test]
    fn lattice_shift_does_not_move_the_embedding() {
        let spec = ManifoldSpec::hopf(3, 0.2).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.3, 0.4, -0.1, 0.9, 0.2, 0.5]).unwrap();
        let mut shifted = p.clone();
        shifted.coords[0] += 2.0;
        shifted.coords[3] -= 1.0;
        let d = embed(&p, &spec).unwrap().distance(&embed(&shifted, &spec).unwrap());
        assert!(d < 1e-13);
    }

    #[test]
    fn three_fold_embedding_satisfies_both_sphere_constraints() {
        let spec = ManifoldSpec::calabi_eckmann(0.4).unwrap();
        let p = ChartPoint::new(&spec, 0, vec![0.1, 0.5, -1.2, 0.8, 0.3, 0.6]).unwrap();
        let q = embed(&p, &spec).unwrap();
        assert!(q.sphere_residual() < 1e-14);
        let r = chart_of(&q, &spec, 0).unwrap();
        assert!(r.distance_mod_lattice(&p) < 1e-12);
        let other = chart_transition(&p, &spec, 1).unwrap();
        assert!(embed(&other, &spec).unwrap().distance(&q) < 1e-12);
    }
}
