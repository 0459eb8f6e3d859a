//! Variation fields over a torus fiber, stored as Fourier coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{GeometryError, Result};
use crate::sampling::stream;

/// `a(x₀, x_n) = Σ c(m,k) e^{2πi(m x₀ + k x_n)}` with `c(−m,−k) = conj c(m,k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationField {
    dim: usize,
    cap: i32,
    modes: BTreeMap<(i32, i32), Vec<Complex64>>,
}

const REALITY_TOL: f64 = 1e-14;

impl VariationField {
    pub fn new(dim: usize, cap: i32, modes: BTreeMap<(i32, i32), Vec<Complex64>>) -> Result<Self> {
        for (&(m, k), c) in &modes {
            if m.abs() > cap || k.abs() > cap {
                return Err(GeometryError::ModeCapExceeded { m, k, cap });
            }
            if c.len() != dim {
                return Err(GeometryError::CoordinateLength { expected: dim, got: c.len() });
            }
            let zero = vec![Complex64::new(0.0, 0.0); dim];
            let partner = modes.get(&(-m, -k)).unwrap_or(&zero);
            if c.iter().zip(partner).any(|(a, b)| (a - b.conj()).norm() > REALITY_TOL * (1.0 + a.norm())) {
                return Err(GeometryError::RealityViolated { m, k });
            }
        }
        Ok(Self { dim, cap, modes })
    }

    pub fn zero(dim: usize, cap: i32) -> Self {
        Self { dim, cap, modes: BTreeMap::new() }
    }

    /// Constant field with the given real components.
    pub fn constant(values: &[f64], cap: i32) -> Self {
        let mut modes = BTreeMap::new();
        modes.insert((0, 0), values.iter().map(|&v| Complex64::new(v, 0.0)).collect());
        Self { dim: values.len(), cap, modes }
    }

    /// Add `c e^{2πi(m x₀ + k x_n)}` plus its conjugate partner.
    pub fn add_mode(&mut self, m: i32, k: i32, c: &[Complex64]) -> Result<()> {
        if m.abs() > self.cap || k.abs() > self.cap {
            return Err(GeometryError::ModeCapExceeded { m, k, cap: self.cap });
        }
        if c.len() != self.dim {
            return Err(GeometryError::CoordinateLength { expected: self.dim, got: c.len() });
        }
        let zero = vec![Complex64::new(0.0, 0.0); self.dim];
        if (m, k) == (0, 0) {
            let e = self.modes.entry((0, 0)).or_insert_with(|| zero.clone());
            for (a, b) in e.iter_mut().zip(c) {
                *a += b.re;
            }
            return Ok(());
        }
        let e = self.modes.entry((m, k)).or_insert_with(|| zero.clone());
        for (a, b) in e.iter_mut().zip(c) {
            *a += b;
        }
        let e = self.modes.entry((-m, -k)).or_insert(zero);
        for (a, b) in e.iter_mut().zip(c) {
            *a += b.conj();
        }
        Ok(())
    }

    /// Field built from a single real mode.
    pub fn single_mode(dim: usize, cap: i32, m: i32, k: i32, c: &[Complex64]) -> Result<Self> {
        let mut f = Self::zero(dim, cap);
        f.add_mode(m, k, c)?;
        Ok(f)
    }

    /// Random field with every mode up to the cap populated, reproducible
    /// from `(seed, index)`.
    pub fn random(dim: usize, cap: i32, seed: u64, index: u64) -> Self {
        let mut rng = stream(seed, index);
        let mut f = Self::zero(dim, cap);
        for m in 0..=cap {
            for k in -cap..=cap {
                if m == 0 && k < 0 {
                    continue;
                }
                let decay = 1.0 / (1.0 + (m * m + k * k) as f64);
                let c: Vec<Complex64> = (0..dim)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay)
                    .collect();
                f.add_mode(m, k, &c).expect("modes within the cap");
            }
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> i32 {
        self.cap
    }

    pub fn modes(&self) -> &BTreeMap<(i32, i32), Vec<Complex64>> {
        &self.modes
    }

    /// Largest |m| or |k| actually present.
    pub fn highest_mode(&self) -> i32 {
        self.modes.keys().map(|&(m, k)| m.abs().max(k.abs())).max().unwrap_or(0)
    }

    fn sum(&self, x0: f64, xn: f64, weight: impl Fn(i32, i32) -> Complex64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&(m, k), c) in &self.modes {
            let phase = Complex64::from_polar(1.0, 2.0 * PI * (m as f64 * x0 + k as f64 * xn)) * weight(m, k);
            for (o, ci) in out.iter_mut().zip(c) {
                *o += (ci * phase).re;
            }
        }
        out
    }

    pub fn value(&self, x0: f64, xn: f64) -> Vec<f64> {
        self.sum(x0, xn, |_, _| Complex64::new(1.0, 0.0))
    }

    /// `∂a/∂x₀`.
    pub fn d_fiber0(&self, x0: f64, xn: f64) -> Vec<f64> {
        self.sum(x0, xn, |m, _| Complex64::new(0.0, 2.0 * PI * m as f64))
    }

    /// `∂a/∂x_n`.
    pub fn d_fiber1(&self, x0: f64, xn: f64) -> Vec<f64> {
        self.sum(x0, xn, |_, k| Complex64::new(0.0, 2.0 * PI * k as f64))
    }
}

#[derive(Serialize)]
struct ModeEntry {
    m: i32,
    k: i32,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for VariationField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            cap: i32,
            modes: Vec<ModeEntry>,
        }
        let modes = self
            .modes
            .iter()
            .map(|(&(m, k), c)| ModeEntry {
                m,
                k,
                re: c.iter().map(|z| z.re).collect(),
                im: c.iter().map(|z| z.im).collect(),
            })
            .collect();
        Repr { dim: self.dim, cap: self.cap, modes }.serialize(s)
    }
}
