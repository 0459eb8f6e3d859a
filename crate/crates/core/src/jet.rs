//! Second-order forward-mode jets: value, gradient and Hessian of a
//! scalar expression in the real chart coordinates.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    /// Row-major `dim × dim`, symmetric.
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, dim: usize) -> Self {
        Self { value, grad: vec![0.0; dim], hess: vec![0.0; dim * dim] }
    }

    /// The coordinate function `x_index`.
    pub fn variable(value: f64, index: usize, dim: usize) -> Self {
        let mut j = Self::constant(value, dim);
        j.grad[index] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    #[inline]
    pub fn d2(&self, k: usize, l: usize) -> f64 {
        self.hess[k * self.dim() + l]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            value: self.value * s,
            grad: self.grad.iter().map(|g| g * s).collect(),
            hess: self.hess.iter().map(|h| h * s).collect(),
        }
    }

    /// Apply a scalar function given its first two derivatives at `value`.
    fn chain(&self, f: f64, df: f64, d2f: f64) -> Self {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                hess[k * n + l] = df * self.hess[k * n + l] + d2f * self.grad[k] * self.grad[l];
            }
        }
        Self { value: f, grad: self.grad.iter().map(|g| df * g).collect(), hess }
    }

    pub fn recip(&self) -> Self {
        let v = self.value;
        self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }

    pub fn square(&self) -> Self {
        self * self
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a + b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet {
            value: self.value - o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a - b).collect(),
            hess: self.hess.iter().zip(&o.hess).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                hess[k * n + l] = self.hess[k * n + l] * o.value
                    + self.value * o.hess[k * n + l]
                    + self.grad[k] * o.grad[l]
                    + self.grad[l] * o.grad[k];
            }
        }
        Jet {
            value: self.value * o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a * o.value + self.value * b).collect(),
            hess,
        }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                (&self).$m(&o)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, o: &Jet) -> Jet {
                (&self).$m(o)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, o: Jet) -> Jet {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
