use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::{taylor_coefficients, Elementary, Scalar};

/// Second-order forward jet: value, gradient and symmetric Hessian.
///
/// Constants carry empty derivative arrays; [`Jet2::expand`] fills them in.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

impl Jet2 {
    pub fn constant(value: f64) -> Jet2 {
        Jet2 {
            value,
            gradient: Vec::new(),
            hessian: Vec::new(),
        }
    }

    pub fn variable(n: usize, i: usize, value: f64) -> Jet2 {
        let mut gradient = vec![0.0; n];
        gradient[i] = 1.0;
        Jet2 {
            value,
            gradient,
            hessian: vec![vec![0.0; n]; n],
        }
    }

    pub fn seed(point: &[f64]) -> Vec<Jet2> {
        let n = point.len();
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet2::variable(n, i, v))
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.gradient.is_empty()
    }

    /// Materializes zero derivatives for constants.
    pub fn expand(mut self, n: usize) -> Jet2 {
        if self.gradient.is_empty() {
            self.gradient = vec![0.0; n];
            self.hessian = vec![vec![0.0; n]; n];
        }
        self
    }

    fn dim(a: &Jet2, b: &Jet2) -> usize {
        a.gradient.len().max(b.gradient.len())
    }

    fn g(&self, i: usize) -> f64 {
        self.gradient.get(i).copied().unwrap_or(0.0)
    }

    fn h(&self, i: usize, j: usize) -> f64 {
        self.hessian.get(i).map_or(0.0, |r| r[j])
    }

    fn add_impl(&self, rhs: &Jet2, sign: f64) -> Jet2 {
        let n = Self::dim(self, rhs);
        if n == 0 {
            return Jet2::constant(self.value + sign * rhs.value);
        }
        let gradient = (0..n).map(|i| self.g(i) + sign * rhs.g(i)).collect();
        let hessian = (0..n)
            .map(|i| (0..n).map(|j| self.h(i, j) + sign * rhs.h(i, j)).collect())
            .collect();
        Jet2 {
            value: self.value + sign * rhs.value,
            gradient,
            hessian,
        }
    }

    fn mul_impl(&self, rhs: &Jet2) -> Jet2 {
        if rhs.is_constant() {
            return self.scale(rhs.value);
        }
        if self.is_constant() {
            return rhs.scale(self.value);
        }
        let n = Self::dim(self, rhs);
        let (a, b) = (self.value, rhs.value);
        let gradient = (0..n).map(|i| a * rhs.g(i) + b * self.g(i)).collect();
        let mut hessian = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = a * rhs.h(i, j)
                    + b * self.h(i, j)
                    + self.g(i) * rhs.g(j)
                    + self.g(j) * rhs.g(i);
                hessian[i][j] = v;
                hessian[j][i] = v;
            }
        }
        Jet2 {
            value: a * b,
            gradient,
            hessian,
        }
    }

    /// Chain rule with `f(u0)`, `f'(u0)`, `f''(u0)`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        if self.is_constant() {
            return Jet2::constant(f0);
        }
        let n = self.gradient.len();
        let gradient = self.gradient.iter().map(|g| f1 * g).collect();
        let mut hessian = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = f1 * self.hessian[i][j] + f2 * self.gradient[i] * self.gradient[j];
                hessian[i][j] = v;
                hessian[j][i] = v;
            }
        }
        Jet2 {
            value: f0,
            gradient,
            hessian,
        }
    }

    fn compose(&self, f: Elementary) -> Jet2 {
        let c = taylor_coefficients(f, self.value, 2);
        self.chain(c[0], c[1], 2.0 * c[2])
    }
}

impl Scalar for Jet2 {
    fn from_f64(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn value(&self) -> f64 {
        self.value
    }
    fn has_derivatives(&self) -> bool {
        !self.is_constant()
    }
    fn scale(&self, k: f64) -> Self {
        Jet2 {
            value: self.value * k,
            gradient: self.gradient.iter().map(|g| g * k).collect(),
            hessian: self
                .hessian
                .iter()
                .map(|r| r.iter().map(|h| h * k).collect())
                .collect(),
        }
    }
    fn sqrt(&self) -> Self {
        self.compose(Elementary::Pow(0.5))
    }
    fn sin(&self) -> Self {
        self.compose(Elementary::Sin)
    }
    fn cos(&self) -> Self {
        self.compose(Elementary::Cos)
    }
    fn tan(&self) -> Self {
        let t = self.value.tan();
        let s = 1.0 + t * t;
        self.chain(t, s, 2.0 * t * s)
    }
    fn exp(&self) -> Self {
        self.compose(Elementary::Exp)
    }
    fn ln(&self) -> Self {
        self.compose(Elementary::Ln)
    }
    fn tanh(&self) -> Self {
        let t = self.value.tanh();
        let s = 1.0 - t * t;
        self.chain(t, s, -2.0 * t * s)
    }
    fn abs(&self) -> Self {
        if self.value < 0.0 {
            self.scale(-1.0)
        } else {
            self.clone()
        }
    }
    fn powf(&self, p: f64) -> Self {
        self.compose(Elementary::Pow(p))
    }
    fn recip(&self) -> Self {
        self.compose(Elementary::Recip)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: Jet2) -> Jet2 {
                $body(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a Jet2> for Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &'a Jet2) -> Jet2 {
                $body(&self, rhs)
            }
        }
        impl<'a, 'b> $trait<&'b Jet2> for &'a Jet2 {
            type Output = Jet2;
            fn $method(self, rhs: &'b Jet2) -> Jet2 {
                $body(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Jet2, b: &Jet2| a.add_impl(b, 1.0));
forward_binop!(Sub, sub, |a: &Jet2, b: &Jet2| a.add_impl(b, -1.0));
forward_binop!(Mul, mul, |a: &Jet2, b: &Jet2| a.mul_impl(b));
forward_binop!(Div, div, |a: &Jet2, b: &Jet2| {
    if b.is_constant() {
        a.scale(1.0 / b.value)
    } else {
        a.mul_impl(&b.recip())
    }
});

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}
