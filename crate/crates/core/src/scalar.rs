//! Numeric scalar abstraction shared by plain reals and the jet types.
//!
//! Everything that has to be differentiated downstream (metric inverses,
//! Gram–Schmidt frames, projectors, Christoffel symbols) is written once
//! against [`Scalar`] and instantiated with `f64`, [`crate::expr::Jet2`] or
//! [`crate::taylor::Taylor`].

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Constant (zeroth-order) part.
    fn value(&self) -> f64;

    /// True when the scalar carries derivative information that a
    /// non-smooth operation at this value would corrupt.
    fn has_derivatives(&self) -> bool;

    fn scale(&self, k: f64) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn tanh(&self) -> Self;
    fn abs(&self) -> Self;
    /// Real power with a positive base.
    fn powf(&self, p: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn recip(&self) -> Self {
        Self::one() / self
    }

    /// Integer power by repeated squaring; exact for polynomials.
    fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = n as u32;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first { base.clone() } else { acc * &base };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn has_derivatives(&self) -> bool {
        false
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn tanh(&self) -> Self {
        f64::tanh(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
}

/// Univariate Taylor coefficients `f^(k)(x0) / k!` for `k = 0..=order`.
///
/// Used by both jet types to compose elementary functions.
pub(crate) fn taylor_coefficients(f: Elementary, x0: f64, order: usize) -> Vec<f64> {
    let mut c = vec![0.0; order + 1];
    match f {
        Elementary::Exp => {
            let e = x0.exp();
            let mut fact = 1.0;
            for (k, ck) in c.iter_mut().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                *ck = e / fact;
            }
        }
        Elementary::Sin | Elementary::Cos => {
            let (s, co) = x0.sin_cos();
            // derivatives of sin cycle through sin, cos, -sin, -cos
            let cycle = match f {
                Elementary::Sin => [s, co, -s, -co],
                _ => [co, -s, -co, s],
            };
            let mut fact = 1.0;
            for (k, ck) in c.iter_mut().enumerate() {
                if k > 0 {
                    fact *= k as f64;
                }
                *ck = cycle[k % 4] / fact;
            }
        }
        Elementary::Ln => {
            c[0] = x0.ln();
            for (k, ck) in c.iter_mut().enumerate().skip(1) {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                *ck = sign / (k as f64 * x0.powi(k as i32));
            }
        }
        Elementary::Pow(p) => {
            // generalized binomial coefficients
            let mut binom = 1.0;
            for (k, ck) in c.iter_mut().enumerate() {
                if k > 0 {
                    binom *= (p - (k as f64 - 1.0)) / k as f64;
                }
                *ck = binom * x0.powf(p - k as f64);
            }
        }
        Elementary::Recip => {
            for (k, ck) in c.iter_mut().enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                *ck = sign / x0.powi(k as i32 + 1);
            }
        }
    }
    c
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Elementary {
    Exp,
    Sin,
    Cos,
    Ln,
    Pow(f64),
    Recip,
}
