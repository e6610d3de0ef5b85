//! Truncated multivariate Taylor polynomials of runtime order.
//!
//! A [`Taylor`] holds the coefficients `∂^α f / α!` of a field around the
//! evaluation point for every multi-index `|α| ≤ order`. Differentiation
//! ([`Taylor::partial`]) drops the order by one, so a field seeded at order
//! three still yields exact values for quantities that differentiate it
//! three times (fiber curvature of jet frames, divergences of O'Neill
//! tensors).

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use crate::scalar::{taylor_coefficients, Elementary, Scalar};

/// Monomial bookkeeping for a fixed (dimension, maximal order) pair.
pub struct Layout {
    dim: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    /// First monomial index of each degree; `deg_start[k+1]` ends degree k.
    deg_start: Vec<usize>,
    /// `(a, b, out)` sorted by output degree.
    mul_table: Vec<(u32, u32, u32)>,
    /// `mul_end[k]` = number of table entries with output degree ≤ k.
    mul_end: Vec<usize>,
    /// Per variable: `(target, source, factor)` for `∂_i`.
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let mut monomials: Vec<Vec<u8>> = Vec::new();
        let mut deg_start = Vec::with_capacity(order + 2);
        for deg in 0..=order {
            deg_start.push(monomials.len());
            let mut current = vec![0u8; dim];
            push_compositions(&mut monomials, &mut current, 0, deg);
        }
        deg_start.push(monomials.len());

        let index: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let degree = |m: &[u8]| m.iter().map(|&v| v as usize).sum::<usize>();

        let mut mul_table = Vec::new();
        for (ia, a) in monomials.iter().enumerate() {
            for (ib, b) in monomials.iter().enumerate() {
                if degree(a) + degree(b) > order {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                mul_table.push((ia as u32, ib as u32, index[&sum] as u32));
            }
        }
        mul_table.sort_by_key(|&(_, _, o)| degree(&monomials[o as usize]));
        let mut mul_end = vec![0; order + 1];
        for (k, end) in mul_end.iter_mut().enumerate() {
            *end = mul_table
                .iter()
                .take_while(|&&(_, _, o)| degree(&monomials[o as usize]) <= k)
                .count();
        }

        let mut deriv = vec![Vec::new(); dim];
        for (i, d) in deriv.iter_mut().enumerate() {
            for (it, m) in monomials.iter().enumerate() {
                if degree(m) + 1 > order {
                    continue;
                }
                let mut src = m.clone();
                src[i] += 1;
                d.push((it as u32, index[&src] as u32, src[i] as f64));
            }
        }

        Layout {
            dim,
            order,
            monomials,
            deg_start,
            mul_table,
            mul_end,
            deriv,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    fn len_upto(&self, k: usize) -> usize {
        self.deg_start[k.min(self.order) + 1]
    }

    /// Index of the multi-index `alpha`, if it is within the layout.
    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.monomials.iter().position(|m| m.as_slice() == alpha)
    }

    /// Shared layout for `(dim, order)`; layouts are built once per process.
    pub fn get(dim: usize, order: usize) -> &'static Layout {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), &'static Layout>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((dim, order))
            .or_insert_with(|| Box::leak(Box::new(Layout::build(dim, order))))
    }
}

fn push_compositions(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos + 1 == current.len() {
        current[pos] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k as u8;
        push_compositions(out, current, pos + 1, remaining - k);
    }
    current[pos] = 0;
}

/// Order marker for layout-free constants.
const CONST_ORDER: u8 = u8::MAX;

#[derive(Clone)]
pub struct Taylor {
    layout: Option<&'static Layout>,
    order: u8,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Taylor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.layout.is_none() {
            return write!(f, "Taylor(const {})", self.coeffs[0]);
        }
        write!(f, "Taylor(order {}, {:?})", self.order, &self.coeffs[..self.live_len()])
    }
}

impl Taylor {
    pub fn constant(v: f64) -> Taylor {
        Taylor {
            layout: None,
            order: CONST_ORDER,
            coeffs: vec![v],
        }
    }

    /// Coordinate function `x_i` expanded around `value`.
    pub fn variable(layout: &'static Layout, i: usize, value: f64) -> Taylor {
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        if layout.order >= 1 {
            coeffs[1 + i] = 1.0;
        }
        Taylor {
            layout: Some(layout),
            order: layout.order as u8,
            coeffs,
        }
    }

    /// Seeds every coordinate of `point` at the given order.
    pub fn seed(point: &[f64], order: usize) -> Vec<Taylor> {
        let layout = Layout::get(point.len(), order);
        point
            .iter()
            .enumerate()
            .map(|(i, &v)| Taylor::variable(layout, i, v))
            .collect()
    }

    pub fn is_constant(&self) -> bool {
        self.layout.is_none()
    }

    /// Truncation order; `usize::MAX` for layout-free constants.
    pub fn order(&self) -> usize {
        if self.layout.is_none() {
            usize::MAX
        } else {
            self.order as usize
        }
    }

    fn live_len(&self) -> usize {
        match self.layout {
            None => 1,
            Some(l) => l.len_upto(self.order as usize),
        }
    }

    /// Taylor coefficient of the multi-index `alpha` (zero if truncated).
    pub fn coefficient(&self, alpha: &[u8]) -> f64 {
        match self.layout {
            None => {
                if alpha.iter().all(|&a| a == 0) {
                    self.coeffs[0]
                } else {
                    0.0
                }
            }
            Some(l) => {
                let deg: usize = alpha.iter().map(|&a| a as usize).sum();
                if deg > self.order as usize {
                    return 0.0;
                }
                l.index_of(alpha).map_or(0.0, |i| self.coeffs[i])
            }
        }
    }

    /// First partial derivative `∂f/∂x_i`, available when `order ≥ 1`.
    pub fn gradient(&self, i: usize) -> f64 {
        match self.layout {
            None => 0.0,
            Some(_) => {
                assert!(self.order >= 1, "gradient of an order-0 jet");
                self.coeffs[1 + i]
            }
        }
    }

    /// `∂/∂x_i`; the result has one order less.
    pub fn partial(&self, i: usize) -> Taylor {
        let Some(l) = self.layout else {
            return Taylor::constant(0.0);
        };
        assert!(self.order >= 1, "differentiating an order-0 jet");
        let new_order = self.order - 1;
        let mut coeffs = vec![0.0; l.len()];
        let limit = l.len_upto(new_order as usize);
        for &(t, s, f) in &l.deriv[i] {
            if (t as usize) < limit {
                coeffs[t as usize] = f * self.coeffs[s as usize];
            }
        }
        Taylor {
            layout: Some(l),
            order: new_order,
            coeffs,
        }
    }

    /// Keep only terms up to `order`.
    pub fn truncate(&self, order: usize) -> Taylor {
        let Some(l) = self.layout else {
            return self.clone();
        };
        if order >= self.order as usize {
            return self.clone();
        }
        let mut out = self.clone();
        for c in out.coeffs[l.len_upto(order)..].iter_mut() {
            *c = 0.0;
        }
        out.order = order as u8;
        out
    }

    fn binary_layout(a: &Taylor, b: &Taylor) -> Option<&'static Layout> {
        match (a.layout, b.layout) {
            (Some(l), Some(m)) => {
                debug_assert!(std::ptr::eq(l, m), "mixing jets of different layouts");
                Some(l)
            }
            (Some(l), None) | (None, Some(l)) => Some(l),
            (None, None) => None,
        }
    }

    fn add_impl(&self, rhs: &Taylor, sign: f64) -> Taylor {
        match Self::binary_layout(self, rhs) {
            None => Taylor::constant(self.coeffs[0] + sign * rhs.coeffs[0]),
            Some(l) => {
                let order = self.order.min(rhs.order);
                let live = l.len_upto(order as usize);
                let mut coeffs = vec![0.0; l.len()];
                if self.layout.is_some() {
                    coeffs[..live].copy_from_slice(&self.coeffs[..live]);
                } else {
                    coeffs[0] = self.coeffs[0];
                }
                if rhs.layout.is_some() {
                    for (c, r) in coeffs[..live].iter_mut().zip(&rhs.coeffs[..live]) {
                        *c += sign * r;
                    }
                } else {
                    coeffs[0] += sign * rhs.coeffs[0];
                }
                Taylor {
                    layout: Some(l),
                    order,
                    coeffs,
                }
            }
        }
    }

    fn mul_impl(&self, rhs: &Taylor) -> Taylor {
        match (self.layout, rhs.layout) {
            (None, None) => Taylor::constant(self.coeffs[0] * rhs.coeffs[0]),
            (None, Some(_)) => rhs.scale(self.coeffs[0]),
            (Some(_), None) => self.scale(rhs.coeffs[0]),
            (Some(l), Some(_)) => {
                let order = self.order.min(rhs.order);
                let mut coeffs = vec![0.0; l.len()];
                let a = &self.coeffs;
                let b = &rhs.coeffs;
                for &(ia, ib, o) in &l.mul_table[..l.mul_end[order as usize]] {
                    coeffs[o as usize] += a[ia as usize] * b[ib as usize];
                }
                Taylor {
                    layout: Some(l),
                    order,
                    coeffs,
                }
            }
        }
    }

    /// `f(self)` from the univariate Taylor coefficients of `f` at the value.
    fn compose(&self, f: Elementary) -> Taylor {
        let x0 = self.coeffs[0];
        let Some(l) = self.layout else {
            let c = taylor_coefficients(f, x0, 0);
            return Taylor::constant(c[0]);
        };
        let order = self.order as usize;
        let c = taylor_coefficients(f, x0, order);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Taylor {
            layout: Some(l),
            order: self.order,
            coeffs: vec![0.0; l.len()],
        };
        out.coeffs[0] = c[0];
        let mut power = h.clone();
        for (k, ck) in c.iter().enumerate().skip(1) {
            if k > 1 {
                power = power.mul_impl(&h);
            }
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += ck * p;
            }
        }
        out
    }
}

impl Scalar for Taylor {
    fn from_f64(v: f64) -> Self {
        Taylor::constant(v)
    }
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
    fn has_derivatives(&self) -> bool {
        self.layout.is_some() && self.order > 0
    }
    fn scale(&self, k: f64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            *c *= k;
        }
        out
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
        self.sin() / self.cos()
    }
    fn exp(&self) -> Self {
        self.compose(Elementary::Exp)
    }
    fn ln(&self) -> Self {
        self.compose(Elementary::Ln)
    }
    fn tanh(&self) -> Self {
        let e2 = self.scale(2.0).exp();
        (e2.clone() - Taylor::one()) / (e2 + Taylor::one())
    }
    fn abs(&self) -> Self {
        if self.coeffs[0] < 0.0 {
            -self.clone()
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
        impl $trait<Taylor> for Taylor {
            type Output = Taylor;
            fn $method(self, rhs: Taylor) -> Taylor {
                $body(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a Taylor> for Taylor {
            type Output = Taylor;
            fn $method(self, rhs: &'a Taylor) -> Taylor {
                $body(&self, rhs)
            }
        }
        impl<'a, 'b> $trait<&'b Taylor> for &'a Taylor {
            type Output = Taylor;
            fn $method(self, rhs: &'b Taylor) -> Taylor {
                $body(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Taylor, b: &Taylor| a.add_impl(b, 1.0));
forward_binop!(Sub, sub, |a: &Taylor, b: &Taylor| a.add_impl(b, -1.0));
forward_binop!(Mul, mul, |a: &Taylor, b: &Taylor| a.mul_impl(b));
forward_binop!(Div, div, |a: &Taylor, b: &Taylor| {
    if b.is_constant() {
        a.scale(1.0 / b.coeffs[0])
    } else {
        a.mul_impl(&b.recip())
    }
});

impl Neg for Taylor {
    type Output = Taylor;
    fn neg(self) -> Taylor {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_counts_monomials() {
        // C(d + k, k)
        assert_eq!(Layout::get(6, 3).len(), 84);
        assert_eq!(Layout::get(2, 2).len(), 6);
        assert_eq!(Layout::get(3, 0).len(), 1);
    }

    #[test]
    fn product_of_variables() {
        let x = Taylor::seed(&[2.0, 3.0], 2);
        let p = &x[0] * &x[1];
        assert_eq!(p.value(), 6.0);
        assert_eq!(p.gradient(0), 3.0);
        assert_eq!(p.gradient(1), 2.0);
        assert_eq!(p.coefficient(&[1, 1]), 1.0);
        assert_eq!(p.partial(0).partial(1).value(), 1.0);
    }

    #[test]
    fn exp_and_log_invert() {
        let x = Taylor::seed(&[0.3, -0.2], 3);
        let f = (&x[0] * &x[1] + Taylor::from_f64(2.0)).ln().exp();
        let g = &x[0] * &x[1] + Taylor::from_f64(2.0);
        for i in 0..Layout::get(2, 3).len() {
            assert!((f.coeffs[i] - g.coeffs[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn third_derivative_of_cube() {
        let x = Taylor::seed(&[1.5], 3);
        let c = x[0].powi(3);
        assert!((c.partial(0).partial(0).partial(0).value() - 6.0).abs() < 1e-14);
        assert_eq!(c.partial(0).order(), 2);
    }

    #[test]
    fn truncation_follows_lowest_order() {
        let x = Taylor::seed(&[1.0, 1.0], 3);
        let d = x[0].partial(0);
        let p = &x[1] * &d;
        assert_eq!(p.order(), 2);
        assert_eq!((&x[1] + &d).order(), 2);
    }

    #[test]
    fn trig_identity_holds_to_all_orders() {
        let x = Taylor::seed(&[0.7, 0.1, -0.4], 3);
        let u = &x[0] * &x[1] + &x[2];
        let one = u.sin() * u.sin() + u.cos() * u.cos();
        assert!((one.value() - 1.0).abs() < 1e-15);
        for c in &one.coeffs[1..] {
            assert!(c.abs() < 1e-14);
        }
    }
}
