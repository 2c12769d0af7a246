//! Values that can flow through an integrand: plain enclosures, or
//! enclosures carrying a gradient with respect to the box coordinates.

use std::ops::{Add, Mul, Neg, Sub};

use crate::enclosure::{Enclosure, Result};

pub(crate) trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Whether [`Scalar::chain`] uses the derivative argument.
    const NEEDS_DERIVATIVE: bool;

    fn constant(c: Enclosure) -> Self;
    fn value(&self) -> Enclosure;
    fn try_div(self, rhs: Self) -> Result<Self>;

    /// `f(self)` given `f` over `self.value()` and `f'` over the same range.
    fn chain(self, f: Enclosure, df: Enclosure) -> Self;
}

impl Scalar for Enclosure {
    const NEEDS_DERIVATIVE: bool = false;

    fn constant(c: Enclosure) -> Self {
        c
    }
    fn value(&self) -> Enclosure {
        *self
    }
    fn try_div(self, rhs: Self) -> Result<Self> {
        Enclosure::try_div(self, rhs)
    }
    fn chain(self, f: Enclosure, _df: Enclosure) -> Self {
        f
    }
}

/// An enclosure together with enclosures of its partial derivatives.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Grad<const D: usize> {
    pub v: Enclosure,
    pub d: [Enclosure; D],
}

impl<const D: usize> Grad<D> {
    /// The `i`-th coordinate variable ranging over `x`.
    pub fn var(x: Enclosure, i: usize) -> Self {
        let mut d = [Enclosure::ZERO; D];
        d[i] = Enclosure::ONE;
        Grad { v: x, d }
    }
}

impl<const D: usize> Add for Grad<D> {
    type Output = Self;
    fn add(self, r: Self) -> Self {
        Grad { v: self.v + r.v, d: std::array::from_fn(|i| self.d[i] + r.d[i]) }
    }
}

impl<const D: usize> Sub for Grad<D> {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Grad { v: self.v - r.v, d: std::array::from_fn(|i| self.d[i] - r.d[i]) }
    }
}

impl<const D: usize> Neg for Grad<D> {
    type Output = Self;
    fn neg(self) -> Self {
        Grad { v: -self.v, d: std::array::from_fn(|i| -self.d[i]) }
    }
}

impl<const D: usize> Mul for Grad<D> {
    type Output = Self;
    fn mul(self, r: Self) -> Self {
        Grad { v: self.v * r.v, d: std::array::from_fn(|i| self.d[i] * r.v + self.v * r.d[i]) }
    }
}

impl<const D: usize> Scalar for Grad<D> {
    const NEEDS_DERIVATIVE: bool = true;

    fn constant(c: Enclosure) -> Self {
        Grad { v: c, d: [Enclosure::ZERO; D] }
    }
    fn value(&self) -> Enclosure {
        self.v
    }
    fn try_div(self, r: Self) -> Result<Self> {
        let q = self.v.try_div(r.v)?;
        let mut d = [Enclosure::ZERO; D];
        for i in 0..D {
            d[i] = (self.d[i] - q * r.d[i]).try_div(r.v)?;
        }
        Ok(Grad { v: q, d })
    }
    fn chain(self, f: Enclosure, df: Enclosure) -> Self {
        Grad { v: f, d: std::array::from_fn(|i| df * self.d[i]) }
    }
}

/// Value with first and second derivative in one variable.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Jet2 {
    pub v: Enclosure,
    pub d1: Enclosure,
    pub d2: Enclosure,
}

impl Jet2 {
    pub fn mul(self, r: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * r.v,
            d1: self.d1 * r.v + self.v * r.d1,
            d2: self.d2 * r.v + Enclosure::point(2.0) * self.d1 * r.d1 + self.v * r.d2,
        }
    }
    pub fn sub(self, r: Jet2) -> Jet2 {
        Jet2 { v: self.v - r.v, d1: self.d1 - r.d1, d2: self.d2 - r.d2 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quotient() {
        // f(x, y) = x / y at (2, 4): df/dx = 1/4, df/dy = -2/16.
        let x = Grad::<2>::var(Enclosure::point(2.0), 0);
        let y = Grad::<2>::var(Enclosure::point(4.0), 1);
        let q = x.try_div(y).unwrap();
        assert!(q.v.contains(0.5));
        assert!(q.d[0].contains(0.25));
        assert!(q.d[1].contains(-0.125));
    }

    #[test]
    fn jet_product_rule() {
        // x² at x = 3: (9, 6, 2).
        let x = Jet2 { v: Enclosure::point(3.0), d1: Enclosure::ONE, d2: Enclosure::ZERO };
        let p = x.mul(x);
        assert_eq!((p.v.lo(), p.d1.lo(), p.d2.lo()), (9.0, 6.0, 2.0));
    }
}
