//! Certified real intervals with outward rounding.
//!
//! Hardware rounding modes are not touched. Every basic operation computes the
//! round-to-nearest result together with its exact rounding error (two-sum for
//! addition, a fused multiply-add residual for products, quotients and square
//! roots). The sign of that error tells which neighbour of the rounded result
//! bounds the exact value, so exact results stay exact and inexact ones widen
//! by a single ulp in the right direction.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnclosureError {
    #[error("invalid enclosure endpoints [{0}, {1}]")]
    Invalid(f64, f64),
    #[error("division by an enclosure containing zero: [{0}, {1}]")]
    DivisionByZero(f64, f64),
    #[error("{op} undefined on [{lo}, {hi}]")]
    Domain { op: &'static str, lo: f64, hi: f64 },
    #[error("cannot parse decimal {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, EnclosureError>;

/// Below this magnitude products and quotients may be subnormal, where the
/// FMA residual is no longer exact.
const TINY: f64 = 1e-280;

/// Worst-case error of the platform `ln`, in ulps, applied on each side.
const LN_ULPS: u32 = 2;

/// Outward rounding of an operation whose nearest result is `r` and whose
/// exact value is `r + e` with `sign(e) = err_sign` (0, -1 or 1).
#[inline]
fn bracket(r: f64, err_sign: Ordering) -> (f64, f64) {
    match err_sign {
        Ordering::Equal => (r, r),
        Ordering::Greater => (r, r.next_up()),
        Ordering::Less => (r.next_down(), r),
    }
}

#[inline]
fn sign_of(e: f64) -> Ordering {
    e.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

#[inline]
fn add_bracket(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s.next_down(), s.next_up());
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    bracket(s, sign_of(err))
}

#[inline]
fn mul_bracket(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if p == 0.0 {
        if a == 0.0 || b == 0.0 {
            return (0.0, 0.0);
        }
        return (-f64::MIN_POSITIVE, f64::MIN_POSITIVE);
    }
    if !p.is_finite() || p.abs() < TINY {
        return (p.next_down(), p.next_up());
    }
    bracket(p, sign_of(a.mul_add(b, -p)))
}

#[inline]
fn div_bracket(a: f64, b: f64) -> (f64, f64) {
    let q = a / b;
    if a == 0.0 {
        return (0.0, 0.0);
    }
    if !q.is_finite() || q.abs() < TINY || q.abs() > 1e280 {
        return (q.next_down(), q.next_up());
    }
    // a - q*b is exact; the true quotient exceeds q when (a - q b)/b > 0.
    let r = (-q).mul_add(b, a);
    let s = sign_of(r);
    let s = if b < 0.0 { s.reverse() } else { s };
    bracket(q, s)
}

#[inline]
fn sqrt_bracket(a: f64) -> (f64, f64) {
    let s = a.sqrt();
    if a == 0.0 || !s.is_finite() || a < TINY {
        return if a == 0.0 { (0.0, 0.0) } else { (s.next_down(), s.next_up()) };
    }
    bracket(s, sign_of((-s).mul_add(s, a)))
}

#[inline]
fn add_down(a: f64, b: f64) -> f64 {
    add_bracket(a, b).0
}
#[inline]
fn add_up(a: f64, b: f64) -> f64 {
    add_bracket(a, b).1
}

/// A closed interval `[lo, hi]` of binary64 numbers, certified to contain an
/// exact real quantity.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Enclosure {
    pub const ZERO: Enclosure = Enclosure { lo: 0.0, hi: 0.0 };
    pub const ONE: Enclosure = Enclosure { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Enclosure { lo, hi })
        } else {
            Err(EnclosureError::Invalid(lo, hi))
        }
    }

    /// Degenerate enclosure `[x, x]`. Panics on non-finite input.
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point enclosure of non-finite value {x}");
        Enclosure { lo: x, hi: x }
    }

    /// Enclosure of the exact rational `num / den`.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let n = Self::from_i64(num);
        let d = Self::from_i64(den);
        n.try_div(d).expect("nonzero denominator")
    }

    /// Enclosure of an integer; exact up to 2^53.
    pub fn from_i64(v: i64) -> Self {
        let f = v as f64;
        if f.abs() <= 9_007_199_254_740_992.0 {
            Enclosure::point(f)
        } else {
            Enclosure { lo: f.next_down(), hi: f.next_up() }
        }
    }

    /// Parses a decimal literal (`1.317`, `-2.5e-3`, `29`) into an enclosure
    /// of its exact rational value.
    pub fn from_decimal(s: &str) -> Result<Self> {
        let err = || EnclosureError::Parse(s.to_string());
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (mant, exp) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (body, 0),
        };
        let (int_part, frac_part) = match mant.find('.') {
            Some(i) => (&mant[..i], &mant[i + 1..]),
            None => (mant, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let digits: String = format!("{int_part}{frac_part}");
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits = digits.trim_start_matches('0');
        if digits.len() > 30 {
            return Err(err());
        }
        let mantissa: u128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| err())? };
        let scale = exp - frac_part.len() as i32;
        if mantissa == 0 {
            return Ok(Enclosure::ZERO);
        }
        if scale.abs() > 300 {
            return Err(err());
        }
        let m = {
            let f = mantissa as f64;
            if mantissa <= (1u128 << 53) {
                Enclosure::point(f)
            } else {
                Enclosure { lo: f.next_down(), hi: f.next_up() }
            }
        };
        let p = pow10(scale.unsigned_abs());
        let v = if scale >= 0 { m * p } else { m.try_div(p)? };
        Ok(if neg { -v } else { v })
    }

    /// Enclosure of the shortest decimal that round-trips to `x`.
    ///
    /// `1.317_f64` is read as the decimal 1.317, not as the nearby binary
    /// fraction it is stored as.
    pub fn from_f64_decimal(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(EnclosureError::Invalid(x, x));
        }
        Self::from_decimal(&format!("{x:e}"))
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }
    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// `hi - lo` rounded up.
    pub fn width(&self) -> f64 {
        add_up(self.hi, -self.lo)
    }

    /// Half the width, rounded up.
    pub fn rad(&self) -> f64 {
        0.5 * self.width()
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_enclosure(&self, other: &Enclosure) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// True when `other` lies inside `self` after widening `self` by `ulps`
    /// units in the last place on each side.
    pub fn contains_within_ulps(&self, other: &Enclosure, ulps: u32) -> bool {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        lo <= other.lo && other.hi <= hi
    }

    pub fn overlaps(&self, other: &Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        Enclosure { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersect(&self, other: &Enclosure) -> Option<Enclosure> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Enclosure { lo, hi })
    }

    /// Intersection that keeps `self` when the two do not meet. Both operands
    /// are certified, so disjointness indicates a bug upstream.
    pub(crate) fn tighten(&self, other: &Enclosure) -> Enclosure {
        match self.intersect(other) {
            Some(e) => e,
            None => {
                debug_assert!(false, "disjoint certified enclosures {self:?} and {other:?}");
                *self
            }
        }
    }

    pub fn certainly_positive(&self) -> bool {
        self.lo > 0.0
    }
    pub fn certainly_negative(&self) -> bool {
        self.hi < 0.0
    }
    pub fn certainly_nonnegative(&self) -> bool {
        self.lo >= 0.0
    }
    pub fn certainly_nonpositive(&self) -> bool {
        self.hi <= 0.0
    }

    /// Every value of `self` is strictly below every value of `other`.
    pub fn certainly_lt(&self, other: &Enclosure) -> bool {
        self.hi < other.lo
    }
    pub fn certainly_le(&self, other: &Enclosure) -> bool {
        self.hi <= other.lo
    }

    pub fn try_div(self, rhs: Enclosure) -> Result<Enclosure> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(EnclosureError::DivisionByZero(rhs.lo, rhs.hi));
        }
        let cands = [
            div_bracket(self.lo, rhs.lo),
            div_bracket(self.lo, rhs.hi),
            div_bracket(self.hi, rhs.lo),
            div_bracket(self.hi, rhs.hi),
        ];
        Ok(from_brackets(&cands))
    }

    pub fn recip(self) -> Result<Enclosure> {
        Enclosure::ONE.try_div(self)
    }

    pub fn sqr(self) -> Enclosure {
        if self.lo >= 0.0 {
            Enclosure { lo: mul_bracket(self.lo, self.lo).0, hi: mul_bracket(self.hi, self.hi).1 }
        } else if self.hi <= 0.0 {
            Enclosure { lo: mul_bracket(self.hi, self.hi).0, hi: mul_bracket(self.lo, self.lo).1 }
        } else {
            let m = self.mag();
            Enclosure { lo: 0.0, hi: mul_bracket(m, m).1 }
        }
    }

    pub fn abs(self) -> Enclosure {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Enclosure { lo: 0.0, hi: self.mag() }
        }
    }

    /// Image of `max(x, 0)`.
    pub fn clamp_nonnegative(self) -> Enclosure {
        Enclosure { lo: self.lo.max(0.0), hi: self.hi.max(0.0) }
    }

    pub fn sqrt(self) -> Result<Enclosure> {
        if self.lo < 0.0 {
            return Err(EnclosureError::Domain { op: "sqrt", lo: self.lo, hi: self.hi });
        }
        Ok(Enclosure { lo: sqrt_bracket(self.lo).0, hi: sqrt_bracket(self.hi).1 })
    }

    /// Natural logarithm. The platform `ln` is within one ulp; each endpoint
    /// is widened by [`LN_ULPS`] on its outward side.
    pub fn ln(self) -> Result<Enclosure> {
        if self.lo <= 0.0 {
            return Err(EnclosureError::Domain { op: "ln", lo: self.lo, hi: self.hi });
        }
        Ok(Enclosure { lo: ln_down(self.lo), hi: ln_up(self.hi) })
    }

    /// Product with an exact scalar.
    pub fn scale(self, k: f64) -> Enclosure {
        self * Enclosure::point(k)
    }

    /// `self * [-1, 1]`: the symmetric interval of radius `mag(self)`.
    pub fn symmetric(self) -> Enclosure {
        let m = self.mag();
        Enclosure { lo: -m, hi: m }
    }
}

fn pow10(k: u32) -> Enclosure {
    if k <= 22 {
        return Enclosure::point(10f64.powi(k as i32));
    }
    let mut acc = Enclosure::point(1e22);
    let mut rest = k - 22;
    while rest > 0 {
        let step = rest.min(22);
        acc = acc * Enclosure::point(10f64.powi(step as i32));
        rest -= step;
    }
    acc
}

fn ln_down(x: f64) -> f64 {
    if x == 1.0 {
        return 0.0;
    }
    let mut l = x.ln();
    for _ in 0..LN_ULPS {
        l = l.next_down();
    }
    l
}

fn ln_up(x: f64) -> f64 {
    if x == 1.0 {
        return 0.0;
    }
    let mut l = x.ln();
    for _ in 0..LN_ULPS {
        l = l.next_up();
    }
    l
}

fn from_brackets(c: &[(f64, f64); 4]) -> Enclosure {
    let lo = c.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = c.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    Enclosure { lo, hi }
}

impl Add for Enclosure {
    type Output = Enclosure;
    #[inline]
    fn add(self, rhs: Enclosure) -> Enclosure {
        Enclosure { lo: add_down(self.lo, rhs.lo), hi: add_up(self.hi, rhs.hi) }
    }
}

impl AddAssign for Enclosure {
    #[inline]
    fn add_assign(&mut self, rhs: Enclosure) {
        *self = *self + rhs;
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    #[inline]
    fn sub(self, rhs: Enclosure) -> Enclosure {
        Enclosure { lo: add_down(self.lo, -rhs.hi), hi: add_up(self.hi, -rhs.lo) }
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    #[inline]
    fn neg(self) -> Enclosure {
        Enclosure { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    #[inline]
    fn mul(self, rhs: Enclosure) -> Enclosure {
        if self.lo >= 0.0 && rhs.lo >= 0.0 {
            return Enclosure {
                lo: mul_bracket(self.lo, rhs.lo).0,
                hi: mul_bracket(self.hi, rhs.hi).1,
            };
        }
        let cands = [
            mul_bracket(self.lo, rhs.lo),
            mul_bracket(self.lo, rhs.hi),
            mul_bracket(self.hi, rhs.lo),
            mul_bracket(self.hi, rhs.hi),
        ];
        from_brackets(&cands)
    }
}

impl std::iter::Sum for Enclosure {
    fn sum<I: Iterator<Item = Enclosure>>(iter: I) -> Enclosure {
        iter.fold(Enclosure::ZERO, |a, b| a + b)
    }
}
