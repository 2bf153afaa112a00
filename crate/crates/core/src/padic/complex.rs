//! Double-precision complex numbers carrying an absolute error bound.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::rational::{to_f64, Q};

const ULP: f64 = 2.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
    /// Bound on the distance to the exact value.
    pub err: f64,
}

impl ComplexValue {
    pub const ZERO: ComplexValue = ComplexValue { re: 0.0, im: 0.0, err: 0.0 };

    pub fn new(re: f64, im: f64, err: f64) -> Self {
        ComplexValue { re, im, err }
    }

    pub fn from_q(x: &Q) -> Self {
        let v = to_f64(x);
        ComplexValue::new(v, 0.0, v.abs() * ULP)
    }

    /// `exp(2 pi i x)` for a rational phase `x`.
    pub fn cis(x: &Q) -> Self {
        let frac = x - x.floor();
        let n = frac.numer().to_f64().unwrap_or(0.0);
        let d = frac.denom().to_f64().unwrap_or(1.0);
        let a = TAU * (n / d);
        ComplexValue::new(a.cos(), a.sin(), 4.0 * ULP)
    }

    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn scale_q(&self, x: &Q) -> Self {
        *self * ComplexValue::from_q(x)
    }

    /// Whether `|self - other|` is within the combined bounds plus `tol`.
    pub fn agrees(&self, other: &Self, tol: f64) -> bool {
        (*self - *other).abs() <= self.err + other.err + tol
    }
}

impl Add for ComplexValue {
    type Output = ComplexValue;
    fn add(self, o: Self) -> Self {
        let re = self.re + o.re;
        let im = self.im + o.im;
        let err = self.err + o.err + ULP * (re.abs() + im.abs());
        ComplexValue { re, im, err }
    }
}

impl Neg for ComplexValue {
    type Output = ComplexValue;
    fn neg(self) -> Self {
        ComplexValue::new(-self.re, -self.im, self.err)
    }
}

impl Sub for ComplexValue {
    type Output = ComplexValue;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for ComplexValue {
    type Output = ComplexValue;
    fn mul(self, o: Self) -> Self {
        let re = self.re * o.re - self.im * o.im;
        let im = self.re * o.im + self.im * o.re;
        let err = self.abs() * o.err
            + o.abs() * self.err
            + self.err * o.err
            + 2.0 * ULP * (re.abs() + im.abs() + self.abs() * o.abs());
        ComplexValue { re, im, err }
    }
}

impl std::iter::Sum for ComplexValue {
    fn sum<I: Iterator<Item = Self>>(it: I) -> Self {
        it.fold(ComplexValue::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    #[test]
    fn roots_of_unity_sum_to_zero() {
        let s: ComplexValue = (0..7).map(|k| ComplexValue::cis(&q_frac(k, 7))).sum();
        assert!(s.abs() <= s.err + 1e-15);
        assert!(s.err < 1e-13);
    }
}
