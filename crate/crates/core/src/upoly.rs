//! Dense univariate polynomials over the rationals.

use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::rational::Q;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QPoly {
    /// `c[i]` is the coefficient of `t^i`; no trailing zeros.
    c: Vec<Q>,
}

impl QPoly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn zero() -> Self {
        QPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        QPoly { c: vec![Q::one()] }
    }

    pub fn constant(a: Q) -> Self {
        Self::new(vec![a])
    }

    /// `a t^k`.
    pub fn monomial(a: Q, k: usize) -> Self {
        let mut c = vec![Q::zero(); k + 1];
        c[k] = a;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Q {
        self.c.get(i).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn lead(&self) -> Q {
        self.c.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, a: &Q) -> Self {
        Self::new(self.c.iter().map(|x| x * a).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    /// Coefficients reversed against degree `n`: `t^n p(1/t)`.
    pub fn reversed(&self, n: usize) -> Self {
        let mut c = vec![Q::zero(); n + 1];
        for (i, a) in self.c.iter().enumerate() {
            c[n - i] = a.clone();
        }
        Self::new(c)
    }

    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.c.clone();
        let dd = d.c.len() - 1;
        if r.len() <= dd {
            return (QPoly::zero(), self.clone());
        }
        let lead_inv = d.lead().recip();
        let mut q = vec![Q::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let coef = &r[i + dd] * &lead_inv;
            if !coef.is_zero() {
                for (j, dj) in d.c.iter().enumerate() {
                    r[i + j] -= &coef * dj;
                }
            }
            q[i] = coef;
        }
        (QPoly::new(q), QPoly::new(r))
    }

    pub fn rem(&self, d: &QPoly) -> QPoly {
        self.divrem(d).1
    }

    /// `(g, s, t)` with `s a + t b = g`, `g` monic.
    pub fn ext_gcd(a: &QPoly, b: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (QPoly::one(), QPoly::zero());
        let (mut t0, mut t1) = (QPoly::zero(), QPoly::one());
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s2 = &s0 - &(&q * &s1);
            let t2 = &t0 - &(&q * &t1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
            t0 = t1;
            t1 = t2;
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = r0.lead().recip();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }

    /// Inverse of `self` modulo `m`, if the two are coprime.
    pub fn inverse_mod(&self, m: &QPoly) -> Option<QPoly> {
        let (g, s, _) = QPoly::ext_gcd(&self.rem(m), m);
        if g.degree() == 0 {
            Some(s.rem(m))
        } else {
            None
        }
    }

    /// First `n` power-series coefficients of `self / d`; needs `d(0) != 0`.
    pub fn series_div(&self, d: &QPoly, n: usize) -> Vec<Q> {
        let d0 = d.coeff(0);
        assert!(!d0.is_zero(), "series denominator vanishes at 0");
        let inv = d0.recip();
        let mut out: Vec<Q> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.coeff(k);
            for j in 1..=k.min(d.c.len().saturating_sub(1)) {
                acc -= &d.c[j] * &out[k - j];
            }
            out.push(acc * &inv);
        }
        out
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut c = vec![Q::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_int;

    fn p(v: &[i64]) -> QPoly {
        QPoly::new(v.iter().map(|&x| q_int(x)).collect())
    }

    #[test]
    fn divrem_and_gcd() {
        let a = p(&[-1, 0, 1]);
        let b = p(&[1, 1]);
        let (q, r) = a.divrem(&b);
        assert_eq!(q, p(&[-1, 1]));
        assert!(r.is_zero());
        let (g, s, t) = QPoly::ext_gcd(&p(&[1, 0, 1]), &p(&[-2, 1]));
        assert_eq!(g, QPoly::one());
        assert_eq!(&(&s * &p(&[1, 0, 1])) + &(&t * &p(&[-2, 1])), QPoly::one());
    }

    #[test]
    fn geometric_series() {
        let s = QPoly::one().series_div(&p(&[1, -2]), 5);
        assert_eq!(s, vec![q_int(1), q_int(2), q_int(4), q_int(8), q_int(16)]);
    }
}
