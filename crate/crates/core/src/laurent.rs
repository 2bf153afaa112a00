//! Laurent polynomials in `x`, `y` with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{newton_polytope, Face};
use crate::rational::{fmt_q, parse_q, q_int, Q};

pub type Exp = [i64; 2];

/// Sparse Laurent polynomial. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LaurentPolynomial {
    terms: BTreeMap<Exp, Q>,
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(e: Exp, c: Q) -> Self {
        let mut f = Self::zero();
        f.add_term(e, c);
        f
    }

    pub fn constant(c: Q) -> Self {
        Self::monomial([0, 0], c)
    }

    pub fn from_terms<I: IntoIterator<Item = (Exp, Q)>>(it: I) -> Self {
        let mut f = Self::zero();
        for (e, c) in it {
            f.add_term(e, c);
        }
        f
    }

    /// Convenience constructor from integer coefficients.
    pub fn from_int_terms(terms: &[(Exp, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(e, c)| (e, q_int(c))))
    }

    pub fn add_term(&mut self, e: Exp, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Exp, Q> {
        &self.terms
    }

    pub fn coeff(&self, e: Exp) -> Q {
        self.terms.get(&e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Zero or a nonzero constant.
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| *e == [0, 0])
    }

    pub fn support(&self) -> Vec<Exp> {
        self.terms.keys().copied().collect()
    }

    pub fn scale(&self, c: &Q) -> Self {
        Self::from_terms(self.terms.iter().map(|(e, v)| (*e, v * c)))
    }

    /// Multiply by `x^s[0] y^s[1]`.
    pub fn shift(&self, s: Exp) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ([e[0] + s[0], e[1] + s[1]], c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(Q::one());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Restriction of the terms to the points of `face`, which must be a face
    /// of this polynomial's Newton polytope.
    pub fn face_function(&self, face: &Face) -> Result<Self> {
        let poly = newton_polytope(self)?;
        if !poly.faces().iter().any(|g| g.points == face.points) {
            return Err(Error::ForeignFace);
        }
        Ok(self.restrict(&face.points))
    }

    /// Keep only terms whose exponent lies in `points`.
    pub fn restrict(&self, points: &[Exp]) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| points.contains(e))
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    pub fn hat_decomposition(&self) -> HatDecomposition {
        let min0 = self.terms.keys().map(|e| e[0]).min().unwrap_or(0);
        let min1 = self.terms.keys().map(|e| e[1]).min().unwrap_or(0);
        let d1 = (-min0).max(0);
        let d2 = (-min1).max(0);
        HatDecomposition {
            hat: self.shift([d1, d2]),
            d1,
            d2,
        }
    }

    pub fn gradient(&self) -> (Self, Self) {
        let mut dx = Self::zero();
        let mut dy = Self::zero();
        for (e, c) in &self.terms {
            if e[0] != 0 {
                dx.add_term([e[0] - 1, e[1]], c * q_int(e[0]));
            }
            if e[1] != 0 {
                dy.add_term([e[0], e[1] - 1], c * q_int(e[1]));
            }
        }
        (dx, dy)
    }

    pub fn reduce_mod_p(&self, p: u64) -> Result<FpLaurent> {
        let pb = BigInt::from(p);
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if c.denom().is_multiple_of(&pb) {
                return Err(Error::BadPrime { p });
            }
            let n = c.numer().mod_floor(&pb).to_u64().unwrap();
            let d = c.denom().mod_floor(&pb).to_u64().unwrap();
            let v = n * modinv_small(d, p) % p;
            if v != 0 {
                terms.insert(*e, v);
            }
        }
        let fbar = FpLaurent { p, terms };
        if fbar.terms.keys().all(|e| *e == [0, 0]) {
            return Err(Error::ConstantModP { p });
        }
        Ok(fbar)
    }

    /// Exact value at a rational point with nonzero coordinates.
    pub fn eval(&self, x: &Q, y: &Q) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            acc += c * qpow(x, e[0]) * qpow(y, e[1]);
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(LaurentJson::from(self)).unwrap()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: LaurentJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(e.to_string()))?;
        let mut f = Self::zero();
        for t in j.terms {
            let c = parse_q(&t.c).ok_or_else(|| Error::Invalid(format!("bad coefficient {}", t.c)))?;
            f.add_term(t.e, c);
        }
        Ok(f)
    }
}

fn qpow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

/// Inverse modulo a prime.
fn modinv_small(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    e: Exp,
    c: String,
}

#[derive(Serialize, Deserialize)]
struct LaurentJson {
    terms: Vec<TermJson>,
}

impl From<&LaurentPolynomial> for LaurentJson {
    fn from(f: &LaurentPolynomial) -> Self {
        LaurentJson {
            terms: f
                .terms
                .iter()
                .map(|(e, c)| TermJson { e: *e, c: fmt_q(c) })
                .collect(),
        }
    }
}

/// `hat / (x^d1 y^d2)` reproduces the original polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HatDecomposition {
    pub hat: LaurentPolynomial,
    pub d1: i64,
    pub d2: i64,
}

impl HatDecomposition {
    pub fn reconstruct(&self) -> LaurentPolynomial {
        self.hat.shift([-self.d1, -self.d2])
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        LaurentPolynomial {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, rhs: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = LaurentPolynomial::zero();
        for (a, c) in &self.terms {
            for (b, d) in &rhs.terms {
                out.add_term([a[0] + b[0], a[1] + b[1]], c * d);
            }
        }
        out
    }
}

fn fmt_monomial(e: Exp) -> String {
    let mut parts = Vec::new();
    for (name, k) in [("x", e[0]), ("y", e[1])] {
        match k {
            0 => {}
            1 => parts.push(name.to_string()),
            k => parts.push(format!("{name}^{k}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mono = fmt_monomial(*e);
            if mono.is_empty() {
                write!(f, "{}", fmt_q(&a))?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for LaurentPolynomial {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

/// Parse a polynomial such as `"x^-3 + y^-2 + y^4"` or `"2x*y - (x+y)^2"`.
pub fn parse(text: &str) -> Result<LaurentPolynomial> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let f = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected character"));
    }
    if f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

const MAX_POWER: i64 = 64;

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<LaurentPolynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPolynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(c) if c == b'(' || c == b'x' || c == b'y' || c.is_ascii_digit() => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<LaurentPolynomial> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<LaurentPolynomial> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let start = self.pos;
        let k = self.signed_int()?;
        if k.abs() > MAX_POWER {
            self.pos = start;
            return Err(self.err("exponent too large"));
        }
        if k >= 0 {
            return Ok(base.pow(k as u32));
        }
        if base.len() != 1 {
            self.pos = start;
            return Err(self.err("negative exponent on a non-monomial"));
        }
        let (e, c) = base.terms.iter().next().unwrap();
        let n = (-k) as u32;
        let c = num_traits::pow(c.recip(), n as usize);
        Ok(LaurentPolynomial::monomial([e[0] * k, e[1] * k], c))
    }

    fn signed_int(&mut self) -> Result<i64> {
        let mut neg = false;
        match self.peek() {
            Some(b'-') => {
                neg = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer exponent"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: i64 = s.parse().map_err(|_| Error::Syntax {
            pos: start,
            msg: "exponent out of range".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn digits(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .ok()
    }

    fn atom(&mut self) -> Result<LaurentPolynomial> {
        match self.peek() {
            Some(b'x') => {
                self.pos += 1;
                Ok(LaurentPolynomial::monomial([1, 0], Q::one()))
            }
            Some(b'y') => {
                self.pos += 1;
                Ok(LaurentPolynomial::monomial([0, 1], Q::one()))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.digits().unwrap();
                let mut c = Q::from_integer(n);
                if self.src.get(self.pos) == Some(&b'/') {
                    self.pos += 1;
                    let d = self
                        .digits()
                        .ok_or_else(|| self.err("expected denominator"))?;
                    if d.is_zero() {
                        return Err(self.err("zero denominator"));
                    }
                    c /= Q::from_integer(d);
                }
                Ok(LaurentPolynomial::constant(c))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// A Laurent polynomial with coefficients in the prime field of order `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpLaurent {
    pub p: u64,
    pub terms: BTreeMap<Exp, u64>,
}

impl FpLaurent {
    pub fn support(&self) -> Vec<Exp> {
        self.terms.keys().copied().collect()
    }

    /// Value at a torus point (`x`, `y` nonzero mod p).
    pub fn eval(&self, x: u64, y: u64) -> u64 {
        let p = self.p;
        let xi = modinv_small(x % p, p);
        let yi = modinv_small(y % p, p);
        let mut acc = 0u64;
        for (e, c) in &self.terms {
            let a = if e[0] >= 0 {
                powmod(x, e[0] as u64, p)
            } else {
                powmod(xi, (-e[0]) as u64, p)
            };
            let b = if e[1] >= 0 {
                powmod(y, e[1] as u64, p)
            } else {
                powmod(yi, (-e[1]) as u64, p)
            };
            acc = (acc + c * a % p * b) % p;
        }
        acc
    }

    pub fn gradient(&self) -> (FpLaurent, FpLaurent) {
        let p = self.p;
        let mut dx = BTreeMap::new();
        let mut dy = BTreeMap::new();
        for (e, c) in &self.terms {
            let a = (e[0].rem_euclid(p as i64) as u64) * c % p;
            if a != 0 {
                dx.insert([e[0] - 1, e[1]], a);
            }
            let b = (e[1].rem_euclid(p as i64) as u64) * c % p;
            if b != 0 {
                dy.insert([e[0], e[1] - 1], b);
            }
        }
        (FpLaurent { p, terms: dx }, FpLaurent { p, terms: dy })
    }

    pub fn restrict(&self, points: &[Exp]) -> FpLaurent {
        FpLaurent {
            p: self.p,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| points.contains(e))
                .map(|(e, c)| (*e, *c))
                .collect(),
        }
    }

    pub fn shift(&self, s: Exp) -> FpLaurent {
        FpLaurent {
            p: self.p,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| ([e[0] + s[0], e[1] + s[1]], *c))
                .collect(),
        }
    }
}

impl fmt::Display for FpLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lift = LaurentPolynomial::from_terms(
            self.terms.iter().map(|(e, c)| (*e, q_int(*c as i64))),
        );
        write!(f, "{lift} (mod {})", self.p)
    }
}

pub(crate) fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_worked_polynomials() {
        let g = parse("x^-3 + y^-2 + y^4").unwrap();
        assert_eq!(g.support(), vec![[-3, 0], [0, -2], [0, 4]]);
        assert_eq!(g.to_string(), "x^-3 + y^-2 + y^4");
        let f = parse("2x - x").unwrap();
        assert_eq!(f.support(), vec![[1, 0]]);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse("x - x"), Err(Error::ConstantPolynomial)));
        assert!(matches!(parse("x + + "), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(x+y)^-1"), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse("x $ y"), Err(Error::Syntax { pos: 2, .. })));
    }

    #[test]
    fn implicit_products_and_powers() {
        let f = parse("3/2x^2y - (x+y)^2 + x^-1y^-1").unwrap();
        assert_eq!(f.coeff([2, 1]), Q::new(3.into(), 2.into()));
        assert_eq!(f.coeff([1, 1]), q_int(-2));
        assert_eq!(f.coeff([-1, -1]), q_int(1));
        assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn hat_examples() {
        let g = parse("x^-3 + y^-2 + y^4").unwrap();
        let h = g.hat_decomposition();
        assert_eq!((h.d1, h.d2), (3, 2));
        assert_eq!(h.hat, parse("y^2 + x^3 + x^3*y^6").unwrap());
        assert_eq!(h.reconstruct(), g);
    }

    #[test]
    fn reduce_examples() {
        let f = parse("7x + y").unwrap();
        assert_eq!(f.reduce_mod_p(7).unwrap().support(), vec![[0, 1]]);
        let h = parse("1/2x").unwrap();
        assert!(matches!(h.reduce_mod_p(2), Err(Error::BadPrime { p: 2 })));
        let c = parse("7x + 1").unwrap();
        assert!(matches!(c.reduce_mod_p(7), Err(Error::ConstantModP { p: 7 })));
    }

    #[test]
    fn gradient_examples() {
        let (dx, dy) = parse("x^-3").unwrap().gradient();
        assert_eq!(dx, parse("-3x^-4").unwrap());
        assert!(dy.is_zero());
        let (dx, dy) = parse("x*y").unwrap().gradient();
        assert_eq!(dx, parse("y").unwrap());
        assert_eq!(dy, parse("x").unwrap());
    }

    #[test]
    fn json_roundtrip() {
        let f = parse("x^-3 - 5/3y^2").unwrap();
        let v = f.to_json();
        assert_eq!(
            v.to_string(),
            r#"{"terms":[{"c":"1","e":[-3,0]},{"c":"-5/3","e":[0,2]}]}"#
        );
        assert_eq!(LaurentPolynomial::from_json(&v).unwrap(), f);
    }
}
