//! Exact rational functions in `q` and `t = q^-s` whose denominators are
//! products of binomials `1 - q^-e t^d`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q_pow, Q};

/// Exponent pair `(q, t)`.
pub type QtExp = (i64, i64);
/// Integer Laurent polynomial in `q`, `t`.
pub type QtPoly = BTreeMap<QtExp, BigInt>;

#[derive(Clone, Debug)]
pub struct RationalQT {
    num: QtPoly,
    /// `(e, d) -> multiplicity` for the factor `1 - q^-e t^d`.
    den: BTreeMap<(i64, i64), u32>,
}

fn poly_add_term(p: &mut QtPoly, e: QtExp, c: BigInt) {
    if c.is_zero() {
        return;
    }
    let slot = p.entry(e).or_insert_with(BigInt::zero);
    *slot += c;
    if slot.is_zero() {
        p.remove(&e);
    }
}

fn poly_mul(a: &QtPoly, b: &QtPoly) -> QtPoly {
    let mut out = QtPoly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            poly_add_term(&mut out, (ea.0 + eb.0, ea.1 + eb.1), ca * cb);
        }
    }
    out
}

fn poly_add(a: &QtPoly, b: &QtPoly) -> QtPoly {
    let mut out = a.clone();
    for (e, c) in b {
        poly_add_term(&mut out, *e, c.clone());
    }
    out
}

fn poly_shift(a: &QtPoly, s: QtExp, sign: i64) -> QtPoly {
    a.iter()
        .map(|(e, c)| ((e.0 + s.0, e.1 + s.1), c * sign))
        .collect()
}

fn factor_poly(e: i64, d: i64) -> QtPoly {
    let mut p = QtPoly::new();
    poly_add_term(&mut p, (0, 0), BigInt::one());
    poly_add_term(&mut p, (-e, d), -BigInt::one());
    p
}

fn poly_pow(a: &QtPoly, n: u32) -> QtPoly {
    let mut acc = QtPoly::new();
    acc.insert((0, 0), BigInt::one());
    for _ in 0..n {
        acc = poly_mul(&acc, a);
    }
    acc
}

/// Exact quotient `a / (1 - q^x t^y)` or `None` when it does not divide.
fn div_binomial(a: &QtPoly, x: i64, y: i64) -> Option<QtPoly> {
    if a.is_empty() {
        return Some(QtPoly::new());
    }
    // 1 - X = -X (1 - X^-1): orient so the divisor increases the main axis
    let (main_t, step) = if y != 0 { (true, y) } else { (false, x) };
    if step < 0 {
        let q = div_binomial(a, -x, -y)?;
        return Some(poly_shift(&q, (-x, -y), -1));
    }
    let key = |e: &QtExp| if main_t { (e.1, e.0) } else { (e.0, e.1) };
    let top = a.keys().map(|e| key(e).0).max().unwrap();
    let mut rem: BTreeMap<QtExp, BigInt> = a.iter().map(|(e, c)| (key(e), c.clone())).collect();
    let mut quo = QtPoly::new();
    let (sx, sy) = if main_t { (y, x) } else { (x, y) };
    while let Some((&k, c)) = rem.iter().next() {
        if k.0 > top - step {
            return None;
        }
        let c = c.clone();
        rem.remove(&k);
        let orig = if main_t { (k.1, k.0) } else { k };
        poly_add_term(&mut quo, orig, c.clone());
        let nk = (k.0 + sx, k.1 + sy);
        let slot = rem.entry(nk).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            rem.remove(&nk);
        }
    }
    Some(quo)
}

impl RationalQT {
    pub fn zero() -> Self {
        RationalQT {
            num: QtPoly::new(),
            den: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0, 0)
    }

    /// `c q^a t^b`.
    pub fn monomial(c: i64, a: i64, b: i64) -> Self {
        let mut num = QtPoly::new();
        poly_add_term(&mut num, (a, b), BigInt::from(c));
        RationalQT {
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn from_poly(num: QtPoly) -> Self {
        let mut clean = QtPoly::new();
        for (e, c) in num {
            poly_add_term(&mut clean, e, c);
        }
        RationalQT {
            num: clean,
            den: BTreeMap::new(),
        }
    }

    /// Build from integer terms `(c, q-exp, t-exp)` and factors `(e, d, mult)`.
    pub fn from_parts(num: &[(i64, i64, i64)], den: &[(i64, i64, u32)]) -> Self {
        let mut r = Self::from_poly(
            num.iter()
                .map(|&(c, a, b)| ((a, b), BigInt::from(c)))
                .fold(QtPoly::new(), |mut acc, (e, c)| {
                    poly_add_term(&mut acc, e, c);
                    acc
                }),
        );
        for &(e, d, m) in den {
            assert!(e != 0 || d != 0, "factor 1 - 1 is zero");
            if m > 0 {
                *r.den.entry((e, d)).or_insert(0) += m;
            }
        }
        r
    }

    /// `1 / (1 - q^-e t^d)`.
    pub fn geometric(e: i64, d: i64) -> Self {
        Self::from_parts(&[(1, 0, 0)], &[(e, d, 1)])
    }

    pub fn numerator(&self) -> &QtPoly {
        &self.num
    }

    pub fn factors(&self) -> &BTreeMap<(i64, i64), u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_empty()
    }

    /// Rewrite factors whose reversal `(-e, -d)` appears in `keys`.
    fn orient_like(&self, keys: &BTreeMap<(i64, i64), u32>) -> Self {
        let mut out = self.clone();
        for (&(e, d), &m) in &self.den {
            if !keys.contains_key(&(e, d)) && keys.contains_key(&(-e, -d)) {
                // 1/(1 - q^-e t^d) = -q^e t^-d / (1 - q^e t^-d)
                out.den.remove(&(e, d));
                *out.den.entry((-e, -d)).or_insert(0) += m;
                let sign = if m % 2 == 0 { 1 } else { -1 };
                out.num = poly_shift(&out.num, (e * m as i64, -d * m as i64), sign);
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let b = other.orient_like(&self.den);
        let mut den = self.den.clone();
        for (k, &m) in &b.den {
            let s = den.entry(*k).or_insert(0);
            *s = (*s).max(m);
        }
        let lift = |x: &Self| {
            let mut n = x.num.clone();
            for (k, &m) in &den {
                let have = x.den.get(k).copied().unwrap_or(0);
                if m > have {
                    n = poly_mul(&n, &poly_pow(&factor_poly(k.0, k.1), m - have));
                }
            }
            n
        };
        let num = poly_add(&lift(self), &lift(&b));
        let mut r = RationalQT { num, den };
        r.reduce();
        r
    }

    pub fn neg(&self) -> Self {
        RationalQT {
            num: self.num.iter().map(|(e, c)| (*e, -c)).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let b = other.orient_like(&self.den);
        let mut den = self.den.clone();
        for (k, &m) in &b.den {
            *den.entry(*k).or_insert(0) += m;
        }
        let mut r = RationalQT {
            num: poly_mul(&self.num, &b.num),
            den,
        };
        r.reduce();
        r
    }

    pub fn scale(&self, c: i64) -> Self {
        self.mul(&Self::monomial(c, 0, 0))
    }

    /// Multiply by `q^a t^b`.
    pub fn shift(&self, a: i64, b: i64) -> Self {
        RationalQT {
            num: poly_shift(&self.num, (a, b), 1),
            den: self.den.clone(),
        }
    }

    /// Cancel whole denominator factors that divide the numerator.
    pub fn reduce(&mut self) {
        if self.num.is_empty() {
            self.den.clear();
            return;
        }
        let keys: Vec<(i64, i64)> = self.den.keys().copied().collect();
        for k in keys {
            while let Some(&m) = self.den.get(&k) {
                match div_binomial(&self.num, -k.0, k.1) {
                    Some(q) => {
                        self.num = q;
                        if m == 1 {
                            self.den.remove(&k);
                        } else {
                            self.den.insert(k, m - 1);
                        }
                    }
                    None => break,
                }
            }
        }
    }

    /// Equality by cross-multiplication.
    pub fn equals(&self, other: &Self) -> bool {
        let b = other.orient_like(&self.den);
        let mut lhs = self.num.clone();
        let mut rhs = b.num.clone();
        let mut keys: Vec<(i64, i64)> = self.den.keys().copied().collect();
        keys.extend(b.den.keys().copied());
        keys.sort();
        keys.dedup();
        for k in keys {
            let ma = self.den.get(&k).copied().unwrap_or(0);
            let mb = b.den.get(&k).copied().unwrap_or(0);
            if mb > ma {
                lhs = poly_mul(&lhs, &poly_pow(&factor_poly(k.0, k.1), mb - ma));
            } else if ma > mb {
                rhs = poly_mul(&rhs, &poly_pow(&factor_poly(k.0, k.1), ma - mb));
            }
        }
        lhs == rhs
    }

    /// Substitute `t = 1`.
    pub fn at_t_one(&self) -> Result<Self> {
        let mut num = QtPoly::new();
        for (e, c) in &self.num {
            poly_add_term(&mut num, (e.0, 0), c.clone());
        }
        let mut den = BTreeMap::new();
        for (&(e, _d), &m) in &self.den {
            if e == 0 {
                return Err(Error::Invalid("pole at t = 1".into()));
            }
            *den.entry((e, 0)).or_insert(0) += m;
        }
        let mut r = RationalQT { num, den };
        r.reduce();
        Ok(r)
    }

    /// Specialize `q = p`: a Laurent polynomial in `t` over the rationals and
    /// factors `(c, d, mult)` meaning `(1 - c t^d)^mult` with `d != 0`.
    pub fn at_q(&self, p: u64) -> (BTreeMap<i64, Q>, Vec<(Q, i64, u32)>) {
        let mut scalar = Q::one();
        let mut factors = Vec::new();
        for (&(e, d), &m) in &self.den {
            let c = q_pow(p, -e);
            if d == 0 {
                for _ in 0..m {
                    scalar /= Q::one() - &c;
                }
            } else {
                factors.push((c, d, m));
            }
        }
        let mut num: BTreeMap<i64, Q> = BTreeMap::new();
        for (e, c) in &self.num {
            *num.entry(e.1).or_insert_with(Q::zero) += Q::from_integer(c.clone()) * q_pow(p, e.0);
        }
        num.retain(|_, v| !v.is_zero());
        for v in num.values_mut() {
            *v *= &scalar;
        }
        (num, factors)
    }

    /// Exact value at `q = p`, `t = p^-s` for integer `s`.
    pub fn eval(&self, p: u64, s: i64) -> Option<Q> {
        let t_pow = |k: i64| q_pow(p, -s * k);
        let mut n = Q::zero();
        for (e, c) in &self.num {
            n += Q::from_integer(c.clone()) * q_pow(p, e.0) * t_pow(e.1);
        }
        let mut d = Q::one();
        for (&(e, dd), &m) in &self.den {
            let f = Q::one() - q_pow(p, -e) * t_pow(dd);
            if f.is_zero() {
                return None;
            }
            for _ in 0..m {
                d *= &f;
            }
        }
        Some(n / d)
    }

    /// Real parts `-e/d` of the denominator factors with `d != 0`.
    pub fn pole_real_parts(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self
            .den
            .keys()
            .filter(|k| k.1 != 0)
            .map(|&(e, d)| Q::new(BigInt::from(-e), BigInt::from(d)))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(QtJson::from(self)).unwrap()
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: QtJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(e.to_string()))?;
        let mut num = QtPoly::new();
        for t in j.num {
            let c: BigInt = t.c.parse().map_err(|_| Error::Invalid(format!("bad integer {}", t.c)))?;
            poly_add_term(&mut num, (t.q, t.t), c);
        }
        let mut den = BTreeMap::new();
        for f in j.den {
            if f.e == 0 && f.d == 0 {
                return Err(Error::Invalid("zero denominator factor".into()));
            }
            *den.entry((f.e, f.d)).or_insert(0) += f.mult;
        }
        Ok(RationalQT { num, den })
    }
}

impl PartialEq for RationalQT {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

#[derive(Serialize, Deserialize)]
struct NumTerm {
    q: i64,
    t: i64,
    c: String,
}

#[derive(Serialize, Deserialize)]
struct DenFactor {
    e: i64,
    d: i64,
    mult: u32,
}

#[derive(Serialize, Deserialize)]
struct QtJson {
    num: Vec<NumTerm>,
    den: Vec<DenFactor>,
}

impl From<&RationalQT> for QtJson {
    fn from(r: &RationalQT) -> Self {
        QtJson {
            num: r
                .num
                .iter()
                .map(|(e, c)| NumTerm {
                    q: e.0,
                    t: e.1,
                    c: c.to_string(),
                })
                .collect(),
            den: r
                .den
                .iter()
                .map(|(k, &m)| DenFactor {
                    e: k.0,
                    d: k.1,
                    mult: m,
                })
                .collect(),
        }
    }
}

fn fmt_qt_mono(a: i64, b: i64) -> String {
    let mut parts = Vec::new();
    if a != 0 {
        parts.push(if a == 1 { "q".to_string() } else { format!("q^{a}") });
    }
    if b != 0 {
        parts.push(if b == 1 { "t".to_string() } else { format!("t^{b}") });
    }
    parts.join("*")
}

impl fmt::Display for RationalQT {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        if self.num.is_empty() {
            s.push('0');
        }
        for (i, (e, c)) in self.num.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let m = fmt_qt_mono(e.0, e.1);
            if m.is_empty() {
                s.push_str(&a.to_string());
            } else if a.is_one() {
                s.push_str(&m);
            } else {
                s.push_str(&format!("{a}*{m}"));
            }
        }
        if self.den.is_empty() {
            return f.write_str(&s);
        }
        let den: Vec<String> = self
            .den
            .iter()
            .map(|(&(e, d), &m)| {
                let base = format!("(1 - {})", fmt_qt_mono(-e, d));
                if m == 1 {
                    base
                } else {
                    format!("{base}^{m}")
                }
            })
            .collect();
        write!(f, "({s}) / ({})", den.join("*"))
    }
}

/// A rational function that is affine in symbolic point counts `N_tau`.
#[derive(Clone, Debug)]
pub struct LinearN {
    pub constant: RationalQT,
    pub coeffs: BTreeMap<String, RationalQT>,
}

impl LinearN {
    pub fn from_const(c: RationalQT) -> Self {
        LinearN {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn zero() -> Self {
        Self::from_const(RationalQT::zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            let merged = match coeffs.get(k) {
                Some(c) => c.add(v),
                None => v.clone(),
            };
            coeffs.insert(k.clone(), merged);
        }
        coeffs.retain(|_, v| !v.is_zero());
        LinearN {
            constant: self.constant.add(&other.constant),
            coeffs,
        }
    }

    pub fn neg(&self) -> Self {
        LinearN {
            constant: self.constant.neg(),
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul_qt(&self, r: &RationalQT) -> Self {
        let mut coeffs: BTreeMap<String, RationalQT> =
            self.coeffs.iter().map(|(k, v)| (k.clone(), v.mul(r))).collect();
        coeffs.retain(|_, v| !v.is_zero());
        LinearN {
            constant: self.constant.mul(r),
            coeffs,
        }
    }

    /// Substitute numeric counts. Missing labels are an error.
    pub fn specialize(&self, counts: &BTreeMap<String, u64>) -> Result<RationalQT> {
        let mut acc = self.constant.clone();
        for (k, v) in &self.coeffs {
            let n = counts
                .get(k)
                .ok_or_else(|| Error::Invalid(format!("no count for face {k}")))?;
            acc = acc.add(&v.scale(*n as i64));
        }
        Ok(acc)
    }

    pub fn at_t_one(&self) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (k, v) in &self.coeffs {
            let r = v.at_t_one()?;
            if !r.is_zero() {
                coeffs.insert(k.clone(), r);
            }
        }
        Ok(LinearN {
            constant: self.constant.at_t_one()?,
            coeffs,
        })
    }

    pub fn equals(&self, other: &Self) -> bool {
        let d = self.sub(other);
        d.constant.is_zero() && d.coeffs.values().all(|v| v.is_zero())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let coeffs: BTreeMap<String, serde_json::Value> = self
            .coeffs
            .iter()
            .map(|(k, v)| (format!("N_{k}"), v.to_json()))
            .collect();
        serde_json::json!({ "constant": self.constant.to_json(), "N": coeffs })
    }
}

impl fmt::Display for LinearN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (k, v) in &self.coeffs {
            write!(f, " + N_{k}*[{v}]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sum_identity() {
        // 1/(1-X) - X/(1-X) = 1
        let a = RationalQT::geometric(1, 2);
        let b = a.shift(-1, 2);
        let r = a.sub(&b);
        assert!(r.equals(&RationalQT::one()));
        assert!(r.factors().is_empty());
    }

    #[test]
    fn reversed_factor_equality() {
        // 1/(1 - q t^-1) = -q^-1 t / (1 - q^-1 t)
        let a = RationalQT::geometric(-1, -1);
        let b = RationalQT::from_parts(&[(-1, -1, 1)], &[(1, 1, 1)]);
        assert!(a.equals(&b));
        assert!(a.add(&b.neg()).is_zero());
    }

    #[test]
    fn t_one_and_eval() {
        let l = RationalQT::from_parts(&[(-1, -2, 0), (1, -2, 1)], &[(1, 1, 1)]);
        assert!(l.at_t_one().unwrap().is_zero());
        let g = RationalQT::geometric(1, 1);
        assert_eq!(g.eval(5, 0), Some(Q::new(5.into(), 4.into())));
    }

    #[test]
    fn json_roundtrip() {
        let r = RationalQT::from_parts(&[(3, -2, 1), (-1, 0, 0)], &[(5, -6, 1), (1, 2, 2)]);
        let back = RationalQT::from_json(&r.to_json()).unwrap();
        assert!(back.equals(&r));
    }
}
