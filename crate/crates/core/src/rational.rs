//! Small helpers around `BigRational`: string form, p-adic valuation and
//! reduction modulo prime powers.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `"num/den"` (or just `"num"` when the denominator is one).
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Q::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

/// `p^e` as a rational, `e` of either sign.
pub fn q_pow(p: u64, e: i64) -> Q {
    let base = Q::from_integer(BigInt::from(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

/// p-adic valuation of a nonzero integer.
pub fn vp_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational.
pub fn vp(x: &Q, p: u64) -> i64 {
    vp_int(x.numer(), p) - vp_int(x.denom(), p)
}

/// The unit part `x / p^vp(x)`.
pub fn unit_part(x: &Q, p: u64) -> Q {
    x / q_pow(p, vp(x, p))
}

/// Reduce a p-integral rational modulo `modulus` (a power of p).
/// Returns `None` when the denominator is not invertible.
pub fn q_mod(x: &Q, modulus: u128) -> Option<u128> {
    let m = BigInt::from(modulus);
    let num = x.numer().mod_floor(&m).to_u128()?;
    let den = x.denom().mod_floor(&m).to_u128()?;
    let inv = crate::padic::modarith::inv_mod(den, modulus)?;
    Some(crate::padic::modarith::mul_mod(num, inv, modulus))
}

pub fn abs_f64(x: &Q) -> f64 {
    let v = x.abs();
    to_f64(&v)
}

pub fn to_f64(x: &Q) -> f64 {
    let (n, d) = (x.numer(), x.denom());
    match (n.to_f64(), d.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => a / b,
        _ => {
            // scale down both sides until they fit
            let shift = n.bits().max(d.bits()).saturating_sub(1000);
            let n2 = n >> shift;
            let d2 = d >> shift;
            n2.to_f64().unwrap_or(0.0) / d2.to_f64().unwrap_or(1.0)
        }
    }
}

pub fn is_negative(x: &Q) -> bool {
    x.numer().sign() == Sign::Minus
}

/// Serde adapter writing a rational as a `"num/den"` string.
pub mod q_string {
    use super::*;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}
