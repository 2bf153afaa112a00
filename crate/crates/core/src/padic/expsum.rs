//! Finite exponential sums `S_m = p^-2m sum_{x in A_m} Psi(u f(x) / p^m)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laurent::{Exp, LaurentPolynomial};
use crate::padic::complex::ComplexValue;
use crate::padic::modarith::{inv_mod, mul_mod, pow_mod, ppow};
use crate::rational::{q_int, q_mod, q_pow, vp, Q};

/// Largest number of points summed.
pub const EXPSUM_BUDGET: u128 = 1 << 32;

/// Histogram `r -> #{x in A_m : f(x) = r mod p^m}`, where `A_m` has the
/// `unit` coordinate in `(Z/p^m)^x` and the other in `Z/p^m`.
pub fn value_histogram(f: &LaurentPolynomial, unit: usize, p: u64, m: i64) -> Result<BTreeMap<u64, u64>> {
    crate::finite_field::check_prime(p)?;
    if m <= 0 {
        return Err(Error::Invalid("m must be positive".into()));
    }
    if unit > 1 {
        return Err(Error::Invalid("side must be 0 or 1".into()));
    }
    let other = 1 - unit;
    for (l, c) in f.terms() {
        if l[other] < 0 {
            return Err(Error::NotApplicable(format!(
                "negative exponent in the non-unit coordinate x{}",
                other + 1
            )));
        }
        if vp(c, p) < 0 {
            return Err(Error::BadPrime { p });
        }
    }
    let modulus = ppow(p, m as u32);
    if modulus * modulus > EXPSUM_BUDGET {
        return Err(Error::Budget(format!("{p}^{} points", 2 * m)));
    }
    let md = modulus as u64;
    let terms: Vec<(Exp, u64)> = f
        .terms()
        .iter()
        .map(|(l, c)| (*l, q_mod(c, modulus).unwrap() as u64))
        .filter(|t| t.1 != 0)
        .collect();
    let max_pow = terms.iter().map(|t| t.0[other]).max().unwrap_or(0).max(0) as usize;
    // pow_table[y][j] = y^j mod p^m.
    let pow_table: Vec<Vec<u64>> = (0..md)
        .map(|y| {
            let mut row = Vec::with_capacity(max_pow + 1);
            let mut acc = 1 % md;
            for _ in 0..=max_pow {
                row.push(acc);
                acc = acc * y % md;
            }
            row
        })
        .collect();
    let units: Vec<u64> = (1..md).filter(|x| x % p != 0).collect();
    let dense = units
        .par_iter()
        .fold(
            || vec![0u64; md as usize],
            |mut h, &x| {
                let xi = inv_mod(x as u128, modulus).unwrap();
                // Coefficient of y^j for this x.
                let mut coef = vec![0u64; max_pow + 1];
                for (l, c) in &terms {
                    let e = l[unit];
                    let xp = if e >= 0 {
                        pow_mod(x as u128, e as u128, modulus)
                    } else {
                        pow_mod(xi, (-e) as u128, modulus)
                    };
                    let j = l[other] as usize;
                    coef[j] = (coef[j] + mul_mod(*c as u128, xp, modulus) as u64) % md;
                }
                let nz: Vec<(usize, u64)> = coef.iter().copied().enumerate().filter(|c| c.1 != 0).collect();
                for row in &pow_table {
                    let mut v = 0u64;
                    for &(j, cj) in &nz {
                        v += cj * row[j] % md;
                    }
                    h[(v % md) as usize] += 1;
                }
                h
            },
        )
        .reduce(
            || vec![0u64; md as usize],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let out: BTreeMap<u64, u64> = dense
        .into_iter()
        .enumerate()
        .filter(|e| e.1 != 0)
        .map(|(r, c)| (r as u64, c))
        .collect();
    Ok(out)
}

/// `S_m(f)` at `z = u p^-m`; `side` selects which coordinate runs over units.
pub fn exponential_sum(f: &LaurentPolynomial, side: usize, p: u64, m: i64, u: u64) -> Result<ComplexValue> {
    if u % p == 0 {
        return Err(Error::Invalid(format!("u = {u} is not a unit mod {p}")));
    }
    let hist = value_histogram(f, side, p, m)?;
    let modulus = ppow(p, m as u32);
    let mut by_phase: BTreeMap<u128, u64> = BTreeMap::new();
    for (r, c) in hist {
        *by_phase.entry(mul_mod(r as u128, u as u128, modulus)).or_insert(0) += c;
    }
    let w = q_pow(p, -2 * m);
    Ok(by_phase
        .iter()
        .map(|(r, c)| {
            let ph = Q::new(BigInt::from(*r), BigInt::from(modulus));
            ComplexValue::cis(&ph).scale_q(&(&w * q_int(*c as i64)))
        })
        .filter(|v| !(v.re.is_zero() && v.im.is_zero()))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;

    #[test]
    fn linear_sum_is_minus_one_over_p() {
        let f = parse("x").unwrap();
        for p in [3u64, 5, 7] {
            let s = exponential_sum(&f, 0, p, 1, 1).unwrap();
            assert!((s.re + 1.0 / p as f64).abs() < 1e-12 && s.im.abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_mod_p_gives_measure() {
        let f = parse("5x + 5y^2").unwrap();
        let s = exponential_sum(&f, 0, 5, 1, 1).unwrap();
        assert!((s.re - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shape() {
        let f = parse("x + y^-1").unwrap();
        assert!(matches!(exponential_sum(&f, 0, 3, 2, 1), Err(Error::NotApplicable(_))));
        assert!(exponential_sum(&f, 1, 3, 2, 1).is_ok());
        assert!(matches!(exponential_sum(&f, 1, 3, 0, 1), Err(Error::Invalid(_))));
    }
}
