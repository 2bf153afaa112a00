//! Oscillatory integrals `E(z) = int Phi(x) Psi(z f(x)) |dx|` at
//! `z = u p^-m`, directly and through twisted zeta coefficients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{Exp, LaurentPolynomial};
use crate::padic::characters::CharacterGroup;
use crate::padic::complex::ComplexValue;
use crate::padic::modarith::{add_mod, inv_mod, mul_mod, pow_mod, ppow};
use crate::padic::oracle::{zeta_coefficients_bruteforce, OracleParams};
use crate::padic::phi::{Coord, Phi, Region};
use crate::padic::refine::start_classes;
use crate::rational::{fmt_q, q_int, q_mod, q_pow, to_f64, unit_part, vp, Q};

#[derive(Clone, Debug, Serialize)]
pub struct OscillatoryValue {
    pub value: ComplexValue,
    #[serde(with = "crate::rational::q_string")]
    pub unresolved: Q,
}

#[derive(Clone, Copy, Debug)]
pub struct DirectParams {
    /// Ball splittings allowed per coordinate before the rest is unresolved.
    pub split_cap: u32,
    /// Largest residue enumeration `p^(d1 + d2)` per piece.
    pub budget: u128,
}

impl Default for DirectParams {
    fn default() -> Self {
        DirectParams { split_cap: 12, budget: 1 << 24 }
    }
}

struct Direct {
    p: u64,
    /// `(l, v(z c), unit(z c))`.
    terms: Vec<(Exp, i64, Q)>,
    params: DirectParams,
    hist: BTreeMap<(u32, u128), Q>,
    unresolved: Q,
}

impl Direct {
    fn lower(&self, region: &Region, t: &(Exp, i64, Q)) -> Option<i64> {
        let mut v = t.1;
        for i in 0..2 {
            let l = t.0[i];
            match region[i] {
                Coord::Ball { .. } if l < 0 => return None,
                Coord::Ball { a } | Coord::Units { a } | Coord::Residue { a, .. } => v += a * l,
            }
        }
        Some(v)
    }

    fn visit(&mut self, region: Region, splits: [u32; 2]) -> Result<()> {
        let p = self.p;
        let mass = region[0].measure(p) * region[1].measure(p);
        let active: Vec<usize> = (0..self.terms.len())
            .filter(|&i| self.lower(&region, &self.terms[i]).is_none_or(|v| v < 0))
            .collect();
        for &ti in &active {
            for i in 0..2 {
                if self.terms[ti].0[i] != 0 {
                    if let Coord::Ball { a } = region[i] {
                        if splits[i] >= self.params.split_cap {
                            self.unresolved += mass;
                            return Ok(());
                        }
                        let mut shell = region;
                        shell[i] = Coord::Units { a };
                        let mut rest = region;
                        rest[i] = Coord::Ball { a: a + 1 };
                        let mut s = splits;
                        s[i] += 1;
                        self.visit(shell, s)?;
                        return self.visit(rest, s);
                    }
                }
            }
        }
        if active.is_empty() {
            *self.hist.entry((0, 0)).or_insert_with(Q::zero) += mass;
            return Ok(());
        }
        // Every active term now has exact valuation v < 0.
        let vals: Vec<i64> = active.iter().map(|&i| self.lower(&region, &self.terms[i]).unwrap()).collect();
        let big_v = vals.iter().map(|v| -v).max().unwrap() as u32;
        let mut depth = [0u32; 2];
        for (&ti, v) in active.iter().zip(&vals) {
            for i in 0..2 {
                if self.terms[ti].0[i] != 0 {
                    depth[i] = depth[i].max((-v) as u32);
                }
            }
        }
        let mut classes: [Vec<u128>; 2] = [vec![0], vec![0]];
        let mut class_mass = Q::one();
        for i in 0..2 {
            let (a, cond) = match region[i] {
                Coord::Units { a } => (a, None),
                Coord::Residue { a, c, k } => (a, Some((c, k))),
                Coord::Ball { a } => {
                    class_mass *= q_pow(p, -a);
                    continue;
                }
            };
            let lvl = depth[i].max(cond.map_or(0, |c| c.1)).max(1);
            if depth[i] == 0 {
                class_mass *= region[i].measure(p);
                continue;
            }
            classes[i] = start_classes(p, lvl, cond);
            class_mass *= q_pow(p, -a - lvl as i64);
        }
        let count = classes[0].len() as u128 * classes[1].len() as u128;
        if count > self.params.budget {
            return Err(Error::Budget(format!("{count} residue classes")));
        }
        let modulus = ppow(p, big_v);
        let coeffs: Vec<(Exp, u128)> = active
            .iter()
            .zip(&vals)
            .map(|(&ti, v)| {
                let (l, _, unit) = &self.terms[ti];
                let shift = (*v + big_v as i64) as u32;
                let c = mul_mod(ppow(p, shift) % modulus, q_mod(unit, modulus).unwrap(), modulus);
                (*l, c)
            })
            .collect();
        let pw = |b: u128, e: i64| -> u128 {
            if e >= 0 {
                pow_mod(b, e as u128, modulus)
            } else {
                pow_mod(inv_mod(b, modulus).unwrap(), (-e) as u128, modulus)
            }
        };
        let mut counts: BTreeMap<u128, u64> = BTreeMap::new();
        for &u0 in &classes[0] {
            for &u1 in &classes[1] {
                let mut n = 0u128;
                for (l, c) in &coeffs {
                    let mut t = *c;
                    if l[0] != 0 {
                        t = mul_mod(t, pw(u0, l[0]), modulus);
                    }
                    if l[1] != 0 {
                        t = mul_mod(t, pw(u1, l[1]), modulus);
                    }
                    n = add_mod(n, t, modulus);
                }
                *counts.entry(n).or_insert(0) += 1;
            }
        }
        for (n, c) in counts {
            *self.hist.entry((big_v, n)).or_insert_with(Q::zero) += &class_mass * q_int(c as i64);
        }
        Ok(())
    }
}

/// `Psi(x)` summed against the exact masses of a histogram `(v, n) -> mass`
/// where `x = n / p^v`.
fn psi_sum(p: u64, hist: &BTreeMap<(u32, u128), Q>) -> ComplexValue {
    hist.iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|((v, n), m)| {
            let ph = Q::new(BigInt::from(*n), BigInt::from(ppow(p, *v)));
            ComplexValue::cis(&ph).scale_q(m)
        })
        .sum()
}

/// `E(u p^-m)` by splitting `Phi` until `z f` mod `Z_p` is a function of
/// finitely many residue digits. `m` may be negative (small `|z|`).
pub fn oscillatory_integral_direct(
    f: &LaurentPolynomial,
    phi: &Phi,
    p: u64,
    u: u64,
    m: i64,
    params: DirectParams,
) -> Result<OscillatoryValue> {
    crate::finite_field::check_prime(p)?;
    phi.check(p)?;
    if u % p == 0 {
        return Err(Error::Invalid(format!("u = {u} is not a unit mod {p}")));
    }
    let z = Q::from_integer(BigInt::from(u)) * q_pow(p, -m);
    let terms = f
        .terms()
        .iter()
        .map(|(l, c)| {
            let zc = &z * c;
            (*l, vp(&zc, p), unit_part(&zc, p))
        })
        .collect();
    let mut d = Direct {
        p,
        terms,
        params,
        hist: BTreeMap::new(),
        unresolved: Q::zero(),
    };
    for r in &phi.regions {
        d.visit(*r, [0, 0])?;
    }
    let mut value = psi_sum(p, &d.hist);
    value.err += to_f64(&d.unresolved);
    Ok(OscillatoryValue { value, unresolved: d.unresolved })
}

#[derive(Clone, Debug, Serialize)]
pub struct Prop4Report {
    pub value: ComplexValue,
    /// Largest conductor whose twisted coefficients were found nonzero.
    pub empirical_conductor: u32,
    /// Conductors examined.
    pub conductor_limit: u32,
    #[serde(with = "crate::rational::q_string")]
    pub trivial_part: Q,
    #[serde(with = "crate::rational::q_string")]
    pub unresolved: Q,
}

/// `E(u p^-m) = Z(0) - sum_{j<m} V_j - V_{m-1}/(p-1)
///   + sum_{chi != 1} g_{chi^-1} chi(u) Coeff_{t^{m-c(chi)}} Z(s, chi)`,
/// with characters up to conductor `max(bound, m - min ord f)`.
pub fn oscillatory_via_prop4(
    f: &LaurentPolynomial,
    phi: &Phi,
    p: u64,
    u: u64,
    m: i64,
    bound: u32,
    params: OracleParams,
) -> Result<Prop4Report> {
    if u % p == 0 {
        return Err(Error::Invalid(format!("u = {u} is not a unit mod {p}")));
    }
    let hi = m - 1;
    let mut data = zeta_coefficients_bruteforce(f, phi, p, bound, hi, params)?;
    let ord_min = data.histogram.min_ord().unwrap_or(hi);
    let limit = bound.max((m - ord_min).max(0) as u32);
    if limit > bound {
        data = zeta_coefficients_bruteforce(f, phi, p, limit, hi, params)?;
    }
    let z0 = phi.measure(p);
    let mut below = Q::zero();
    for n in ord_min.min(hi)..=hi {
        below += data.trivial(n);
    }
    let last = data.trivial(hi);
    let trivial_part = &z0 - below - last / q_int(p as i64 - 1);
    let mut value = ComplexValue::from_q(&trivial_part);
    let mut empirical = 0u32;
    if limit >= 1 {
        let grp = CharacterGroup::new(p, limit)?;
        for k in 1..grp.order() {
            let c = grp.conductor(k);
            let mut nonzero = false;
            for n in ord_min.min(hi)..=hi {
                let coef = data.coefficient(&grp, k, n)?;
                if coef.abs() > coef.err + 1e-12 {
                    nonzero = true;
                    break;
                }
            }
            if nonzero {
                empirical = empirical.max(c);
                if c > bound {
                    return Err(Error::ConductorBound { conductor: c });
                }
            }
            let n = m - c as i64;
            if n > hi || n < ord_min {
                continue;
            }
            let coef = data.coefficient(&grp, k, n)?;
            let g = grp.gauss_sum(grp.inverse(k));
            value = value + g * grp.value(k, u as u128) * coef;
        }
    }
    let unresolved = data.error_mass();
    value.err += 2.0 * to_f64(&unresolved);
    Ok(Prop4Report {
        value,
        empirical_conductor: empirical,
        conductor_limit: limit,
        trivial_part,
        unresolved,
    })
}

impl Prop4Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "re": self.value.re,
            "im": self.value.im,
            "err": self.value.err,
            "empirical_conductor": self.empirical_conductor,
            "conductor_limit": self.conductor_limit,
            "trivial_part": fmt_q(&self.trivial_part),
            "unresolved": fmt_q(&self.unresolved),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;
    use crate::rational::q_frac;

    #[test]
    fn integral_z_is_volume() {
        let f = parse("x^2 + x*y + 3").unwrap();
        let e = oscillatory_integral_direct(&f, &Phi::unit_torus(), 5, 1, 0, DirectParams::default()).unwrap();
        assert!((e.value.re - 16.0 / 25.0).abs() < 1e-12);
        assert!(e.value.im.abs() < 1e-12);
    }

    #[test]
    fn small_z_inverse_coordinate() {
        // E(p^k) for x^-1 + y + y^2 on Z_p^2 is 1 - p^(-k-1) - p^(-k-2).
        let f = parse("x^-1 + y + y^2").unwrap();
        for k in 1..4i64 {
            let e = oscillatory_integral_direct(&f, &Phi::ball([0, 0]), 3, 1, -k, DirectParams::default())
                .unwrap();
            let exact = 1.0 - 3f64.powi(-(k as i32) - 1) - 3f64.powi(-(k as i32) - 2);
            assert!((e.value.re - exact).abs() <= e.value.err + 1e-12, "k={k} {:?}", e.value);
            assert!(e.unresolved > Q::zero());
            assert!(e.unresolved < q_frac(1, 3i64.pow(10)));
        }
    }

    #[test]
    fn assembly_matches_direct_for_linear() {
        let f = parse("x + y").unwrap();
        for m in 1..4 {
            let a = oscillatory_via_prop4(&f, &Phi::unit_torus(), 3, 1, m, 3, OracleParams::new(m)).unwrap();
            let b = oscillatory_integral_direct(&f, &Phi::unit_torus(), 3, 1, m, DirectParams::default()).unwrap();
            assert!(a.value.agrees(&b.value, 1e-9), "m={m}: {:?} vs {:?}", a.value, b.value);
        }
    }
}
