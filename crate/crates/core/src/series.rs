//! Two-sided Laurent expansion of zeta functions at a numeric prime and the
//! exponential-polynomial families governing their coefficients.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::qt::RationalQT;
use crate::rational::{fmt_q, q_int, q_pow, Q};
use crate::upoly::QPoly;
use crate::zeta::PoleReport;

/// Volumes of the level sets `{ord f = n}`: the coefficient of `t^n`.
///
/// `n < 0` is the side `|f| = q^m` with `m = -n`; `n >= 0` is `|f| = q^-n`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValuationSpectrum {
    pub coeffs: BTreeMap<i64, Q>,
    /// Coefficients are known for `|n| <= truncation`.
    pub truncation: i64,
    /// Mass of the support whose valuation could not be decided.
    pub unresolved: Q,
}

impl ValuationSpectrum {
    pub fn new(truncation: i64) -> Self {
        ValuationSpectrum {
            coeffs: BTreeMap::new(),
            truncation,
            unresolved: Q::zero(),
        }
    }

    pub fn get(&self, n: i64) -> Q {
        self.coeffs.get(&n).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add(&mut self, n: i64, v: Q) {
        if v.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(n).or_insert_with(Q::zero);
        *slot += v;
        if slot.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    /// `V_m` for `1 <= m <= truncation` (coefficient of `t^-m`).
    pub fn negative_side(&self) -> BTreeMap<i64, Q> {
        (1..=self.truncation).map(|m| (m, self.get(-m))).collect()
    }

    /// `V_-m` for `0 <= m <= truncation` (coefficient of `t^m`).
    pub fn positive_side(&self) -> BTreeMap<i64, Q> {
        (0..=self.truncation).map(|m| (m, self.get(m))).collect()
    }

    /// Restrict to `|n| <= m`.
    pub fn truncate(&self, m: i64) -> Self {
        ValuationSpectrum {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(n, _)| n.abs() <= m)
                .map(|(n, v)| (*n, v.clone()))
                .collect(),
            truncation: m.min(self.truncation),
            unresolved: self.unresolved.clone(),
        }
    }

    /// Indices in `[-m, m]` where the two spectra differ.
    pub fn diff(&self, other: &Self, m: i64) -> Vec<i64> {
        (-m..=m).filter(|&n| self.get(n) != other.get(n)).collect()
    }

    pub fn total(&self) -> Q {
        self.coeffs.values().fold(Q::zero(), |a, b| a + b)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let side = |v: BTreeMap<i64, Q>| {
            v.into_iter()
                .map(|(m, x)| json!({"m": m, "v": fmt_q(&x)}))
                .collect::<Vec<_>>()
        };
        json!({
            "truncation": self.truncation,
            "negative_side": side(self.negative_side()),
            "positive_side": side(self.positive_side()),
            "unresolved": fmt_q(&self.unresolved),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,side,m,value\n");
        for n in -self.truncation..=self.truncation {
            let (side, m) = if n < 0 { ("neg", -n) } else { ("pos", n) };
            s.push_str(&format!("{n},{side},{m},{}\n", fmt_q(&self.get(n))));
        }
        s
    }
}

/// One denominator factor `(1 - c x^d)^mult` at a numeric prime.
#[derive(Clone, Debug)]
struct Factor {
    e: i64,
    /// Degree in the expansion variable, always positive.
    d: i64,
    mult: u32,
    c: Q,
}

impl Factor {
    /// Real part `-e/d` of the pole in the `s`-plane, with `d` signed as in `Z`.
    fn gamma(&self, side: Side) -> Q {
        let d = match side {
            Side::Plus => self.d,
            Side::Minus => -self.d,
        };
        Q::new((-self.e).into(), d.into())
    }
}

fn factor_poly(fs: &[Factor]) -> QPoly {
    let mut acc = QPoly::one();
    for f in fs {
        let mut c = vec![Q::zero(); f.d as usize + 1];
        c[0] = Q::one();
        c[f.d as usize] = -f.c.clone();
        acc = &acc * &QPoly::new(c).pow(f.mult);
    }
    acc
}

/// `Z = t^sigma (q0 + R_+(t)/D_+(t) + R_-(u)/D_-(u))` with `u = 1/t`.
struct Split {
    sigma: i64,
    q0: QPoly,
    plus: (QPoly, Vec<Factor>),
    minus: (QPoly, Vec<Factor>),
}

impl Split {
    fn part(&self, side: Side) -> &(QPoly, Vec<Factor>) {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

fn split(z: &RationalQT, p: u64) -> Result<Split> {
    let (num, _) = z.at_q(p);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (&(e, d), &mult) in z.factors() {
        let c = q_pow(p, -e);
        if d == 0 {
            continue;
        } else if d > 0 {
            plus.push(Factor { e, d, mult, c });
        } else {
            minus.push(Factor { e, d: -d, mult, c });
        }
    }
    let lower = plus.iter().map(|f| f.gamma(Side::Plus)).max();
    let upper = minus.iter().map(|f| f.gamma(Side::Minus)).min();
    if let (Some(lo), Some(hi)) = (&lower, &upper) {
        if lo >= hi {
            return Err(Error::EmptyStrip(format!(
                "{} < Re(s) < {}",
                fmt_q(lo),
                fmt_q(hi)
            )));
        }
    }
    let lo = num.keys().next().copied().unwrap_or(0);
    let hi = num.keys().next_back().copied().unwrap_or(0);
    let mut n0 = vec![Q::zero(); (hi - lo + 1).max(0) as usize];
    for (k, v) in &num {
        n0[(k - lo) as usize] = v.clone();
    }
    let n0 = QPoly::new(n0);
    // Each factor 1 - c t^-n equals t^-n (t^n - c).
    let mut sigma = lo;
    let mut pm = QPoly::one();
    for f in &minus {
        sigma += f.d * f.mult as i64;
        let mut c = vec![Q::zero(); f.d as usize + 1];
        c[0] = -f.c.clone();
        c[f.d as usize] = Q::one();
        pm = &pm * &QPoly::new(c).pow(f.mult);
    }
    let dp = factor_poly(&plus);
    let full = &dp * &pm;
    let (q0, r) = n0.divrem(&full);
    let (g, a, b) = QPoly::ext_gcd(&dp, &pm);
    if g.degree() != 0 {
        return Err(Error::EmptyStrip("denominator directions share a root".into()));
    }
    let r_plus = (&r * &b).rem(&dp);
    let r_minus = (&r * &a).rem(&pm);
    let deg = pm.degree().max(0) as usize;
    let rrev = if pm.degree() > 0 { r_minus.reversed(deg) } else { QPoly::zero() };
    Ok(Split {
        sigma,
        q0,
        plus: (r_plus, plus),
        minus: (rrev, minus),
    })
}

/// Exact coefficients of `t^n`, `|n| <= m`, for `Z` at `q = p`, each
/// denominator factor expanded in the direction convergent on the strip.
pub fn series_expand(z: &RationalQT, p: u64, m: i64) -> Result<ValuationSpectrum> {
    if m < 0 {
        return Err(Error::Invalid("truncation must be nonnegative".into()));
    }
    let s = split(z, p)?;
    let mut out = ValuationSpectrum::new(m);
    for (i, c) in s.q0.coeffs().iter().enumerate() {
        let n = s.sigma + i as i64;
        if n.abs() <= m {
            out.add(n, c.clone());
        }
    }
    // Plus side: t^(sigma + j), j >= 0.
    let need = m - s.sigma + 1;
    if need > 0 && !s.plus.0.is_zero() {
        let ser = s.plus.0.series_div(&factor_poly(&s.plus.1), need as usize);
        for (j, c) in ser.into_iter().enumerate() {
            let n = s.sigma + j as i64;
            if n >= -m {
                out.add(n, c);
            }
        }
    }
    // Minus side: t^(sigma - j), j >= 1.
    let need = s.sigma + m + 1;
    if need > 0 && !s.minus.0.is_zero() {
        let ser = s.minus.0.series_div(&factor_poly(&s.minus.1), need as usize);
        for (j, c) in ser.into_iter().enumerate() {
            let n = s.sigma - j as i64;
            if n <= m {
                out.add(n, c);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// Coefficients of `t^m`, `m -> +inf` (volumes `V_-m`).
    #[serde(rename = "+")]
    Plus,
    /// Coefficients of `t^-m`, `m -> +inf` (volumes `V_m`).
    #[serde(rename = "-")]
    Minus,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "pos" => Ok(Side::Plus),
            "-" | "minus" | "neg" => Ok(Side::Minus),
            _ => Err(Error::Invalid(format!("side must be + or -, got {s}"))),
        }
    }
}

/// Contribution of the poles with a common real part `gamma`:
/// for `m = rho + k L >= start`, the term is `base^k * poly[rho](k)`,
/// where `base = p^(growth * L)`.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticTerm {
    #[serde(with = "crate::rational::q_string")]
    pub gamma: Q,
    /// `V ~ p^(growth m)`: `gamma` on `+`, `-gamma` on `-`.
    #[serde(with = "crate::rational::q_string")]
    pub growth: Q,
    /// Highest power of `m` present.
    pub j: u32,
    pub period: i64,
    #[serde(with = "crate::rational::q_string")]
    pub base: Q,
    pub start: i64,
    #[serde(serialize_with = "ser_families")]
    pub families: Vec<Vec<Q>>,
}

fn ser_families<S: serde::Serializer>(x: &[Vec<Q>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<String>> = x.iter().map(|f| f.iter().map(fmt_q).collect()).collect();
    serde::Serialize::serialize(&v, s)
}

impl AsymptoticTerm {
    pub fn value(&self, m: i64) -> Q {
        let (k, rho) = m.div_mod_floor(&self.period);
        let poly = &self.families[rho as usize];
        let kq = q_int(k);
        let mut acc = Q::zero();
        for c in poly.iter().rev() {
            acc = acc * &kq + c;
        }
        acc * pow_q(&self.base, k)
    }
}

fn pow_q(b: &Q, k: i64) -> Q {
    let mut r = Q::one();
    for _ in 0..k.unsigned_abs() {
        r *= b;
    }
    if k < 0 {
        r.recip()
    } else {
        r
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticExpansion {
    pub side: Side,
    pub p: u64,
    /// The terms sum to the exact coefficient for every `m >= valid_from`.
    pub valid_from: i64,
    pub terms: Vec<AsymptoticTerm>,
}

impl AsymptoticExpansion {
    pub fn value(&self, m: i64) -> Q {
        self.terms.iter().map(|t| t.value(m)).fold(Q::zero(), |a, b| a + b)
    }

    /// The dominant term, largest growth first.
    pub fn leading(&self) -> Option<&AsymptoticTerm> {
        self.terms.iter().max_by(|a, b| a.growth.cmp(&b.growth).then(a.j.cmp(&b.j)))
    }
}

/// Lagrange interpolation through `(x_i, y_i)`, returned as coefficients.
fn interpolate(xs: &[Q], ys: &[Q]) -> Vec<Q> {
    let mut out = QPoly::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = QPoly::constant(yi.clone());
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                let lin = QPoly::new(vec![-xj.clone(), Q::one()]);
                basis = &basis * &lin;
                basis = basis.scale(&(xi - xj).recip());
            }
        }
        out = &out + &basis;
    }
    out.coeffs().to_vec()
}

/// Exponential-polynomial families of the coefficients on one side, grouped
/// by pole real part. With `cert` given, the `+` side requires
/// `beta != -1` or `mu(beta) = 2`.
pub fn asymptotic_terms(
    z: &RationalQT,
    p: u64,
    side: Side,
    cert: Option<&PoleReport>,
) -> Result<AsymptoticExpansion> {
    if let (Side::Plus, Some(rep)) = (side, cert) {
        let mu = rep.multiplicities.mu_beta.unwrap_or(1);
        if rep.strip.beta == q_int(-1) && mu != 2 {
            return Err(Error::NotCertified(format!(
                "beta = -1 with multiplicity {mu}"
            )));
        }
    }
    let s = split(z, p)?;
    let (r_side, facs) = s.part(side);
    // Offset between the expansion index j and the side index m.
    let shift = match side {
        Side::Plus => -s.sigma,
        Side::Minus => s.sigma,
    };
    let mut groups: BTreeMap<Q, Vec<Factor>> = BTreeMap::new();
    for f in facs {
        groups.entry(f.gamma(side)).or_default().push(f.clone());
    }
    let d_all = factor_poly(facs);
    let q0_end = match side {
        Side::Plus => s.sigma + s.q0.degree(),
        Side::Minus => -s.sigma,
    };
    let mut valid_from = q0_end.max(0) + 1;
    let mut terms = Vec::new();
    for (gamma, g) in groups {
        let dg = factor_poly(&g);
        let rest = (d_all.divrem(&dg)).0;
        let inv = rest
            .inverse_mod(&dg)
            .ok_or_else(|| Error::Invalid("pole groups not coprime".into()))?;
        let rg = (r_side * &inv).rem(&dg);
        if rg.is_zero() {
            continue;
        }
        let l = g.iter().fold(1i64, |acc, f| acc.lcm(&f.d));
        let mu: u32 = g.iter().map(|f| f.mult).sum();
        let growth = match side {
            Side::Plus => gamma.clone(),
            Side::Minus => -gamma.clone(),
        };
        let e_l = &growth * q_int(l);
        debug_assert!(e_l.is_integer());
        let base = q_pow(p, e_l.to_integer().try_into().expect("exponent fits i64"));
        // R' = R_g (1 - base x^L)^mu / D_g is a polynomial; beyond its
        // degree the coefficients follow the family exactly.
        let mut one_minus = vec![Q::zero(); l as usize + 1];
        one_minus[0] = Q::one();
        one_minus[l as usize] = -base.clone();
        let (rp, rem) = (&rg * &QPoly::new(one_minus).pow(mu)).divrem(&dg);
        debug_assert!(rem.is_zero());
        let j_start = rp.degree().max(0) + 1;
        let start = (j_start - shift).max(1);
        valid_from = valid_from.max(start);
        let need = (start + shift) as usize + (l as usize) * (mu as usize + 2) + 1;
        let ser = rg.series_div(&dg, need);
        let coeff_at = |m: i64| -> Q {
            let j = m + shift;
            if j < 0 {
                Q::zero()
            } else {
                ser[j as usize].clone()
            }
        };
        let mut families = Vec::with_capacity(l as usize);
        for rho in 0..l {
            let mut k0 = Integer::div_ceil(&(start - rho), &l);
            if k0 < 0 {
                k0 = 0;
            }
            let ks: Vec<i64> = (k0..k0 + mu as i64).collect();
            let xs: Vec<Q> = ks.iter().map(|&k| q_int(k)).collect();
            let ys: Vec<Q> = ks
                .iter()
                .map(|&k| coeff_at(rho + k * l) / pow_q(&base, k))
                .collect();
            let fam = QPoly::new(interpolate(&xs, &ys));
            let kx = k0 + mu as i64;
            let check = coeff_at(rho + kx * l) / pow_q(&base, kx);
            if fam.eval(&q_int(kx)) != check {
                return Err(Error::Invalid("asymptotic family failed verification".into()));
            }
            families.push(fam.coeffs().to_vec());
        }
        let j = families
            .iter()
            .map(|f| f.len().saturating_sub(1) as u32)
            .max()
            .unwrap_or(0);
        terms.push(AsymptoticTerm {
            gamma,
            growth,
            j,
            period: l,
            base,
            start,
            families,
        });
    }
    terms.sort_by(|a, b| b.growth.cmp(&a.growth));
    Ok(AsymptoticExpansion {
        side,
        p,
        valid_from,
        terms,
    })
}
