//! Adaptive residue-box refinement on a single valuation stratum.
//!
//! On the stratum `x = (p^a1 u1, p^a2 u2)` with `u` units, `f(x) = p^D F(u)`
//! where `F` has p-integral coefficients, at least one of them a unit.
//! A box `c + p^k Z_p^2` is settled once `ord F` is constant on it (or
//! `F` is a submersion there), and refined into `p^2` children otherwise.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::laurent::{Exp, LaurentPolynomial};
use crate::padic::modarith::{add_mod, inv_mod, mul_mod, pow_mod, ppow, val_mod};
use crate::rational::{q_int, q_mod, q_pow, unit_part, vp, Q};

/// Where `ord f` lands on a refined piece.
///
/// `exact[(n, w, r)]` is mass with `ord f = n` and unit part `= r mod p^w`.
/// `tails[s]` is mass on which `f` is uniformly distributed over `p^s Z_p`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    pub exact: BTreeMap<(i64, u32, u128), Q>,
    pub tails: BTreeMap<i64, Q>,
    pub unresolved: Q,
    /// Mass certified to have `ord f > hi`.
    pub outside: Q,
}

fn bump<K: Ord>(m: &mut BTreeMap<K, Q>, k: K, v: Q) {
    if v.is_zero() {
        return;
    }
    let slot = m.entry(k).or_insert_with(Q::zero);
    *slot += v;
}

impl Histogram {
    pub fn merge(&mut self, other: &Histogram) {
        for (k, v) in &other.exact {
            bump(&mut self.exact, *k, v.clone());
        }
        for (k, v) in &other.tails {
            bump(&mut self.tails, *k, v.clone());
        }
        self.unresolved += &other.unresolved;
        self.outside += &other.outside;
    }

    /// Volume with `ord f = n`, for `n <= hi`.
    pub fn volume_at(&self, p: u64, n: i64) -> Q {
        let mut v = Q::zero();
        for ((ord, _, _), m) in self.exact.range((n, 0, 0)..=(n, u32::MAX, u128::MAX)) {
            debug_assert_eq!(*ord, n);
            v += m;
        }
        let keep = Q::one() - q_pow(p, -1);
        for (s, m) in self.tails.range(..=n) {
            v += m * &keep * q_pow(p, s - n);
        }
        v
    }

    pub fn total(&self) -> Q {
        let mut t = self.unresolved.clone() + &self.outside;
        for v in self.exact.values() {
            t += v;
        }
        for v in self.tails.values() {
            t += v;
        }
        t
    }

    pub fn min_ord(&self) -> Option<i64> {
        let e = self.exact.keys().next().map(|k| k.0);
        let t = self.tails.keys().next().copied();
        match (e, t) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

/// `F` on one stratum: terms `p^gap * unit * u^l`.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub p: u64,
    pub k: Exp,
    pub shift: i64,
    pub terms: Vec<(Exp, i64, Q)>,
}

impl Stratum {
    pub fn new(f: &LaurentPolynomial, p: u64, k: Exp) -> Self {
        let raw: Vec<(Exp, i64, Q)> = f
            .terms()
            .iter()
            .map(|(l, c)| (*l, k[0] * l[0] + k[1] * l[1] + vp(c, p), unit_part(c, p)))
            .collect();
        let shift = raw.iter().map(|t| t.1).min().unwrap_or(0);
        Stratum {
            p,
            k,
            shift,
            terms: raw.into_iter().map(|(l, w, u)| (l, w - shift, u)).collect(),
        }
    }

    /// `ord f >= shift` on the whole stratum.
    pub fn lower_bound(&self) -> i64 {
        self.shift
    }

    /// Coefficients `p^gap * unit` modulo `p^e`, dropping those that vanish.
    fn residues(&self, e: u32) -> Vec<(Exp, u128)> {
        let modulus = ppow(self.p, e);
        self.terms
            .iter()
            .filter(|t| t.1 < e as i64)
            .map(|(l, gap, u)| {
                let um = q_mod(u, modulus).expect("unit coefficient");
                (*l, mul_mod(ppow(self.p, *gap as u32), um, modulus))
            })
            .collect()
    }
}

fn mono(u: [u128; 2], inv: [u128; 2], l: Exp, m: u128) -> u128 {
    let pw = |b: u128, ib: u128, e: i64| {
        if e >= 0 {
            pow_mod(b, e as u128, m)
        } else {
            pow_mod(ib, (-e) as u128, m)
        }
    };
    mul_mod(pw(u[0], inv[0], l[0]), pw(u[1], inv[1], l[1]), m)
}

/// Starting classes for one coordinate: units modulo `p^level` meeting the
/// optional congruence `u = c mod p^k`.
pub fn start_classes(p: u64, level: u32, cond: Option<(u64, u32)>) -> Vec<u128> {
    let m = ppow(p, level);
    match cond {
        None => (1..m).filter(|x| x % p as u128 != 0).collect(),
        Some((c, k)) => {
            let step = ppow(p, k);
            let mut v = Vec::new();
            let mut x = c as u128 % step;
            while x < m {
                v.push(x);
                x += step;
            }
            v
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RefineParams {
    /// Mass with `ord f > hi` is only recorded as outside.
    pub hi: i64,
    /// Residue precision needed on non-uniform pieces (0: valuations only).
    pub cond: u32,
    pub depth_cap: u32,
    pub budget: usize,
}

impl RefineParams {
    pub fn valuations(hi: i64, depth_cap: u32) -> Self {
        RefineParams {
            hi,
            cond: 0,
            depth_cap,
            budget: 4_000_000,
        }
    }
}

enum Outcome {
    Exact(i64, u32, u128),
    Tail(i64),
    Outside,
    Split,
}

/// Refine the stratum over `u1 in cls[0]`, `u2 in cls[1]` (classes mod
/// `p^level`). Masses are absolute: the stratum factor `p^-(a1+a2)` is
/// included.
pub fn refine_stratum(
    st: &Stratum,
    level: u32,
    cls: [&[u128]; 2],
    params: RefineParams,
) -> Result<Histogram> {
    if level == 0 {
        return Err(Error::Invalid("refinement starts at level >= 1".into()));
    }
    let p = st.p;
    let mut h = Histogram::default();
    let scale = q_pow(p, -st.k[0] - st.k[1]);
    let mut boxes: Vec<[u128; 2]> = Vec::with_capacity(cls[0].len() * cls[1].len());
    for &a in cls[0] {
        for &b in cls[1] {
            boxes.push([a, b]);
        }
    }
    let mut k = level;
    let mut used = 0usize;
    while !boxes.is_empty() {
        let box_mass = &scale * q_pow(p, -2 * k as i64);
        if k > params.depth_cap || used + boxes.len() > params.budget {
            h.unresolved += box_mass * q_int(boxes.len() as i64);
            break;
        }
        used += boxes.len();
        let m1 = ppow(p, k + 1);
        let pk = ppow(p, k);
        let terms = st.residues(k + 1);
        let grad_terms: Vec<(Exp, u128)> = st
            .terms
            .iter()
            .filter(|t| t.1 == 0)
            .map(|(l, _, u)| (*l, q_mod(u, p as u128).unwrap()))
            .collect();
        let d = st.shift;
        let outcomes: Vec<Outcome> = boxes
            .par_iter()
            .map(|&c| {
                let inv = [inv_mod(c[0], m1).unwrap(), inv_mod(c[1], m1).unwrap()];
                let mut val = 0u128;
                for (l, cm) in &terms {
                    val = add_mod(val, mul_mod(*cm, mono(c, inv, *l, m1), m1), m1);
                }
                let pp = p as u128;
                let cp = [c[0] % pp, c[1] % pp];
                let ip = [inv[0] % pp, inv[1] % pp];
                let mut g = [0u128; 2];
                for (l, cm) in &grad_terms {
                    let mv = mono(cp, ip, *l, pp);
                    for i in 0..2 {
                        if l[i] != 0 {
                            let li = (l[i].rem_euclid(p as i64)) as u128;
                            let t = mul_mod(mul_mod(*cm, mv, pp), mul_mod(li, ip[i], pp), pp);
                            g[i] = add_mod(g[i], t, pp);
                        }
                    }
                }
                let smooth = g[0] != 0 || g[1] != 0;
                let i = val_mod(val, p, k + 1);
                let unit_res = |w: u32| (val / ppow(p, i)) % ppow(p, w);
                if smooth {
                    if i < k {
                        if d + i as i64 > params.hi {
                            Outcome::Outside
                        } else {
                            Outcome::Exact(d + i as i64, k - i, unit_res(k - i))
                        }
                    } else if d + k as i64 > params.hi {
                        Outcome::Outside
                    } else {
                        Outcome::Tail(d + k as i64)
                    }
                } else if i <= k {
                    let w = k + 1 - i;
                    if d + i as i64 > params.hi {
                        Outcome::Outside
                    } else if w >= params.cond {
                        Outcome::Exact(d + i as i64, w, unit_res(w))
                    } else {
                        Outcome::Split
                    }
                } else if d + k as i64 + 1 > params.hi {
                    Outcome::Outside
                } else {
                    Outcome::Split
                }
            })
            .collect();
        let mut exact: BTreeMap<(i64, u32, u128), u64> = BTreeMap::new();
        let mut tails: BTreeMap<i64, u64> = BTreeMap::new();
        let mut outside = 0u64;
        let mut next = Vec::new();
        for (c, o) in boxes.iter().zip(outcomes) {
            match o {
                Outcome::Exact(n, w, r) => *exact.entry((n, w, r)).or_insert(0) += 1,
                Outcome::Tail(s) => *tails.entry(s).or_insert(0) += 1,
                Outcome::Outside => outside += 1,
                Outcome::Split => {
                    for d0 in 0..p as u128 {
                        for d1 in 0..p as u128 {
                            next.push([c[0] + d0 * pk, c[1] + d1 * pk]);
                        }
                    }
                }
            }
        }
        for (key, n) in exact {
            bump(&mut h.exact, key, &box_mass * q_int(n as i64));
        }
        for (s, n) in tails {
            bump(&mut h.tails, s, &box_mass * q_int(n as i64));
        }
        h.outside += &box_mass * q_int(outside as i64);
        boxes = next;
        k += 1;
    }
    Ok(h)
}

/// Refine the whole stratum `p^k (Z_p^x)^2`, optionally with per-coordinate
/// congruences `u_i = c_i mod p^k_i`.
pub fn refine_full(
    f: &LaurentPolynomial,
    p: u64,
    k: Exp,
    conds: [Option<(u64, u32)>; 2],
    params: RefineParams,
) -> Result<Histogram> {
    let st = Stratum::new(f, p, k);
    let level = conds
        .iter()
        .map(|c| c.map(|x| x.1).unwrap_or(1))
        .max()
        .unwrap()
        .max(1);
    let c0 = start_classes(p, level, conds[0]);
    let c1 = start_classes(p, level, conds[1]);
    refine_stratum(&st, level, [&c0, &c1], params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;
    use crate::rational::q_frac;

    #[test]
    fn coordinate_function_on_units() {
        let f = parse("x").unwrap();
        let h = refine_full(&f, 5, [0, 0], [None, None], RefineParams::valuations(10, 20)).unwrap();
        assert_eq!(h.volume_at(5, 0), q_frac(16, 25));
        assert!(h.unresolved.is_zero());
    }

    #[test]
    fn smooth_tail() {
        // x + y on the unit torus: ord = 0 off the line, Hensel tail on it.
        let f = parse("x + y").unwrap();
        let h = refine_full(&f, 3, [0, 0], [None, None], RefineParams::valuations(6, 20)).unwrap();
        assert_eq!(h.volume_at(3, 0), q_frac(2, 9));
        assert_eq!(h.volume_at(3, 1), q_frac(2, 9) * q_frac(2, 3));
        assert_eq!(h.total(), q_frac(4, 9));
    }

    #[test]
    fn singular_point_refines() {
        // (x - 1)^2 + (y - 1)^2 has a single, singular, zero mod 3.
        let f = parse("x^2 + y^2 - 2x - 2y + 2").unwrap();
        let h = refine_full(&f, 3, [0, 0], [None, None], RefineParams::valuations(4, 12)).unwrap();
        assert!(h.unresolved.is_zero());
        assert_eq!(h.total(), q_frac(4, 9));
    }
}
