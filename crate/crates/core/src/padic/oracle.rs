//! Level-set volumes and twisted zeta coefficients over `Q_p` by
//! enumeration.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_field::check_prime;
use crate::laurent::{Exp, LaurentPolynomial};
use crate::padic::cells::ball_volumes;
use crate::padic::characters::{weighted_sum, CharacterGroup};
use crate::padic::complex::ComplexValue;
use crate::padic::phi::{Coord, Phi, Region};
use crate::padic::refine::{refine_full, Histogram, RefineParams, Stratum};
use crate::rational::{fmt_q, q_int, q_pow, Q};
use crate::series::ValuationSpectrum;

#[derive(Clone, Copy, Debug)]
pub struct OracleParams {
    /// Volumes are reported for `|n| <= m`.
    pub m: i64,
    /// Deepest residue level explored by box refinement.
    pub depth_cap: u32,
    /// Strata farther than this (in `|k - low|`) from the corner of an
    /// unbounded region are not enumerated.
    pub strata_cap: i64,
    pub budget: usize,
}

impl OracleParams {
    pub fn new(m: i64) -> Self {
        OracleParams {
            m,
            depth_cap: (m.max(0) as u32) + 4,
            strata_cap: 2 * m.max(0) + 8,
            budget: 4_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    /// Closed-form sums over the cells of the valuation fan.
    Cells,
    /// Box refinement of finitely many strata.
    Strata,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub spectrum: ValuationSpectrum,
    pub methods: Vec<Method>,
}

impl OracleReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.spectrum.to_json();
        v["methods"] = serde_json::to_value(&self.methods).unwrap();
        v
    }
}

fn check_inputs(f: &LaurentPolynomial, phi: &Phi, p: u64) -> Result<()> {
    check_prime(p)?;
    if f.is_zero() {
        return Err(Error::ConstantPolynomial);
    }
    phi.check(p)
}

fn stratum_mass(region: &Region, k: Exp, p: u64) -> Q {
    let mut m = q_pow(p, -k[0] - k[1]);
    for c in region {
        m *= match *c {
            Coord::Residue { k, .. } => q_pow(p, -(k as i64)),
            _ => Q::one() - q_pow(p, -1),
        };
    }
    m
}

/// Valuation vectors of the strata of a region, nearest the corner first,
/// up to `cap` away from it.
fn strata(region: &Region, cap: i64) -> Vec<Exp> {
    let range = |c: &Coord| -> (i64, i64) {
        match *c {
            Coord::Ball { a } => (a, a + cap),
            Coord::Units { a } | Coord::Residue { a, .. } => (a, a),
        }
    };
    let (r0, r1) = (range(&region[0]), range(&region[1]));
    let low = r0.0 + r1.0;
    let mut out = Vec::new();
    for k0 in r0.0..=r0.1 {
        for k1 in r1.0..=r1.1 {
            if k0 + k1 - low <= cap {
                out.push([k0, k1]);
            }
        }
    }
    out.sort_by_key(|k| (k[0] + k[1], k[0]));
    out
}

/// Whether every stratum beyond `cap` has `ord f > hi`, which follows when
/// all exponents are nonnegative and the first strata past the cap on each
/// unbounded axis already exceed `hi`.
fn tail_outside(f: &LaurentPolynomial, region: &Region, p: u64, cap: i64, hi: i64) -> bool {
    if f.support().iter().any(|l| l[0] < 0 || l[1] < 0) {
        return false;
    }
    let low = [region[0].low(), region[1].low()];
    (0..2).all(|i| {
        if !matches!(region[i], Coord::Ball { .. }) {
            return true;
        }
        let mut k = low;
        k[i] += cap + 1;
        Stratum::new(f, p, k).lower_bound() > hi
    })
}

/// Histogram of one region by refining its strata one at a time.
pub fn region_histogram(
    f: &LaurentPolynomial,
    region: &Region,
    p: u64,
    rp: RefineParams,
    strata_cap: i64,
) -> Result<Histogram> {
    let bounded = region.iter().all(|c| !matches!(c, Coord::Ball { .. }));
    let mut cap = if bounded { 0 } else { strata_cap };
    if !bounded {
        if let Some(c) = (0..=strata_cap).find(|&c| tail_outside(f, region, p, c, rp.hi)) {
            cap = c;
        }
    }
    let conds = [cond_of(&region[0]), cond_of(&region[1])];
    let mut h = Histogram::default();
    let mut covered = Q::zero();
    for k in strata(region, cap) {
        let mass = stratum_mass(region, k, p);
        covered += &mass;
        let st = Stratum::new(f, p, k);
        if st.lower_bound() > rp.hi {
            h.outside += mass;
            continue;
        }
        h.merge(&refine_full(f, p, k, conds, rp)?);
    }
    let rest = region[0].measure(p) * region[1].measure(p) - covered;
    if !rest.is_zero() {
        if tail_outside(f, region, p, cap, rp.hi) {
            h.outside += rest;
        } else {
            h.unresolved += rest;
        }
    }
    Ok(h)
}

fn cond_of(c: &Coord) -> Option<(u64, u32)> {
    match *c {
        Coord::Residue { c, k, .. } => Some((c, k)),
        _ => None,
    }
}

/// `Ball(a)` and `Units(a) = Ball(a) - Ball(a + 1)` as signed balls.
fn signed_balls(region: &Region) -> Option<Vec<(i64, Exp)>> {
    let parts = |c: &Coord| -> Option<Vec<(i64, i64)>> {
        match *c {
            Coord::Ball { a } if a >= 0 => Some(vec![(1, a)]),
            Coord::Units { a } if a >= 0 => Some(vec![(1, a), (-1, a + 1)]),
            _ => None,
        }
    };
    let (x, y) = (parts(&region[0])?, parts(&region[1])?);
    let mut out = Vec::new();
    for (sx, ax) in &x {
        for (sy, ay) in &y {
            out.push((sx * sy, [*ax, *ay]));
        }
    }
    Some(out)
}

fn add_histogram(spec: &mut ValuationSpectrum, h: &Histogram, p: u64, m: i64) {
    for n in -m..=m {
        spec.add(n, h.volume_at(p, n));
    }
    spec.unresolved += &h.unresolved;
}

/// Volumes `vol{x in supp Phi : ord f(x) = n}` for `|n| <= M`.
pub fn valuation_spectrum_bruteforce(
    f: &LaurentPolynomial,
    phi: &Phi,
    p: u64,
    params: OracleParams,
) -> Result<OracleReport> {
    check_inputs(f, phi, p)?;
    let m = params.m;
    let mut spec = ValuationSpectrum::new(m);
    let mut methods = Vec::new();
    let rp = RefineParams {
        hi: m,
        cond: 0,
        depth_cap: params.depth_cap,
        budget: params.budget,
    };
    for region in &phi.regions {
        let has_ball = region.iter().any(|c| matches!(c, Coord::Ball { .. }));
        let mut done = false;
        if has_ball {
            if let Some(balls) = signed_balls(region) {
                let mut acc = BTreeMap::<i64, Q>::new();
                let mut unresolved = Q::zero();
                let mut ok = true;
                for (sign, e) in balls {
                    match ball_volumes(f, p, e, -m, m, params.depth_cap)? {
                        Some(cv) => {
                            for (n, v) in cv.volumes {
                                *acc.entry(n).or_insert_with(Q::zero) += q_int(sign) * v;
                            }
                            unresolved += cv.unresolved;
                        }
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    for (n, v) in acc {
                        spec.add(n, v);
                    }
                    spec.unresolved += unresolved;
                    methods.push(Method::Cells);
                    done = true;
                }
            }
        }
        if !done {
            let h = region_histogram(f, region, p, rp, params.strata_cap)?;
            add_histogram(&mut spec, &h, p, m);
            methods.push(Method::Strata);
        }
    }
    Ok(OracleReport { spectrum: spec, methods })
}

/// Enumerated data from which `Coeff_{t^n} Z(s, chi)` is read for every
/// character of conductor at most `cond`.
#[derive(Clone, Debug)]
pub struct TwistedData {
    pub p: u64,
    pub cond: u32,
    pub hi: i64,
    pub histogram: Histogram,
}

impl TwistedData {
    /// Exact `Coeff_{t^n} Z(s, chi_triv)`.
    pub fn trivial(&self, n: i64) -> Q {
        self.histogram.volume_at(self.p, n)
    }

    /// `Coeff_{t^n} Z(s, chi_k)`; needs `conductor(k) <= cond` and `n <= hi`.
    pub fn coefficient(&self, grp: &CharacterGroup, k: u128, n: i64) -> Result<ComplexValue> {
        let c = grp.conductor(k);
        if c == 0 {
            return Ok(ComplexValue::from_q(&self.trivial(n)));
        }
        if c > self.cond {
            return Err(Error::Invalid(format!(
                "conductor {c} exceeds the refinement precision {}",
                self.cond
            )));
        }
        let pc = crate::padic::modarith::ppow(self.p, c);
        let mut by_res: BTreeMap<u128, Q> = BTreeMap::new();
        for ((ord, w, r), mass) in self.histogram.exact.range((n, 0, 0)..=(n, u32::MAX, u128::MAX)) {
            debug_assert_eq!(*ord, n);
            if *w >= c {
                *by_res.entry(r % pc).or_insert_with(Q::zero) += mass;
            }
        }
        Ok(weighted_sum(grp, k, by_res.iter()))
    }

    pub fn error_mass(&self) -> Q {
        self.histogram.unresolved.clone()
    }

    pub fn to_json(&self, grp: &CharacterGroup, k: u128, lo: i64) -> Result<serde_json::Value> {
        let mut rows = Vec::new();
        for n in lo..=self.hi {
            let v = self.coefficient(grp, k, n)?;
            rows.push(serde_json::json!({"n": n, "re": v.re, "im": v.im, "err": v.err}));
        }
        Ok(serde_json::json!({
            "character": k.to_string(),
            "conductor": grp.conductor(k),
            "coefficients": rows,
            "unresolved": fmt_q(&self.histogram.unresolved),
        }))
    }
}

/// Refine until the first `cond` digits of the angular component of `f`
/// are known wherever they matter, for all `ord f <= hi`.
pub fn zeta_coefficients_bruteforce(
    f: &LaurentPolynomial,
    phi: &Phi,
    p: u64,
    cond: u32,
    hi: i64,
    params: OracleParams,
) -> Result<TwistedData> {
    check_inputs(f, phi, p)?;
    let rp = RefineParams {
        hi,
        cond,
        depth_cap: params.depth_cap.max(cond + 1),
        budget: params.budget,
    };
    let mut histogram = Histogram::default();
    for region in &phi.regions {
        histogram.merge(&region_histogram(f, region, p, rp, params.strata_cap)?);
    }
    Ok(TwistedData { p, cond, hi, histogram })
}
