//! First-quadrant zeta function from the fan data, candidate poles and
//! their multiplicities.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finite_field::{admissible_reduction, count_face, require_nondegenerate};
use crate::laurent::{Exp, LaurentPolynomial};
use crate::polytope::{
    attainable_fan, det, dot, fundamental_lattice_points, newton_polytope, norm1, Cone, Face, Fan,
    NewtonPolytope,
};
use crate::qt::{LinearN, RationalQT};
use crate::rational::{fmt_q, Q};

/// Which constant term to use in `L_tau` for faces that carry a count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LForm {
    /// `(q-1)^2`, the form that integrates to the right total mass.
    #[default]
    Standard,
    /// `q^2 - 1`, as typeset in the worked example.
    Printed,
}

/// `q^-2((q-1)^2 - N(1-t)/(1-q^-1 t))` with numeric `N`.
pub fn l_tau(n: u64) -> RationalQT {
    l_tau_symbolic(LForm::Standard, true).specialize_single(n)
}

struct LParts {
    constant: RationalQT,
    n_coeff: RationalQT,
}

impl LParts {
    fn specialize_single(&self, n: u64) -> RationalQT {
        self.constant.add(&self.n_coeff.scale(n as i64))
    }
}

fn l_tau_symbolic(form: LForm, has_count: bool) -> LParts {
    let constant = match (form, has_count) {
        (LForm::Printed, true) => RationalQT::from_parts(&[(1, 0, 0), (-1, -2, 0)], &[]),
        _ => RationalQT::from_parts(&[(1, 0, 0), (-2, -1, 0), (1, -2, 0)], &[]),
    };
    let n_coeff = RationalQT::from_parts(&[(-1, -2, 0), (1, -2, 1)], &[(1, 1, 1)]);
    LParts { constant, n_coeff }
}

/// `L_tau` with the count of `face` kept symbolic (vertices carry no count).
pub fn l_tau_for_face(face: &Face, form: LForm) -> LinearN {
    let has_count = face.dim > 0;
    let parts = l_tau_symbolic(form, has_count);
    let mut out = LinearN::from_const(parts.constant);
    if has_count {
        out.coeffs.insert(face.label(), parts.n_coeff);
    }
    out
}

/// `S_tau` for a ray or a simplicial two-dimensional cone.
pub fn s_tau(c: &Cone, p: &NewtonPolytope) -> RationalQT {
    let mut num = RationalQT::zero();
    for h in fundamental_lattice_points(c) {
        num = num.add(&RationalQT::monomial(1, norm1(h), -p.d_value(h)));
    }
    let mut shift = (0, 0);
    let mut den = Vec::new();
    for &a in &c.gens {
        let (e, d) = (norm1(a), p.d_value(a));
        shift.0 -= e;
        shift.1 += d;
        den.push((e, d, 1));
    }
    num.shift(shift.0, shift.1)
        .mul(&RationalQT::from_parts(&[(1, 0, 0)], &den))
}

#[derive(Clone, Debug)]
pub struct ZetaRow {
    /// Empty for the row of the whole polytope.
    pub generators: Vec<Exp>,
    pub face: Face,
    pub l: LinearN,
    pub s: RationalQT,
}

#[derive(Clone, Debug)]
pub struct ZetaResult {
    pub rows: Vec<ZetaRow>,
    pub total: LinearN,
    /// Counts used when a prime was given.
    pub counts: Option<BTreeMap<String, u64>>,
    pub p: Option<u64>,
}

impl ZetaResult {
    /// The total with all counts substituted. Fails in symbolic mode.
    pub fn numeric(&self) -> Result<RationalQT> {
        match &self.counts {
            Some(c) => self.total.specialize(c),
            None => Err(Error::Invalid("symbolic result has no numeric form".into())),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "cone": r.generators,
                    "face": r.face.label(),
                    "face_points": r.face.points,
                    "L": r.l.to_json(),
                    "L_text": r.l.to_string(),
                    "S": r.s.to_json(),
                    "S_text": r.s.to_string(),
                })
            })
            .collect();
        let mut out = serde_json::json!({
            "rows": rows,
            "total": self.total.to_json(),
        });
        if let (Some(c), Some(p)) = (&self.counts, self.p) {
            out["p"] = serde_json::json!(p);
            out["counts"] = serde_json::json!(c);
            if let Ok(z) = self.numeric() {
                out["numeric"] = z.to_json();
                out["numeric_text"] = serde_json::json!(z.to_string());
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZetaMode {
    Symbolic,
    Prime(u64),
}

/// Counts `N_tau` at `p` for the faces that need one.
pub fn counts_at(f: &LaurentPolynomial, poly: &NewtonPolytope, p: u64) -> Result<BTreeMap<String, u64>> {
    let fbar = admissible_reduction(f, p)?;
    let mut out = BTreeMap::new();
    for face in poly.faces() {
        if face.dim > 0 {
            out.insert(face.label(), count_face(&fbar, &face));
        }
    }
    Ok(out)
}

/// Sum over the attainable fan of `L_tau S_tau`, plus the term of the
/// whole polytope.
pub fn zeta_first_quadrant(f: &LaurentPolynomial, mode: ZetaMode, form: LForm) -> Result<ZetaResult> {
    let poly = newton_polytope(f)?;
    let fan = attainable_fan(&poly);
    let counts = match mode {
        ZetaMode::Symbolic => None,
        ZetaMode::Prime(p) => {
            require_nondegenerate(f, p)?;
            Some(counts_at(f, &poly, p)?)
        }
    };
    let gamma = poly.whole();
    let mut rows = vec![ZetaRow {
        generators: vec![],
        face: gamma.clone(),
        l: l_tau_for_face(&gamma, form),
        s: RationalQT::one(),
    }];
    for c in &fan.cones {
        rows.push(ZetaRow {
            generators: c.gens.clone(),
            face: c.face.clone(),
            l: l_tau_for_face(&c.face, form),
            s: s_tau(c, &poly),
        });
    }
    let mut total = LinearN::zero();
    for r in &rows {
        total = total.add(&r.l.mul_qt(&r.s));
    }
    Ok(ZetaResult {
        rows,
        total,
        counts,
        p: match mode {
            ZetaMode::Prime(p) => Some(p),
            ZetaMode::Symbolic => None,
        },
    })
}

/// `q^-|k| t^d(k) L_F(k)` for a single lattice point.
fn stratum_term(poly: &NewtonPolytope, k: Exp, form: LForm) -> LinearN {
    let face = poly.first_meet_locus(k);
    l_tau_for_face(&face, form).mul_qt(&RationalQT::monomial(1, -norm1(k), poly.d_value(k)))
}

/// Sum of stratum terms over `start + j*dir`, `j >= 0`, with `dir` a
/// coordinate vector.
fn line_sum(poly: &NewtonPolytope, fan: &Fan, start: Exp, dir: Exp, form: LForm) -> LinearN {
    let mut brk: i64 = 0;
    for w in fan.edges() {
        let dd = det(w, dir);
        if dd != 0 {
            let ds = det(w, start);
            // sign change of det(w, start + j dir) at j = -ds/dd
            let j = Integer::div_floor(&-ds, &dd);
            brk = brk.max(j + 1);
        }
    }
    let mut acc = LinearN::zero();
    for j in 0..brk {
        let k = [start[0] + j * dir[0], start[1] + j * dir[1]];
        acc = acc.add(&stratum_term(poly, k, form));
    }
    let k = [start[0] + brk * dir[0], start[1] + brk * dir[1]];
    let face = poly.first_meet_locus(k);
    let slope = dot(dir, face.points[0]);
    let tail = stratum_term(poly, k, form).mul_qt(&RationalQT::geometric(norm1(dir), slope));
    acc.add(&tail)
}

/// Zeta function of `|f|^s` over `(p^e1 Z_p) x (p^e2 Z_p)`, `e >= 0`.
pub fn zeta_ball(f: &LaurentPolynomial, e: Exp, mode: ZetaMode, form: LForm) -> Result<ZetaResult> {
    if e[0] < 0 || e[1] < 0 {
        return Err(Error::NotApplicable(
            "symbolic ball formula needs nonnegative offsets".into(),
        ));
    }
    let base = zeta_first_quadrant(f, mode, form)?;
    let poly = newton_polytope(f)?;
    let fan = attainable_fan(&poly);
    let mut total = base.total.clone();
    for r in 0..e[0] {
        total = total.sub(&line_sum(&poly, &fan, [r, 0], [0, 1], form));
    }
    for c in 0..e[1] {
        total = total.sub(&line_sum(&poly, &fan, [e[0], c], [1, 0], form));
    }
    Ok(ZetaResult {
        rows: Vec::new(),
        total,
        counts: base.counts,
        p: base.p,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoleDatum {
    #[serde(with = "crate::rational::q_string")]
    pub real: Q,
    pub period_d: i64,
    pub mult: u32,
    /// Edge vector, or `None` for the family at `-1`.
    pub source: Option<Exp>,
}

/// Convergence strip data. `alpha`/`alpha_max` are `None` when `A` is empty
/// (no upper bound).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceStrip {
    #[serde(with = "crate::rational::q_string")]
    pub beta: Q,
    #[serde(serialize_with = "ser_opt_q")]
    pub alpha: Option<Q>,
    #[serde(serialize_with = "ser_opt_q")]
    pub alpha_max: Option<Q>,
    #[serde(serialize_with = "ser_q_vec")]
    pub a_set: Vec<Q>,
    #[serde(serialize_with = "ser_q_vec")]
    pub b_set: Vec<Q>,
}

fn ser_opt_q<S: serde::Serializer>(x: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_str(&fmt_q(v)),
        None => s.serialize_none(),
    }
}

fn ser_q_vec<S: serde::Serializer>(x: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(x.len()))?;
    for v in x {
        seq.serialize_element(&fmt_q(v))?;
    }
    seq.end()
}

#[derive(Clone, Debug, Serialize)]
pub struct PoleReport {
    pub poles: Vec<PoleDatum>,
    pub strip: ConvergenceStrip,
    pub multiplicities: Multiplicities,
}

impl PoleReport {
    pub fn real_parts(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self.poles.iter().map(|p| p.real.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Multiplicities {
    pub mu_alpha: Option<u32>,
    pub mu_beta: Option<u32>,
    pub mu_alpha_max: Option<u32>,
}

fn ratio(a: Exp, d: i64) -> Q {
    Q::new(BigInt::from(norm1(a)), BigInt::from(-d))
}

/// `P(a)` for every edge, the `-1` family and the strip endpoints.
pub fn candidate_poles(fan: &Fan, poly: &NewtonPolytope) -> PoleReport {
    let mut a_set = Vec::new();
    let mut b_set = Vec::new();
    for a in fan.edges() {
        let d = poly.d_value(a);
        if d < 0 {
            a_set.push(ratio(a, d));
        } else if d > 0 {
            b_set.push(ratio(a, d));
        }
    }
    for s in [&mut a_set, &mut b_set] {
        s.sort();
        s.dedup();
    }
    let minus_one = Q::from_integer((-1).into());
    let beta = b_set
        .iter()
        .cloned()
        .chain(std::iter::once(minus_one.clone()))
        .max()
        .unwrap();
    let strip = ConvergenceStrip {
        beta,
        alpha: a_set.first().cloned(),
        alpha_max: a_set.last().cloned(),
        a_set,
        b_set,
    };
    let mults = pole_multiplicities(fan, poly, &strip);
    let mut poles = Vec::new();
    for a in fan.edges() {
        let d = poly.d_value(a);
        if d == 0 {
            continue;
        }
        let real = ratio(a, d);
        let mult = multiplicity_of(fan, poly, &real);
        poles.push(PoleDatum {
            real,
            period_d: d.abs(),
            mult,
            source: Some(a),
        });
    }
    poles.push(PoleDatum {
        real: minus_one,
        period_d: 1,
        mult: 1,
        source: None,
    });
    PoleReport {
        poles,
        strip,
        multiplicities: mults,
    }
}

/// Largest number of edges of a single cone whose value `|a|/(-d(a))`
/// equals `target`; 0 if no edge attains it.
fn multiplicity_of(fan: &Fan, poly: &NewtonPolytope, target: &Q) -> u32 {
    let hits = |a: Exp| {
        let d = poly.d_value(a);
        d != 0 && &ratio(a, d) == target
    };
    let mut best = 0;
    for c in &fan.cones {
        let n = c.gens.iter().filter(|&&a| hits(a)).count() as u32;
        best = best.max(n);
    }
    best
}

pub fn pole_multiplicities(fan: &Fan, poly: &NewtonPolytope, strip: &ConvergenceStrip) -> Multiplicities {
    let of = |x: &Option<Q>| x.as_ref().map(|v| multiplicity_of(fan, poly, v));
    let mu_beta = if strip.b_set.is_empty() {
        None
    } else {
        Some(multiplicity_of(fan, poly, &strip.beta))
    };
    Multiplicities {
        mu_alpha: of(&strip.alpha),
        mu_beta,
        mu_alpha_max: of(&strip.alpha_max),
    }
}

/// Smallest prime at which `f` is non-degenerate, searched from 2.
pub fn smallest_good_prime(f: &LaurentPolynomial) -> Result<u64> {
    crate::finite_field::find_good_prime(f, 2, crate::finite_field::DEFAULT_PRIME_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;
    use crate::polytope::refine_to_simple;
    use crate::rational::q_frac;

    #[test]
    fn vertex_l_is_unit_square() {
        let l = l_tau(0);
        let expect = RationalQT::from_parts(&[(1, 0, 0), (-2, -1, 0), (1, -2, 0)], &[]);
        assert!(l.equals(&expect));
    }

    #[test]
    fn poles_of_g() {
        let g = parse("x^-3 + y^-2 + y^4").unwrap();
        let poly = newton_polytope(&g).unwrap();
        let fan = attainable_fan(&poly);
        let rep = candidate_poles(&fan, &poly);
        assert_eq!(
            rep.real_parts(),
            vec![q_frac(-1, 1), q_frac(1, 3), q_frac(1, 2), q_frac(5, 6)]
        );
        assert_eq!(rep.strip.alpha, Some(q_frac(1, 3)));
        assert_eq!(rep.strip.alpha_max, Some(q_frac(5, 6)));
        assert_eq!(rep.strip.beta, q_frac(-1, 1));
        assert_eq!(rep.multiplicities.mu_alpha, Some(1));
        assert_eq!(rep.multiplicities.mu_beta, None);
        let fp = refine_to_simple(&fan);
        let rp = candidate_poles(&fp, &poly);
        assert!(rp.real_parts().contains(&q_frac(3, 4)));
        assert!(rp.real_parts().contains(&q_frac(2, 3)));
    }

    #[test]
    fn double_multiplicity() {
        let f = parse("x^-1*y^-1 + x + y").unwrap();
        let poly = newton_polytope(&f).unwrap();
        let fan = attainable_fan(&poly);
        let rep = candidate_poles(&fan, &poly);
        assert_eq!(rep.strip.alpha, Some(q_frac(1, 1)));
        assert_eq!(rep.multiplicities.mu_alpha, Some(2));
    }

    #[test]
    fn measure_identity_symbolic() {
        let g = parse("x^-3 + y^-2 + y^4").unwrap();
        let z = zeta_first_quadrant(&g, ZetaMode::Symbolic, LForm::Standard).unwrap();
        let at1 = z.total.at_t_one().unwrap();
        assert!(at1.constant.equals(&RationalQT::one()));
        assert!(at1.coeffs.is_empty());
    }

    #[test]
    fn ball_one_closed_form() {
        let f = parse("x^-3 + y^2 + y^4").unwrap();
        let z = zeta_ball(&f, [1, 1], ZetaMode::Symbolic, LForm::Standard).unwrap();
        // (1 - q^-1) q^-2 t^-3 / (1 - q^-1 t^-3)
        let expect = RationalQT::from_parts(&[(1, -2, -3), (-1, -3, -3)], &[(1, -3, 1)]);
        assert!(z.total.coeffs.values().all(|v| v.is_zero()));
        assert!(z.total.constant.equals(&expect), "{}", z.total.constant);
    }
}
