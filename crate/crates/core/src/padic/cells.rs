//! Exact level-set volumes on `(p^e1 Z_p) x (p^e2 Z_p)`, `e >= 0`, for
//! polynomials with p-unit coefficients.
//!
//! The valuation vectors `k >= e` are cut into the open cones and rays of
//! the fan generated by `e1`, `e2` and every tie direction of two support
//! points. On an open cone a single monomial dominates, so `ord f` is a
//! linear form in `k`; on a ray the reduced face function decides, via
//! Hensel's lemma, as long as all its torus zeros are smooth. The origin
//! stratum is refined box by box.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::finite_field::clear;
use crate::laurent::{Exp, LaurentPolynomial};
use crate::padic::refine::{refine_full, RefineParams};
use crate::polytope::{angle_cmp, det, dot, primitive};
use crate::rational::{q_int, q_pow, vp, Q};

/// Volumes `n -> vol{ord f = n}` for `lo <= n <= hi`.
#[derive(Clone, Debug, Default)]
pub struct CellVolumes {
    pub volumes: BTreeMap<i64, Q>,
    pub unresolved: Q,
}

/// `sum_{j in [lo, hi]} x^j` with `x > 0`; `None` bounds are infinite.
fn geometric(x: &Q, lo: Option<i64>, hi: Option<i64>) -> Q {
    let pw = |k: i64| -> Q {
        let mut r = Q::one();
        for _ in 0..k.unsigned_abs() {
            r *= x;
        }
        if k < 0 {
            r.recip()
        } else {
            r
        }
    };
    match (lo, hi) {
        (Some(a), Some(b)) => {
            if a > b {
                Q::zero()
            } else if x.is_one() {
                q_int(b - a + 1)
            } else {
                (pw(a) - pw(b + 1)) / (Q::one() - x)
            }
        }
        (Some(a), None) => {
            assert!(x < &Q::one(), "divergent geometric tail");
            pw(a) / (Q::one() - x)
        }
        (None, Some(b)) => {
            assert!(x > &Q::one(), "divergent geometric tail");
            pw(b) / (Q::one() - x.recip())
        }
        (None, None) => panic!("two-sided geometric sum"),
    }
}

/// A linear constraint `alpha + beta j > 0` (strict) or `>= 0`.
#[derive(Clone, Copy)]
struct Cons {
    alpha: i64,
    beta: i64,
    strict: bool,
}

/// `sum p^-|k|` over `k = kp + j v` subject to the constraints.
fn line_sum(p: u64, kp: Exp, v: Exp, cons: &[Cons]) -> Q {
    let mut lo: Option<i64> = None;
    let mut hi: Option<i64> = None;
    for c in cons {
        if c.beta == 0 {
            let ok = if c.strict { c.alpha > 0 } else { c.alpha >= 0 };
            if !ok {
                return Q::zero();
            }
        } else if c.beta > 0 {
            let bound = if c.strict {
                Integer::div_floor(&-c.alpha, &c.beta) + 1
            } else {
                Integer::div_ceil(&-c.alpha, &c.beta)
            };
            lo = Some(lo.map_or(bound, |x| x.max(bound)));
        } else {
            let nb = -c.beta;
            let bound = if c.strict {
                Integer::div_ceil(&c.alpha, &nb) - 1
            } else {
                Integer::div_floor(&c.alpha, &nb)
            };
            hi = Some(hi.map_or(bound, |x| x.min(bound)));
        }
    }
    let s = v[0] + v[1];
    let base = q_pow(p, -(kp[0] + kp[1]));
    base * geometric(&q_pow(p, -s), lo, hi)
}

fn wall_cons(a: Exp, b: Exp, e: Exp, kp: Exp, v: Exp) -> Vec<Cons> {
    vec![
        Cons { alpha: det(a, kp), beta: det(a, v), strict: true },
        Cons { alpha: det(kp, b), beta: det(v, b), strict: true },
        Cons { alpha: kp[0] - e[0], beta: v[0], strict: false },
        Cons { alpha: kp[1] - e[1], beta: v[1], strict: false },
    ]
}

/// Rays of the subdivision, counterclockwise from `e1` to `e2`.
fn candidate_rays(support: &[Exp]) -> Vec<Exp> {
    let mut rays = vec![[1, 0], [0, 1]];
    for (i, l) in support.iter().enumerate() {
        for m in &support[i + 1..] {
            let d = [l[0] - m[0], l[1] - m[1]];
            for w in [[d[1], -d[0]], [-d[1], d[0]]] {
                if w[0] > 0 && w[1] > 0 {
                    rays.push(primitive(w));
                }
            }
        }
    }
    rays.sort_by(|a, b| angle_cmp(*a, *b));
    rays.dedup();
    rays
}

/// Torus zeros of the reduced face function: (nonzero, smooth, singular).
fn face_counts(f: &LaurentPolynomial, face: &[Exp], p: u64) -> Result<(u64, u64, u64)> {
    let h = clear(&f.reduce_mod_p(p)?.restrict(face));
    let (hx, hy) = h.gradient();
    let mut n = (0, 0, 0);
    for x in 1..p {
        for y in 1..p {
            if h.eval(x, y) != 0 {
                n.0 += 1;
            } else if hx.eval(x, y) != 0 || hy.eval(x, y) != 0 {
                n.1 += 1;
            } else {
                n.2 += 1;
            }
        }
    }
    Ok(n)
}

/// Returns `None` when the exact method does not apply (a coefficient is
/// not a p-unit, `e` has a negative entry, or some ray's face function
/// has a singular zero mod p).
pub fn ball_volumes(
    f: &LaurentPolynomial,
    p: u64,
    e: Exp,
    lo: i64,
    hi: i64,
    depth_cap: u32,
) -> Result<Option<CellVolumes>> {
    if e[0] < 0 || e[1] < 0 || f.terms().values().any(|c| vp(c, p) != 0) {
        return Ok(None);
    }
    let support = f.support();
    let rays = candidate_rays(&support);
    let face_of = |w: Exp| -> (i64, Vec<Exp>) {
        let d = support.iter().map(|l| dot(w, *l)).min().unwrap();
        (d, support.iter().copied().filter(|l| dot(w, *l) == d).collect())
    };
    let unit = Q::one() - q_pow(p, -1);
    let mut out = CellVolumes::default();
    let mut add = |n: i64, v: Q| {
        if !v.is_zero() {
            *out.volumes.entry(n).or_insert_with(Q::zero) += v;
        }
    };

    for &w in &rays {
        // Strata k = j w with j >= j0 inside the ball.
        let mut j0 = 1i64;
        let mut empty = false;
        for i in 0..2 {
            if w[i] > 0 {
                j0 = j0.max(Integer::div_ceil(&e[i], &w[i]));
            } else if e[i] > 0 {
                empty = true;
            }
        }
        if empty {
            continue;
        }
        let (delta, face) = face_of(w);
        let (n0, n1, bad) = face_counts(f, &face, p)?;
        if bad > 0 {
            return Ok(None);
        }
        let s = w[0] + w[1];
        let x = q_pow(p, -s);
        let (n0, n1) = (q_int(n0 as i64), q_int(n1 as i64));
        for n in lo..=hi {
            // Level n reached on the nonvanishing classes.
            let mut v = Q::zero();
            if delta == 0 {
                if n == 0 {
                    v += &n0 * q_pow(p, -2) * geometric(&x, Some(j0), None);
                }
            } else if n % delta == 0 && n / delta >= j0 {
                v += &n0 * q_pow(p, -2 - (n / delta) * s);
            }
            // Smooth zeros: vol{ord F = i} = (1 - 1/p) p^(-1-i) per class.
            if !n1.is_zero() {
                let coef = &n1 * &unit * q_pow(p, -1 - n);
                let ratio = q_pow(p, delta - s);
                let range = if delta > 0 {
                    Some((Some(j0), Some(Integer::div_floor(&(n - 1), &delta))))
                } else if delta == 0 {
                    (n > 0).then_some((Some(j0), None))
                } else {
                    let jmin = Integer::div_floor(&n, &delta) + 1;
                    Some((Some(j0.max(jmin)), None))
                };
                if let Some((a, b)) = range {
                    v += coef * geometric(&ratio, a, b);
                }
            }
            add(n, v);
        }
    }

    let unit2 = &unit * &unit;
    for pair in rays.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = [a[0] + b[0], a[1] + b[1]];
        let (_, face) = face_of(mid);
        debug_assert_eq!(face.len(), 1);
        let l = face[0];
        if l == [0, 0] {
            let dab = det(a, b);
            let mut par = Q::zero();
            let xs = [0, a[0], b[0], a[0] + b[0]];
            let ys = [0, a[1], b[1], a[1] + b[1]];
            for k0 in *xs.iter().min().unwrap()..=*xs.iter().max().unwrap() {
                for k1 in *ys.iter().min().unwrap()..=*ys.iter().max().unwrap() {
                    let k = [k0, k1];
                    let (lam, mu) = (det(k, b), det(a, k));
                    if lam > 0 && lam <= dab && mu > 0 && mu <= dab {
                        par += q_pow(p, -(k0 + k1));
                    }
                }
            }
            let mut total = par
                / ((Q::one() - q_pow(p, -(a[0] + a[1]))) * (Q::one() - q_pow(p, -(b[0] + b[1]))));
            let free = [0i64, 0i64];
            for r in 0..e[0] {
                total -= line_sum(p, [r, 0], [0, 1], &wall_cons(a, b, free, [r, 0], [0, 1]));
            }
            for c in 0..e[1] {
                let cons = wall_cons(a, b, [e[0], 0], [0, c], [1, 0]);
                total -= line_sum(p, [0, c], [1, 0], &cons);
            }
            if lo <= 0 && 0 <= hi {
                add(0, &unit2 * total);
            }
        } else {
            let (g, v) = {
                let eg = Integer::extended_gcd(&l[0], &l[1]);
                (eg.gcd, [eg.x, eg.y])
            };
            let dir = [-l[1] / g, l[0] / g];
            for n in lo..=hi {
                if n % g != 0 {
                    continue;
                }
                let kp = [v[0] * (n / g), v[1] * (n / g)];
                let s = line_sum(p, kp, dir, &wall_cons(a, b, e, kp, dir));
                add(n, &unit2 * s);
            }
        }
    }

    if e == [0, 0] {
        let h = refine_full(f, p, [0, 0], [None, None], RefineParams::valuations(hi, depth_cap))?;
        for n in lo..=hi {
            add(n, h.volume_at(p, n));
        }
        out.unresolved += h.unresolved;
    }
    out.volumes.retain(|_, v| !v.is_zero());
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;
    use crate::rational::q_frac;

    #[test]
    fn closed_form_on_ball_one() {
        let f = parse("x^-3 + y^2 + y^4").unwrap();
        for p in [3u64, 5, 7] {
            let c = ball_volumes(&f, p, [1, 1], -12, 12, 20).unwrap().unwrap();
            for n in -12..=12i64 {
                let expect = if n < 0 && n % 3 == 0 {
                    (Q::one() - q_pow(p, -1)) * q_pow(p, -2 - (-n / 3 - 1))
                } else {
                    Q::zero()
                };
                assert_eq!(c.volumes.get(&n).cloned().unwrap_or_default(), expect, "p={p} n={n}");
            }
        }
    }

    #[test]
    fn coordinate_function() {
        let f = parse("x").unwrap();
        let c = ball_volumes(&f, 5, [0, 0], -3, 6, 10).unwrap().unwrap();
        for m in 0..=6 {
            assert_eq!(c.volumes[&m], q_frac(4, 5) * q_pow(5, -m));
        }
        assert!(!c.volumes.contains_key(&-1));
    }

    #[test]
    fn constant_term_cell_mass() {
        // 1 + x y: ord 0 except where the torus point count decides.
        let f = parse("1 + x*y").unwrap();
        let c = ball_volumes(&f, 3, [0, 0], -4, 30, 40).unwrap().unwrap();
        let total: Q = c.volumes.values().fold(Q::zero(), |a, b| a + b);
        assert!(Q::one() - total < q_pow(3, -25));
    }
}
