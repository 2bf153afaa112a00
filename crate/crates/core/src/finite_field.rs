//! Torus point counts and the non-degeneracy test over prime fields.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{FpLaurent, LaurentPolynomial};
use crate::polytope::{hull_faces, Face, NewtonPolytope};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut k = n.max(2);
    while !is_prime(k) {
        k += 1;
    }
    k
}

pub fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Number of zeros of `fbar` on the torus `(F_p^*)^2`.
pub fn count_torus_zeros(fbar: &FpLaurent) -> u64 {
    let p = fbar.p;
    (1..p)
        .into_par_iter()
        .map(|x| (1..p).filter(|&y| fbar.eval(x, y) == 0).count() as u64)
        .sum()
}

/// A face together with a torus point where the face function and its
/// gradient vanish.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub face: String,
    pub face_points: Vec<[i64; 2]>,
    pub point: [u64; 2],
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "face {} is singular at (x, y) = ({}, {})",
            self.face, self.point[0], self.point[1]
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NondegReport {
    pub p: u64,
    pub nondegenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

/// First torus point where `h`, `dh/dx` and `dh/dy` all vanish.
pub fn singular_torus_point(h: &FpLaurent) -> Option<[u64; 2]> {
    let p = h.p;
    let (hx, hy) = h.gradient();
    (1..p).into_par_iter().find_map_first(|x| {
        (1..p)
            .find(|&y| h.eval(x, y) == 0 && hx.eval(x, y) == 0 && hy.eval(x, y) == 0)
            .map(|y| [x, y])
    })
}

/// Reduce mod `p` and check that nothing that shapes the polytope is lost.
pub fn admissible_reduction(f: &LaurentPolynomial, p: u64) -> Result<FpLaurent> {
    check_prime(p)?;
    let fbar = f.reduce_mod_p(p)?;
    if fbar.terms.len() != f.len() {
        return Err(Error::SupportCollapse { p });
    }
    let hat = f.hat_decomposition();
    for d in [hat.d1, hat.d2] {
        if d > 0 && d as u64 % p == 0 {
            return Err(Error::ClearingExponent { p, d });
        }
    }
    Ok(fbar)
}

/// Checks every face, the polytope included, on the cleared face function.
pub fn is_nondegenerate_mod_p(f: &LaurentPolynomial, p: u64) -> Result<NondegReport> {
    let fbar = admissible_reduction(f, p)?;
    for face in hull_faces(f) {
        let ft = fbar.restrict(&face.points);
        let h = clear(&ft);
        if let Some(pt) = singular_torus_point(&h) {
            return Ok(NondegReport {
                p,
                nondegenerate: false,
                witness: Some(Witness {
                    face: face.label(),
                    face_points: face.points.clone(),
                    point: pt,
                }),
            });
        }
    }
    Ok(NondegReport {
        p,
        nondegenerate: true,
        witness: None,
    })
}

/// Multiply by the smallest monomial making every exponent nonnegative.
pub fn clear(h: &FpLaurent) -> FpLaurent {
    let m0 = h.terms.keys().map(|e| e[0]).min().unwrap_or(0).min(0);
    let m1 = h.terms.keys().map(|e| e[1]).min().unwrap_or(0).min(0);
    h.shift([-m0, -m1])
}

/// Like [`is_nondegenerate_mod_p`] but degeneracy becomes an error.
pub fn require_nondegenerate(f: &LaurentPolynomial, p: u64) -> Result<()> {
    let r = is_nondegenerate_mod_p(f, p)?;
    match r.witness {
        None => Ok(()),
        Some(w) => Err(Error::Degenerate {
            p,
            witness: Box::new(w),
        }),
    }
}

pub const DEFAULT_PRIME_CAP: u64 = 500;

/// Smallest prime `>= start` (and `<= cap`) at which `f` is non-degenerate.
pub fn find_good_prime(f: &LaurentPolynomial, start: u64, cap: u64) -> Result<u64> {
    if f.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let mut p = next_prime(start);
    while p <= cap {
        if let Ok(r) = is_nondegenerate_mod_p(f, p) {
            if r.nondegenerate {
                return Ok(p);
            }
        }
        p = next_prime(p + 1);
    }
    Err(Error::NoGoodPrime { start, cap })
}

/// `N_tau` for every edge and for the polytope itself; vertices have none.
pub fn face_counts(
    f: &LaurentPolynomial,
    poly: &NewtonPolytope,
    p: u64,
) -> Result<BTreeMap<String, u64>> {
    let fbar = f.reduce_mod_p(p)?;
    let mut out = BTreeMap::new();
    for face in poly.faces() {
        if face.dim == 0 {
            continue;
        }
        out.insert(face.label(), count_face(&fbar, &face));
    }
    Ok(out)
}

pub fn count_face(fbar: &FpLaurent, face: &Face) -> u64 {
    count_torus_zeros(&fbar.restrict(&face.points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::parse;

    #[test]
    fn small_counts() {
        let f = parse("x + y").unwrap().reduce_mod_p(3).unwrap();
        assert_eq!(count_torus_zeros(&f), 2);
        let f = parse("x").unwrap().reduce_mod_p(5).unwrap();
        assert_eq!(count_torus_zeros(&f), 0);
    }

    #[test]
    fn g_nondegenerate_at_7() {
        let g = parse("x^-3 + y^-2 + y^4").unwrap();
        assert!(is_nondegenerate_mod_p(&g, 7).unwrap().nondegenerate);
        assert!(matches!(
            is_nondegenerate_mod_p(&g, 3),
            Err(Error::ClearingExponent { p: 3, d: 3 })
        ));
    }

    #[test]
    fn square_is_degenerate() {
        let f = parse("x^2 + 2x*y + y^2").unwrap();
        let r = is_nondegenerate_mod_p(&f, 7).unwrap();
        assert!(!r.nondegenerate);
        let w = r.witness.unwrap();
        assert_eq!(w.face, "Gamma");
        assert_eq!((w.point[0] + w.point[1]) % 7, 0);
        assert!(matches!(
            find_good_prime(&f, 2, 60),
            Err(Error::NoGoodPrime { .. })
        ));
    }

    #[test]
    fn monomial_like() {
        let f = parse("x*y").unwrap();
        assert!(is_nondegenerate_mod_p(&f, 5).unwrap().nondegenerate);
        assert_eq!(find_good_prime(&f, 2, 100).unwrap(), 2);
    }
}
