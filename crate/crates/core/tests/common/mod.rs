#![allow(dead_code)]

use igusa_laurent::finite_field::find_good_prime;
use igusa_laurent::polytope::newton_polytope;
use igusa_laurent::LaurentPolynomial;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 3 or 4 terms, exponents in [-3, 3], coefficients in +-{1, 2, 3}.
pub fn random_poly<R: Rng>(r: &mut R) -> LaurentPolynomial {
    loop {
        let n = r.gen_range(3..=4);
        let terms: Vec<([i64; 2], i64)> = (0..n)
            .map(|_| {
                let c = r.gen_range(1..=3) * if r.gen_bool(0.5) { 1 } else { -1 };
                ([r.gen_range(-3..=3), r.gen_range(-3..=3)], c)
            })
            .collect();
        let f = LaurentPolynomial::from_int_terms(&terms);
        if f.len() == n && newton_polytope(&f).is_ok() {
            return f;
        }
    }
}

/// A random input with a two-dimensional polytope that is non-degenerate at
/// some prime `<= cap`, together with the smallest such prime.
pub fn random_nondegenerate<R: Rng>(r: &mut R, cap: u64) -> (LaurentPolynomial, u64) {
    loop {
        let f = random_poly(r);
        if let Ok(p) = find_good_prime(&f, 2, cap) {
            return (f, p);
        }
    }
}

/// Worked examples used across the suites.
pub const EXAMPLES: &[&str] = &[
    "x^-3 + y^-2 + y^4",
    "x^-3 + y^2 + y^4",
    "x + y + x*y",
    "x^-1*y^-1 + x + y",
    "x*y*(1 + x + y)",
    "x^2*y^2*(1 + x + y)",
    "x^-1 + y + y^2",
    "x^-1 + y^-1 + x*y",
];
