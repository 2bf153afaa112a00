mod common;

use igusa_laurent::padic::oracle::{valuation_spectrum_bruteforce, zeta_coefficients_bruteforce, OracleParams};
use igusa_laurent::padic::phi::Phi;
use igusa_laurent::polytope::{attainable_fan, det, fundamental_lattice_points, newton_polytope, refine_to_simple};
use igusa_laurent::qt::RationalQT;
use igusa_laurent::rational::{fmt_q, to_f64, Q};
use igusa_laurent::series::series_expand;
use igusa_laurent::zeta::{candidate_poles, s_tau, zeta_first_quadrant, LForm, ZetaMode};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn numeric_zeta(f: &igusa_laurent::LaurentPolynomial, p: u64) -> RationalQT {
    zeta_first_quadrant(f, ZetaMode::Prime(p), LForm::Standard).unwrap().numeric().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measure_identity(seed in any::<u64>()) {
        let (f, _) = common::random_nondegenerate(&mut common::rng(seed), 50);
        let z = zeta_first_quadrant(&f, ZetaMode::Symbolic, LForm::Standard).unwrap();
        let at1 = z.total.at_t_one().unwrap();
        prop_assert!(at1.constant.equals(&RationalQT::one()), "{f}: {at1}");
        prop_assert!(at1.coeffs.values().all(|c| c.is_zero()));
    }

    #[test]
    fn series_nonnegative(seed in any::<u64>()) {
        let (f, p) = common::random_nondegenerate(&mut common::rng(seed), 50);
        let s = series_expand(&numeric_zeta(&f, p), p, 20).unwrap();
        for n in -20..=20 {
            prop_assert!(!s.get(n).is_negative(), "{f} at {p}: ord {n} has {}", fmt_q(&s.get(n)));
        }
    }

    #[test]
    fn poles_are_candidates(seed in any::<u64>()) {
        let (f, p) = common::random_nondegenerate(&mut common::rng(seed), 50);
        let mut z = numeric_zeta(&f, p);
        z.reduce();
        let poly = newton_polytope(&f).unwrap();
        let cand = candidate_poles(&attainable_fan(&poly), &poly).real_parts();
        for r in z.pole_real_parts() {
            prop_assert!(cand.contains(&r), "{f}: pole {} not a candidate", fmt_q(&r));
        }
    }

    #[test]
    fn spectrum_bound_after_burn_in(seed in any::<u64>()) {
        let (f, p) = common::random_nondegenerate(&mut common::rng(seed), 50);
        let poly = newton_polytope(&f).unwrap();
        let rep = candidate_poles(&attainable_fan(&poly), &poly);
        let beta = to_f64(&rep.strip.beta);
        let mu = rep.multiplicities.mu_beta.unwrap_or(1).max(if beta == -1.0 { 2 } else { 1 });
        let s = series_expand(&numeric_zeta(&f, p), p, 120).unwrap();
        let ratio = |m: i64| to_f64(&s.get(m)) / ((m as f64).powi(mu as i32 - 1) * (p as f64).powf(beta * m as f64));
        let a = (1..=60).map(ratio).fold(0f64, f64::max);
        for m in 61..=120 {
            prop_assert!(ratio(m) <= a * 1.1, "{f} at {p}: m={m} ratio {} > A = {a}", ratio(m));
        }
    }

    #[test]
    fn oracle_matches_series(seed in any::<u64>()) {
        let (f, p) = common::random_nondegenerate(&mut common::rng(seed), 50);
        let m = 6;
        let s = series_expand(&numeric_zeta(&f, p), p, m).unwrap();
        let o = valuation_spectrum_bruteforce(&f, &Phi::ball([0, 0]), p, OracleParams::new(m)).unwrap();
        prop_assert!(o.spectrum.unresolved.is_zero());
        prop_assert!(s.diff(&o.spectrum, m).is_empty(), "{f} at {p}");
    }

    #[test]
    fn trivial_character_is_spectrum(seed in any::<u64>()) {
        let (f, p) = common::random_nondegenerate(&mut common::rng(seed), 50);
        let m = 4;
        let phi = Phi::unit_torus();
        let o = valuation_spectrum_bruteforce(&f, &phi, p, OracleParams::new(m)).unwrap();
        let t = zeta_coefficients_bruteforce(&f, &phi, p, 0, m, OracleParams::new(m)).unwrap();
        for n in -m..=m {
            prop_assert_eq!(t.trivial(n), o.spectrum.get(n), "{} at {}: ord {}", f, p, n);
        }
    }

    #[test]
    fn cone_geometry(seed in any::<u64>()) {
        let f = common::random_poly(&mut common::rng(seed));
        let poly = newton_polytope(&f).unwrap();
        let fan = attainable_fan(&poly);
        for c in fan.two_cones() {
            let d = det(c.gens[0], c.gens[1]).abs();
            prop_assert_eq!(fundamental_lattice_points(c).len() as i64, d);
            // Lattice points may share a monomial, so count with multiplicity.
            let terms: i64 = s_tau(c, &poly).numerator().values().map(|v| i64::try_from(v).unwrap()).sum();
            prop_assert_eq!(terms, d, "{} cone {:?}", f, c.gens);
        }
        prop_assert!(refine_to_simple(&fan).two_cones().all(|c| c.det.abs() == 1));
    }
}

#[test]
fn mass_approaches_one() {
    for src in common::EXAMPLES {
        let f = igusa_laurent::parse(src).unwrap();
        let p = igusa_laurent::zeta::smallest_good_prime(&f).unwrap();
        let z = numeric_zeta(&f, p);
        let short = series_expand(&z, p, 10).unwrap().total();
        let long = series_expand(&z, p, 40).unwrap().total();
        let one = Q::from_integer(1.into());
        assert!(short <= long && long <= one, "{src}");
        assert!((&one - &long).abs() < Q::new(1.into(), 1000.into()), "{src}: {}", fmt_q(&long));
    }
}
