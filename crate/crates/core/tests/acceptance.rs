//! Acceptance criteria 1-7. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use igusa_laurent::finite_field::find_good_prime;
use igusa_laurent::padic::expsum::exponential_sum;
use igusa_laurent::padic::oracle::{valuation_spectrum_bruteforce, OracleParams};
use igusa_laurent::padic::oscillatory::{oscillatory_integral_direct, oscillatory_via_prop4, DirectParams};
use igusa_laurent::padic::phi::Phi;
use igusa_laurent::polytope::{
    attainable_fan, build_normal_fan, det, fundamental_lattice_points, newton_polytope, refine_to_simple, Cone,
    Fan, NewtonPolytope,
};
use igusa_laurent::qt::RationalQT;
use igusa_laurent::rational::{fmt_q, q_frac, q_int, q_pow, Q};
use igusa_laurent::series::series_expand;
use igusa_laurent::zeta::{candidate_poles, smallest_good_prime, zeta_first_quadrant, LForm, ZetaMode};
use igusa_laurent::{parse, LaurentPolynomial};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn criterion1() -> Outcome {
    let t0 = Instant::now();
    let g = parse("x^-3 + y^-2 + y^4").map_err(e)?;
    let poly = newton_polytope(&g).map_err(e)?;
    let fan = attainable_fan(&poly);
    let mut rays = fan.edges();
    rays.sort();
    ensure(rays == vec![[0, 1], [1, 0], [2, 3]], || format!("rays {rays:?}"))?;

    let z = zeta_first_quadrant(&g, ZetaMode::Symbolic, LForm::Printed).map_err(e)?;
    let vertex_l = RationalQT::from_parts(&[(1, 0, 0), (-2, -1, 0), (1, -2, 0)], &[]);
    let printed_const = RationalQT::from_parts(&[(1, 0, 0), (-1, -2, 0)], &[]);
    let n_coeff = RationalQT::from_parts(&[(-1, -2, 0), (1, -2, 1)], &[(1, 1, 1)]);
    // (generators, face label, S as printed with t = q^-s)
    let table: Vec<(Vec<[i64; 2]>, &str, RationalQT)> = vec![
        (vec![[0, 1]], "v(0,-2)", RationalQT::from_parts(&[(1, -1, -2)], &[(1, -2, 1)])),
        (vec![[2, 3]], "e(2,3)", RationalQT::from_parts(&[(1, -5, -6)], &[(5, -6, 1)])),
        (vec![[1, 0]], "v(-3,0)", RationalQT::from_parts(&[(1, -1, -3)], &[(1, -3, 1)])),
        (
            vec![[0, 1], [2, 3]],
            "v(0,-2)",
            RationalQT::from_parts(&[(1, -3, -4), (1, -6, -8)], &[(1, -2, 1), (5, -6, 1)]),
        ),
        (
            vec![[2, 3], [1, 0]],
            "v(-3,0)",
            RationalQT::from_parts(&[(1, -2, -3), (1, -4, -6), (1, -6, -9)], &[(1, -3, 1), (5, -6, 1)]),
        ),
    ];
    let find = |gens: &Vec<[i64; 2]>| {
        z.rows.iter().find(|r| {
            let mut a = r.generators.clone();
            let mut b = gens.clone();
            a.sort();
            b.sort();
            a == b
        })
    };
    for (gens, face, s) in &table {
        let row = find(gens).ok_or_else(|| format!("no row for cone {gens:?}"))?;
        ensure(row.face.label() == *face, || format!("cone {gens:?}: face {}", row.face.label()))?;
        ensure(row.s.equals(s), || format!("cone {gens:?}: S = {}", row.s))?;
        if face.starts_with('v') {
            ensure(row.l.coeffs.is_empty() && row.l.constant.equals(&vertex_l), || {
                format!("cone {gens:?}: L = {}", row.l)
            })?;
        } else {
            ensure(
                row.l.constant.equals(&printed_const)
                    && row.l.coeffs.len() == 1
                    && row.l.coeffs.get(*face).is_some_and(|c| c.equals(&n_coeff)),
                || format!("cone {gens:?}: L = {}", row.l),
            )?;
        }
    }
    ensure(z.rows.len() == table.len() + 1, || format!("{} rows", z.rows.len()))?;
    let whole = z.rows.iter().find(|r| r.generators.is_empty()).ok_or("no Gamma row")?;
    ensure(
        whole.l.constant.equals(&printed_const) && whole.l.coeffs.get("Gamma").is_some_and(|c| c.equals(&n_coeff)),
        || format!("L_Gamma = {}", whole.l),
    )?;

    let rep = candidate_poles(&fan, &poly);
    let expect = vec![q_int(-1), q_frac(1, 3), q_frac(1, 2), q_frac(5, 6)];
    ensure(rep.real_parts() == expect, || {
        format!("poles {:?}", rep.real_parts().iter().map(fmt_q).collect::<Vec<_>>())
    })?;
    let dt = t0.elapsed();
    ensure(dt < Duration::from_secs(1), || format!("{dt:?}"))?;
    Ok("rays, 5 table rows (L, S) and poles {1/2, 1/3, 5/6, -1} match".into())
}

fn criterion2() -> Outcome {
    let f = parse("x^-3 + y^2 + y^4").map_err(e)?;
    let m = 12;
    let closed = RationalQT::from_parts(&[(1, -2, -3), (-1, -3, -3)], &[(1, -3, 1)]);
    let mut detail = Vec::new();
    for p in [3u64, 5, 7] {
        let t0 = Instant::now();
        let rep = valuation_spectrum_bruteforce(&f, &Phi::ball([1, 1]), p, OracleParams::new(m)).map_err(e)?;
        let spec = &rep.spectrum;
        ensure(spec.unresolved == Q::from_integer(0.into()), || {
            format!("p={p}: unresolved {}", fmt_q(&spec.unresolved))
        })?;
        for n in -m..=m {
            let expect = if n < 0 && n % 3 == 0 {
                let k = -n / 3 - 1;
                (q_int(1) - q_pow(p, -1)) * q_pow(p, -2 - k)
            } else {
                q_int(0)
            };
            ensure(spec.get(n) == expect, || {
                format!("p={p}, ord {n}: oracle {} vs closed form {}", fmt_q(&spec.get(n)), fmt_q(&expect))
            })?;
        }
        let series = series_expand(&closed, p, m).map_err(e)?;
        ensure(series.diff(spec, m).is_empty(), || format!("p={p}: series of the closed form differs"))?;
        let dt = t0.elapsed();
        ensure(dt < Duration::from_secs(30), || format!("p={p}: {dt:?}"))?;
        detail.push(format!("p={p} {:.2}s", dt.as_secs_f64()));
    }
    Ok(format!("exact match for |m| <= 12 ({})", detail.join(", ")))
}

fn measure_identity(f: &LaurentPolynomial) -> Result<(), String> {
    let z = zeta_first_quadrant(f, ZetaMode::Symbolic, LForm::Standard).map_err(e)?;
    let at1 = z.total.at_t_one().map_err(e)?;
    ensure(
        at1.constant.equals(&RationalQT::one()) && at1.coeffs.values().all(|c| c.is_zero()),
        || format!("{f}: Z(t=1) = {at1}"),
    )
}

fn criterion3() -> Outcome {
    let mut suite: Vec<LaurentPolynomial> = common::EXAMPLES.iter().map(|s| parse(s).unwrap()).collect();
    let mut r = common::rng(3);
    while suite.len() < 14 {
        suite.push(common::random_nondegenerate(&mut r, 50).0);
    }
    for f in &suite {
        find_good_prime(f, 2, 500).map_err(|x| format!("{f}: {x}"))?;
        measure_identity(f)?;
    }
    Ok(format!("Z(t=1) = 1 for {} non-degenerate inputs", suite.len()))
}

fn oracle_equivalence(f: &LaurentPolynomial, p: u64, m: i64) -> Result<(), String> {
    let z = zeta_first_quadrant(f, ZetaMode::Prime(p), LForm::Standard)
        .and_then(|z| z.numeric())
        .map_err(|x| format!("{f} at {p}: {x}"))?;
    let series = series_expand(&z, p, m).map_err(|x| format!("{f} at {p}: {x}"))?;
    let rep = valuation_spectrum_bruteforce(f, &Phi::ball([0, 0]), p, OracleParams::new(m))
        .map_err(|x| format!("{f} at {p}: {x}"))?;
    ensure(rep.spectrum.unresolved == Q::from_integer(0.into()), || {
        format!("{f} at {p}: unresolved {}", fmt_q(&rep.spectrum.unresolved))
    })?;
    let bad = series.diff(&rep.spectrum, m);
    ensure(bad.is_empty(), || {
        let n = bad[0];
        format!(
            "{f} at {p}: ord {n}: series {} vs oracle {}",
            fmt_q(&series.get(n)),
            fmt_q(&rep.spectrum.get(n))
        )
    })
}

fn criterion4() -> Outcome {
    let t0 = Instant::now();
    let g = parse("x^-3 + y^-2 + y^4").map_err(e)?;
    let pg = smallest_good_prime(&g).map_err(e)?;
    oracle_equivalence(&g, pg, 10)?;
    let mut r = common::rng(4);
    let mut names = vec![format!("g@{pg}")];
    for _ in 0..6 {
        let (f, p) = common::random_nondegenerate(&mut r, 50);
        oracle_equivalence(&f, p, 10)?;
        names.push(format!("{f}@{p}"));
    }
    let dt = t0.elapsed();
    ensure(dt < Duration::from_secs(120), || format!("{dt:?}"))?;
    Ok(format!("exact match for |m| <= 10 on {} ({:.1}s)", names.join("; "), dt.as_secs_f64()))
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

fn criterion5() -> Outcome {
    let mut detail = Vec::new();
    for src in ["x*y*(1 + x + y)", "x^2*y^2*(1 + x + y)"] {
        let f = parse(src).map_err(e)?;
        let poly = newton_polytope(&f).map_err(e)?;
        let rep = candidate_poles(&attainable_fan(&poly), &poly);
        let beta = igusa_laurent::rational::to_f64(&rep.strip.beta);
        let mu = rep.multiplicities.mu_beta.unwrap_or(1) as i32;
        for p in [3u64, 5] {
            let q = p as f64;
            let bound = |m: i64| (m as f64).powi(mu - 1) * q.powf(beta * m as f64);
            let mut c = 0f64;
            for m in 1..=6i64 {
                let s = exponential_sum(&f, 0, p, m, 1).map_err(e)?;
                let ratio = (s.abs() - s.err).max(0.0) / bound(m);
                if m <= 3 {
                    c = c.max((s.abs() + s.err) / bound(m));
                } else {
                    ensure(ratio <= c * (1.0 + 1e-9) + 1e-12, || {
                        format!("{src}, p={p}, m={m}: |S_m|/bound = {ratio} > C = {c}")
                    })?;
                }
            }
            detail.push(format!("{src}@{p} C={c:.3}"));
        }
    }

    let f = parse("x^-1 + y + y^2").map_err(e)?;
    let poly = newton_polytope(&f).map_err(e)?;
    let rep = candidate_poles(&attainable_fan(&poly), &poly);
    let amax = rep.strip.alpha_max.as_ref().map(igusa_laurent::rational::to_f64).ok_or("A is empty")?;
    let p = 3u64;
    let phi = Phi::ball([0, 0]);
    let z0 = igusa_laurent::rational::to_f64(&phi.measure(p));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in 1..=6i64 {
        let v = oscillatory_integral_direct(&f, &phi, p, 1, -k, DirectParams::default()).map_err(e)?;
        let d = (v.value.re - z0).hypot(v.value.im);
        ensure(d > 10.0 * v.value.err, || format!("|z| = {p}^-{k}: difference {d} below error {}", v.value.err))?;
        xs.push(k as f64);
        ys.push(d.log(p as f64));
    }
    let exponent = -slope(&xs, &ys);
    ensure((exponent - amax).abs() <= 0.1 * amax.abs(), || {
        format!("small |z| exponent {exponent:.4} vs alpha_max {amax}")
    })?;
    detail.push(format!("small-|z| exponent {exponent:.4} vs alpha_max {amax}"));
    Ok(detail.join(", "))
}

fn criterion6() -> Outcome {
    let t0 = Instant::now();
    let g = parse("x^-3 + y^-2 + y^4").map_err(e)?;
    let p = 3;
    let phi = Phi::unit_torus();
    let mut worst = 0f64;
    for m in 1..=4i64 {
        for u in [1u64, 2] {
            let a = oscillatory_via_prop4(&g, &phi, p, u, m, 3, OracleParams::new(m)).map_err(e)?;
            let b = oscillatory_integral_direct(&g, &phi, p, u, m, DirectParams::default()).map_err(e)?;
            let d = (a.value - b.value).abs();
            worst = worst.max(d);
            ensure(a.value.agrees(&b.value, 1e-9), || {
                format!("m={m}, u={u}: assembled {:?} vs direct {:?}", a.value, b.value)
            })?;
        }
    }
    let dt = t0.elapsed();
    ensure(dt < Duration::from_secs(120), || format!("{dt:?}"))?;
    Ok(format!("m = 1..4, u in {{1,2}}: max difference {worst:.2e} ({:.1}s)", dt.as_secs_f64()))
}

fn relint(c: &Cone, v: [i64; 2]) -> bool {
    c.contains_interior(v)
}

fn check_fan_geometry<R: Rng>(poly: &NewtonPolytope, fan: &Fan, r: &mut R, rays: usize, quadrant: bool) -> Result<(), String> {
    for c in fan.two_cones() {
        for _ in 0..4 {
            let (i, j) = (r.gen_range(0..20), r.gen_range(0..20));
            let a = [i * c.gens[0][0], i * c.gens[0][1]];
            let b = [j * c.gens[1][0], j * c.gens[1][1]];
            let s = [a[0] + b[0], a[1] + b[1]];
            ensure(poly.d_value(s) == poly.d_value(a) + poly.d_value(b), || {
                format!("d not linear on cone {:?}", c.gens)
            })?;
        }
    }
    for _ in 0..rays {
        let v = loop {
            let lo = if quadrant { 0 } else { -50 };
            let v = [r.gen_range(lo..=50), r.gen_range(lo..=50)];
            if v != [0, 0] {
                break v;
            }
        };
        let hits: Vec<&Cone> = fan.cones.iter().filter(|c| relint(c, v)).collect();
        ensure(hits.len() == 1, || format!("ray {v:?} lies in {} cones", hits.len()))?;
        ensure(hits[0].face == poly.first_meet_locus(v), || format!("ray {v:?}: wrong face"))?;
    }
    Ok(())
}

fn criterion7() -> Outcome {
    let t0 = Instant::now();
    let mut r = common::rng(7);
    for i in 0..100 {
        let f = common::random_poly(&mut r);
        let poly = newton_polytope(&f).map_err(e)?;
        let ctx = |x: String| format!("polytope {i} ({f}): {x}");
        check_fan_geometry(&poly, &build_normal_fan(&poly), &mut r, 1000, false).map_err(ctx)?;
        let att = attainable_fan(&poly);
        check_fan_geometry(&poly, &att, &mut r, 1000, true).map_err(ctx)?;
        let simple = refine_to_simple(&att);
        check_fan_geometry(&poly, &simple, &mut r, 200, true).map_err(ctx)?;
        for c in simple.two_cones() {
            ensure(c.det.abs() == 1, || ctx(format!("cone {:?} has det {}", c.gens, c.det)))?;
        }
        for c in att.two_cones().chain(build_normal_fan(&poly).two_cones()) {
            let n = fundamental_lattice_points(c).len() as i64;
            ensure(n == det(c.gens[0], c.gens[1]).abs(), || ctx(format!("cone {:?}: {n} points", c.gens)))?;
        }
    }
    let dt = t0.elapsed();
    ensure(dt < Duration::from_secs(30), || format!("{dt:?}"))?;
    Ok(format!("100 polytopes, 1000 rays per fan ({:.1}s)", dt.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("worked example reproduction", criterion1),
        ("closed-form reproduction", criterion2),
        ("measure identity", criterion3),
        ("oracle equivalence", criterion4),
        ("asymptotic bounds", criterion5),
        ("twisted assembly consistency", criterion6),
        ("geometry property suite", criterion7),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let dt = t0.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS {} {name}: {msg} [{dt:.2}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} [{dt:.2}s]", i + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
