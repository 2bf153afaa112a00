use igusa_laurent::padic::oracle::{valuation_spectrum_bruteforce, OracleParams};
use igusa_laurent::padic::phi::Phi;
use igusa_laurent::parse;
use igusa_laurent::series::series_expand;
use igusa_laurent::zeta::{zeta_first_quadrant, LForm, ZetaMode};

fn check(src: &str, p: u64, m: i64) {
    let f = parse(src).unwrap();
    let z = zeta_first_quadrant(&f, ZetaMode::Prime(p), LForm::Standard)
        .unwrap()
        .numeric()
        .unwrap();
    let s = series_expand(&z, p, m).unwrap();
    let o = valuation_spectrum_bruteforce(&f, &Phi::ball([0, 0]), p, OracleParams::new(m)).unwrap();
    assert!(o.spectrum.unresolved == Default::default(), "{src}: unresolved");
    let d = s.diff(&o.spectrum, m);
    assert!(d.is_empty(), "{src} at p={p}: differ at {d:?}\nseries {:?}\noracle {:?}", s.coeffs, o.spectrum.coeffs);
}

#[test]
fn g_at_five() {
    check("x^-3 + y^-2 + y^4", 5, 10);
}

#[test]
fn reference_shapes() {
    check("x + y + x*y", 2, 10);
    check("x^-1*y^-1 + x + y", 5, 10);
    check("x*y + x^2*y + x*y^2", 5, 10);
    check("x^-1 + y + y^2", 3, 10);
}
