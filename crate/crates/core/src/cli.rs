//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::finite_field::{admissible_reduction, count_face, is_nondegenerate_mod_p};
use crate::laurent::{parse, LaurentPolynomial};
use crate::padic::expsum::exponential_sum;
use crate::padic::oracle::{valuation_spectrum_bruteforce, OracleParams};
use crate::padic::oscillatory::{oscillatory_integral_direct, oscillatory_via_prop4, DirectParams};
use crate::padic::phi::{Coord, Phi};
use crate::polytope::{attainable_fan, build_normal_fan, newton_polytope, refine_to_simple};
use crate::rational::fmt_q;
use crate::series::{asymptotic_terms, series_expand, Side};
use crate::zeta::{candidate_poles, zeta_ball, zeta_first_quadrant, LForm, ZetaMode, ZetaResult};

pub const SCHEMA: &str = "igusa-laurent/1";

/// Environment variable read when `--threads` is absent.
pub const THREADS_ENV: &str = "IGUSA_THREADS";

#[derive(Parser, Debug)]
#[command(name = "igusa-laurent", version, about = "Local zeta functions of Laurent polynomials in two variables")]
struct Cli {
    /// Worker threads for the parallel parts.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report to a file instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<std::path::PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
struct Poly {
    /// Laurent polynomial, e.g. "x^-3 + y^-2 + y^4".
    #[arg(short = 'f', long = "poly")]
    f: String,
}

#[derive(Args, Debug)]
struct PrimeArg {
    #[arg(short = 'p', long = "prime")]
    p: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Newton polytope: vertices and facets.
    Polytope(Poly),
    /// Normal fan, attainable fan and its simple refinement.
    Fan(Poly),
    /// Non-degeneracy at a prime; exit 2 with a witness if degenerate.
    Nondeg {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
    },
    /// Torus zeros of a face function over F_p.
    Count {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
        /// Face label as printed by `fan`, e.g. `e(2,3)` or `Gamma`.
        #[arg(long)]
        face: String,
    },
    /// Zeta function of the first quadrant.
    Zeta {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        mode: ModeArgs,
        /// Use the `q^2 - 1` constant term as typeset in the worked example.
        #[arg(long)]
        printed: bool,
        /// Support `ball e` or `ball e1,e2` instead of the first quadrant.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Candidate poles, convergence strip and multiplicities.
    Poles(Poly),
    /// Valuation spectrum from the explicit formula.
    Series {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(short = 'M', long = "trunc")]
        m: i64,
        #[arg(long)]
        phi: Option<String>,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Exponential-polynomial terms of the volumes on one side.
    Asymptotics {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
        /// `+` for `V_-m`, `-` for `V_m`.
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        side: String,
        #[arg(long)]
        phi: Option<String>,
    },
    /// Brute-force valuation spectrum over Q_p.
    Oracle {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(short = 'M', long = "trunc")]
        m: i64,
        #[arg(long, default_value = "ball 0")]
        phi: String,
        #[arg(long)]
        depth_cap: Option<u32>,
    },
    /// Finite exponential sum `S_m`.
    Expsum {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
        /// Coordinate running over units.
        #[arg(long, default_value_t = 0)]
        side: usize,
        #[arg(short = 'm')]
        m: i64,
        #[arg(short = 'u', default_value_t = 1)]
        u: u64,
    },
    /// Oscillatory integral from twisted zeta coefficients, with the direct
    /// value for comparison.
    Eprop4 {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(short = 'm', allow_hyphen_values = true)]
        m: i64,
        #[arg(short = 'u', default_value_t = 1)]
        u: u64,
        #[arg(long, default_value = "unit2")]
        phi: String,
        /// Conductor bound `e`.
        #[arg(long, default_value_t = 3)]
        bound: u32,
        #[arg(long)]
        depth_cap: Option<u32>,
    },
    /// Explicit formula against the oracle, as a diff table.
    Compare {
        #[command(flatten)]
        poly: Poly,
        #[command(flatten)]
        prime: PrimeArg,
        #[arg(short = 'M', long = "trunc")]
        m: i64,
        #[arg(long, default_value = "ball 0")]
        phi: String,
        #[arg(long)]
        depth_cap: Option<u32>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ModeArgs {
    #[arg(short = 'p', long = "prime")]
    p: Option<u64>,
    #[arg(long)]
    symbolic: bool,
}

/// Parse `argv`, run, and return the exit code. The report goes to stdout
/// (or `-o`), diagnostics to stderr.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I: IntoIterator<Item = OsString>>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|s| s.parse().ok()));
    let outcome = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.cmd)),
            Err(e) => Err(Error::Invalid(e.to_string())),
        },
        None => dispatch(&cli.cmd),
    };
    let (report, code) = match outcome {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if e.is_usage() { 1 } else { 2 };
        }
    };
    let text = match report {
        Report::Raw(s) => s,
        Report::Json(mut v) => {
            v["schema"] = json!(SCHEMA);
            match cli.format {
                Format::Json => serde_json::to_string_pretty(&v).unwrap() + "\n",
                Format::Text => to_text(&v),
            }
        }
    };
    let written = match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    code
}

enum Report {
    Json(Value),
    Raw(String),
}

fn to_text(v: &Value) -> String {
    let mut s = String::new();
    if let Value::Object(map) = v {
        for (k, x) in map {
            let rendered = match x {
                Value::String(t) => t.clone(),
                other => other.to_string(),
            };
            s.push_str(&format!("{k}: {rendered}\n"));
        }
    }
    s
}

fn poly(p: &Poly) -> Result<LaurentPolynomial> {
    parse(&p.f)
}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

/// Offsets of a `ball` support, the only shape with a symbolic formula.
fn ball_offsets(phi: &Phi) -> Result<[i64; 2]> {
    match phi.regions.as_slice() {
        [[Coord::Ball { a: a1 }, Coord::Ball { a: a2 }]] => Ok([*a1, *a2]),
        _ => Err(Error::NotApplicable(format!(
            "no explicit formula for Phi = {phi}; use `ball e` or `ball e1,e2`"
        ))),
    }
}

fn symbolic_zeta(f: &LaurentPolynomial, mode: ZetaMode, form: LForm, phi: Option<&str>) -> Result<ZetaResult> {
    match phi {
        None => zeta_first_quadrant(f, mode, form),
        Some(s) => {
            let e = ball_offsets(&Phi::parse(s)?)?;
            if e == [0, 0] {
                zeta_first_quadrant(f, mode, form)
            } else {
                zeta_ball(f, e, mode, form)
            }
        }
    }
}

fn check_m(m: i64) -> Result<()> {
    if m < 1 {
        return usage("M must be at least 1");
    }
    Ok(())
}

fn oracle_params(m: i64, depth_cap: Option<u32>) -> Result<OracleParams> {
    let mut params = OracleParams::new(m);
    if let Some(d) = depth_cap {
        if d < 1 {
            return usage("depth cap must be at least 1");
        }
        params.depth_cap = d;
    }
    Ok(params)
}

fn dispatch(cmd: &Command) -> Result<(Report, i32)> {
    let ok = |v: Value| Ok((Report::Json(v), 0));
    match cmd {
        Command::Polytope(pa) => {
            let f = poly(pa)?;
            let np = newton_polytope(&f)?;
            ok(json!({"command": "polytope", "f": f.to_string(), "polytope": np.to_json()}))
        }
        Command::Fan(pa) => {
            let f = poly(pa)?;
            let np = newton_polytope(&f)?;
            let att = attainable_fan(&np);
            ok(json!({
                "command": "fan",
                "f": f.to_string(),
                "normal_fan": build_normal_fan(&np).to_json(),
                "attainable_fan": att.to_json(),
                "simple_refinement": refine_to_simple(&att).to_json(),
            }))
        }
        Command::Nondeg { poly: pa, prime } => {
            let f = poly(pa)?;
            let rep = is_nondegenerate_mod_p(&f, prime.p)?;
            let code = if rep.nondegenerate { 0 } else { 2 };
            let mut v = serde_json::to_value(&rep).unwrap();
            v["command"] = json!("nondeg");
            v["f"] = json!(f.to_string());
            Ok((Report::Json(v), code))
        }
        Command::Count { poly: pa, prime, face } => {
            let f = poly(pa)?;
            let np = newton_polytope(&f)?;
            let fc = np
                .faces()
                .into_iter()
                .find(|x| &x.label() == face)
                .ok_or_else(|| Error::Invalid(format!("no face labelled {face}")))?;
            let fbar = admissible_reduction(&f, prime.p)?;
            let count = count_face(&fbar, &fc);
            let rep = is_nondegenerate_mod_p(&f, prime.p)?;
            let mut v = json!({"command": "count", "face": face, "p": prime.p, "count": count});
            if let Some(w) = rep.witness {
                v["witness"] = serde_json::to_value(&w).unwrap();
            }
            ok(v)
        }
        Command::Zeta { poly: pa, mode, printed, phi } => {
            let f = poly(pa)?;
            let zm = match (mode.p, mode.symbolic) {
                (Some(p), false) => ZetaMode::Prime(p),
                (None, true) => ZetaMode::Symbolic,
                _ => return usage("give exactly one of --prime and --symbolic"),
            };
            let form = if *printed { LForm::Printed } else { LForm::Standard };
            let z = symbolic_zeta(&f, zm, form, phi.as_deref())?;
            let mut v = z.to_json();
            v["command"] = json!("zeta");
            v["f"] = json!(f.to_string());
            v["l_form"] = json!(if *printed { "printed" } else { "standard" });
            ok(v)
        }
        Command::Poles(pa) => {
            let f = poly(pa)?;
            let np = newton_polytope(&f)?;
            let rep = candidate_poles(&attainable_fan(&np), &np);
            let mut v = serde_json::to_value(&rep).unwrap();
            v["real_parts"] = json!(rep.real_parts().iter().map(fmt_q).collect::<Vec<_>>());
            v["command"] = json!("poles");
            v["f"] = json!(f.to_string());
            ok(v)
        }
        Command::Series { poly: pa, prime, m, phi, csv } => {
            check_m(*m)?;
            let f = poly(pa)?;
            let z = symbolic_zeta(&f, ZetaMode::Prime(prime.p), LForm::Standard, phi.as_deref())?.numeric()?;
            let spec = series_expand(&z, prime.p, *m)?;
            if *csv {
                return Ok((Report::Raw(spec.to_csv()), 0));
            }
            let mut v = spec.to_json();
            v["command"] = json!("series");
            v["p"] = json!(prime.p);
            ok(v)
        }
        Command::Asymptotics { poly: pa, prime, side, phi } => {
            let side: Side = side.parse()?;
            let f = poly(pa)?;
            let z = symbolic_zeta(&f, ZetaMode::Prime(prime.p), LForm::Standard, phi.as_deref())?.numeric()?;
            let np = newton_polytope(&f)?;
            let rep = candidate_poles(&attainable_fan(&np), &np);
            let exp = asymptotic_terms(&z, prime.p, side, Some(&rep))?;
            let mut v = serde_json::to_value(&exp).unwrap();
            v["command"] = json!("asymptotics");
            ok(v)
        }
        Command::Oracle { poly: pa, prime, m, phi, depth_cap } => {
            check_m(*m)?;
            let f = poly(pa)?;
            let phi = Phi::parse(phi)?;
            let rep = valuation_spectrum_bruteforce(&f, &phi, prime.p, oracle_params(*m, *depth_cap)?)?;
            let mut v = rep.to_json();
            v["command"] = json!("oracle");
            v["p"] = json!(prime.p);
            v["phi"] = json!(phi.to_string());
            ok(v)
        }
        Command::Expsum { poly: pa, prime, side, m, u } => {
            let f = poly(pa)?;
            if *side > 1 {
                return usage("side must be 0 or 1");
            }
            let s = exponential_sum(&f, *side, prime.p, *m, *u)?;
            ok(json!({
                "command": "expsum", "p": prime.p, "side": side, "m": m, "u": u,
                "re": s.re, "im": s.im, "err": s.err, "abs": s.abs(),
            }))
        }
        Command::Eprop4 { poly: pa, prime, m, u, phi, bound, depth_cap } => {
            let f = poly(pa)?;
            let phi = Phi::parse(phi)?;
            let params = oracle_params((*m).max(1), *depth_cap)?;
            let rep = oscillatory_via_prop4(&f, &phi, prime.p, *u, *m, *bound, params)?;
            let direct = oscillatory_integral_direct(&f, &phi, prime.p, *u, *m, DirectParams::default())?;
            let diff = (rep.value.re - direct.value.re).hypot(rep.value.im - direct.value.im);
            ok(json!({
                "command": "eprop4", "p": prime.p, "m": m, "u": u, "phi": phi.to_string(),
                "assembled": rep.to_json(),
                "direct": {"re": direct.value.re, "im": direct.value.im, "err": direct.value.err,
                           "unresolved": fmt_q(&direct.unresolved)},
                "difference": diff,
                "agree": rep.value.agrees(&direct.value, 1e-9),
            }))
        }
        Command::Compare { poly: pa, prime, m, phi, depth_cap } => {
            check_m(*m)?;
            let f = poly(pa)?;
            let z = symbolic_zeta(&f, ZetaMode::Prime(prime.p), LForm::Standard, Some(phi))?.numeric()?;
            let sym = series_expand(&z, prime.p, *m)?;
            let phi_v = Phi::parse(phi)?;
            let orc = valuation_spectrum_bruteforce(&f, &phi_v, prime.p, oracle_params(*m, *depth_cap)?)?;
            let mismatches = sym.diff(&orc.spectrum, *m);
            let rows: Vec<Value> = (-*m..=*m)
                .map(|n| {
                    let (a, b) = (sym.get(n), orc.spectrum.get(n));
                    json!({"n": n, "symbolic": fmt_q(&a), "oracle": fmt_q(&b), "match": a == b})
                })
                .collect();
            let all = mismatches.is_empty() && orc.spectrum.unresolved == num_traits::Zero::zero();
            let v = json!({
                "command": "compare", "p": prime.p, "M": m, "phi": phi_v.to_string(),
                "rows": rows, "mismatches": mismatches,
                "oracle_unresolved": fmt_q(&orc.spectrum.unresolved),
                "all_match": all,
            });
            Ok((Report::Json(v), if all { 0 } else { 2 }))
        }
    }
}
