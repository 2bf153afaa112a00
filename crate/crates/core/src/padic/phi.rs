//! Supports of test functions: finite unions of products of p-adic
//! balls, valuation shells and residue boxes.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{q_pow, Q};

/// The set of allowed values for one coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Coord {
    /// `p^a Z_p^x`.
    Units { a: i64 },
    /// `p^a (c + p^k Z_p)` with `c` a unit.
    Residue { a: i64, c: u64, k: u32 },
    /// `p^a Z_p`.
    Ball { a: i64 },
}

impl Coord {
    pub fn measure(&self, p: u64) -> Q {
        match *self {
            Coord::Units { a } => q_pow(p, -a) * (Q::from_integer(1.into()) - q_pow(p, -1)),
            Coord::Residue { a, k, .. } => q_pow(p, -a - k as i64),
            Coord::Ball { a } => q_pow(p, -a),
        }
    }

    /// Smallest valuation reached.
    pub fn low(&self) -> i64 {
        match *self {
            Coord::Units { a } | Coord::Residue { a, .. } | Coord::Ball { a } => a,
        }
    }

    fn check(&self, p: u64) -> Result<()> {
        if let Coord::Residue { c, k, .. } = *self {
            if k == 0 || c % p == 0 {
                return Err(Error::Invalid(format!(
                    "residue {c} mod {p}^{k} is not a unit class"
                )));
            }
            if (c as u128) >= (p as u128).pow(k) {
                return Err(Error::Invalid(format!("residue {c} exceeds {p}^{k}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::Units { a } => write!(f, "U{a}"),
            Coord::Residue { a, c, k } => write!(f, "R{a}:{c}:{k}"),
            Coord::Ball { a } => write!(f, "B{a}"),
        }
    }
}

pub type Region = [Coord; 2];

/// Indicator of a disjoint union of regions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Phi {
    pub regions: Vec<Region>,
}

impl Phi {
    pub fn unit_torus() -> Self {
        Phi {
            regions: vec![[Coord::Units { a: 0 }, Coord::Units { a: 0 }]],
        }
    }

    pub fn ball(e: [i64; 2]) -> Self {
        Phi {
            regions: vec![[Coord::Ball { a: e[0] }, Coord::Ball { a: e[1] }]],
        }
    }

    pub fn region(r: Region) -> Self {
        Phi { regions: vec![r] }
    }

    pub fn measure(&self, p: u64) -> Q {
        self.regions
            .iter()
            .map(|r| r[0].measure(p) * r[1].measure(p))
            .fold(Q::from_integer(0.into()), |a, b| a + b)
    }

    pub fn check(&self, p: u64) -> Result<()> {
        for r in &self.regions {
            r[0].check(p)?;
            r[1].check(p)?;
        }
        Ok(())
    }

    /// Parse `unit2`, `ball e`, `ball e1,e2`, `units a1,a2`,
    /// `box a1:c1,a2:c2,k`, or `prod X,Y` with `X` one of `U<a>`, `B<a>`,
    /// `R<a>:<c>:<k>`. Several pieces may be joined with `+`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut regions = Vec::new();
        for piece in s.split('+') {
            regions.push(parse_region(piece.trim())?);
        }
        Ok(Phi { regions })
    }
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.regions.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "prod {},{}", r[0], r[1])?;
        }
        Ok(())
    }
}

fn bad(s: &str) -> Error {
    Error::Invalid(format!("cannot parse Phi spec '{s}'"))
}

fn int<T: std::str::FromStr>(s: &str, whole: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(whole))
}

fn parse_coord(s: &str, whole: &str) -> Result<Coord> {
    let s = s.trim();
    let (head, rest) = s.split_at(s.len().min(1));
    match head {
        "U" => Ok(Coord::Units { a: int(rest, whole)? }),
        "B" => Ok(Coord::Ball { a: int(rest, whole)? }),
        "R" => {
            let v: Vec<&str> = rest.split(':').collect();
            if v.len() != 3 {
                return Err(bad(whole));
            }
            Ok(Coord::Residue {
                a: int(v[0], whole)?,
                c: int(v[1], whole)?,
                k: int(v[2], whole)?,
            })
        }
        _ => Err(bad(whole)),
    }
}

fn parse_region(s: &str) -> Result<Region> {
    let (kw, rest) = match s.split_once(char::is_whitespace) {
        Some((a, b)) => (a, b.trim()),
        None => (s, ""),
    };
    match kw {
        "unit2" if rest.is_empty() => Ok([Coord::Units { a: 0 }, Coord::Units { a: 0 }]),
        "ball" => {
            let v: Vec<&str> = rest.split(',').collect();
            match v.as_slice() {
                [e] => {
                    let e: i64 = int(e, s)?;
                    Ok([Coord::Ball { a: e }, Coord::Ball { a: e }])
                }
                [e1, e2] => Ok([Coord::Ball { a: int(e1, s)? }, Coord::Ball { a: int(e2, s)? }]),
                _ => Err(bad(s)),
            }
        }
        "units" => {
            let v: Vec<&str> = rest.split(',').collect();
            match v.as_slice() {
                [a1, a2] => Ok([Coord::Units { a: int(a1, s)? }, Coord::Units { a: int(a2, s)? }]),
                _ => Err(bad(s)),
            }
        }
        "box" => {
            let v: Vec<&str> = rest.split(',').collect();
            if v.len() != 3 {
                return Err(bad(s));
            }
            let k: u32 = int(v[2], s)?;
            let mut out = [Coord::Ball { a: 0 }; 2];
            for i in 0..2 {
                let (a, c) = v[i].split_once(':').ok_or_else(|| bad(s))?;
                out[i] = Coord::Residue {
                    a: int(a, s)?,
                    c: int(c, s)?,
                    k,
                };
            }
            Ok(out)
        }
        "prod" => {
            let v: Vec<&str> = rest.split(',').collect();
            if v.len() != 2 {
                return Err(bad(s));
            }
            Ok([parse_coord(v[0], s)?, parse_coord(v[1], s)?])
        }
        _ => Err(bad(s)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    #[test]
    fn parses_specs() {
        assert_eq!(Phi::parse("unit2").unwrap(), Phi::unit_torus());
        assert_eq!(Phi::parse("ball 1").unwrap(), Phi::ball([1, 1]));
        let b = Phi::parse("box 0:1,1:2,2").unwrap();
        assert_eq!(
            b.regions[0],
            [Coord::Residue { a: 0, c: 1, k: 2 }, Coord::Residue { a: 1, c: 2, k: 2 }]
        );
        let u = Phi::parse("prod U0,B0").unwrap();
        assert_eq!(u.measure(5), q_frac(4, 5));
        assert!(Phi::parse("ball").is_err());
        assert!(Phi::parse("box 0:3,0:1,1").unwrap().check(3).is_err());
    }

    #[test]
    fn measures() {
        assert_eq!(Phi::unit_torus().measure(3), q_frac(4, 9));
        assert_eq!(Phi::ball([1, 1]).measure(5), q_frac(1, 25));
    }
}
