use thiserror::Error;

use crate::finite_field::Witness;

/// Everything that can go wrong in the library.
///
/// The CLI maps [`Error::is_usage`] errors to exit code 1 and every other
/// variant (a mathematical precondition that failed) to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("constant/zero polynomial")]
    ConstantPolynomial,

    #[error("degenerate polytope: convex hull of the support has dimension {0}")]
    DegeneratePolytope(usize),

    #[error("face does not belong to the Newton polytope of this polynomial")]
    ForeignFace,

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("bad prime {p}: a coefficient denominator is divisible by {p}")]
    BadPrime { p: u64 },

    #[error("reduction mod {p} is constant or zero")]
    ConstantModP { p: u64 },

    #[error("support collapses mod {p}")]
    SupportCollapse { p: u64 },

    #[error("p = {p} divides the clearing exponent {d}")]
    ClearingExponent { p: u64, d: i64 },

    #[error("polynomial is degenerate mod {p}: {witness}")]
    Degenerate { p: u64, witness: Box<Witness> },

    #[error("no good prime in [{start}, {cap}]")]
    NoGoodPrime { start: u64, cap: u64 },

    #[error("no common convergence strip: {0}")]
    EmptyStrip(String),

    #[error("asymptotics not certified: {0}")]
    NotCertified(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("e(Phi) bound not reached: conductor {conductor} still has nonzero twisted coefficients")]
    ConductorBound { conductor: u32 },

    #[error("unresolved mass {0} exceeds tolerance")]
    Unresolved(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

impl Error {
    /// True for errors caused by malformed input rather than by mathematics.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Syntax { .. } | Error::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
