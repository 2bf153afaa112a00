//! Local zeta functions of two-variable Laurent polynomials that are
//! non-degenerate at infinity, with a p-adic enumeration oracle.

pub mod cli;
pub mod error;
pub mod finite_field;
pub mod laurent;
pub mod padic;
pub mod polytope;
pub mod qt;
pub mod rational;
pub mod series;
pub mod upoly;
pub mod zeta;

pub use error::{Error, Result};
pub use laurent::{parse, LaurentPolynomial};
