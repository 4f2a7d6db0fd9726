//! Every inequality object of the three-dimensional GPI argument: the
//! parameters `r`, `t`, the function `H`, the quadratic form in `(beta, gamma)`,
//! the polynomials `S`, `h`, `f`, `g`, the function `G`, and the predicates
//! built on them.

mod checks;
mod hfunc;
mod params;
mod polys;
mod real;
mod scan;

pub use checks::*;
pub use hfunc::*;
pub use params::*;
pub use polys::*;
pub use real::*;
pub use scan::*;

use thiserror::Error;

use crate::exactnum::ExactError;
use crate::moments::MomentError;
use crate::polyring::PolyError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IneqError {
    #[error("m2 and m3 must be at least 1 (got {m2}, {m3})")]
    BadExponents { m2: u32, m3: u32 },
    #[error("h is only defined for 1 <= m2 <= 7 (got {0})")]
    HIndexOutOfRange(u32),
    #[error("{what}: z = {z} is outside {domain}")]
    Domain {
        what: &'static str,
        z: String,
        domain: String,
    },
    #[error("|x| = {0} exceeds 1")]
    CorrelationOutOfRange(String),
    #[error("parameter invariant violated: {0}")]
    Invariant(String),
    #[error("grid needs at least 2 points (got {0})")]
    GridTooSmall(usize),
    #[error("real exponents must be positive (got {y2}, {y3})")]
    BadRealExponents { y2: f64, y3: f64 },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}
