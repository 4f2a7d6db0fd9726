//! Exact verification tooling for three-dimensional Gaussian product
//! inequalities: rational and interval arithmetic, sparse polynomials,
//! terminating hypergeometric series, Gaussian moments, the inequality
//! predicates, and sums-of-squares certificate checking.

pub mod bundled;
pub mod exactnum;
pub mod gausshyp;
pub mod inequality;
pub mod moments;
pub mod polyring;
pub mod report;
pub mod soscert;
