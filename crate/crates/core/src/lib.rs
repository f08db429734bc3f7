//! Finite-stage asymptotic functions: exact moment-vanishing mollifiers, delta
//! nets and cut-offs, a small distribution calculus, the convolution embedding
//! into ε-indexed representatives, and truncated Puiseux series standing in
//! for the field of asymptotic numbers.

pub mod delta;
pub mod dist;
pub mod domain;
pub mod embed;
pub mod error;
pub mod exact;
pub mod expansion;
pub mod field;
pub mod mollifier;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Rational;

/// Polynomial with exact rational coefficients.
pub type Poly = exact::Polynomial<Rational>;
/// Piecewise polynomial with exact rational breakpoints and coefficients.
pub type PiecewisePoly = exact::Piecewise<Rational>;
/// Truncated Puiseux series with Gaussian-rational coefficients.
pub type AsymptoticNumber = field::Series<num_complex::Complex<Rational>>;
