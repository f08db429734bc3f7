//! Exact rational substrate: polynomials, piecewise polynomials, root
//! isolation, linear solves and interval enclosures.

pub mod enclosure;
pub mod io;
pub mod linalg;
pub mod piecewise;
pub mod poly;
pub mod roots;

pub use enclosure::{ln_enclosure, Enclosure, Value};
pub use piecewise::{AbsResult, CombineOp, Piecewise};
pub use poly::Polynomial;
pub use roots::{isolate_real_roots, RootInterval};
