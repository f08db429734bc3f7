use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library reports. Rational values are carried in their
/// `p/q` text form so errors stay cheap to clone and print.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // exact arithmetic
    #[error("degenerate scale: affine rescaling by zero")]
    DegenerateScale,
    #[error("invalid interval: lower bound {lo} exceeds upper bound {hi}")]
    InvalidInterval { lo: String, hi: String },
    #[error("not C1 at x = {at}; the derivative must be taken distributionally")]
    DistributionalDerivativeRequired { at: String },
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("operation requires a compactly supported function")]
    NotCompact,
    #[error("singular linear system")]
    SingularSystem,

    // asymptotic numbers
    #[error("division by an element that is zero up to order e^{0}")]
    DivisionByZero(String),
    #[error("only real asymptotic numbers are ordered")]
    NotOrdered,
    #[error("polynomial degree {0} is above the supported maximum of 4")]
    UnsupportedDegree(usize),
    #[error("exponent e^{exponent} has no rational value at e = {epsilon}")]
    IrrationalPower { exponent: String, epsilon: String },
    #[error("complex value where a real one is required")]
    NotReal,

    // mollifiers, nets, cut-offs
    #[error("insufficient smoothness: {0}")]
    InsufficientSmoothness(String),
    #[error("epsilon = 1 makes the Vandermonde system singular")]
    SingularVandermonde,
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("epsilon search exhausted below 2^-64; best upper bound found {best_bound} at epsilon {best_epsilon}")]
    SearchExhausted { best_epsilon: String, best_bound: String },

    // distributions
    #[error("syntax error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown atom {0:?}")]
    UnknownAtom(String),
    #[error("test function is not C^{order} at {point}, required by atom {atom}")]
    NotSmoothAt { atom: String, point: String, order: u32 },
    #[error("region must be bounded")]
    UnboundedRegion,

    // embedding and expansions
    #[error("atom {atom} lies within 3*epsilon of the domain boundary at epsilon = {epsilon}")]
    BoundaryFlag { atom: String, epsilon: String },
    #[error("representatives live on different ladders")]
    LadderMismatch,
    #[error("test function support [{lo}, {hi}] leaves the cut-off plateau at epsilon = {epsilon}")]
    SupportViolation { lo: String, hi: String, epsilon: String },
    #[error("ladder is invalid: {0}")]
    InvalidLadder(String),
    #[error("ill-posed fit: {reason}; try grid {suggestion}")]
    IllPosed { reason: String, suggestion: String },
    #[error("no valid expansion on the declared grid: residual {residual} above tolerance {tolerance}")]
    NoValidExpansion { residual: String, tolerance: String, fit: Box<crate::expansion::ExpansionFit> },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
