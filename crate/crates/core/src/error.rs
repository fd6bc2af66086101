use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{what} {index} out of range (bound {bound})")]
    IndexOutOfRange { what: &'static str, index: usize, bound: usize },

    #[error("jet order {needed} exceeds order cap {cap}")]
    OrderCapExceeded { needed: usize, cap: usize },

    #[error("`{0}` is not registered as nonvanishing")]
    Unregistered(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("formal derivative of opaque symbol `{0}` is undefined")]
    OpaqueDerivative(String),

    #[error("invalid jet space: {0}")]
    InvalidSpace(String),

    #[error("form degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("form degree {0} exceeds n + 1 = {1}")]
    DegreeOverflow(usize, usize),

    #[error("forms live on different jet spaces")]
    SpaceMismatch,

    #[error("lagrangian must be declared nonvanishing")]
    NotNonvanishing,

    #[error("operation requires order {expected}, got {found}")]
    WrongOrder { expected: String, found: usize },

    #[error("lagrangian contains opaque symbols")]
    OpaqueInLagrangian,

    #[error("lagrangian density has jet order {found} above declared order {declared}")]
    DensityOrder { declared: usize, found: usize },

    #[error("jacobian of the chart transformation is singular")]
    SingularJacobian,

    #[error("transform prolonged to order {have}, form needs {needed}")]
    TransformTooShort { have: usize, needed: usize },

    #[error("third-order invariance obstruction does not vanish")]
    ObstructionViolated,

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
