use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("parse error at byte {position}: {message} (in {input:?})")]
    Parse {
        input: String,
        position: usize,
        message: String,
    },

    #[error("expected degree {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("expected arity {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("truncation order mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    #[error("degree-0 multivector has no image under the HKR map")]
    HkrDegreeZero,

    #[error("Poisson structure has non-constant component {0}")]
    NotConstant(String),

    #[error("bivector is not Poisson: [pi, pi] = {0}")]
    NotPoisson(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("vertex {vertex} out of range for order {order}")]
    VertexOutOfRange { vertex: usize, order: usize },

    #[error("enumeration of order {order} exceeds the configured cap {cap}")]
    EnumerationCap { order: usize, cap: usize },

    #[error("coincident points")]
    CoincidentPoints,

    #[error("point {0} is not in the closed upper half plane")]
    NotInUpperHalfPlane(String),

    #[error("no weight available for graph \"{0}\"")]
    MissingWeight(String),

    #[error("weight of graph \"{0}\" is not rational")]
    NonRationalWeight(String),

    #[error("multiple zeta value zeta({0}) is not in the constant table")]
    UnknownMzv(String),

    #[error("weight value has a nonzero imaginary part: {0}")]
    ImaginaryWeight(String),

    #[error("requested {requested} digits, at most {max} available")]
    PrecisionUnavailable { requested: u32, max: u32 },

    #[error("order-1 term is not a Hochschild cocycle: d(B1) = {0}")]
    CocycleViolated(String),

    #[error("skew part of B1 is not a bivector: {0}")]
    NotBivector(String),

    #[error("gauge series must start with the identity operator")]
    GaugeNotIdentity,

    #[error("gauge operator T{order} does not vanish on constants")]
    GaugeOnConstants { order: usize },

    #[error("weight file line {line}: {message}")]
    WeightFile { line: usize, message: String },

    #[error("linear system inconsistent (rank {rank}, {equations} equations, {unknowns} unknowns)")]
    Inconsistent {
        rank: usize,
        equations: usize,
        unknowns: usize,
    },

    #[error("linear system underdetermined: rank {rank} of {unknowns}; {detail}")]
    Underdetermined {
        rank: usize,
        unknowns: usize,
        detail: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(input: &str, position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            position,
            message: message.into(),
        }
    }
}
