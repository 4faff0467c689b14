use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not a direction: the zero vector cannot be primitivized")]
    NotADirection,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty generator list")]
    EmptyGenerators,
    #[error("fan not complete: {0}")]
    FanNotComplete(String),
    #[error("rays do not span the ambient space")]
    RaysNotSpanning,
    #[error("duplicate ray {ray} with conflicting weights")]
    ConflictingWeights { ray: String },
    #[error("weights unbounded below: no convex minorant exists")]
    UnboundedBelow,
    #[error("marked element not interior: the convexified weight is linear along a line")]
    NotStrictlyConvex,
    #[error("face dimension {k} out of range 0..={rank}")]
    FaceDimension { k: usize, rank: usize },
    #[error("not covered: vector {0} lies outside the fan support")]
    NotCovered(String),
    #[error("convexify first: weights are not convex")]
    NotConvex,
    #[error("cone is not maximal in the fan")]
    NotMaximal,
    #[error("fan is not simplicial; chart coordinates need simplicial maximal cones")]
    NotSimplicial,
    #[error("degenerate monomial argument: t and every z_j must be nonzero")]
    ZeroArgument,
    #[error("dangling stratum name '{0}' in atlas")]
    DanglingStratum(String),
    #[error("atlas has no charts")]
    EmptyAtlas,
    #[error("point outside chart domain: a_m = {value} for ray {ray}")]
    OutsideChart { ray: usize, value: f64 },
    #[error("point outside partition cover")]
    OutsidePartitionCover,
    #[error("positivity failure at point {0}")]
    PositivityFailure(String),
    #[error("singular metric matrix")]
    SingularMatrix,
    #[error("finite-difference step underflow")]
    StepUnderflow,
    #[error("non-finite integrand sample at node {0}")]
    NonFiniteIntegrand(String),
    #[error("degenerate chart boundary: c_j = {0}")]
    DegenerateChartBoundary(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("spec parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
