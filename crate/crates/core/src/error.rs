use thiserror::Error;

/// Errors raised by the configuration, spectral, equilibrium and solver routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration must contain at least one point of dimension at least one")]
    Empty,

    #[error("point {index} has {found} components, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("point {index} has norm {norm}, outside the renormalization band")]
    NonUnitPoint { index: usize, norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("points {0} and {1} coincide and the potential is singular there")]
    DegeneratePair(usize, usize),

    #[error("centroid component {component} = {value:e} lies in the ambiguity band [{tol:e}, {upper:e})")]
    AmbiguousZero {
        component: usize,
        value: f64,
        tol: f64,
        upper: f64,
    },

    #[error("alpha[{index}] collides with lambda = {lambda}")]
    PoleCollision { index: usize, lambda: f64 },

    #[error("configuration is not column-orthogonal (off-diagonal {off_diagonal:e})")]
    NotNormalized { off_diagonal: f64 },

    #[error("root polishing failed: |g| = {residual:e} after {iterations} iterations")]
    RootFindingFailure { residual: f64, iterations: usize },

    #[error("inadmissible selection: {0}")]
    InadmissibleSelection(String),

    #[error("product of the complex variables vanishes")]
    ZeroProduct,

    #[error("denominator `{0}` vanishes")]
    DenominatorVanish(&'static str),

    #[error("leading coefficient is zero")]
    DegenerateLeadingCoefficient,

    #[error("malformed configuration file: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
