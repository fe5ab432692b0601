use alloc::string::String;

/// Errors raised by the numerical core.
///
/// Variants are grouped by what the caller has to change: the input domain,
/// the grid geometry, or a numerical guard that tripped during computation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("incompatible domain for {op}: {detail}")]
    IncompatibleDomain { op: &'static str, detail: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("convolution produced a negative value {value:e} at node {index} (aliasing or window truncation)")]
    NegativeConvolution { index: usize, value: f64 },
    #[error("convolution window truncation: retained fraction {retained} below {required}")]
    WindowTruncation { retained: f64, required: f64 },
    #[error("measure is not probability-normalized (mass {mass})")]
    NotNormalized { mass: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("invalid Riesz spec: {0}")]
    InvalidSpec(String),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("frequency overflow: {0}")]
    FrequencyOverflow(String),
    #[error("density ratio undefined at s = {s} (h is not in the quasi-invariance group)")]
    UndefinedDensityRatio { s: f64 },
    #[error("sampling resolution: {0}")]
    Resolution(String),
    #[error("overlapping windows: {0}")]
    OverlappingWindows(String),
    #[error("quadrature node s = {s} outside kappa support")]
    NodeOutsideSupport { s: f64 },
    #[error("improper kappa: {0}")]
    ImproperKappa(String),
}

pub type Result<T> = core::result::Result<T, Error>;
