use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("rectangle width must be positive and finite, got {0}")]
    NonPositiveWidth(f64),
    #[error("mesh size must be positive and finite, got {0}")]
    NonPositiveMesh(f64),
    #[error("mesh size {delta} exceeds min(L, 1)/3 = {max_delta}")]
    MeshTooCoarse { delta: f64, max_delta: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GffError {
    #[error("dense Green solve refused: {interior} interior vertices exceeds the limit of {limit}")]
    TooLarge { interior: usize, limit: usize },
    #[error("alternating boundary value must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error("boundary data has {got} entries, lattice has {expected} vertices")]
    BoundaryLength { expected: usize, got: usize },
    #[error("boundary value at vertex {0} is not finite")]
    NonFiniteBoundary(usize),
    #[error("harmonic extension residual {0:e} did not reach the target")]
    NotConverged(f64),
    #[error("malformed field dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// `std::io::Error` wrapper that is `Clone + PartialEq` by message.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0}")]
pub struct IoError(pub String);

impl From<std::io::Error> for IoError {
    fn from(e: std::io::Error) -> Self {
        IoError(e.to_string())
    }
}

impl From<std::io::Error> for GffError {
    fn from(e: std::io::Error) -> Self {
        GffError::Io(e.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("endpoint value is NaN")]
    NanInput,
    #[error("field has {got} values, lattice has {expected} vertices")]
    FieldSize { expected: usize, got: usize },
    #[error("Green matrix has {got} rows, lattice has {expected} interior vertices")]
    GreenMismatch { expected: usize, got: usize },
    #[error("edge point references edge {edge}, lattice has {edges} edges")]
    BadEdge { edge: usize, edges: usize },
    #[error("edge position {0} outside [0, 1]")]
    BadPosition(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PercolationError {
    #[error("crossing mode {mode} needs {expected} input")]
    ModeMismatch { mode: String, expected: &'static str },
    #[error("input sized for {got} items, lattice needs {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("level line exceeded {0} steps without reaching the boundary")]
    Runaway(usize),
    #[error("level line stepped onto a dual edge twice")]
    RevisitedEdge,
    #[error(transparent)]
    Io(#[from] IoError),
}

impl From<std::io::Error> for PercolationError {
    fn from(e: std::io::Error) -> Self {
        PercolationError::Io(e.into())
    }
}

impl From<csv::Error> for PercolationError {
    fn from(e: csv::Error) -> Self {
        PercolationError::Io(IoError(e.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LimitsError {
    #[error("elliptic modulus must lie in [0, 1), got {0}")]
    ModulusOutOfRange(f64),
    #[error("aspect ratio must be positive and finite, got {0}")]
    BadAspect(f64),
    #[error("force points must satisfy yL < 0 < yR, got ({0}, {1})")]
    ForcePointOrder(f64, f64),
    #[error("starting point must lie in (-1, 1), got {0}")]
    BadStart(f64),
    #[error("time step {0} outside (0, 1e-3]")]
    BadStep(f64),
    #[error("barrier offset b and horizon T must be positive, got b = {0}, T = {1}")]
    BadHitting(f64, f64),
    #[error("path is empty")]
    EmptyPath,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Gff(#[from] GffError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Percolation(#[from] PercolationError),
    #[error(transparent)]
    Limits(#[from] LimitsError),
    /// A sample violated an invariant that must hold surely.
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// True for errors caused by bad user input rather than internal failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, HarnessError::Config(_) | HarnessError::Lattice(_))
    }
}
