use core::fmt;

pub type Result<T> = core::result::Result<T, PmeError>;

/// Errors raised by mesh construction, assembly and the time steppers.
#[derive(Debug, Clone, PartialEq)]
pub enum PmeError {
    /// Mesh kind not available in the requested dimension.
    InvalidMeshKind(&'static str),
    /// Zero cell count or an empty/inverted bounding box.
    InvalidMeshSize,
    /// A cell with zero (or negative) measure.
    DegenerateCell { cell: usize },
    /// Cell connectivity that does not form a conforming mesh.
    NonConforming(&'static str),
    /// The requested operation is not defined for this cell kind.
    UnsupportedCellKind(&'static str),
    /// An interior face with a non-positive lumped velocity weight.
    NonDelaunayFace { face: usize, weight: f64 },
    /// Input with the wrong number of entries.
    DimensionMismatch { expected: usize, found: usize },
    /// A linear system that is singular on its active set.
    Singular { row: usize },
    /// Negative or non-finite initial density.
    InvalidDensity { index: usize, value: f64 },
    /// Exponent outside `m > 1`.
    InvalidExponent(f64),
    /// Non-positive or non-finite time step.
    InvalidTimeStep(f64),
    /// Newton iteration stopped before meeting its tolerance.
    NewtonDiverged { iterations: usize, residual: f64 },
    /// Backtracking line search could not find a non-increasing step.
    LineSearchFailed { iteration: usize },
    /// The active set is empty, so a density extremum is undefined.
    EmptyActiveSet,
    /// A region that contains no cell barycenter.
    EmptyRegion,
    /// Unsupported quadrature degree.
    QuadratureDegree(usize),
    /// Fewer than two refinement levels.
    TooFewLevels,
    /// Zero error at a level; the observed order is not defined.
    ExactAtLevel { level: usize },
    /// Negative error at a level.
    InvalidError { level: usize },
    /// A waiting time requested outside `0 <= θ <= 1/4`.
    WaitingTimeUndefined(f64),
    /// The step could not satisfy the CFL bound after the allowed halvings.
    CflNotMet { dt: f64, bound: f64 },
}

impl fmt::Display for PmeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PmeError::InvalidMeshKind(msg) => write!(f, "invalid mesh kind: {msg}"),
            PmeError::InvalidMeshSize => write!(f, "mesh counts must be >= 1 and the box nondegenerate"),
            PmeError::DegenerateCell { cell } => write!(f, "cell {cell} has zero measure"),
            PmeError::NonConforming(msg) => write!(f, "non-conforming mesh: {msg}"),
            PmeError::UnsupportedCellKind(msg) => write!(f, "unsupported cell kind: {msg}"),
            PmeError::NonDelaunayFace { face, weight } => {
                write!(f, "interior face {face} has lumped velocity weight {weight:e}")
            }
            PmeError::DimensionMismatch { expected, found } => {
                write!(f, "expected {expected} entries, found {found}")
            }
            PmeError::Singular { row } => write!(f, "singular system (pivot {row})"),
            PmeError::InvalidDensity { index, value } => {
                write!(f, "invalid density {value} at index {index}")
            }
            PmeError::InvalidExponent(m) => write!(f, "exponent m = {m} must satisfy m > 1"),
            PmeError::InvalidTimeStep(dt) => write!(f, "time step {dt} must be positive"),
            PmeError::NewtonDiverged { iterations, residual } => write!(
                f,
                "Newton iteration not converged after {iterations} iterations (residual {residual:e})"
            ),
            PmeError::LineSearchFailed { iteration } => {
                write!(f, "line search failed in Newton iteration {iteration}")
            }
            PmeError::EmptyActiveSet => write!(f, "no active degrees of freedom"),
            PmeError::EmptyRegion => write!(f, "region contains no cells"),
            PmeError::QuadratureDegree(d) => write!(f, "quadrature degree {d} not supported"),
            PmeError::TooFewLevels => write!(f, "at least two levels are required"),
            PmeError::ExactAtLevel { level } => write!(f, "error is exactly zero at level {level}"),
            PmeError::InvalidError { level } => write!(f, "negative error at level {level}"),
            PmeError::WaitingTimeUndefined(theta) => {
                write!(f, "waiting time formula requires theta <= 1/4, got {theta}")
            }
            PmeError::CflNotMet { dt, bound } => {
                write!(f, "time step {dt:e} violates the CFL bound {bound:e}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PmeError {}
