use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular matrix (no admissible pivot in column {column})")]
    SingularMatrix { column: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("jet division by a series vanishing at the expansion point")]
    DivisionByZero,
    #[error("t = {t} lies outside the interval [{a}, {b}]")]
    OutOfInterval { t: f64, a: f64, b: f64 },
    #[error("singular Hermite constraint system: {0}")]
    SingularConstraintSystem(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("mass matrix is singular")]
    SingularMass,
    #[error("unknown problem '{0}'")]
    UnknownProblem(String),
    #[error("Newton iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("singular Jacobian in local solve")]
    SingularJacobian,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("one-step system is singular (z is a pole of the stability function)")]
    SingularSystem,
    #[error("eoc needs positive errors, got {0:e} and {1:e}")]
    NonPositiveError(f64, f64),
    #[error("function provides derivatives up to order {available}, but {required} are needed")]
    InsufficientSmoothness { required: usize, available: usize },
    #[error("extended precision already fixed at {active} bits, cannot switch to {requested}")]
    PrecisionMismatch { requested: usize, active: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("interval {index}: {source}")]
    AtInterval {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("N = {n}: {source}")]
    AtResolution {
        n: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_interval(self, index: usize) -> Self {
        Error::AtInterval {
            index,
            source: Box::new(self),
        }
    }

    pub fn at_resolution(self, n: usize) -> Self {
        Error::AtResolution {
            n,
            source: Box::new(self),
        }
    }

    /// The innermost error with context layers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtInterval { source, .. } | Error::AtResolution { source, .. } => source.root(),
            other => other,
        }
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self.root() {
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::OrderMismatch { .. } => "OrderMismatch",
            Error::DivisionByZero => "DivisionByZero",
            Error::OutOfInterval { .. } => "OutOfInterval",
            Error::SingularConstraintSystem(_) => "SingularConstraintSystem",
            Error::InvalidParameters(_) => "InvalidParameters",
            Error::SingularMass => "SingularMass",
            Error::UnknownProblem(_) => "UnknownProblem",
            Error::NewtonDiverged { .. } => "NewtonDiverged",
            Error::SingularJacobian => "SingularJacobian",
            Error::InvalidMesh(_) => "InvalidMesh",
            Error::SingularSystem => "SingularSystem",
            Error::NonPositiveError(..) => "NonPositiveError",
            Error::InsufficientSmoothness { .. } => "InsufficientSmoothness",
            Error::PrecisionMismatch { .. } => "PrecisionMismatch",
            Error::Config(_) => "ConfigError",
            Error::AtInterval { .. } | Error::AtResolution { .. } => unreachable!(),
        }
    }

    /// Interval index attached by the time-marching loop, if any.
    pub fn interval(&self) -> Option<usize> {
        match self {
            Error::AtInterval { index, .. } => Some(*index),
            Error::AtResolution { source, .. } => source.interval(),
            _ => None,
        }
    }

    /// Mesh resolution attached by a convergence study, if any.
    pub fn resolution(&self) -> Option<usize> {
        match self {
            Error::AtResolution { n, .. } => Some(*n),
            Error::AtInterval { source, .. } => source.resolution(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn context_layers() {
        let e = Error::SingularJacobian.at_interval(7).at_resolution(64);
        assert_eq!(e.kind(), "SingularJacobian");
        assert_eq!(e.interval(), Some(7));
        assert_eq!(e.resolution(), Some(64));
        assert_eq!(e.to_string(), "N = 64: interval 7: singular Jacobian in local solve");
    }
}
