use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter sequence breaks one of the schedule constraints.
    /// Reports the first offending level (1-based) and the constraint text.
    #[error("invalid schedule at level {index}: {constraint}")]
    InvalidSchedule { index: usize, constraint: String },

    /// A scalar argument left its documented domain.
    #[error("{name} = {value} outside domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The shape derivative grows without bound as t -> 1; t = 1 is refused.
    #[error("shape derivative is unbounded at t = 1")]
    UnboundedDerivative,

    /// Two vectors live over base spaces of different dimension.
    #[error("base dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A requested level exceeds the levels materialized in the schedule.
    #[error("degree {degree} exceeds the schedule's {max} levels")]
    DegreeOutOfRange { degree: usize, max: usize },

    /// Root solve exhausted its iteration budget; indicates a schedule or
    /// tolerance bug, not an expected runtime condition.
    #[error("root solve did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The operation is undefined at the zero vector.
    #[error("operation undefined at the zero vector")]
    ZeroVector,

    /// One-sided derivatives disagree where the construction guarantees a
    /// two-sided derivative; signals an implementation bug.
    #[error("one-sided derivatives differ by {gap:e} along coordinate {index}")]
    NotSmooth { index: usize, gap: f64 },

    /// Slice plane vectors are linearly dependent.
    #[error("plane vectors are linearly dependent")]
    DegeneratePlane,

    /// A sampler could not construct a point satisfying its hypotheses.
    #[error("could not build a hypothesis-satisfying sample after {attempts} attempts")]
    SampleConstruction { attempts: usize },

    /// No level of the schedule reaches the requested octahedrality defect.
    #[error("no level reaches octahedrality defect {epsilon} within {max} levels")]
    ScheduleTooCoarse { epsilon: f64, max: usize },

    /// A tolerance field is outside its supported range.
    #[error("tolerance {field} = {value} outside supported range")]
    InvalidTolerance { field: &'static str, value: f64 },

    /// An unknown verification check name was requested.
    #[error("unknown check {0:?}")]
    UnknownCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
