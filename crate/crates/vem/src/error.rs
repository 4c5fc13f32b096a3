//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Unified error type. Variants are grouped by the stage that raises them:
/// mesh validation, triangulation, quadrature construction, projector
/// assembly, finite element realization, and the linear solvers.
#[derive(Debug, Error)]
pub enum VemError {
    /// A polygon failed validation: non-positive signed area, repeated
    /// vertices, or fewer than three vertices.
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),

    /// The polygon could not be triangulated (typically: not simple).
    #[error("triangulation failed: {0}")]
    TriangulationFailed(String),

    /// A mesh is structurally invalid (bad indices, non-conforming edges,
    /// unreferenced vertices, overlapping cells, ...).
    #[error("invalid mesh: {0}")]
    ValidationError(String),

    /// Mesh file could not be parsed.
    #[error("mesh parse error: {0}")]
    ParseError(String),

    /// Requested mesh family size or parameter is out of range.
    #[error("invalid size: {0}")]
    InvalidSize(String),

    /// No quadrature rule is available for the requested exactness degree.
    #[error("unsupported quadrature degree {0} (supported: 1..=14)")]
    UnsupportedDegree(usize),

    /// A monomial mass matrix was too ill-conditioned to invert reliably.
    #[error("singular or near-singular mass matrix (cond ~ {cond:.3e})")]
    SingularMass { cond: f64 },

    /// Degree/moment combination outside the supported set.
    #[error("unsupported degree/moment layout: {0}")]
    UnsupportedLayout(String),

    /// The projector Gram matrix is too ill-conditioned.
    #[error("ill-conditioned projector system (cond ~ {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// The constrained finite element saddle system is singular, which means
    /// the requested degrees of freedom are not unisolvent on this element.
    #[error("saddle system singular: {0}")]
    SaddleSingular(String),

    /// A matrix expected to be symmetric positive definite was not.
    #[error("matrix not symmetric positive definite: {0}")]
    NotSpd(String),

    /// The cyclic Jacobi eigensolver did not reach its tolerance.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },

    /// The conjugate gradient solver hit its iteration cap.
    #[error("CG reached {iterations} iterations with relative residual {residual:.3e}")]
    MaxIterations { iterations: usize, residual: f64 },

    /// A CLI/problem definition referenced an exact solution that is absent.
    #[error("missing exact solution: {0}")]
    MissingExact(String),

    /// Underlying I/O failure while reading or writing files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, VemError>;
