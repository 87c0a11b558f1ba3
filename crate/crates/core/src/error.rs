//! Error type shared by every solver and kernel in the crate.

/// Errors produced by kernels, solvers and the benchmark harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The matrix pencil has no regular part: some antidiagonal or Schur
    /// diagonal pair is zero to working precision.
    #[error("matrix pencil is numerically singular")]
    SingularPencil,

    /// A linear solve met a pivot too small relative to the input scale.
    #[error("linear system is numerically singular (relative pivot {rel_pivot:.3e})")]
    NumericallySingular { rel_pivot: f64 },

    /// The leading block of a deflating-subspace basis is singular, so the
    /// subspace admits no basis of the form [I; X].
    #[error("deflating subspace is not a graph subspace")]
    NotAGraphSubspace,

    /// A T-Sylvester operator is singular because the underlying spectrum
    /// contains a reciprocal pair.
    #[error("T-Sylvester operator is singular (spectrum not reciprocal-free)")]
    ReciprocalSpectrum,

    /// The two pencils of a coupled Sylvester system share an eigenvalue.
    #[error("coupled Sylvester system is singular (pencils share spectrum)")]
    SharedSpectrum,

    /// An eigenvalue lies on (or numerically on) the unit circle where a
    /// swap or reduction requires it off the circle.
    #[error("eigenvalue on the unit circle blocks the operation")]
    CriticalEigenvalue,

    /// The requested eigenvalue selection is not a reciprocal-free set of
    /// the required cardinality.
    #[error("selected eigenvalue set is not reciprocal-free of cardinality n (selected {selected}, expected {expected})")]
    SelectionNotReciprocalFree { selected: usize, expected: usize },

    /// An iteration matrix became singular mid-run.
    #[error("iteration breakdown at step {step}: {what}")]
    Breakdown { step: usize, what: &'static str },

    /// The preprocessing step of the doubling algorithm failed.
    #[error("doubling initialization breakdown (preprocessing matrix singular)")]
    InitBreakdown,

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// The numerical kernel found by rank-revealing QR has the wrong dimension.
    #[error("kernel dimension mismatch: rank {rank}, expected {expected}")]
    KernelDimensionMismatch { rank: usize, expected: usize },

    /// A quadrature node of the contour integral is numerically singular.
    #[error("contour node {node} is numerically singular (pencil nearly critical)")]
    NodeSingular { node: usize },

    /// The rank decision for the approximate projector is ambiguous.
    #[error("projector rank ambiguous (diagonal gap ratio {ratio:.3e} below threshold)")]
    RankAmbiguous { ratio: f64 },

    /// A forward error was requested against a zero reference solution.
    #[error("reference solution has zero norm")]
    ZeroReference,

    /// The synthetic problem generator kept drawing ill-conditioned data.
    #[error("problem generation failed after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    /// Malformed user input (problem files, CLI arguments).
    #[error("bad input: {0}")]
    BadInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("bad input: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 3 for bad input, 2 for solver errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BadInput(_) | Error::Io(_) | Error::Json(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
