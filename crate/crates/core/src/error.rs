//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by the analysis routines.
///
/// Numeric payloads are converted to `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in {0}")]
    NonFiniteEntry(String),
    #[error("complex-valued entries are not supported ({0}); only real models are accepted")]
    ComplexNotSupported(String),
    #[error("matrix {name} is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetric { name: String, asymmetry: f64 },
    #[error("resolvent singular: i*omega - xi/2 is (numerically) an eigenvalue of A (xi = {xi}, omega = {omega})")]
    ResolventSingular { xi: f64, omega: f64 },
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("certificate infeasible: lambda_min(W) = {lambda_min_w:.6e}")]
    InfeasibleCertificate { lambda_min_w: f64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("D^T + D - xi*I is numerically singular (xi = {xi}, smallest eigenvalue {lambda_min:.3e})")]
    SingularDBlock { xi: f64, lambda_min: f64 },
    #[error("Hamiltonian has eigenvalues on the imaginary axis (smallest |Re| = {min_real_part:.3e}); the model is not strictly passive")]
    ImaginaryAxisEigenvalues { min_real_part: f64 },
    #[error("invariant subspace is not a graph: U1 is singular (reciprocal condition {rcond:.3e})")]
    SingularU1 { rcond: f64 },
    #[error("Riccati solution is not symmetric (relative asymmetry {asymmetry:.3e})")]
    AsymmetricSolution { asymmetry: f64 },
    #[error("Riccati residual too large: {residual:.3e} > {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error(
        "model is not minimal (controllable rank {controllable_rank}, observable rank {observable_rank}, n = {n})"
    )]
    NotMinimal { controllable_rank: usize, observable_rank: usize, n: usize },
    #[error("certificate is not interior (lambda_min(X) = {lambda_min_x:.3e}, lambda_min(W) = {lambda_min_w:.3e})")]
    NotInterior { lambda_min_x: f64, lambda_min_w: f64 },
    #[error("{0} did not converge")]
    ConvergenceFailure(String),
    #[error("model is not strictly passive")]
    NotStrictlyPassive,
    #[error("matrix is not stable (spectral abscissa {abscissa:.6e})")]
    NotStable { abscissa: f64 },
    #[error("pencil is numerically singular at xi = {xi}")]
    SingularPencil { xi: f64 },
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("empty grid: {0}")]
    EmptyGrid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
