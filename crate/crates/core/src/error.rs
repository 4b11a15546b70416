//! Crate-wide error type for the numerical pipeline.

/// Errors raised while building or solving a model.
#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("polynomial degree {0} outside the supported range 1..=64")]
    DegreeOutOfRange(usize),
    #[error("node solver did not converge for degree {degree} (seed index {index})")]
    NonConvergence { degree: usize, index: usize },
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("boundary Jacobian is {det:.3e} at eta = {eta}; the element is inverted or degenerate seen from its scaling center")]
    NonPositiveJacobian { eta: f64, det: f64 },
    #[error("element repeats node {0}")]
    DuplicateNode(usize),
    #[error("reference to node {0} beyond the node table")]
    DanglingNode(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid radial grid: {0}")]
    InvalidGrid(String),
    #[error("coefficient matrix E0 is numerically singular (rcond {rcond:.3e})")]
    SingularE0 { rcond: f64 },
    #[error("singular pivot block at radial index {index} (rcond {rcond:.3e})")]
    SingularPivot { index: i64, rcond: f64 },
    #[error("condensations assembled at different frequencies: {0} rad/s vs {1} rad/s")]
    InconsistentFrequency(f64, f64),
    #[error("subdomain interface does not match the global mesh: {0}")]
    UnmatchedInterfaceNodes(String),
    #[error("strip load does not land on the meshed free surface: {0}")]
    LoadOutsideMesh(String),
    #[error("global system is singular or unstable: {0}")]
    SingularGlobalMatrix(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("interior recovery requested from a condensation that discarded its sweep operators")]
    RecoveryDiscarded,
    #[error("improper integral did not converge: {0}")]
    IntegralDivergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
