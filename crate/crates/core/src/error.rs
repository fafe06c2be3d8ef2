use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },
    #[error("coupling must be non-negative, got {0}")]
    NegativeCoupling(f64),
    #[error("coupling {lambda} is not below the critical value {critical}")]
    Supercritical { lambda: f64, critical: f64 },
    #[error("operation requires a different coupling kind")]
    WrongCouplingKind,
    #[error("degenerate normal modes")]
    DegenerateModes,
    #[error("normal-mode transform is singular (residual {residual:e})")]
    SingularTransform { residual: f64 },
    #[error("Bose occupation requested at zero frequency")]
    ZeroFrequency,
    #[error("moment source vector has imaginary part {imag:e}")]
    NonRealG { imag: f64 },
    #[error("moment matrix has imaginary part {imag:e}")]
    NonRealLambda { imag: f64 },
    #[error("moment system is singular or too close to criticality (condition {condition:e})")]
    SingularSystem { condition: f64 },
    #[error("covariance violates the uncertainty relation (smallest symplectic eigenvalue {smallest})")]
    UnphysicalCovariance { smallest: f64 },
    #[error("covariance matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("spectral integrand evaluated at zero frequency")]
    PoleAtZero,
    #[error("quadrature did not reach tolerance (estimated error {error:e} after {subdivisions} subdivisions)")]
    QuadratureNonConvergence { error: f64, subdivisions: usize },
    #[error("Hilbert-space dimension {dim} exceeds the limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("truncated state has tail population {tail:e} above {tol:e}")]
    TruncationInadequate { tail: f64, tol: f64 },
    #[error("steady state is not unique (solutions differ by {difference:e})")]
    NonUniqueSteadyState { difference: f64 },
    #[error("iterative solver stalled at residual {residual:e}")]
    SolverNonConvergence { residual: f64 },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("cannot write output {path}: {reason}")]
    OutputUnwritable { path: String, reason: String },
}

impl Error {
    /// Short code used in the `status` column of sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveParameter { .. } => "NonPositiveParameter",
            Error::NegativeCoupling(_) => "NegativeCoupling",
            Error::Supercritical { .. } => "Supercritical",
            Error::WrongCouplingKind => "WrongCouplingKind",
            Error::DegenerateModes => "DegenerateModes",
            Error::SingularTransform { .. } => "SingularTransform",
            Error::ZeroFrequency => "ZeroFrequency",
            Error::NonRealG { .. } => "NonRealG",
            Error::NonRealLambda { .. } => "NonRealLambda",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::UnphysicalCovariance { .. } => "UnphysicalCovariance",
            Error::NotSymmetric(_) => "NotSymmetric",
            Error::PoleAtZero => "PoleAtZero",
            Error::QuadratureNonConvergence { .. } => "QuadratureNonConvergence",
            Error::DimensionTooLarge { .. } => "DimensionTooLarge",
            Error::TruncationInadequate { .. } => "TruncationInadequate",
            Error::NonUniqueSteadyState { .. } => "NonUniqueSteadyState",
            Error::SolverNonConvergence { .. } => "SolverNonConvergence",
            Error::UnknownPreset(_) => "UnknownPreset",
            Error::ConfigInvalid(_) => "ConfigInvalid",
            Error::OutputUnwritable { .. } => "OutputUnwritable",
        }
    }
}
