use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A rational kernel or eigenvalue was evaluated at (or within tolerance of) a pole.
    #[error("pole in {kernel}: {detail}")]
    Pole { kernel: String, detail: String },

    #[error("ambiguous match: element {index} matches targets {first} and {second} that are farther apart than the tolerance")]
    AmbiguousMatch { index: usize, first: usize, second: usize },

    #[error("parameter set is off-shell: max cleared Bethe residual {residual:e} exceeds {tol:e}")]
    OffShell { residual: f64, tol: f64 },

    #[error("no term of the expansion matches the requested parameter set")]
    MissingTerm,

    #[error("limit is unstable: relative spread {spread:e} exceeds {tol:e}")]
    UnstableLimit { spread: f64, tol: f64 },

    #[error("no seed converged ({seeds} tried)")]
    NoConvergence { seeds: usize },

    #[error("Newton collapsed roots {first} and {second}")]
    DegenerateRoot { first: usize, second: usize },

    #[error("N = {sites} exceeds the dense oracle cap of {cap} sites")]
    DimensionCap { sites: usize, cap: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("symmetrization over {n}! permutations refused (limit n = {limit})")]
    TooManyTerms { n: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{operation} requires {required}")]
    Unsupported { operation: String, required: String },
}

impl Error {
    pub(crate) fn pole(kernel: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Pole { kernel: kernel.into(), detail: detail.into() }
    }

    /// Stable snake-case name of the variant, used in machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Pole { .. } => "pole",
            Error::AmbiguousMatch { .. } => "ambiguous_match",
            Error::OffShell { .. } => "off_shell",
            Error::MissingTerm => "missing_term",
            Error::UnstableLimit { .. } => "unstable_limit",
            Error::NoConvergence { .. } => "no_convergence",
            Error::DegenerateRoot { .. } => "degenerate_root",
            Error::DimensionCap { .. } => "dimension_cap",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::TooManyTerms { .. } => "too_many_terms",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Unsupported { .. } => "unsupported",
        }
    }

    pub(crate) fn unsupported(operation: impl Into<String>, required: impl Into<String>) -> Self {
        Error::Unsupported { operation: operation.into(), required: required.into() }
    }
}
