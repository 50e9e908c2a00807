use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Two spectral parameters (or inhomogeneities) sit closer than the
    /// separation tolerance, measured as `|sinh(x − y)|`.
    #[error("separation violated: |sinh({what})| = {value:.3e} below tolerance {tol:.1e}")]
    Separation { what: String, value: f64, tol: f64 },

    #[error("pole proximity: |{what}| = {value:.3e} below tolerance {tol:.1e}")]
    PoleProximity { what: String, value: f64, tol: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("eigenvalue of branch {branch} vanishes at mu[{index}]")]
    EigenvalueZeroAtMu { branch: usize, index: usize },

    #[error("branch {branch} out of range (branch count {count})")]
    BranchOutOfRange { branch: usize, count: usize },

    #[error("{what}: L = {l} exceeds the limit {max}")]
    SizeGuard { what: &'static str, l: usize, max: usize },

    #[error("index {index} out of range for {what}")]
    IndexOutOfRange { what: &'static str, index: usize },

    #[error("rank {rank} out of range (count {count})")]
    RankOutOfRange { rank: usize, count: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
