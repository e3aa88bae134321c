use thiserror::Error;

/// Errors produced by the estimation, clustering, bootstrap and simulation
/// routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The regression design is rank deficient. `columns` lists the
    /// zero-indexed covariates that could not be pivoted.
    #[error("singular design matrix; deficient columns {columns:?}")]
    SingularDesign { columns: Vec<usize> },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("numerical failure at iteration {iteration}: {message}")]
    FitIteration { iteration: usize, message: String },

    #[error("degenerate cluster: {0}")]
    DegenerateCluster(String),

    #[error("generator produced an invalid model: {0}")]
    GeneratorInvalid(String),

    #[error("all {0} initializations failed")]
    AllStartsFailed(usize),

    #[error("bootstrap ensemble quality: {failed} of {total} replicates failed")]
    EnsembleQuality { failed: usize, total: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
