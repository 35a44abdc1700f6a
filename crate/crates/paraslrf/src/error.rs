use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("projected mass matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    ProjectedMassNotPsd(f64),

    #[error("rank-deficient least squares fit (|R[{index},{index}]| = {value:.3e})")]
    RankDeficient { index: usize, value: f64 },

    #[error("filtered subspace collapsed: every projected mode was dropped")]
    SubspaceCollapsed,

    #[error("matrix has a structurally empty diagonal at row {0}")]
    EmptyDiagonal(usize),

    #[error("{n_poles} poles cannot be split into {n_part} equal groups")]
    IndivisiblePoles { n_poles: usize, n_part: usize },

    #[error("missing result for pole {0} in reduction")]
    MissingPoleResult(usize),

    #[error("group {group} failed on pole {pole}: {source}")]
    GroupFailure {
        group: usize,
        pole: usize,
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("matrix market: {0}")]
    MatrixMarket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
