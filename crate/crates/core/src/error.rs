use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("covariance requires a finite first variance")]
    InfiniteFirstVariance,
    #[error("empirical covariance is numerically singular (rank {rank} of {order})")]
    DegenerateCovariance { rank: usize, order: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid link between pixels {0:?} and {1:?}")]
    InvalidLink((usize, usize), (usize, usize)),
    #[error("leading block is singular")]
    SingularBlock,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("eigensolver did not converge in {0} sweeps")]
    NoConvergence(usize),
    #[error("unsupported block size {0}")]
    UnsupportedSize(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("truncated stream")]
    TruncatedStream,
    #[error("contour chain leaves the image at corner ({0}, {1})")]
    OutOfBounds(i64, i64),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: {0}")]
    TruncatedPayload(String),
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("pgm: {0}")]
    Pgm(String),
}
