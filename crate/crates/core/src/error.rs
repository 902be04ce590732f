use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle {0} rad is outside the open interval (-pi/2, pi/2)")]
    AngleOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "could not place {paths} angles with the requested separation after {attempts} attempts"
    )]
    SeparationUnsatisfiable { paths: usize, attempts: usize },

    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("found {found} spectral peaks, {wanted} requested")]
    TooFewPeaks { found: usize, wanted: usize },

    #[error("steering Gram matrix is ill-conditioned (condition number {0:e}); estimated angles collided")]
    IllConditioned(f64),

    #[error("channel estimate has zero norm; beamformer undefined")]
    ZeroEstimate,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
