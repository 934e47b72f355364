use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("potential `{0}` declares no beta_prime growth witness")]
    MissingBetaPrime(String),

    #[error("the north pole has no finite preimage")]
    PoleNotInvertible,

    #[error("model fails the weak growth condition: {0}")]
    InadmissibleModel(String),

    #[error("points {0} and {1} coincide")]
    CoincidentPoints(usize, usize),

    #[error("measures are not supported on the same atom positions")]
    MismatchedSupports,

    #[error("no closed-form limit law for {0}")]
    NoClosedForm(String),

    #[error("no reference energy available for {0}")]
    NoReference(String),

    #[error("adaptive quadrature exceeded its budget (estimated error {error:.3e} after {evaluations} evaluations)")]
    QuadratureFailure { error: f64, evaluations: usize },

    #[error("no eigenvalue backend is configured")]
    BackendUnavailable,

    #[error("matrix B is numerically singular")]
    SingularB,

    #[error("empty sample")]
    EmptySample,

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
