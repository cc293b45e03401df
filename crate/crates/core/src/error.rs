use thiserror::Error;

/// Domain errors raised by the symbolic and numeric layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by a non-monomial coefficient {0}")]
    NonMonomialDivisor(String),
    #[error("symbol `{0}` has no numeric value")]
    UnboundSymbol(&'static str),
    #[error("ket contains annihilation operators")]
    NotCreationOnly,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("disentangling is singular at t = {t}: the (2,2) group entry vanishes")]
    Degenerate { t: String },
    #[error("closed-form denominator {0:e} is below the pole floor")]
    PoleOnPath(f64),
    #[error("singular truncated system: {0}")]
    SingularSystem(String),
    #[error("geometric ratio |rho| = {0} is not below 1")]
    SeriesDivergence(f64),
    #[error("series term denominator {0:e} is below the pole floor")]
    PoleHit(f64),
    #[error("series did not reach tolerance within {0} terms")]
    SeriesBudget(usize),
    #[error("imaginary part {imag:e} of the assembled energy exceeds tolerance (real part {real:e})")]
    NonRealResult { real: f64, imag: f64 },
    #[error("quadrature stalled at estimated error {error:e} after {evals} evaluations")]
    QuadratureStall { error: f64, evals: usize },
}

impl Error {
    /// Stable identifier used by the command-line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonMonomialDivisor(_) => "NonMonomialDivisor",
            Error::UnboundSymbol(_) => "UnboundSymbol",
            Error::NotCreationOnly => "NotCreationOnly",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Degenerate { .. } => "Degenerate",
            Error::PoleOnPath(_) => "PoleOnPath",
            Error::SingularSystem(_) => "SingularSystem",
            Error::SeriesDivergence(_) => "SeriesDivergence",
            Error::PoleHit(_) => "PoleHit",
            Error::SeriesBudget(_) => "SeriesBudget",
            Error::NonRealResult { .. } => "NonRealResult",
            Error::QuadratureStall { .. } => "QuadratureStall",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
