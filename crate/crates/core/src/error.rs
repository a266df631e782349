use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument left the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Constant 2x2 matrix: every strategy pair is an equilibrium.
    #[error("degenerate game: {0}")]
    DegenerateGame(String),

    /// The game lacks the unique interior equilibrium an operation needs.
    #[error("unsupported game: {0}")]
    UnsupportedGame(String),

    #[error("numerical rank error: {0}")]
    NumericalRank(String),

    #[error("instance error: {0}")]
    Instance(String),

    #[error("stepsize {eta} exceeds the admissible bound {bound}")]
    Stepsize { eta: f64, bound: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A certification routine was called outside its preconditions.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
