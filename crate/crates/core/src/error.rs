use thiserror::Error;

/// Errors surfaced by the analysis pipeline.
///
/// `exit_category` groups them the way the CLI maps failures to exit codes:
/// input problems, violated preconditions, and honest "cannot decide" outcomes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("JSON parse error: {0}")]
    Parse(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("window is empty after shrinking: {0}")]
    EmptyWindow(String),

    #[error("support exceeds the Nyquist box of the sampling grid: {0}")]
    Aliasing(String),

    #[error("operator is not selfadjoint: {0}")]
    NotSelfadjoint(String),

    #[error("not a Fermi point: sigma_min = {sigma_min:.3e} at k = {k:?}")]
    NotFermiPoint { k: Vec<f64>, sigma_min: f64 },

    #[error("refinement did not converge: {0}")]
    NoConvergence(String),

    #[error("contour breached: an eigenvalue crossed the integration circle ({0})")]
    ContourBreach(String),

    #[error("lambda(k) vanishes to order > {l_max} at this point; raise the expansion order")]
    FlatToOrder { l_max: usize },

    #[error("symbol is degenerate: det Q == 0 along all sampled directions")]
    DegenerateSymbol,

    #[error("operator lacks the positivity structure: {0}")]
    NotPositiveForm(String),

    #[error("cell graph is not strongly connected; principal eigenvalue is not simple")]
    Reducible,

    #[error("profile ascends without bound; no interior maximum within |xi| <= {limit}")]
    NoMaximum { limit: f64 },

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse failure category, in CLI exit-code order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCategory {
    /// Malformed input (exit 1).
    Parse,
    /// A documented precondition was violated (exit 2).
    Precondition,
    /// The method ran but refuses to claim a verdict (exit 3).
    Inconclusive,
}

impl ExitCategory {
    pub fn code(self) -> i32 {
        match self {
            ExitCategory::Parse => 1,
            ExitCategory::Precondition => 2,
            ExitCategory::Inconclusive => 3,
        }
    }
}

impl Error {
    pub fn exit_category(&self) -> ExitCategory {
        use Error::*;
        match self {
            Parse(_) | InvalidOperator(_) | Io(_) => ExitCategory::Parse,
            ShapeMismatch(_)
            | EmptyWindow(_)
            | Aliasing(_)
            | NotSelfadjoint(_)
            | NotFermiPoint { .. }
            | NotPositiveForm(_)
            | Reducible
            | DegenerateSymbol => ExitCategory::Precondition,
            NoConvergence(_)
            | ContourBreach(_)
            | FlatToOrder { .. }
            | NoMaximum { .. }
            | Inconclusive(_)
            | Numerical(_) => ExitCategory::Inconclusive,
        }
    }
}
