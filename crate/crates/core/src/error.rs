use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("correlation is undefined (a coordinate is degenerate or has infinite variance)")]
    UndefinedCorrelation,

    #[error("marginal is not centered (mean {mean})")]
    NotCentered { mean: f64 },

    #[error("regime mismatch: expected {expected}, found {found}")]
    WrongRegime { expected: String, found: String },

    #[error("singular linear system at row {row}")]
    SingularSystem { row: usize },

    #[error("state space of {cells} cells exceeds the budget of {budget}")]
    BudgetExceeded { cells: usize, budget: usize },

    #[error("only {survivors} surviving paths at n = {n}; about {required_paths} paths are needed")]
    InsufficientSurvivors {
        n: u64,
        survivors: u64,
        required_paths: u64,
    },

    #[error("distribution is not supported on the integer lattice with finite support")]
    NotLattice,

    #[error("root bracket failure: {0}")]
    Bracket(String),
}

pub type Result<T> = core::result::Result<T, Error>;
