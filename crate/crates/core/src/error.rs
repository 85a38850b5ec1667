use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed instance text; carries the 1-based line number.
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    /// A structurally invalid domain value (bad profile, non-bistochastic
    /// matrix, non-bijective assignment, ...).
    #[error("{0}")]
    Invalid(String),

    /// An enumeration or size guard was exceeded; the computation was not
    /// attempted. `estimate` is an upper bound on the work that was refused.
    #[error("{what} guard exceeded: limit {limit}, estimated at least {estimate}")]
    GuardExceeded {
        what: &'static str,
        limit: u128,
        estimate: u128,
    },

    /// A time budget ran out before a definitive answer was reached.
    #[error("budget of {budget_ms} ms exhausted: {context}")]
    BudgetExhausted { budget_ms: u64, context: String },

    /// A precondition on operation arguments failed (e.g. a matrix not
    /// consistent with the assignment it is peeled from).
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
