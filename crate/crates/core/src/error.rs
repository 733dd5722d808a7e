use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A constructor argument is outside its allowed range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A sequence, symbol, or index handed to an operation is malformed.
    #[error("invalid input: {0}")]
    Input(String),

    /// The iterative capacity solver hit its iteration cap.
    #[error(
        "capacity iteration did not converge after {iterations} iterations (last estimate {last_estimate}, gap {gap})"
    )]
    Convergence { iterations: usize, last_estimate: f64, gap: f64 },

    /// Exact enumeration would exceed its state budget.
    #[error("exact enumeration infeasible: {what} needs {states} states (limit {limit}); use {alternative}")]
    Feasibility { what: String, states: f64, limit: f64, alternative: &'static str },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("unknown instruction: {0}")]
    Mapping(String),

    #[error("invalid graph: {0}")]
    Graph(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
