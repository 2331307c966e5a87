//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument left the interval it is defined on.
    #[error("{name} = {value} lies outside [{lo}, {hi}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    /// Panel doubling stopped at the cap with the estimate still moving.
    #[error("quadrature refinement stalled: last estimate {last:e}, gap {gap:e} > tolerance {tolerance:e}")]
    ToleranceNotMet { last: f64, gap: f64, tolerance: f64 },

    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// Piece ranges fail to partition [0, inf).
    #[error("piece ranges do not partition [0, inf): {0}")]
    Coverage(String),

    #[error("discontinuity at breakpoint u = {breakpoint}: jump {jump:e} at t = {t}")]
    Discontinuity { breakpoint: f64, jump: f64, t: f64 },

    #[error("nonlinearity is negative: f({t}, {u}) = {value}")]
    Negativity { t: f64, u: f64, value: f64 },

    #[error("empty envelope interval at t = {t}: lower bound {lo} exceeds upper bound {hi}")]
    EmptyEnvelope { t: f64, lo: f64, hi: f64 },

    #[error("iteration diverged; residual trace {trace:?}")]
    Divergence { trace: Vec<f64> },

    #[error(
        "monotone ordering violated by {amount:e} at node {node}: start was not a valid {role}"
    )]
    Ordering {
        node: usize,
        amount: f64,
        role: &'static str,
    },

    #[error("Jacobian numerically singular (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("line search failed at iteration {iteration} with residual {residual:e}")]
    LineSearchFailure {
        iteration: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("no start point could be retracted into the shell")]
    InfeasibleShell,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}
