//! Crate-wide error type. Every fallible operation returns [`CoreError`]
//! with enough context to tell a caller-side input mistake from a physics
//! domain violation.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// A quantity that must be strictly positive was not.
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    /// A quantity that must be finite was NaN or infinite.
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    /// Times supplied out of order (e.g. final before initial).
    #[error("time order violated: {what} (t_i = {t_i}, t_f = {t_f})")]
    TimeOrder { what: &'static str, t_i: f64, t_f: f64 },

    /// A value fell outside its documented domain.
    #[error("{name} = {value} outside {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// Atom configuration is missing a required internal state or violates
    /// a state invariant (e.g. reference state not magnetically inert).
    #[error("invalid atom configuration: {0}")]
    InvalidAtom(String),

    /// Pulse sequence does not satisfy the preconditions of the requested
    /// operation (ordering, pulse count, non-canonical areas, ...).
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    /// Wave packet violates a precondition (not at rest, spread, ...).
    #[error("invalid packet: {0}")]
    InvalidPacket(String),

    /// Degenerate input for which the operation has no unique answer.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Sampled-data input malformed (too short, non-uniform, unsorted, ...).
    #[error("invalid samples: {0}")]
    InvalidSamples(String),

    /// Grid construction or coverage failure.
    #[error("grid error: {0}")]
    Grid(String),

    /// The propagated packet approached a grid edge; results would be
    /// contaminated by periodic wrap-around.
    #[error("packet within {widths:.1} widths of grid edge at t = {time}")]
    GridEdge { widths: f64, time: f64 },

    /// Operation requires natural units (`hbar = mass = 1`).
    #[error("natural units required: {name} = {value}, expected 1")]
    NaturalUnits { name: &'static str, value: f64 },

    /// Branch profiles spend unequal times in the internal states, so
    /// internal-energy phases do not cancel and cannot be evaluated here.
    #[error("unequal dwell times between branches: {0}")]
    UnequalDwell(String),
}
