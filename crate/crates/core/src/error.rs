use thiserror::Error;

/// Errors raised by the analytical and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{name} = {value} is outside the valid domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Normalized feedback above the boundary where the large-system
    /// received-power expression holds.
    #[error("normalized feedback {b_bar} exceeds the regime boundary {b_star} for receive ratio {n_r_bar}")]
    OutOfRegime {
        b_bar: f64,
        b_star: f64,
        n_r_bar: f64,
    },

    /// A closed form hits a removable or genuine singularity.
    #[error("singular input: {0}")]
    Singular(String),

    /// Requested codebook would not fit under the configured cap.
    #[error("codebook of 2^{bits} entries exceeds the cap of 2^{max_bits}")]
    Capacity { bits: u32, max_bits: u32 },

    /// Vector or matrix shapes disagree.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// Overhead allocation infeasible for the given coherence length.
    #[error("infeasible allocation: {0}")]
    Infeasible(String),

    /// Worker pool or other runtime resource could not be set up.
    #[error("resource error: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
