use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("placement infeasible: could not place {count} points in {region} after {attempts} attempts")]
    Placement {
        region: String,
        count: usize,
        attempts: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
