use thiserror::Error;

use crate::integrate::IntegrateError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Integration(#[from] IntegrateError),
    #[error("backward shot from xi0 = {xi0} vanished at xi = {at} before reaching the axis")]
    VanishedBeforeAxis { xi0: f64, at: f64 },
    #[error("slope at xi0 = {xi0} not converged in epsilon: {coarse} vs {fine}")]
    Unreliable { xi0: f64, coarse: f64, fine: f64 },
    #[error("consistency check failed: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
