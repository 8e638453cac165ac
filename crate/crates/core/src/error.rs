use crate::greens::GreensError;
use crate::materials::MaterialError;
use crate::quadrature::QuadError;
use crate::scattering::ScatteringError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("frequency integral did not converge: value {value:.6e}, error {error:.3e}")]
    OmegaNotConverged { value: f64, error: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
