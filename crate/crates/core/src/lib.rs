//! Electromagnetic Green's tensor of an infinitely long cylinder and the
//! heat radiation / heat transfer of dipolar particles placed next to it.

pub mod constants;
pub mod error;
pub mod greens;
pub mod materials;
pub mod observables;
pub mod quadrature;
pub mod scattering;
pub mod specfun;

pub use error::{Error, Result};
