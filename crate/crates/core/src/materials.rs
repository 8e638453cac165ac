//! Dielectric models, particle polarizability and derived length scales.

use crate::constants::{C, HBAR, K_B};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaterialError {
    #[error("perfect conductor has no finite permittivity")]
    NoFinitePermittivity,
    #[error("material is non-absorbing at omega = {0} rad/s")]
    NonAbsorbing(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum MaterialKind {
    Lorentz { eps_inf: f64, omega_lo: f64, omega_to: f64, gamma: f64 },
    Drude { omega_p: f64, omega_tau: f64 },
    PerfectConductor,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    #[serde(flatten)]
    pub kind: MaterialKind,
    #[serde(default = "unit_mu")]
    pub mu: f64,
}

fn unit_mu() -> f64 {
    1.0
}

impl MaterialModel {
    pub fn new(kind: MaterialKind) -> Result<Self, MaterialError> {
        let m = Self { kind, mu: 1.0 };
        m.validate()?;
        Ok(m)
    }

    /// Silicon carbide phonon-polariton model.
    pub fn sic() -> Self {
        Self {
            kind: MaterialKind::Lorentz { eps_inf: 6.7, omega_lo: 1.82e14, omega_to: 1.49e14, gamma: 8.93e11 },
            mu: 1.0,
        }
    }

    /// Drude gold.
    pub fn gold() -> Self {
        Self { kind: MaterialKind::Drude { omega_p: 1.37e16, omega_tau: 4.06e13 }, mu: 1.0 }
    }

    pub fn pec() -> Self {
        Self { kind: MaterialKind::PerfectConductor, mu: 1.0 }
    }

    pub fn vacuum() -> Self {
        Self { kind: MaterialKind::Vacuum, mu: 1.0 }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "sic" => Some(Self::sic()),
            "gold" => Some(Self::gold()),
            "pec" => Some(Self::pec()),
            "vacuum" => Some(Self::vacuum()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        let bad = |s: &str| Err(MaterialError::InvalidParameter(s.to_string()));
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return bad("mu must be positive");
        }
        match self.kind {
            MaterialKind::Lorentz { eps_inf, omega_lo, omega_to, gamma } => {
                if !(eps_inf > 0.0 && omega_lo > 0.0 && omega_to > 0.0 && gamma > 0.0) {
                    return bad("Lorentz parameters must be positive");
                }
                if omega_lo < omega_to {
                    return bad("omega_lo must not be below omega_to");
                }
            }
            MaterialKind::Drude { omega_p, omega_tau } => {
                if !(omega_p > 0.0 && omega_tau > 0.0) {
                    return bad("Drude parameters must be positive");
                }
            }
            MaterialKind::PerfectConductor | MaterialKind::Vacuum => {}
        }
        Ok(())
    }

    pub fn is_perfect_conductor(&self) -> bool {
        matches!(self.kind, MaterialKind::PerfectConductor)
    }

    /// Frequency window `[omega_to, omega_lo]` of a Lorentz oscillator.
    pub fn reststrahlen_band(&self) -> Option<(f64, f64)> {
        match self.kind {
            MaterialKind::Lorentz { omega_lo, omega_to, .. } => Some((omega_to, omega_lo)),
            _ => None,
        }
    }
}

pub fn eval_epsilon(material: &MaterialModel, omega: f64) -> Result<Complex64, MaterialError> {
    let w = omega;
    match material.kind {
        MaterialKind::Lorentz { eps_inf, omega_lo, omega_to, gamma } => {
            let damp = Complex64::new(0.0, w * gamma);
            Ok(eps_inf * (w * w - omega_lo * omega_lo + damp) / (w * w - omega_to * omega_to + damp))
        }
        MaterialKind::Drude { omega_p, omega_tau } => {
            Ok(1.0 - omega_p * omega_p / (w * Complex64::new(w, omega_tau)))
        }
        MaterialKind::PerfectConductor => Err(MaterialError::NoFinitePermittivity),
        MaterialKind::Vacuum => Ok(Complex64::new(1.0, 0.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpec {
    pub radius: f64,
    pub material: MaterialModel,
    pub temperature: f64,
}

impl ParticleSpec {
    pub fn new(radius: f64, material: MaterialModel, temperature: f64) -> Result<Self, MaterialError> {
        if !(radius > 0.0 && temperature > 0.0) {
            return Err(MaterialError::InvalidParameter("particle radius and temperature must be positive".into()));
        }
        material.validate()?;
        Ok(Self { radius, material, temperature })
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * std::f64::consts::PI * self.radius.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub radius: f64,
    pub material: MaterialModel,
}

impl CylinderSpec {
    pub fn new(radius: f64, material: MaterialModel) -> Result<Self, MaterialError> {
        if !(radius > 0.0) {
            return Err(MaterialError::InvalidParameter("cylinder radius must be positive".into()));
        }
        material.validate()?;
        Ok(Self { radius, material })
    }
}

/// `(eps - 1)/(eps + 2)`.
pub fn clausius_mossotti(material: &MaterialModel, omega: f64) -> Result<Complex64, MaterialError> {
    let eps = eval_epsilon(material, omega)?;
    Ok((eps - 1.0) / (eps + 2.0))
}

pub fn polarizability(particle: &ParticleSpec, omega: f64) -> Result<Complex64, MaterialError> {
    Ok(clausius_mossotti(&particle.material, omega)? * particle.radius.powi(3))
}

pub fn skin_depth(material: &MaterialModel, omega: f64) -> Result<f64, MaterialError> {
    let eps = eval_epsilon(material, omega)?;
    let im = eps.sqrt().im;
    if im <= 0.0 {
        return Err(MaterialError::NonAbsorbing(omega));
    }
    Ok(C / (omega * im))
}

pub fn thermal_wavelength(temperature: f64) -> f64 {
    HBAR * C / (K_B * temperature)
}
