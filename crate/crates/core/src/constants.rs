//! Physical constants (CODATA 2018, exact where the SI defines them).

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;

/// Name/value/unit rows, used for output metadata.
pub const TABLE: [(&str, f64, &str); 3] = [("hbar", HBAR, "J s"), ("k_B", K_B, "J/K"), ("c", C, "m/s")];

/// Vacuum wavenumber `omega / c`.
pub fn wavenumber(omega: f64) -> f64 {
    omega / C
}
