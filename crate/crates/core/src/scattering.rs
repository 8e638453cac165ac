//! Outside scattering amplitudes (T-matrix) of an infinite homogeneous cylinder.
//!
//! Amplitudes are indexed by the multipole order `n`, the axial wavevector `kz`
//! and the polarization channels M (magnetic) and N (electric). The Green's
//! tensor code works with the reduced amplitudes `H_n(qR)^2 T`, which stay
//! finite for tiny `qR` and large `n` where `T` itself under- or overflows.

use crate::materials::{eval_epsilon, CylinderSpec, MaterialError, MaterialKind};
use crate::specfun::{self, HankelRow, SpecfunError};
use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const POLE_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("resonance pole of the scattering matrix at n = {n}, kz = {kz}")]
    ResonancePole { n: i64, kz: Complex64 },
    #[error("kz sits on the branch point q = 0")]
    BranchPoint,
    #[error(transparent)]
    Special(#[from] SpecfunError),
    #[error(transparent)]
    Material(#[from] MaterialError),
}

/// Scattering amplitudes for one `(n, kz)` pair. `mn` equals `nm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TElements {
    pub mm: Complex64,
    pub nn: Complex64,
    pub mn: Complex64,
    pub n: i64,
    pub kz: f64,
    pub omega: f64,
}

/// Reduced amplitudes `H_n(qR)^2 T`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedT {
    pub mm: Complex64,
    pub nn: Complex64,
    pub mn: Complex64,
}

/// Cylinder response at a fixed frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scatterer {
    Dielectric { eps: Complex64, mu: f64 },
    PerfectConductor,
}

impl Scatterer {
    pub fn at(cyl: &CylinderSpec, omega: f64) -> Result<Self, MaterialError> {
        match cyl.material.kind {
            MaterialKind::PerfectConductor => Ok(Self::PerfectConductor),
            _ => Ok(Self::Dielectric { eps: eval_epsilon(&cyl.material, omega)?, mu: cyl.material.mu }),
        }
    }
}

/// Radial wavevector `q = sqrt(k^2 - kz^2)` for real `kz`, with `Im q >= 0`.
pub fn axial_wavevector_q(k: f64, kz: f64) -> Complex64 {
    let a = kz.abs();
    if a <= k {
        Complex64::new(((k - a) * (k + a)).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, ((a - k) * (a + k)).sqrt())
    }
}

/// `q` for a complex `kz` on a deformed contour: the principal root, folded to `Im q >= 0`.
pub fn q_of(k: f64, kz: Complex64) -> Complex64 {
    if kz.im == 0.0 {
        return axial_wavevector_q(k, kz.re);
    }
    let q = ((k - kz) * (k + kz)).sqrt();
    if q.im < 0.0 {
        -q
    } else {
        q
    }
}

/// Reduced amplitudes for `n = 0..=row.nmax()` at a single `kz`.
///
/// `row` must hold the Hankel functions at `qR`.
pub fn reduced_row(
    k: f64,
    kz: Complex64,
    radius: f64,
    scat: Scatterer,
    row: &HankelRow,
) -> Result<Vec<ReducedT>, ScatteringError> {
    let nmax = row.nmax();
    let x = row.z;
    if x == Complex64::new(0.0, 0.0) {
        return Err(ScatteringError::BranchPoint);
    }
    let rho = specfun::j_ratios(x, nmax)?;
    let xi = x.inv();
    let mut out = Vec::with_capacity(nmax + 1);
    match scat {
        Scatterer::PerfectConductor => {
            for n in 0..=nmax {
                let (r, s) = (rho[n], row.sigma(n));
                let p = specfun::jh_product(x, r, s);
                let jp = n as f64 * xi - r;
                let hp = n as f64 * xi - s;
                out.push(ReducedT { mm: -p * jp / hp, nn: -p, mn: Complex64::new(0.0, 0.0) });
            }
        }
        Scatterer::Dielectric { eps, mu } => {
            let em = eps * mu;
            let s = em.sqrt();
            let mut xe = (em * k * k - kz * kz).sqrt() * radius;
            if xe.re < 0.0 {
                xe = -xe;
            }
            if xe == Complex64::new(0.0, 0.0) {
                return Err(ScatteringError::BranchPoint);
            }
            let rho_e = specfun::j_ratios(xe, nmax)?;
            let xei = xe.inv();
            let beta = kz / k;
            let kr2 = (k * radius) * (k * radius);
            let kfac = beta * (1.0 - em) * kr2 * xi * xi * xei * xei / s;
            for n in 0..=nmax {
                let nf = n as f64;
                let (r, sg) = (rho[n], row.sigma(n));
                let p = specfun::jh_product(x, r, sg);
                let hh = (nf * xi - sg) * xi;
                let jj = (nf * xi - r) * xi;
                let l = (nf * xei - rho_e[n]) * xei;
                let d1 = l - hh / eps;
                let d2 = l - hh / mu;
                let d3 = l - jj / eps;
                let d4 = l - jj / mu;
                let kk = nf * kfac;
                let k2 = kk * kk;
                let den = d1 * d2 - k2;
                if !(den.norm() >= POLE_THRESHOLD) {
                    return Err(ScatteringError::ResonancePole { n: n as i64, kz });
                }
                let dinv = den.inv();
                out.push(ReducedT {
                    mm: -p * (d1 * d4 - k2) * dinv,
                    nn: -p * (d2 * d3 - k2) * dinv,
                    mn: Complex64::new(0.0, 2.0 / PI) * kk * xi * xi * dinv / s,
                });
            }
        }
    }
    Ok(out)
}

fn unreduce(t: ReducedT, row: &HankelRow, n: usize) -> (Complex64, Complex64, Complex64) {
    let h = row.scaled(n);
    let h2 = h.mul(h);
    let inv = |v: Complex64| crate::specfun::ScaledBesselPair::new(v, 0.0).div(h2).to_complex();
    (inv(t.mm), inv(t.nn), inv(t.mn))
}

fn validate(omega: f64, k: f64, kz: f64) -> Result<Complex64, ScatteringError> {
    if !(omega > 0.0) {
        return Err(MaterialError::InvalidParameter("omega must be positive".into()).into());
    }
    let q = axial_wavevector_q(k, kz);
    if q == Complex64::new(0.0, 0.0) {
        return Err(ScatteringError::BranchPoint);
    }
    Ok(q)
}

fn single(n: usize, kz: f64, omega: f64, radius: f64, scat: Scatterer) -> Result<TElements, ScatteringError> {
    let k = crate::constants::wavenumber(omega);
    let q = validate(omega, k, kz)?;
    let row = HankelRow::new(q * radius, n)?;
    let red = reduced_row(k, Complex64::new(kz, 0.0), radius, scat, &row)?;
    let (mm, nn, mn) = unreduce(red[n], &row, n);
    Ok(TElements { mm, nn, mn, n: n as i64, kz, omega })
}

/// Amplitudes for `n >= 0`, `kz >= 0`.
pub fn tmatrix(n: usize, kz: f64, omega: f64, cyl: &CylinderSpec) -> Result<TElements, ScatteringError> {
    single(n, kz, omega, cyl.radius, Scatterer::at(cyl, omega)?)
}

/// Perfect-conductor amplitudes `-J'_n/H'_n`, `-J_n/H_n`, zero cross-coupling.
pub fn tmatrix_pc(n: usize, kz: f64, omega: f64, radius: f64) -> Result<TElements, ScatteringError> {
    single(n, kz, omega, radius, Scatterer::PerfectConductor)
}

/// Amplitudes for any sign of `n` and `kz`. `mm` and `nn` are even in both,
/// `mn` is odd in each.
pub fn tmatrix_signed(n: i64, kz: f64, omega: f64, cyl: &CylinderSpec) -> Result<TElements, ScatteringError> {
    let mut t = tmatrix(n.unsigned_abs() as usize, kz.abs(), omega, cyl)?;
    if (n < 0) != (kz < 0.0) {
        t.mn = -t.mn;
    }
    t.n = n;
    t.kz = kz;
    Ok(t)
}

/// Textbook evaluation from Bessel values at signed `n` and `kz`, used to
/// cross-check the ratio-based path. Dielectric cylinders only.
pub fn tmatrix_direct(
    n: i64,
    kz: f64,
    omega: f64,
    radius: f64,
    eps: Complex64,
    mu: f64,
) -> Result<TElements, ScatteringError> {
    let k = crate::constants::wavenumber(omega);
    let q = validate(omega, k, kz)?;
    let x = q * radius;
    let qe = (eps * mu * k * k - kz * kz).sqrt();
    let xe = qe * radius;
    let j = specfun::bessel_j(n, x)?;
    let jp = specfun::bessel_j_deriv(n, x)?;
    let h = specfun::hankel1(n, x)?;
    let hp = specfun::hankel1_deriv(n, x)?;
    let l = specfun::logderiv_j(n, xe)?;
    let hh = hp / (x * h);
    let jj = jp / (x * j);
    let d1 = l - hh / eps;
    let d2 = l - hh / mu;
    let d3 = l - jj / eps;
    let d4 = l - jj / mu;
    let s = (eps * mu).sqrt();
    let kk = n as f64 * kz / (s * k * radius * radius) * (1.0 / (qe * qe) - 1.0 / (q * q));
    let den = d1 * d2 - kk * kk;
    if den.norm() < POLE_THRESHOLD {
        return Err(ScatteringError::ResonancePole { n, kz: Complex64::new(kz, 0.0) });
    }
    let jh = j / h;
    Ok(TElements {
        mm: -jh * (d1 * d4 - kk * kk) / den,
        nn: -jh * (d2 * d3 - kk * kk) / den,
        mn: Complex64::new(0.0, 2.0 / PI) / (s * (x * h) * (x * h)) * kk / den,
        n,
        kz,
        omega,
    })
}
