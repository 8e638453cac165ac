//! Integer-order Bessel and Hankel functions of complex argument.
//!
//! Hankel functions are evaluated for arguments in the closed first quadrant
//! through the modified Bessel function `K_n(-iz)`: an ascending series for
//! `|z| <= 2` and Steed's continued fraction otherwise, followed by forward
//! recurrence in the order. `J_n` is never recurred directly; the ratios
//! `J_{n+1}/J_n` come from a continued fraction plus backward recurrence and
//! the values from the Wronskian with `H_n`. Every value carries an explicit
//! natural-log exponent so that products such as `H_n(qr) H_n(qr')` can be
//! formed without overflow.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const TINY: f64 = 1e-150;
const SERIES_RADIUS: f64 = 2.0;
const RESCALE_ABOVE: f64 = 1e100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("Hankel function has a pole at z = 0")]
    Pole,
    #[error("J_{order} vanishes at z = {z}")]
    BesselZero { order: i64, z: Complex64 },
    #[error("argument {0} outside the supported domain")]
    Domain(Complex64),
    #[error("continued fraction failed to converge at z = {0}")]
    AccuracyLoss(Complex64),
}

/// Complex value stored as `value * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselPair {
    pub value: Complex64,
    pub log_scale: f64,
}

impl ScaledBesselPair {
    /// Normalizes so that `|value| == 1` (or the value is exactly zero).
    pub fn new(value: Complex64, log_scale: f64) -> Self {
        let a = value.norm();
        if a == 0.0 || !a.is_finite() {
            return Self { value, log_scale };
        }
        Self { value: value / a, log_scale: log_scale + a.ln() }
    }

    pub fn zero() -> Self {
        Self { value: Complex64::new(0.0, 0.0), log_scale: 0.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        if self.value == Complex64::new(0.0, 0.0) {
            return self.value;
        }
        self.value * self.log_scale.exp()
    }

    pub fn mul(self, other: Self) -> Self {
        Self::new(self.value * other.value, self.log_scale + other.log_scale)
    }

    pub fn div(self, other: Self) -> Self {
        Self::new(self.value / other.value, self.log_scale - other.log_scale)
    }

    pub fn scale(self, c: Complex64) -> Self {
        Self::new(self.value * c, self.log_scale)
    }

    /// `self - other`, evaluated at the larger of the two exponents.
    pub fn sub(self, other: Self) -> Self {
        if other.value == Complex64::new(0.0, 0.0) {
            return self;
        }
        if self.value == Complex64::new(0.0, 0.0) {
            return other.scale(Complex64::new(-1.0, 0.0));
        }
        let e = self.log_scale.max(other.log_scale);
        let v = self.value * (self.log_scale - e).exp() - other.value * (other.log_scale - e).exp();
        Self::new(v, e)
    }
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn in_first_quadrant(z: Complex64) -> bool {
    let slack = 1e-14 * z.norm();
    z.re >= -slack && z.im >= -slack
}

/// `e^w K_0(w)` and `e^w K_1(w)` for `Re w >= 0`, `w != 0`.
fn k01_scaled(w: Complex64) -> Result<(Complex64, Complex64), SpecfunError> {
    if w.norm() <= SERIES_RADIUS {
        Ok(k01_series(w))
    } else {
        k01_steed(w)
    }
}

fn k01_series(w: Complex64) -> (Complex64, Complex64) {
    let y = w * w / 4.0;
    let log_half = (w / 2.0).ln();
    let mut t0 = Complex64::new(1.0, 0.0);
    let mut t1 = Complex64::new(1.0, 0.0);
    let (mut i0, mut s0, mut i1s, mut s1) = (czero(), czero(), czero(), czero());
    let mut harmonic = 0.0;
    let mut psi_a = -EULER_GAMMA;
    for k in 0..80 {
        let kf = k as f64;
        let psi_b = psi_a + 1.0 / (kf + 1.0);
        i0 += t0;
        s0 += t0 * harmonic;
        i1s += t1;
        s1 += t1 * (psi_a + psi_b);
        t0 *= y / ((kf + 1.0) * (kf + 1.0));
        t1 *= y / ((kf + 1.0) * (kf + 2.0));
        harmonic += 1.0 / (kf + 1.0);
        psi_a = psi_b;
        if t0.norm() < 1e-17 * i0.norm() && t1.norm() < 1e-17 * i1s.norm() {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + s0;
    let i1 = w / 2.0 * i1s;
    let k1 = w.inv() + i1 * log_half - w / 4.0 * s1;
    let ew = w.exp();
    (k0 * ew, k1 * ew)
}

// Steed's method (Temme's normalization) for K_0, K_1.
fn k01_steed(x: Complex64) -> Result<(Complex64, Complex64), SpecfunError> {
    const MAXIT: usize = 100_000;
    let one = Complex64::new(1.0, 0.0);
    let mut b = 2.0 * (one + x);
    let mut d = b.inv();
    let mut h = d;
    let mut delh = d;
    let mut q1 = czero();
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = a1;
    let mut a = -a1;
    let mut s = one + q * delh;
    let mut converged = false;
    for i in 2..MAXIT {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = (b + a * d).inv();
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).norm() < 1e-16 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecfunError::AccuracyLoss(x));
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    Ok((k0, k1))
}

/// `H_0 .. H_{nmax+1}` at one argument in the closed first quadrant.
#[derive(Debug, Clone)]
pub struct HankelRow {
    pub z: Complex64,
    mant: Vec<Complex64>,
    expo: Vec<f64>,
    sigma: Vec<Complex64>,
}

impl HankelRow {
    pub fn new(z: Complex64, nmax: usize) -> Result<Self, SpecfunError> {
        if z == czero() {
            return Err(SpecfunError::Pole);
        }
        if !in_first_quadrant(z) {
            return Err(SpecfunError::Domain(z));
        }
        let z = Complex64::new(z.re.max(0.0), z.im.max(0.0));
        let w = Complex64::new(z.im, -z.re);
        let (k0, k1) = k01_scaled(w)?;
        let phase = Complex64::from_polar(1.0, z.re);
        let h0 = Complex64::new(0.0, -2.0 / PI) * k0 * phase;
        let h1 = Complex64::new(-2.0 / PI, 0.0) * k1 * phase;
        let mut mant = Vec::with_capacity(nmax + 2);
        let mut expo = Vec::with_capacity(nmax + 2);
        let mut sigma = Vec::with_capacity(nmax + 1);
        let mut e = -z.im;
        mant.push(h0);
        expo.push(e);
        mant.push(h1);
        expo.push(e);
        sigma.push(h1 / h0);
        let (mut prev, mut cur) = (h0, h1);
        let zi = z.inv();
        for n in 1..=nmax {
            let next = 2.0 * n as f64 * zi * cur - prev;
            sigma.push(next / cur);
            mant.push(next);
            expo.push(e);
            prev = cur;
            cur = next;
            let a = cur.norm();
            if a > RESCALE_ABOVE {
                prev /= a;
                cur /= a;
                e += a.ln();
            }
        }
        Ok(Self { z, mant, expo, sigma })
    }

    pub fn nmax(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn scaled(&self, n: usize) -> ScaledBesselPair {
        ScaledBesselPair::new(self.mant[n], self.expo[n])
    }

    /// `H_{n+1}(z) / H_n(z)`.
    pub fn sigma(&self, n: usize) -> Complex64 {
        self.sigma[n]
    }

    /// `H'_n(z) / H_n(z)`.
    pub fn log_deriv(&self, n: usize) -> Complex64 {
        n as f64 / self.z - self.sigma[n]
    }

    /// `H_n(self.z) / H_n(other.z)`.
    pub fn ratio_to(&self, other: &HankelRow, n: usize) -> Complex64 {
        let (a, b) = (self.scaled(n), other.scaled(n));
        let de = a.log_scale - b.log_scale;
        if de < -745.0 {
            return czero();
        }
        a.value / b.value * de.exp()
    }
}

/// Ratios `J_{n+1}(z)/J_n(z)` for `n = 0..=nmax`, any `z != 0`.
pub fn j_ratios(z: Complex64, nmax: usize) -> Result<Vec<Complex64>, SpecfunError> {
    if z == czero() {
        return Err(SpecfunError::Domain(z));
    }
    let zi = z.inv();
    let maxit = 20_000 + 4 * z.norm() as usize;
    let nu = nmax as f64;
    let mut f = Complex64::new(TINY, 0.0);
    let mut cc = f;
    let mut dd = czero();
    let mut converged = false;
    for j in 1..maxit {
        let a = if j == 1 { 1.0 } else { -1.0 };
        let b = 2.0 * (nu + j as f64) * zi;
        dd = b + a * dd;
        if dd.norm() < TINY {
            dd = Complex64::new(TINY, 0.0);
        }
        cc = b + a / cc;
        if cc.norm() < TINY {
            cc = Complex64::new(TINY, 0.0);
        }
        dd = dd.inv();
        let del = cc * dd;
        f *= del;
        if (del - 1.0).norm() < 2.0 * f64::EPSILON {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecfunError::AccuracyLoss(z));
    }
    let mut rho = vec![czero(); nmax + 1];
    rho[nmax] = f;
    for n in (1..=nmax).rev() {
        let mut den = 2.0 * n as f64 * zi - rho[n];
        if den.norm() < TINY {
            den = Complex64::new(TINY, 0.0);
        }
        rho[n - 1] = den.inv();
    }
    Ok(rho)
}

/// `J_n(z) H_n(z)` from the ratio data at the same argument.
pub fn jh_product(z: Complex64, rho: Complex64, sigma: Complex64) -> Complex64 {
    Complex64::new(0.0, 2.0 / PI) / (z * (rho - sigma))
}

fn sign_of_reflection(n: i64) -> f64 {
    if n < 0 && n % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

/// Maps `z` into the closed first quadrant. Returns the mapped argument, the
/// sign picked up from `J_n(-z) = (-1)^n J_n(z)` and whether to conjugate.
fn fold_to_first_quadrant(n: u64, z: Complex64) -> (Complex64, f64, bool) {
    let mut w = z;
    let mut sign = 1.0;
    if w.re < 0.0 {
        w = -w;
        if n % 2 == 1 {
            sign = -1.0;
        }
    }
    let conj = w.im < 0.0;
    if conj {
        w = w.conj();
    }
    (w, sign, conj)
}

pub fn bessel_j_scaled(n: i64, z: Complex64) -> Result<ScaledBesselPair, SpecfunError> {
    let na = n.unsigned_abs();
    let refl = sign_of_reflection(n);
    if z == czero() {
        return Ok(if na == 0 {
            ScaledBesselPair::new(Complex64::new(1.0, 0.0), 0.0)
        } else {
            ScaledBesselPair::zero()
        });
    }
    let (w, sign, conj) = fold_to_first_quadrant(na, z);
    let nu = na as usize;
    let row = HankelRow::new(w, nu)?;
    let rho = j_ratios(w, nu)?;
    let den = ScaledBesselPair::new((rho[nu] - row.sigma(nu)) * row.mant[nu], row.expo[nu]);
    let num = ScaledBesselPair::new(Complex64::new(0.0, 2.0 / PI) / w, 0.0);
    let mut out = num.div(den);
    if conj {
        out.value = out.value.conj();
    }
    Ok(out.scale(Complex64::new(sign * refl, 0.0)))
}

pub fn bessel_j(n: i64, z: Complex64) -> Result<Complex64, SpecfunError> {
    bessel_j_scaled(n, z).map(ScaledBesselPair::to_complex)
}

pub fn hankel1_scaled(n: i64, z: Complex64) -> Result<ScaledBesselPair, SpecfunError> {
    let na = n.unsigned_abs() as usize;
    let row = HankelRow::new(z, na)?;
    Ok(row.scaled(na).scale(Complex64::new(sign_of_reflection(n), 0.0)))
}

pub fn hankel1(n: i64, z: Complex64) -> Result<Complex64, SpecfunError> {
    hankel1_scaled(n, z).map(ScaledBesselPair::to_complex)
}

pub fn hankel1_deriv(n: i64, z: Complex64) -> Result<Complex64, SpecfunError> {
    let na = n.unsigned_abs() as usize;
    let row = HankelRow::new(z, na)?;
    let d = row.scaled(na).scale(row.log_deriv(na));
    Ok(d.scale(Complex64::new(sign_of_reflection(n), 0.0)).to_complex())
}

pub fn bessel_j_deriv(n: i64, z: Complex64) -> Result<Complex64, SpecfunError> {
    if n == 0 {
        return Ok(-bessel_j(1, z)?);
    }
    if z == czero() {
        return Ok(match n.abs() {
            1 => Complex64::new(0.5 * sign_of_reflection(n), 0.0),
            _ => czero(),
        });
    }
    let a = bessel_j_scaled(n - 1, z)?;
    let b = bessel_j_scaled(n, z)?.scale(n as f64 / z);
    Ok(a.sub(b).to_complex())
}

/// `J'_n(z) / (z J_n(z))` without forming `J_n` itself.
pub fn logderiv_j(n: i64, z: Complex64) -> Result<Complex64, SpecfunError> {
    if z == czero() {
        return Err(SpecfunError::Domain(z));
    }
    let na = n.unsigned_abs();
    let mut w = if z.re < 0.0 { -z } else { z };
    let conj = w.im < 0.0;
    if conj {
        w = w.conj();
    }
    let rho = j_ratios(w, na as usize)?;
    let v = (na as f64 / w - rho[na as usize]) / w;
    if !v.is_finite() || rho[na as usize].norm() > 1e290 {
        return Err(SpecfunError::BesselZero { order: n, z });
    }
    Ok(if conj { v.conj() } else { v })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    /// `H_n(a) H_n(b)`
    HH,
    /// `J_n(a) / H_n(b)`
    JHRatio,
}

pub fn scaled_product(
    kind: ProductKind,
    n: i64,
    a: Complex64,
    b: Complex64,
) -> Result<ScaledBesselPair, SpecfunError> {
    match kind {
        ProductKind::HH => Ok(hankel1_scaled(n, a)?.mul(hankel1_scaled(n, b)?)),
        ProductKind::JHRatio => Ok(bessel_j_scaled(n, a)?.div(hankel1_scaled(n, b)?)),
    }
}

/// Spherical Bessel functions `j_0 .. j_mmax` at real `x >= 0`.
pub fn spherical_j(x: f64, mmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; mmax + 1];
    if x < 1.0 {
        let mut lead = 1.0;
        for (m, o) in out.iter_mut().enumerate() {
            if m > 0 {
                lead *= x / (2 * m + 1) as f64;
            }
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..40 {
                term *= -x * x / (2.0 * k as f64 * (2 * m + 2 * k + 1) as f64);
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            *o = lead * sum;
        }
        return out;
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x > mmax as f64 + 1.0 {
        out[0] = j0;
        if mmax >= 1 {
            out[1] = j1;
        }
        for m in 1..mmax {
            out[m + 1] = (2 * m + 1) as f64 / x * out[m] - out[m - 1];
        }
        return out;
    }
    let top = mmax + 20 + x as usize;
    let mut buf = vec![0.0; top + 2];
    buf[top] = 1e-30;
    for m in (1..=top).rev() {
        buf[m - 1] = (2 * m + 1) as f64 / x * buf[m] - buf[m + 1];
    }
    let norm = if j0.abs() > j1.abs() { j0 / buf[0] } else { j1 / buf[1] };
    for (m, o) in out.iter_mut().enumerate() {
        *o = buf[m] * norm;
    }
    out
}
