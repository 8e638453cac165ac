//! Free-space and cylinder-scattered dyadic Green's tensors.
//!
//! Tensors are expressed in the local cylindrical bases `(e_r, e_phi, e_z)` at
//! the two points. The scattered part is a sum over multipole orders `n >= 0`
//! of integrals over the axial wavevector `kz >= 0`. The `kz` path runs along
//! the real axis, dips below the branch point `kz = k` on a half circle and
//! continues through the evanescent range up to a cutoff where the integrand
//! has decayed by `exp(-lambda)`.

use crate::constants::wavenumber;
use crate::materials::{CylinderSpec, MaterialError};
use crate::quadrature::{integrate, QuadratureSpec, Segment, Tolerance, Weight};
use crate::scattering::{q_of, reduced_row, ReducedT, Scatterer, ScatteringError};
use crate::specfun::{HankelRow, SpecfunError};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylPoint {
    pub r: f64,
    pub phi: f64,
    pub z: f64,
}

impl CylPoint {
    pub fn new(r: f64, phi: f64, z: f64) -> Self {
        Self { r, phi, z }
    }

    pub fn cartesian(&self) -> [f64; 3] {
        [self.r * self.phi.cos(), self.r * self.phi.sin(), self.z]
    }

    pub fn distance(&self, other: &CylPoint) -> f64 {
        let dphi = other.phi - self.phi;
        let dz = other.z - self.z;
        let dr = other.r - self.r;
        let sh = (0.5 * dphi).sin();
        (dr * dr + 4.0 * self.r * other.r * sh * sh + dz * dz).sqrt()
    }
}

/// 3x3 complex tensor at frequency `omega`, units 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensTensor {
    pub m: [[C; 3]; 3],
    pub omega: f64,
}

impl GreensTensor {
    pub fn zero(omega: f64) -> Self {
        Self { m: [[ZERO; 3]; 3], omega }
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] = self.m[j][i];
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut t = *self;
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] += other.m[i][j];
            }
        }
        t
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut t = *self;
        for i in 0..3 {
            for j in 0..3 {
                t.m[i][j] -= other.m[i][j];
            }
        }
        t
    }

    pub fn trace(&self) -> C {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// `Tr(G G^dagger)`, the squared Frobenius norm.
    pub fn tr_g_gdag(&self) -> f64 {
        self.m.iter().flatten().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// `A G B^T` for real 3x3 `A`, `B`.
    pub fn rotate(&self, a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> Self {
        let mut out = Self::zero(self.omega);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = ZERO;
                for p in 0..3 {
                    for q in 0..3 {
                        s += a[i][p] * self.m[p][q] * b[j][q];
                    }
                }
                out.m[i][j] = s;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_used: usize,
    pub kz_panels: usize,
    pub est_rel_error: f64,
    pub flags: Vec<String>,
}

impl ConvergenceReport {
    pub fn merge(&mut self, other: &ConvergenceReport) {
        self.n_used = self.n_used.max(other.n_used);
        self.kz_panels += other.kz_panels;
        self.est_rel_error = self.est_rel_error.max(other.est_rel_error);
        for f in &other.flags {
            if !self.flags.contains(f) {
                self.flags.push(f.clone());
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreensError {
    #[error("coincident points: use the trace identities for r = r'")]
    Coincident,
    #[error("point at r = {r} is not outside the cylinder of radius {radius}")]
    InsideCylinder { r: f64, radius: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("Green's tensor did not converge (estimated relative error {:.3e})", .report.est_rel_error)]
    NotConverged { partial: Box<GreensTensor>, report: ConvergenceReport },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Material(#[from] MaterialError),
}

impl From<SpecfunError> for GreensError {
    fn from(e: SpecfunError) -> Self {
        GreensError::Scattering(e.into())
    }
}

/// Closed-form free Green's tensor in Cartesian components, without the
/// contact term.
pub fn g0_cartesian(r1: [f64; 3], r2: [f64; 3], omega: f64) -> Result<GreensTensor, GreensError> {
    let rv = [r1[0] - r2[0], r1[1] - r2[1], r1[2] - r2[2]];
    let d2 = rv[0] * rv[0] + rv[1] * rv[1] + rv[2] * rv[2];
    if d2 == 0.0 {
        return Err(GreensError::Coincident);
    }
    let k = wavenumber(omega);
    let d = d2.sqrt();
    let kd = k * d;
    let pre = C::from_polar(1.0, kd) / (4.0 * PI * k * k * d2 * d2 * d);
    let a = pre * d2 * C::new(-1.0 + kd * kd, kd);
    let b = pre * C::new(3.0 - kd * kd, -3.0 * kd);
    let mut g = GreensTensor::zero(omega);
    for i in 0..3 {
        for j in 0..3 {
            g.m[i][j] = b * rv[i] * rv[j];
        }
        g.m[i][i] += a;
    }
    Ok(g)
}

/// Rows are `e_r`, `e_phi`, `e_z` in Cartesian components.
pub fn basis_matrix(phi: f64) -> [[f64; 3]; 3] {
    let (s, c) = phi.sin_cos();
    [[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Free Green's tensor in the cylindrical bases at the two points, built
/// directly from the projections of the separation vector.
pub fn g0_cylindrical(p1: &CylPoint, p2: &CylPoint, omega: f64) -> Result<GreensTensor, GreensError> {
    let d = p1.distance(p2);
    if d == 0.0 {
        return Err(GreensError::Coincident);
    }
    let k = wavenumber(omega);
    let (r, rp) = (p1.r, p2.r);
    let dphi = p2.phi - p1.phi;
    let dz = p2.z - p1.z;
    let (s, c) = dphi.sin_cos();
    let kd = k * d;
    let pre = C::from_polar(1.0, kd) / (4.0 * PI * k * k * d.powi(5));
    let a = pre * d * d * C::new(-1.0 + kd * kd, kd);
    let b = pre * C::new(3.0 - kd * kd, -3.0 * kd);
    let basis = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
    // separation r' - r projected on the bases at r (left) and r' (right)
    let sh = (0.5 * dphi).sin();
    let left = [(rp - r) - 2.0 * rp * sh * sh, rp * s, dz];
    let right = [(rp - r) + 2.0 * r * sh * sh, r * s, dz];
    let mut g = GreensTensor::zero(omega);
    for i in 0..3 {
        for j in 0..3 {
            g.m[i][j] = a * basis[i][j] + b * left[i] * right[j];
        }
    }
    Ok(g)
}

pub fn tr_im_g0(omega: f64) -> f64 {
    wavenumber(omega) / (2.0 * PI)
}

pub fn tr_g0_g0dag(omega: f64, d: f64) -> f64 {
    let kd = wavenumber(omega) * d;
    let kd2 = kd * kd;
    (1.0 + 1.0 / kd2 + 3.0 / (kd2 * kd2)) / (8.0 * PI * PI * d * d)
}

/// Component layouts of the modal integrals, one per specialized geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// 11, 12, 13, 21, 22, 23, 31, 32, 33
    General,
    /// 11, 12, 13, 22, 23, 33 at `r = r'`
    EqualR,
    /// 11, 22, 33, 13, 31 at `phi = phi'`
    EqualPhi,
    /// 11, 22, 33, 13 at `r = r'`, `phi = phi'`
    Parallel,
    /// 11, 22, 33 at `r = r'`, `z = z'`
    Perpendicular,
    /// `i Im Tr G_T` at `r = r'`, `phi = phi'`, `z = z'`
    Trace,
}

const COS: Weight = Weight::Cos;
const SIN: Weight = Weight::Sin;

impl Layout {
    pub fn ncomp(self) -> usize {
        self.osc().len()
    }

    /// The `cos(kz dz)` / `sin(kz dz)` factor of each component.
    fn osc(self) -> &'static [Weight] {
        match self {
            Layout::General => &[COS, COS, SIN, COS, COS, SIN, SIN, SIN, COS],
            Layout::EqualR => &[COS, COS, SIN, COS, SIN, COS],
            Layout::EqualPhi => &[COS, COS, COS, SIN, SIN],
            Layout::Parallel => &[COS, COS, COS, SIN],
            Layout::Perpendicular => &[COS, COS, COS],
            Layout::Trace => &[COS],
        }
    }

    fn same_radius(self) -> bool {
        !matches!(self, Layout::General | Layout::EqualPhi)
    }
}

/// Per-`kz` quantities shared by all multipole orders.
struct Node {
    beta: C,
    qk: C,
    x: C,
    xp: C,
    kr: f64,
    krp: f64,
    t: Vec<ReducedT>,
    /// `H_n(q r) / H_n(q R)`
    u: Vec<C>,
    up: Vec<C>,
    /// `H'_n(q r) / H_n(q r)`
    eta: Vec<C>,
    etap: Vec<C>,
}

#[allow(clippy::too_many_arguments)]
fn node(
    k: f64,
    kz: C,
    q: C,
    r: f64,
    rp: f64,
    radius: f64,
    scat: Scatterer,
    nmax: usize,
    same: bool,
) -> Result<Node, GreensError> {
    let row_big = HankelRow::new(q * radius, nmax)?;
    let t = reduced_row(k, kz, radius, scat, &row_big)?;
    let row_r = HankelRow::new(q * r, nmax)?;
    let u: Vec<C> = (0..=nmax).map(|n| row_r.ratio_to(&row_big, n)).collect();
    let eta: Vec<C> = (0..=nmax).map(|n| row_r.log_deriv(n)).collect();
    let (up, etap) = if same {
        (u.clone(), eta.clone())
    } else {
        let row_rp = HankelRow::new(q * rp, nmax)?;
        (
            (0..=nmax).map(|n| row_rp.ratio_to(&row_big, n)).collect(),
            (0..=nmax).map(|n| row_rp.log_deriv(n)).collect(),
        )
    };
    Ok(Node { beta: kz / k, qk: q / k, x: q * r, xp: q * rp, kr: k * r, krp: k * rp, t, u, up, eta, etap })
}

fn kernel_general(n: usize, c: &Node, out: &mut [C]) {
    let nf = n as f64;
    let t = c.t[n];
    let uu = c.u[n] * c.up[n];
    let (e, ep, x, xp, b, qk) = (c.eta[n], c.etap[n], c.x, c.xp, c.beta, c.qk);
    let nxx = nf * nf / (x * xp);
    let mixed = nf * b * (ep / x + e / xp);
    let cross = b * (nxx + e * ep);
    out[0] = uu * (nxx * t.mm + mixed * t.mn + b * b * e * ep * t.nn);
    out[1] = -uu * (nf / x * ep * t.mm + cross * t.mn + nf * b * b / xp * e * t.nn);
    out[2] = uu * (nf / c.kr * t.mn + qk * b * e * t.nn);
    out[3] = uu * (nf / xp * e * t.mm + cross * t.mn + nf * b * b / x * ep * t.nn);
    out[4] = uu * (e * ep * t.mm + mixed * t.mn + nxx * b * b * t.nn);
    out[5] = uu * (qk * e * t.mn + nf * b / c.kr * t.nn);
    out[6] = -uu * (nf / c.krp * t.mn + qk * b * ep * t.nn);
    out[7] = uu * (qk * ep * t.mn + nf * b / c.krp * t.nn);
    out[8] = uu * qk * qk * t.nn;
}

fn kernel_equal_r(n: usize, c: &Node, out: &mut [C]) {
    let nf = n as f64;
    let t = c.t[n];
    let u2 = c.u[n] * c.u[n];
    let (e, x, b, qk) = (c.eta[n], c.x, c.beta, c.qk);
    let nx = nf / x;
    let hh = 2.0 * nx * b * e;
    out[0] = u2 * (nx * nx * t.mm + hh * t.mn + b * b * e * e * t.nn);
    out[1] = -u2 * (nx * e * t.mm + b * (nx * nx + e * e) * t.mn + nx * b * b * e * t.nn);
    out[2] = u2 * (nf / c.kr * t.mn + qk * b * e * t.nn);
    out[3] = u2 * (e * e * t.mm + hh * t.mn + nx * nx * b * b * t.nn);
    out[4] = u2 * (qk * e * t.mn + nf * b / c.kr * t.nn);
    out[5] = u2 * qk * qk * t.nn;
}

fn kernel_equal_phi(n: usize, c: &Node, out: &mut [C]) {
    let nf = n as f64;
    let t = c.t[n];
    let (hh, hhp, hph, hphp) = {
        let (u, up) = (c.u[n], c.up[n]);
        (u * up, u * up * c.etap[n], u * c.eta[n] * up, u * c.eta[n] * up * c.etap[n])
    };
    let (x, xp, b, qk) = (c.x, c.xp, c.beta, c.qk);
    out[0] = nf * nf / (x * xp) * hh * t.mm + nf * b * (hhp / x + hph / xp) * t.mn + b * b * hphp * t.nn;
    out[1] = hphp * t.mm + nf * b * (hhp / x + hph / xp) * t.mn + nf * nf * b * b / (x * xp) * hh * t.nn;
    out[2] = qk * qk * hh * t.nn;
    out[3] = nf / c.kr * hh * t.mn + qk * b * hph * t.nn;
    out[4] = -(nf / c.krp * hh * t.mn + qk * b * hhp * t.nn);
}

fn kernel_parallel(n: usize, c: &Node, out: &mut [C]) {
    let nf = n as f64;
    let t = c.t[n];
    let h2 = c.u[n] * c.u[n];
    let hhp = h2 * c.eta[n];
    let hp2 = hhp * c.eta[n];
    let (x, b, qk) = (c.x, c.beta, c.qk);
    let mix = 2.0 * nf * b / x * hhp * t.mn;
    out[0] = nf * nf / (x * x) * h2 * t.mm + mix + b * b * hp2 * t.nn;
    out[1] = hp2 * t.mm + mix + nf * nf * b * b / (x * x) * h2 * t.nn;
    out[2] = qk * qk * h2 * t.nn;
    out[3] = nf / c.kr * h2 * t.mn + qk * b * hhp * t.nn;
}

fn kernel_perpendicular(n: usize, c: &Node, out: &mut [C]) {
    let mut tmp = [ZERO; 4];
    kernel_parallel(n, c, &mut tmp);
    out.copy_from_slice(&tmp[..3]);
}

fn kernel_trace(n: usize, c: &Node, out: &mut [C]) {
    let nf = n as f64;
    let t = c.t[n];
    let (e, x, b, qk) = (c.eta[n], c.x, c.beta, c.qk);
    let nx2 = nf * nf / (x * x);
    out[0] = c.u[n] * c.u[n] * ((nx2 + e * e) * (t.mm + b * b * t.nn) + 4.0 * nf * b * e / x * t.mn + qk * qk * t.nn);
}

fn kernel(layout: Layout) -> fn(usize, &Node, &mut [C]) {
    match layout {
        Layout::General => kernel_general,
        Layout::EqualR => kernel_equal_r,
        Layout::EqualPhi => kernel_equal_phi,
        Layout::Parallel => kernel_parallel,
        Layout::Perpendicular => kernel_perpendicular,
        Layout::Trace => kernel_trace,
    }
}

/// The `kz` integrals `I_c(n)` of every component `c` and order `n`, before
/// the angular factors and the `i/(2 pi)` prefactor are applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalIntegrals {
    pub layout: Layout,
    pub omega: f64,
    pub nmax: usize,
    values: Vec<C>,
    pub report: ConvergenceReport,
    converged: bool,
    kz_error: f64,
}

fn weight(n: usize) -> f64 {
    if n == 0 {
        0.5
    } else {
        1.0
    }
}

impl ModalIntegrals {
    pub fn get(&self, n: usize, comp: usize) -> C {
        self.values[n * self.layout.ncomp() + comp]
    }

    /// `(i / 2 pi) sum_n w_n f(n) I_c(n)` for every component.
    fn sum_with(&self, ang: impl Fn(usize, usize) -> f64) -> Vec<C> {
        let nc = self.layout.ncomp();
        let mut s = vec![ZERO; nc];
        for n in 0..=self.nmax {
            for (c, sc) in s.iter_mut().enumerate() {
                *sc += weight(n) * ang(n, c) * self.values[n * nc + c];
            }
        }
        s.iter().map(|v| I / (2.0 * PI) * v).collect()
    }

    /// Assembles the scattered tensor at angular offset `dphi = phi' - phi`.
    pub fn assemble(&self, dphi: f64) -> GreensTensor {
        let cosn = |n: usize| (n as f64 * dphi).cos();
        let sinn = |n: usize| (n as f64 * dphi).sin();
        let mut g = GreensTensor::zero(self.omega);
        match self.layout {
            Layout::General => {
                const SIN_COMPS: [usize; 4] = [1, 3, 5, 7];
                let s = self.sum_with(|n, c| if SIN_COMPS.contains(&c) { sinn(n) } else { cosn(n) });
                for i in 0..3 {
                    for j in 0..3 {
                        g.m[i][j] = s[3 * i + j];
                    }
                }
            }
            Layout::EqualR => {
                let s = self.sum_with(|n, c| if c == 1 || c == 4 { sinn(n) } else { cosn(n) });
                g.m = [[s[0], s[1], s[2]], [-s[1], s[3], s[4]], [-s[2], s[4], s[5]]];
            }
            Layout::EqualPhi => {
                let s = self.sum_with(|_, _| 1.0);
                g.m = [[s[0], ZERO, s[3]], [ZERO, s[1], ZERO], [s[4], ZERO, s[2]]];
            }
            Layout::Parallel => {
                let s = self.sum_with(|_, _| 1.0);
                g.m = [[s[0], ZERO, s[3]], [ZERO, s[1], ZERO], [-s[3], ZERO, s[2]]];
            }
            Layout::Perpendicular => {
                let s = self.sum_with(|n, _| if n % 2 == 0 { 1.0 } else { -1.0 });
                g.m = [[s[0], ZERO, ZERO], [ZERO, s[1], ZERO], [ZERO, ZERO, s[2]]];
            }
            Layout::Trace => {
                let s = self.sum_with(|_, _| 1.0);
                g.m[0][0] = s[0];
            }
        }
        g
    }

    /// Turns a non-converged evaluation into an error carrying the partial tensor.
    pub fn check(&self, g: GreensTensor) -> Result<GreensTensor, GreensError> {
        if self.converged {
            Ok(g)
        } else {
            Err(GreensError::NotConverged { partial: Box::new(g), report: self.report.clone() })
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    r: f64,
    rp: f64,
    dz: f64,
}

fn check_outside(r: f64, radius: f64) -> Result<(), GreensError> {
    if !(r > radius) || !r.is_finite() {
        return Err(GreensError::InsideCylinder { r, radius });
    }
    Ok(())
}

fn check_omega(omega: f64) -> Result<(), GreensError> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(GreensError::InvalidInput(format!("omega must be positive, got {omega}")));
    }
    Ok(())
}

fn contour(k: f64, geo: &Geometry, radius: f64, quad: &QuadratureSpec) -> (Vec<Segment>, f64) {
    let mut rho = quad.contour_radius * k;
    if geo.dz != 0.0 {
        rho = rho.min(1.0 / geo.dz.abs());
    }
    let gap = geo.r + geo.rp - 2.0 * radius;
    let cut = quad.evanescent_lambda / gap;
    let kz_max = (k * k + cut * cut).sqrt();
    let freq = geo.dz;
    let mut real = vec![0.0];
    let mut j = 30;
    while j >= 1 {
        let p = k - rho * 2f64.powi(j);
        if p > 0.0 && p > real[real.len() - 1] {
            real.push(p);
        }
        j -= 1;
    }
    if real.len() == 1 {
        real.push(0.5 * (k - rho));
    }
    real.push(k - rho);
    let mut segs = vec![
        Segment { breaks: real, freq },
        Segment::uniform(-PI, 0.0, 4),
    ];
    if kz_max > k + rho {
        let mut br = vec![k + rho];
        let mut step = rho;
        while br[br.len() - 1] + step < kz_max {
            let next = br[br.len() - 1] + step;
            br.push(next);
            step *= 2.0;
        }
        br.push(kz_max);
        segs.push(Segment { breaks: br, freq });
    }
    (segs, rho)
}

fn osc_factor(w: Weight, arg: C) -> C {
    match w {
        Weight::Plain => C::new(1.0, 0.0),
        Weight::Cos => arg.cos(),
        Weight::Sin => arg.sin(),
    }
}

fn modal(
    layout: Layout,
    geo: Geometry,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<ModalIntegrals, GreensError> {
    check_omega(omega)?;
    quad.validate().map_err(|e| GreensError::InvalidInput(e.to_string()))?;
    check_outside(geo.r, cyl.radius)?;
    check_outside(geo.rp, cyl.radius)?;
    let k = wavenumber(omega);
    let scat = Scatterer::at(cyl, omega)?;
    let (segs, rho) = contour(k, &geo, cyl.radius, quad);
    let nc = layout.ncomp();
    let osc = layout.osc();
    let kern = kernel(layout);
    let same = layout.same_radius() || geo.r == geo.rp;
    // the trace is only needed through its imaginary part, `Re` of the kz integral
    let im_only = layout == Layout::Trace;
    let tol = Tolerance { rel: quad.rel_tol, abs: quad.abs_tol_floor * k };
    let mut nmax = initial_order(geo.r * geo.rp / (cyl.radius * cyl.radius), quad);
    let mut total_panels = 0;
    loop {
        let width = (nmax + 1) * nc;
        let mut buf = vec![ZERO; nc];
        let tags: Vec<Weight> = (0..width).map(|i| osc[i % nc]).collect();
        let out = integrate::<GreensError, _>(&segs, &tags, width, tol, quad.max_panels, |seg, xs, vals| {
            for (i, &x) in xs.iter().enumerate() {
                let (kz, jac) = if seg == 1 {
                    let e = C::from_polar(rho, x);
                    (C::new(k, 0.0) + e, I * e)
                } else {
                    (C::new(x, 0.0), C::new(1.0, 0.0))
                };
                let explicit = segs[seg].freq == 0.0;
                let q = q_of(k, kz);
                let nd = node(k, kz, q, geo.r, geo.rp, cyl.radius, scat, nmax, same)?;
                let row = &mut vals[i * width..(i + 1) * width];
                for n in 0..=nmax {
                    kern(n, &nd, &mut buf);
                    for c in 0..nc {
                        let f = if explicit { osc_factor(osc[c], kz * geo.dz) * jac } else { jac };
                        row[n * nc + c] = if im_only { C::new((buf[c] * f).re, 0.0) } else { buf[c] * f };
                    }
                }
            }
            Ok(())
        })?;
        total_panels += out.panels;
        let term = |n: usize| (0..nc).fold(0.0f64, |m, c| m.max((weight(n) * out.value[n * nc + c]).norm()));
        let scale = (0..nc)
            .map(|c| (0..=nmax).map(|n| (weight(n) * out.value[n * nc + c]).norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let thr = (quad.rel_tol * scale).max(tol.abs);
        let m = quad.consecutive_small;
        let tail_small = nmax + 1 > m && (nmax + 1 - m..=nmax).all(|n| term(n) < thr);
        if tail_small || nmax >= quad.n_max_cap {
            let n_used = (0..=nmax).rev().find(|&n| term(n) >= thr).map_or(1, |n| n + 1);
            let tail = (nmax + 1 - m.min(nmax + 1)..=nmax).map(term).sum::<f64>();
            let mut flags = Vec::new();
            if !out.converged {
                flags.push("kz_budget_exhausted".to_string());
            } else if out.error > (tol.rel * out.norm()).max(tol.abs) {
                flags.push("kz_roundoff_limited".to_string());
            }
            if !tail_small {
                flags.push("multipole_cap_reached".to_string());
            }
            let err_abs = out.error + if tail_small { 0.0 } else { tail };
            let report = ConvergenceReport {
                n_used,
                kz_panels: total_panels,
                est_rel_error: err_abs / scale.max(f64::MIN_POSITIVE),
                flags,
            };
            return Ok(ModalIntegrals {
                layout,
                omega,
                nmax,
                values: out.value,
                converged: out.converged && tail_small,
                report,
                kz_error: out.error,
            });
        }
        nmax = grow(nmax, quad);
    }
}

/// Starting multipole order from the geometric decay `(R^2 / (r r'))^n` of
/// the terms, slightly below the estimate so it rarely overshoots.
fn initial_order(rr_over_r2: f64, quad: &QuadratureSpec) -> usize {
    let est = 0.8 * (1.0 / quad.rel_tol).ln() / rr_over_r2.ln();
    let est = if est.is_finite() { est.ceil() as usize } else { quad.n_max_cap };
    est.clamp(quad.n_start.min(quad.n_max_cap), quad.n_max_cap)
}

fn grow(nmax: usize, quad: &QuadratureSpec) -> usize {
    (nmax + nmax.div_ceil(2)).min(quad.n_max_cap)
}

impl ModalIntegrals {
    /// Absolute error estimate of the `kz` integrals (max over components).
    pub fn kz_error(&self) -> f64 {
        self.kz_error
    }
}

fn finish(mi: &ModalIntegrals, dphi: f64) -> Result<(GreensTensor, ConvergenceReport), GreensError> {
    let g = mi.assemble(dphi);
    let g = mi.check(g)?;
    Ok((g, mi.report.clone()))
}

/// Modal integrals at two radii and an axial offset, reusable for any `dphi`.
pub fn modal_integrals(
    r: f64,
    rp: f64,
    dz: f64,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<ModalIntegrals, GreensError> {
    let layout = if r == rp { Layout::EqualR } else { Layout::General };
    modal(layout, Geometry { r, rp, dz }, omega, cyl, quad)
}

/// All nine scattered elements at arbitrary positions.
pub fn gt_general(
    p1: &CylPoint,
    p2: &CylPoint,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<(GreensTensor, ConvergenceReport), GreensError> {
    let mi = modal(Layout::General, Geometry { r: p1.r, rp: p2.r, dz: p2.z - p1.z }, omega, cyl, quad)?;
    finish(&mi, p2.phi - p1.phi)
}

/// Equal radial coordinates: six independent elements.
pub fn gt_equal_r(
    r: f64,
    dphi: f64,
    dz: f64,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<(GreensTensor, ConvergenceReport), GreensError> {
    let mi = modal(Layout::EqualR, Geometry { r, rp: r, dz }, omega, cyl, quad)?;
    finish(&mi, dphi)
}

/// Equal angular coordinates: five independent elements.
pub fn gt_equal_phi(
    r: f64,
    rp: f64,
    dz: f64,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<(GreensTensor, ConvergenceReport), GreensError> {
    let mi = modal(Layout::EqualPhi, Geometry { r, rp, dz }, omega, cyl, quad)?;
    finish(&mi, 0.0)
}

/// Both points at distance `h` from the surface, on a line parallel to the
/// axis, separated by `d = z' - z`.
pub fn gt_parallel(
    h: f64,
    d: f64,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<(GreensTensor, ConvergenceReport), GreensError> {
    if !(h > 0.0) {
        return Err(GreensError::InvalidInput("h must be positive".into()));
    }
    let mi = modal(Layout::Parallel, Geometry { r: cyl.radius + h, rp: cyl.radius + h, dz: d }, omega, cyl, quad)?;
    finish(&mi, 0.0)
}

/// Both points at distance `h` from the surface on opposite sides.
pub fn gt_perpendicular(
    h: f64,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<(GreensTensor, ConvergenceReport), GreensError> {
    if !(h > 0.0) {
        return Err(GreensError::InvalidInput("h must be positive".into()));
    }
    let r = cyl.radius + h;
    let mi = modal(Layout::Perpendicular, Geometry { r, rp: r, dz: 0.0 }, omega, cyl, quad)?;
    finish(&mi, PI)
}

/// `Im Tr G_T(r, r)` from the full-range contour integral.
pub fn tr_im_gt(
    r: f64,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> Result<(f64, ConvergenceReport), GreensError> {
    let mi = modal(Layout::Trace, Geometry { r, rp: r, dz: 0.0 }, omega, cyl, quad)?;
    let (g, rep) = finish(&mi, 0.0)?;
    Ok((g.m[0][0].im, rep))
}

/// `Tr Im G(r, r) = k/(2 pi) + Im Tr G_T(r, r)`; without a cylinder only the
/// free part remains.
pub fn tr_im_g_coincident(
    r: f64,
    omega: f64,
    cyl: Option<&CylinderSpec>,
    quad: &QuadratureSpec,
) -> Result<(f64, ConvergenceReport), GreensError> {
    check_omega(omega)?;
    match cyl {
        None => Ok((tr_im_g0(omega), ConvergenceReport::default())),
        Some(c) => {
            let (v, rep) = tr_im_gt(r, omega, c, quad)?;
            Ok((tr_im_g0(omega) + v, rep))
        }
    }
}

/// `Im Tr G_T(r, r)` for a perfect conductor with the integration restricted
/// to propagating waves `kz < k`, where only the real part of the bracket
/// contributes.
///
/// The variable is `t = k - kz` on a logarithmic scale. Below `t_sw` only the
/// `n = 0` term survives, in a closed form built from the small-argument
/// expansion `J_0/H_0 ~ 1/(1 + (2i/pi)(ln(qR/2) + gamma))`.
pub fn tr_im_gt_pc_restricted(
    r: f64,
    omega: f64,
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, ConvergenceReport), GreensError> {
    check_omega(omega)?;
    check_outside(r, radius)?;
    let k = wavenumber(omega);
    let t_sw = 1e-12 * k;
    let scat = Scatterer::PerfectConductor;
    let seg = Segment::uniform(t_sw.ln(), k.ln(), 8);
    let tol = Tolerance { rel: quad.rel_tol, abs: quad.abs_tol_floor * k };
    let mut nmax = quad.n_start.min(quad.n_max_cap);
    let mut buf = [ZERO; 1];
    loop {
        let width = nmax + 1;
        let out = integrate::<GreensError, _>(std::slice::from_ref(&seg), &[], width, tol, quad.max_panels, |_, xs, vals| {
            for (i, &s) in xs.iter().enumerate() {
                let t = s.exp();
                let kz = k - t;
                let q = C::new((t * (2.0 * k - t)).sqrt(), 0.0);
                let nd = node(k, C::new(kz, 0.0), q, r, r, radius, scat, nmax, true)?;
                for n in 0..=nmax {
                    kernel_trace(n, &nd, &mut buf);
                    vals[i * width + n] = C::new(buf[0].re * t, 0.0);
                }
            }
            Ok(())
        })?;
        let term = |n: usize| (weight(n) * out.value[n]).norm();
        let scale: f64 = (0..=nmax).map(term).sum();
        let thr = (quad.rel_tol * scale).max(tol.abs);
        let m = quad.consecutive_small;
        let small = nmax + 1 > m && (nmax + 1 - m..=nmax).all(|n| term(n) < thr);
        if small || nmax >= quad.n_max_cap {
            let sum: f64 = (0..=nmax).map(|n| weight(n) * out.value[n].re).sum();
            let ell = 0.5 * (2.0 * k * t_sw).ln() + (0.5 * radius).ln() + EULER_GAMMA;
            let tail = ((2.0 * ell / PI).atan() + PI / 2.0) / (2.0 * PI * PI * k * r * r);
            let value = sum / (2.0 * PI) + tail;
            let n_used = (0..=nmax).rev().find(|&n| term(n) >= thr).map_or(1, |n| n + 1);
            let mut flags = Vec::new();
            if !out.converged {
                flags.push("kz_budget_exhausted".to_string());
            } else if out.error > (tol.rel * out.norm()).max(tol.abs) {
                flags.push("kz_roundoff_limited".to_string());
            }
            if !small {
                flags.push("multipole_cap_reached".to_string());
            }
            let report = ConvergenceReport {
                n_used,
                kz_panels: out.panels,
                est_rel_error: out.error / (2.0 * PI * value.abs().max(f64::MIN_POSITIVE)),
                flags,
            };
            if !(out.converged && small) {
                let mut g = GreensTensor::zero(omega);
                g.m[0][0] = C::new(0.0, value);
                return Err(GreensError::NotConverged { partial: Box::new(g), report });
            }
            return Ok((value, report));
        }
        nmax = grow(nmax, quad);
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Full tensor `G0 + G_T` between two distinct points.
pub fn g_full(
    p1: &CylPoint,
    p2: &CylPoint,
    omega: f64,
    cyl: Option<&CylinderSpec>,
    quad: &QuadratureSpec,
) -> Result<(GreensTensor, ConvergenceReport), GreensError> {
    let g0 = g0_cylindrical(p1, p2, omega)?;
    match cyl {
        None => Ok((g0, ConvergenceReport::default())),
        Some(c) => {
            let (gt, rep) = gt_general(p1, p2, omega, c, quad)?;
            Ok((g0.add(&gt), rep))
        }
    }
}

/// `Tr[G G^dagger]` of the full tensor between two distinct points.
pub fn tr_gg_dagger(
    p1: &CylPoint,
    p2: &CylPoint,
    omega: f64,
    cyl: Option<&CylinderSpec>,
    quad: &QuadratureSpec,
) -> Result<(f64, ConvergenceReport), GreensError> {
    let (g, rep) = g_full(p1, p2, omega, cyl, quad)?;
    Ok((g.tr_g_gdag(), rep))
}
