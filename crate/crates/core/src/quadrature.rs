//! Adaptive integration engines.
//!
//! The core engine is a globally adaptive 21-point Gauss–Kronrod scheme for
//! vector-valued integrands. Components may carry a `cos(freq x)` or
//! `sin(freq x)` factor which is integrated with Filon-type weights: the
//! smooth amplitude is interpolated at the rule's nodes and the oscillating
//! factor is integrated exactly against the interpolant. With `freq = 0` the
//! weights reduce to the plain Gauss–Kronrod pair. Endpoints are never sampled.

use crate::constants::{HBAR, K_B};
use crate::specfun::spherical_j;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Relative tolerance of Green's tensor elements.
    pub rel_tol: f64,
    /// Absolute floor, in units of the natural scale of the quantity.
    pub abs_tol_floor: f64,
    /// Relative tolerance of frequency integrals.
    pub omega_rel_tol: f64,
    /// Evanescent cutoff `kz_max = sqrt(k^2 + (lambda/gap)^2)`.
    pub evanescent_lambda: f64,
    pub max_panels: usize,
    pub n_max_cap: usize,
    pub n_start: usize,
    pub consecutive_small: usize,
    /// Frequency window in units of `k_B T / hbar`.
    pub omega_range_factor: (f64, f64),
    pub resonance_refine: bool,
    pub resonance_subpanels: usize,
    /// Radius of the half circle around `kz = k`, in units of `k`.
    pub contour_radius: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol_floor: 1e-14,
            omega_rel_tol: 1e-5,
            evanescent_lambda: 40.0,
            max_panels: 4000,
            n_max_cap: 120,
            n_start: 8,
            consecutive_small: 3,
            omega_range_factor: (0.01, 50.0),
            resonance_refine: true,
            resonance_subpanels: 8,
            contour_radius: 0.5,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let ok = pos(self.rel_tol)
            && pos(self.abs_tol_floor)
            && pos(self.omega_rel_tol)
            && pos(self.evanescent_lambda)
            && pos(self.contour_radius)
            && self.contour_radius < 1.0
            && self.max_panels >= 1
            && self.n_max_cap >= 1
            && self.n_start >= 1
            && self.consecutive_small >= 1
            && self.resonance_subpanels >= 1
            && pos(self.omega_range_factor.0)
            && self.omega_range_factor.1 > self.omega_range_factor.0
            && self.omega_range_factor.1.is_finite();
        if ok {
            Ok(())
        } else {
            Err(QuadError::InvalidSpec)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("invalid quadrature settings")]
    InvalidSpec,
    #[error("panel budget exhausted: estimate {value} with error {error}")]
    Budget { value: Complex64, error: f64 },
    #[error("integrand failed: {0}")]
    Integrand(String),
}

/// Oscillating factor attached to a component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Plain,
    Cos,
    Sin,
}

/// One integration range with its initial breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub breaks: Vec<f64>,
    /// Angular frequency of the `Cos`/`Sin` factors on this segment.
    pub freq: f64,
}

impl Segment {
    pub fn new(a: f64, b: f64) -> Self {
        Self { breaks: vec![a, b], freq: 0.0 }
    }

    pub fn uniform(a: f64, b: f64, pieces: usize) -> Self {
        let p = pieces.max(1);
        let breaks = (0..=p).map(|i| if i == p { b } else { a + (b - a) * i as f64 / p as f64 }).collect();
        Self { breaks, freq: 0.0 }
    }

    pub fn with_freq(mut self, freq: f64) -> Self {
        self.freq = freq;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    fn target(&self, norm: f64) -> f64 {
        (self.rel * norm).max(self.abs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<Complex64>,
    /// Absolute error estimate, max over components.
    pub error: f64,
    /// Part of `error` that is floating-point roundoff and cannot be reduced
    /// by subdivision.
    pub roundoff: f64,
    pub panels: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl Integral {
    pub fn norm(&self) -> f64 {
        inf_norm(&self.value)
    }
}

fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_178_315,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub const NODES: usize = 21;
/// Panels narrower than this many ulps are not split again, so that no
/// node rounds onto an endpoint.
const MIN_WIDTH_ULPS: f64 = 1e4;
/// Errors within this factor of the summed roundoff floor count as converged.
const ROUNDOFF_MARGIN: f64 = 2.0;

struct Rule {
    t: [f64; NODES],
    wk: [f64; NODES],
    wg: [f64; NODES],
    gauss: [usize; 10],
    /// Inverse Legendre–Vandermonde matrices, `coef = a * values`.
    a21: DMatrix<f64>,
    a10: DMatrix<f64>,
}

fn legendre_all(t: f64, mmax: usize) -> Vec<f64> {
    let mut p = vec![0.0; mmax + 1];
    p[0] = 1.0;
    if mmax >= 1 {
        p[1] = t;
    }
    for m in 1..mmax {
        p[m + 1] = ((2 * m + 1) as f64 * t * p[m] - m as f64 * p[m - 1]) / (m + 1) as f64;
    }
    p
}

fn inverse_vandermonde(t: &[f64]) -> DMatrix<f64> {
    let n = t.len();
    let v = DMatrix::from_fn(n, n, |i, m| legendre_all(t[i], n - 1)[m]);
    v.try_inverse().expect("Legendre-Vandermonde matrix at distinct nodes is invertible")
}

fn rule() -> &'static Rule {
    static RULE: OnceLock<Rule> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut t = [0.0; NODES];
        let mut wk = [0.0; NODES];
        let mut wg = [0.0; NODES];
        for i in 0..10 {
            t[i] = -XGK[i];
            t[20 - i] = XGK[i];
            wk[i] = WGK[i];
            wk[20 - i] = WGK[i];
        }
        t[10] = 0.0;
        wk[10] = WGK[10];
        let mut gauss = [0usize; 10];
        for j in 0..5 {
            let i = 2 * j + 1;
            wg[i] = WG[j];
            wg[20 - i] = WG[j];
            gauss[j] = i;
            gauss[9 - j] = 20 - i;
        }
        gauss.sort_unstable();
        let tg: Vec<f64> = gauss.iter().map(|&i| t[i]).collect();
        Rule { t, wk, wg, gauss, a21: inverse_vandermonde(&t), a10: inverse_vandermonde(&tg) }
    })
}

/// Abscissae of the 21-point rule on `[-1, 1]`.
pub fn nodes() -> [f64; NODES] {
    rule().t
}

/// Weights `(wc, ws)` with `sum wc_i g(t_i) ~ int g cos(om t)` and likewise
/// for `sin`, on `[-1, 1]`, for the interpolant through the given nodes.
fn filon_weights(a: &DMatrix<f64>, om: f64, wc: &mut [f64], ws: &mut [f64]) {
    let n = a.nrows();
    let j = spherical_j(om.abs(), n - 1);
    let mut mc = vec![0.0; n];
    let mut ms = vec![0.0; n];
    for m in 0..n {
        let sgn = if (m / 2) % 2 == 0 { 2.0 } else { -2.0 };
        if m % 2 == 0 {
            mc[m] = sgn * j[m];
        } else {
            ms[m] = sgn * j[m] * om.signum();
        }
    }
    for i in 0..n {
        let (mut c, mut s) = (0.0, 0.0);
        for m in 0..n {
            c += a[(m, i)] * mc[m];
            s += a[(m, i)] * ms[m];
        }
        wc[i] = c;
        ws[i] = s;
    }
}

struct Panel {
    seg: usize,
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
    floor: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Workspace {
    xs: [f64; NODES],
    vals: Vec<Complex64>,
    wc21: [f64; NODES],
    ws21: [f64; NODES],
    wc10: [f64; 10],
    ws10: [f64; 10],
}

/// Returns the panel error and its roundoff floor.
fn qk_error(delta: f64, resasc: f64, resabs: f64) -> (f64, f64) {
    let mut err = delta;
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let mut floor = 0.0;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor = 50.0 * f64::EPSILON * resabs;
        err = err.max(floor);
    }
    (err, floor)
}

#[allow(clippy::too_many_arguments)]
fn eval_panel<E, F>(
    seg: usize,
    a: f64,
    b: f64,
    freq: f64,
    tags: &[Weight],
    ncomp: usize,
    ws: &mut Workspace,
    f: &mut F,
) -> Result<(Vec<Complex64>, f64, f64), E>
where
    F: FnMut(usize, &[f64], &mut [Complex64]) -> Result<(), E>,
{
    let r = rule();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    for i in 0..NODES {
        ws.xs[i] = c + h * r.t[i];
    }
    ws.vals.clear();
    ws.vals.resize(NODES * ncomp, Complex64::new(0.0, 0.0));
    f(seg, &ws.xs, &mut ws.vals)?;
    let osc = freq != 0.0;
    let (cc, sc) = if osc { (freq * c).cos_sin_pair() } else { (1.0, 0.0) };
    if osc {
        let om = freq * h;
        filon_weights(&r.a21, om, &mut ws.wc21, &mut ws.ws21);
        filon_weights(&r.a10, om, &mut ws.wc10, &mut ws.ws10);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); ncomp];
    let mut err: f64 = 0.0;
    let mut floor = 0.0;
    for j in 0..ncomp {
        let g = |i: usize| ws.vals[i * ncomp + j];
        let mut plain_k = Complex64::new(0.0, 0.0);
        let mut resabs = 0.0;
        for i in 0..NODES {
            plain_k += r.wk[i] * g(i);
            resabs += r.wk[i] * g(i).norm();
        }
        let mean = plain_k * 0.5;
        let mut resasc = 0.0;
        for i in 0..NODES {
            resasc += r.wk[i] * (g(i) - mean).norm();
        }
        let tag = if osc { tags[j] } else { Weight::Plain };
        let (k, gs) = match tag {
            Weight::Plain => {
                let mut gsum = Complex64::new(0.0, 0.0);
                for &i in &r.gauss {
                    gsum += r.wg[i] * g(i);
                }
                (plain_k, gsum)
            }
            Weight::Cos | Weight::Sin => {
                let (mut kc, mut ks) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for i in 0..NODES {
                    kc += ws.wc21[i] * g(i);
                    ks += ws.ws21[i] * g(i);
                }
                let (mut gc, mut gsn) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
                for (m, &i) in r.gauss.iter().enumerate() {
                    gc += ws.wc10[m] * g(i);
                    gsn += ws.ws10[m] * g(i);
                }
                if tag == Weight::Cos {
                    (kc * cc - ks * sc, gc * cc - gsn * sc)
                } else {
                    (kc * sc + ks * cc, gc * sc + gsn * cc)
                }
            }
        };
        out[j] = k * h;
        let (e, fl) = qk_error((k - gs).norm() * h.abs(), resasc * h.abs(), resabs * h.abs());
        if e > err {
            err = e;
            floor = fl;
        }
    }
    Ok((out, err, floor))
}

trait CosSin {
    fn cos_sin_pair(self) -> (f64, f64);
}
impl CosSin for f64 {
    fn cos_sin_pair(self) -> (f64, f64) {
        let (s, c) = self.sin_cos();
        (c, s)
    }
}

/// Globally adaptive integration of `ncomp` components over all segments.
///
/// `f(seg, xs, out)` fills `out[i * ncomp + j]` with component `j` at node
/// `xs[i]`; for `Cos`/`Sin` components it returns only the smooth amplitude.
/// Running out of panels is not an error: the result has `converged == false`.
pub fn integrate<E, F>(
    segments: &[Segment],
    tags: &[Weight],
    ncomp: usize,
    tol: Tolerance,
    max_panels: usize,
    mut f: F,
) -> Result<Integral, E>
where
    F: FnMut(usize, &[f64], &mut [Complex64]) -> Result<(), E>,
{
    assert!(tags.is_empty() || tags.len() == ncomp, "one weight tag per component");
    let plain = vec![Weight::Plain; ncomp];
    let tags = if tags.is_empty() { &plain[..] } else { tags };
    let mut ws = Workspace {
        xs: [0.0; NODES],
        vals: Vec::new(),
        wc21: [0.0; NODES],
        ws21: [0.0; NODES],
        wc10: [0.0; 10],
        ws10: [0.0; 10],
    };
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    let mut seq = 0usize;
    let mut total = vec![Complex64::new(0.0, 0.0); ncomp];
    let mut total_err = 0.0;
    let mut total_floor = 0.0;
    let mut evaluations = 0usize;
    for (s, seg) in segments.iter().enumerate() {
        for w in seg.breaks.windows(2) {
            if w[1] == w[0] {
                continue;
            }
            let (value, error, floor) = eval_panel(s, w[0], w[1], seg.freq, tags, ncomp, &mut ws, &mut f)?;
            evaluations += NODES;
            for j in 0..ncomp {
                total[j] += value[j];
            }
            total_err += error;
            total_floor += floor;
            heap.push(Panel { seg: s, a: w[0], b: w[1], value, error, floor, seq });
            seq += 1;
        }
    }
    let mut npanels = seq;
    let mut converged = true;
    let mut since_resum = 0;
    while total_err > tol.target(inf_norm(&total)).max(ROUNDOFF_MARGIN * total_floor) {
        let Some(worst) = heap.pop() else { break };
        if npanels >= max_panels {
            heap.push(worst);
            converged = false;
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if width <= MIN_WIDTH_ULPS * f64::EPSILON * worst.a.abs().max(worst.b.abs())
            || worst.error <= worst.floor
        {
            done.push(worst);
            continue;
        }
        let freq = segments[worst.seg].freq;
        let (v1, e1, f1) = eval_panel(worst.seg, worst.a, mid, freq, tags, ncomp, &mut ws, &mut f)?;
        let (v2, e2, f2) = eval_panel(worst.seg, mid, worst.b, freq, tags, ncomp, &mut ws, &mut f)?;
        evaluations += 2 * NODES;
        for j in 0..ncomp {
            total[j] += v1[j] + v2[j] - worst.value[j];
        }
        total_err += e1 + e2 - worst.error;
        total_floor += f1 + f2 - worst.floor;
        heap.push(Panel { seg: worst.seg, a: worst.a, b: mid, value: v1, error: e1, floor: f1, seq });
        heap.push(Panel { seg: worst.seg, a: mid, b: worst.b, value: v2, error: e2, floor: f2, seq: seq + 1 });
        seq += 2;
        npanels += 1;
        since_resum += 1;
        if since_resum >= 64 {
            since_resum = 0;
            total_err = heap.iter().chain(done.iter()).map(|p| p.error).sum();
            total_floor = heap.iter().chain(done.iter()).map(|p| p.floor).sum();
        }
    }
    let mut all: Vec<Panel> = heap.into_vec();
    all.extend(done);
    all.sort_by(|p, q| p.seg.cmp(&q.seg).then(p.a.total_cmp(&q.a)));
    let mut value = vec![Complex64::new(0.0, 0.0); ncomp];
    let mut error = 0.0;
    let mut roundoff = 0.0;
    for p in &all {
        for j in 0..ncomp {
            value[j] += p.value[j];
        }
        error += p.error;
        roundoff += p.floor;
    }
    if error > tol.target(inf_norm(&value)).max(ROUNDOFF_MARGIN * roundoff) {
        converged = false;
    }
    Ok(Integral { value, error, roundoff, panels: all.len(), evaluations, converged })
}

/// Scalar real-axis integral over `[0, upper]` with a branch point at `k`.
///
/// The range is split at `k` so that no node lands on it. Without an
/// oscillating factor both halves are mapped by `kz = k -+ t^2`, which makes
/// `1/sqrt|k - kz|` endpoint behavior smooth. With `osc_freq` set, the
/// integrand is `f(kz) * cos(osc_freq * kz)` and the map stays linear.
pub fn integrate_kz<F>(
    f: F,
    k: f64,
    upper: f64,
    spec: &QuadratureSpec,
    osc_freq: Option<f64>,
) -> Result<(Complex64, f64), QuadError>
where
    F: Fn(f64) -> Complex64,
{
    spec.validate()?;
    let k = k.max(0.0);
    let sqrt_map = osc_freq.is_none();
    let freq = osc_freq.unwrap_or(0.0);
    let ladder = |a: f64, b: f64, first: f64| {
        let mut br = vec![a];
        let mut step = first;
        while br[br.len() - 1] + step < b {
            let next = br[br.len() - 1] + step;
            br.push(next);
            step *= 2.0;
        }
        br.push(b);
        br
    };
    let mut segs = Vec::new();
    if k > 0.0 {
        let top = k.min(upper);
        segs.push(if sqrt_map {
            Segment::new((k - top).sqrt(), k.sqrt())
        } else {
            Segment::new(0.0, top).with_freq(freq)
        });
    } else {
        segs.push(Segment { breaks: Vec::new(), freq: 0.0 });
    }
    if upper > k {
        let first = if k > 0.0 { 0.25 * k } else { upper / 64.0 };
        segs.push(if sqrt_map {
            Segment { breaks: ladder(0.0, (upper - k).sqrt(), first.sqrt()), freq: 0.0 }
        } else {
            Segment { breaks: ladder(k, upper, first), freq }
        });
    }
    let tags = [if osc_freq.is_some() { Weight::Cos } else { Weight::Plain }];
    let tol = Tolerance { rel: spec.rel_tol, abs: spec.abs_tol_floor };
    let out = integrate::<QuadError, _>(&segs, &tags, 1, tol, spec.max_panels, |seg, xs, vals| {
        for (v, &x) in vals.iter_mut().zip(xs) {
            *v = match (sqrt_map, seg) {
                (false, _) => f(x),
                (true, 0) => f(k - x * x) * (2.0 * x),
                (true, _) => f(k + x * x) * (2.0 * x),
            };
        }
        Ok(())
    })?;
    if !out.converged {
        return Err(QuadError::Budget { value: out.value[0], error: out.error });
    }
    Ok((out.value[0], out.error))
}

/// `omega^3 / (exp(hbar omega / k_B T) - 1)`.
pub fn planck_weight(omega: f64, temperature: f64) -> f64 {
    let x = HBAR * omega / (K_B * temperature);
    omega.powi(3) / x.exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaIntegral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Initial frequency breakpoints: a log ladder over the Planck window plus an
/// optional finely split resonance band.
pub fn omega_breaks(temperature: f64, spec: &QuadratureSpec, band: Option<(f64, f64)>) -> Vec<f64> {
    let s = K_B * temperature / HBAR;
    let (lo, hi) = (spec.omega_range_factor.0 * s, spec.omega_range_factor.1 * s);
    let mut br = vec![lo];
    let mut x = 0.5;
    while x < spec.omega_range_factor.1 {
        if x > spec.omega_range_factor.0 {
            br.push(x * s);
        }
        x *= 2.0;
    }
    br.push(hi);
    if spec.resonance_refine {
        if let Some((a, b)) = band {
            let (a, b) = (a.max(lo), b.min(hi));
            if b > a {
                br.retain(|&w| w <= a || w >= b);
                let m = spec.resonance_subpanels;
                for i in 0..=m {
                    br.push(a + (b - a) * i as f64 / m as f64);
                }
            }
        }
    }
    br.sort_by(f64::total_cmp);
    br.dedup_by(|p, q| (*p - *q).abs() <= 1e-12 * q.abs());
    br
}

/// `int weight(omega) f(omega) d omega` over the Planck window, with the
/// nodes of each panel evaluated in parallel.
pub fn integrate_omega<F, E>(
    f: F,
    temperature: f64,
    spec: &QuadratureSpec,
    band: Option<(f64, f64)>,
) -> Result<OmegaIntegral, E>
where
    F: Fn(f64) -> Result<f64, E> + Sync,
    E: Send,
{
    let v = integrate_omega_vec(|w| f(w).map(|y| vec![y]), 1, temperature, spec, band)?;
    Ok(OmegaIntegral { value: v.value[0], error: v.error, evaluations: v.evaluations, converged: v.converged })
}

/// Vector-valued frequency integral; the error target is relative to the
/// largest component.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaIntegralVec {
    pub value: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

pub fn integrate_omega_vec<F, E>(
    f: F,
    ncomp: usize,
    temperature: f64,
    spec: &QuadratureSpec,
    band: Option<(f64, f64)>,
) -> Result<OmegaIntegralVec, E>
where
    F: Fn(f64) -> Result<Vec<f64>, E> + Sync,
    E: Send,
{
    let seg = Segment { breaks: omega_breaks(temperature, spec, band), freq: 0.0 };
    let tol = Tolerance { rel: spec.omega_rel_tol, abs: 0.0 };
    let out = integrate(std::slice::from_ref(&seg), &[], ncomp, tol, spec.max_panels, |_, xs, vals| {
        let ys: Result<Vec<Vec<f64>>, E> = xs
            .par_iter()
            .map(|&w| {
                let p = planck_weight(w, temperature);
                f(w).map(|y| y.into_iter().map(|v| v * p).collect())
            })
            .collect();
        for (i, y) in ys?.into_iter().enumerate() {
            assert_eq!(y.len(), ncomp, "spectrand length");
            for (j, v) in y.into_iter().enumerate() {
                vals[i * ncomp + j] = Complex64::new(v, 0.0);
            }
        }
        Ok(())
    })?;
    Ok(OmegaIntegralVec {
        value: out.value.iter().map(|z| z.re).collect(),
        error: out.error,
        evaluations: out.evaluations,
        converged: out.converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridScale {
    Lin,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaGrid {
    pub min: f64,
    pub max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_scale")]
    pub scale: GridScale,
}

fn default_points() -> usize {
    400
}

fn default_scale() -> GridScale {
    GridScale::Lin
}

impl OmegaGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points.max(1);
        if n == 1 {
            return vec![self.min];
        }
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                match self.scale {
                    GridScale::Lin => self.min + (self.max - self.min) * t,
                    GridScale::Log => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.min > 0.0 && self.max >= self.min && self.points >= 1) {
            return Err("frequency grid needs 0 < min <= max and points >= 1".into());
        }
        if self.points > 1 && self.max == self.min {
            return Err("frequency grid with several points needs max > min".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub quantity: String,
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
    pub metadata: Vec<(String, String)>,
}

/// Tabulates `f` on the grid, in parallel, keeping grid order.
pub fn spectral_curve<F, E>(quantity: &str, grid: &OmegaGrid, f: F) -> Result<SpectralCurve, E>
where
    F: Fn(f64) -> Result<f64, E> + Sync,
    E: Send,
{
    let omega = grid.values();
    let value = omega.par_iter().map(|&w| f(w)).collect::<Result<Vec<_>, E>>()?;
    Ok(SpectralCurve { quantity: quantity.to_string(), omega, value, metadata: Vec::new() })
}
