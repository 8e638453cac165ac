//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers as arguments to run a subset:
//! `cargo test --release --test acceptance -- 5 6`.

use cylheat::constants::{C, HBAR, K_B};
use cylheat::greens::{
    basis_matrix, g0_cartesian, g0_cylindrical, g_full, gt_equal_phi, gt_equal_r, gt_general, gt_parallel,
    gt_perpendicular, tr_im_g0, tr_im_gt, tr_im_gt_pc_restricted, CylPoint, GreensTensor,
};
use cylheat::materials::{CylinderSpec, MaterialModel, ParticleSpec};
use cylheat::observables::{angular_ratio, heat_radiation, heat_transfer, HtGeometry};
use cylheat::quadrature::{integrate, integrate_omega, QuadratureSpec, Segment, Tolerance, Weight};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

const TOL_TRACE: f64 = 1e-10;
const TOL_RECIPROCITY: f64 = 1e-8;
const TOL_ROTATION: f64 = 1e-12;
const TOL_CROSS: f64 = 1e-8;
const TOL_OFFDIAG: f64 = 1e-10;
const TOL_PC_RESTRICTED: f64 = 1e-8;
const HONESTY_FACTOR: f64 = 3.0;
const HONESTY_FRACTION: f64 = 0.99;

/// Reference frequency of the convergence profile, rad/s.
const OMEGA_0: f64 = 1.75e14;
const T1: f64 = 300.0;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, detail: String::new() }
    }

    /// Records one sub-check; the criterion passes only if all do.
    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        self.pass &= ok;
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let _ = write!(self.detail, "{}{}", what.as_ref(), if ok { "" } else { " [FAIL]" });
    }

    /// Reported but not gating.
    fn note(&mut self, what: impl AsRef<str>) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        let _ = write!(self.detail, "{} [info]", what.as_ref());
    }
}

fn rel(a: &GreensTensor, b: &GreensTensor) -> f64 {
    a.sub(b).max_abs() / b.max_abs()
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn cyl(radius: f64, m: MaterialModel) -> CylinderSpec {
    CylinderSpec::new(radius, m).unwrap()
}

fn sic_particle() -> ParticleSpec {
    ParticleSpec::new(1e-8, MaterialModel::sic(), T1).unwrap()
}

fn materials() -> [(&'static str, MaterialModel); 3] {
    [("sic", MaterialModel::sic()), ("gold", MaterialModel::gold()), ("pec", MaterialModel::pec())]
}

fn within(v: f64, target: f64, frac: f64) -> bool {
    (v / target - 1.0).abs() <= frac
}

fn c1_free_traces() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_im, mut worst_gg) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let w = log_uniform(&mut rng, 1e12, 1e16);
        let d = log_uniform(&mut rng, 1e-9, 1e-2);
        let k = w / C;
        worst_im = worst_im.max((tr_im_g0(w) / (k / (2.0 * PI)) - 1.0).abs());
        let u: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        let p1 = [rng.gen_range(-1e-6..1e-6), rng.gen_range(-1e-6..1e-6), rng.gen_range(-1e-6..1e-6)];
        let p2 = [p1[0] + d * u[0] / n, p1[1] + d * u[1] / n, p1[2] + d * u[2] / n];
        let gc = g0_cartesian(p1, p2, w).unwrap();
        let cp = |p: [f64; 3]| CylPoint::new(p[0].hypot(p[1]), p[1].atan2(p[0]), p[2]);
        let gy = g0_cylindrical(&cp(p1), &cp(p2), w).unwrap();
        let d_true = ((p2[0] - p1[0]).powi(2) + (p2[1] - p1[1]).powi(2) + (p2[2] - p1[2]).powi(2)).sqrt();
        let kd = k * d_true;
        let want = (1.0 + 1.0 / (kd * kd) + 3.0 / kd.powi(4)) / (8.0 * PI * PI * d_true * d_true);
        worst_gg = worst_gg.max((gc.tr_g_gdag() / want - 1.0).abs());
        worst_gg = worst_gg.max((gy.tr_g_gdag() / want - 1.0).abs());
    }
    out.check(worst_im <= TOL_TRACE, format!("Tr Im G0 max rel err {worst_im:.1e}"));
    out.check(worst_gg <= TOL_TRACE, format!("Tr G0G0+ max rel err {worst_gg:.1e} (cartesian and cylindrical)"));
    out
}

struct Geometry {
    radius: f64,
    p1: CylPoint,
    p2: CylPoint,
    omega: f64,
}

fn random_geometry(rng: &mut ChaCha8Rng) -> Geometry {
    let radius = log_uniform(rng, 2e-8, 5e-7);
    let h1 = log_uniform(rng, 1e-8, 1e-6);
    let h2 = log_uniform(rng, 1e-8, 1e-6);
    let p1 = CylPoint::new(radius + h1, rng.gen_range(0.0..2.0 * PI), 0.0);
    let p2 = CylPoint::new(radius + h2, rng.gen_range(0.0..2.0 * PI), rng.gen_range(-2e-6..2e-6));
    Geometry { radius, p1, p2, omega: log_uniform(rng, 5e13, 3e14) }
}

fn c2_reciprocity() -> Outcome {
    let mut out = Outcome::new();
    let q = QuadratureSpec { rel_tol: 1e-10, n_max_cap: 400, ..Default::default() };
    for (name, m) in materials() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let geoms: Vec<Geometry> = (0..25).map(|_| random_geometry(&mut rng)).collect();
        let res: Vec<(f64, f64)> = geoms
            .par_iter()
            .map(|g| {
                let c = cyl(g.radius, m);
                let (a, _) = g_full(&g.p1, &g.p2, g.omega, Some(&c), &q).unwrap();
                let (b, _) = g_full(&g.p2, &g.p1, g.omega, Some(&c), &q).unwrap();
                let recip = rel(&a, &b.transpose());
                let cyl0 = g0_cylindrical(&g.p1, &g.p2, g.omega).unwrap();
                let cart = g0_cartesian(g.p1.cartesian(), g.p2.cartesian(), g.omega)
                    .unwrap()
                    .rotate(&basis_matrix(g.p1.phi), &basis_matrix(g.p2.phi));
                (recip, rel(&cyl0, &cart))
            })
            .collect();
        let r = res.iter().map(|x| x.0).fold(0.0, f64::max);
        let o = res.iter().map(|x| x.1).fold(0.0, f64::max);
        out.check(r <= TOL_RECIPROCITY, format!("{name}: reciprocity {r:.1e}"));
        out.check(o <= TOL_ROTATION, format!("{name}: rotation {o:.1e}"));
    }
    out
}

fn c3_cross_formula() -> Outcome {
    let mut out = Outcome::new();
    let q = QuadratureSpec { rel_tol: 1e-10, n_max_cap: 400, ..Default::default() };
    for (name, m) in materials() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let geoms: Vec<Geometry> = (0..4).map(|_| random_geometry(&mut rng)).collect();
        let res: Vec<[f64; 5]> = geoms
            .par_iter()
            .map(|g| {
                let c = cyl(g.radius, m);
                let w = g.omega;
                let general = |a: CylPoint, b: CylPoint| gt_general(&a, &b, w, &c, &q).unwrap().0;
                let (r, rp, phi, dz) = (g.p1.r, g.p2.r, g.p1.phi, g.p2.z);
                let dphi = g.p2.phi - phi;
                let eq_r = gt_equal_r(r, dphi, dz, w, &c, &q).unwrap().0;
                let e1 = rel(&eq_r, &general(CylPoint::new(r, phi, 0.0), CylPoint::new(r, phi + dphi, dz)));
                let eq_phi = gt_equal_phi(r, rp, dz, w, &c, &q).unwrap().0;
                let e2 = rel(&eq_phi, &general(CylPoint::new(r, phi, 0.0), CylPoint::new(rp, phi, dz)));
                let h = r - g.radius;
                let par = gt_parallel(h, dz, w, &c, &q).unwrap().0;
                let e3 = rel(&par, &general(CylPoint::new(r, phi, 0.0), CylPoint::new(r, phi, dz)));
                let perp = gt_perpendicular(h, w, &c, &q).unwrap().0;
                let gp = general(CylPoint::new(r, 0.0, 0.0), CylPoint::new(r, PI, 0.0));
                let e4 = rel(&perp, &gp);
                let off = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
                    .iter()
                    .map(|&(i, j)| gp.m[i][j].norm() / gp.max_abs())
                    .fold(0.0, f64::max);
                [e1, e2, e3, e4, off]
            })
            .collect();
        let worst = |i: usize| res.iter().map(|x| x[i]).fold(0.0, f64::max);
        let (e1, e2, e3, e4, off) = (worst(0), worst(1), worst(2), worst(3), worst(4));
        out.check(e1 <= TOL_CROSS, format!("{name}: equal-r {e1:.1e}"));
        out.check(e2 <= TOL_CROSS, format!("{name}: equal-phi {e2:.1e}"));
        out.check(e3 <= TOL_CROSS, format!("{name}: parallel {e3:.1e}"));
        out.check(e4 <= TOL_CROSS, format!("{name}: perpendicular {e4:.1e}"));
        out.check(off <= TOL_OFFDIAG, format!("{name}: perpendicular off-diagonal {off:.1e}"));
    }
    out
}

fn c4_pc_restricted() -> Outcome {
    let mut out = Outcome::new();
    let q = QuadratureSpec { rel_tol: 1e-11, ..Default::default() };
    let points = [(1e-7, 2e-7, OMEGA_0), (1e-7, 5e-7, 1e14), (1e-8, 1.1e-7, 2e14), (1e-6, 1.1e-6, OMEGA_0), (3e-7, 1e-6, 5e13)];
    let mut worst = 0.0f64;
    for (radius, r, w) in points {
        let c = cyl(radius, MaterialModel::pec());
        let (full, _) = tr_im_gt(r, w, &c, &q).unwrap();
        let (restricted, _) = tr_im_gt_pc_restricted(r, w, radius, &q).unwrap();
        worst = worst.max((full / restricted - 1.0).abs());
    }
    out.check(worst <= TOL_PC_RESTRICTED, format!("max rel diff over 5 points {worst:.1e}"));
    out
}

/// Maximum of the radiation ratio over a radius grid, evaluated in parallel.
fn hr_max(m: MaterialModel, h: f64, radii: &[f64]) -> (f64, f64) {
    let p = sic_particle();
    let q = QuadratureSpec::default();
    radii
        .par_iter()
        .map(|&r| (r, heat_radiation(&p, Some(&cyl(r, m)), h, &q, None).unwrap().ratio_to_vacuum))
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a })
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = ((hi / lo).log10() * per_decade as f64).round() as usize;
    (0..=n).map(|i| lo * 10f64.powf(i as f64 / per_decade as f64)).collect()
}

fn c5_radiation() -> Outcome {
    let mut out = Outcome::new();
    let (r, v) = hr_max(MaterialModel::sic(), 1e-7, &log_grid(5e-8, 5e-7, 10));
    out.check(v > 1300.0, format!("SiC h=100nm max {v:.1} at R={r:.2e} (> 1300)"));
    let (r, v) = hr_max(MaterialModel::gold(), 1e-7, &log_grid(3e-10, 1e-8, 8));
    out.check(within(v, 264.0, 0.10), format!("gold h=100nm max {v:.1} at R={r:.2e} (264 +-10%)"));
    let (r, v) = hr_max(MaterialModel::pec(), 1e-7, &log_grid(1e-9, 1e-7, 4));
    out.check(within(v, 22.0, 0.10), format!("PC h=100nm max {v:.2} at R={r:.2e} (22 +-10%)"));
    let (r, v) = hr_max(MaterialModel::sic(), 8e-7, &[5e-7, 8e-7, 1e-6, 1.3e-6, 2e-6]);
    out.check(within(v, 7.0, 0.15), format!("SiC h=800nm max {v:.2} at R={r:.2e} (7 +-15%)"));
    out
}

fn c6_angular() -> Outcome {
    let mut out = Outcome::new();
    let p = sic_particle();
    let q = QuadratureSpec::default();
    let h = 1e-7;
    let ratio = |m: MaterialModel, radius: f64, dz: f64, angles: &[f64]| {
        angular_ratio(&p, &p, h, dz, Some(&cyl(radius, m)), &q, angles).unwrap().0
    };
    let v = ratio(MaterialModel::sic(), 1e-7, 1e-4, &[PI / 2.0])[0].1;
    out.check(within(v, 0.0674, 0.05), format!("SiC R=100nm 90deg {v:.5} (0.0674 +-5%)"));
    let v = ratio(MaterialModel::gold(), 1e-7, 1e-4, &[PI])[0].1;
    out.check(within(v, 1.0072, 0.002), format!("gold 180deg {v:.5} (1.0072 +-0.2%)"));
    let v = ratio(MaterialModel::pec(), 1e-7, 1e-4, &[PI])[0].1;
    out.check(within(v, 0.9988, 0.002), format!("PC 180deg {v:.5} (0.9988 +-0.2%)"));

    let mut angles: Vec<f64> = (0..=12).map(|i| (70.0 + 2.5 * i as f64).to_radians()).collect();
    angles.push(PI);
    let sic = ratio(MaterialModel::sic(), 1e-6, 2e-5, &angles);
    let (amin, vmin) = sic[..sic.len() - 1].iter().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { *b } else { a });
    let amin = amin.to_degrees();
    out.check(
        within(vmin, 0.335, 0.05) && (75.0..=95.0).contains(&amin),
        format!("SiC R=1um min {vmin:.4} at {amin:.1}deg (0.335 +-5% near 85deg)"),
    );
    let v = sic[sic.len() - 1].1;
    out.check(within(v, 1.1805, 0.02), format!("SiC R=1um 180deg {v:.4} (1.1805 +-2%)"));
    let v = ratio(MaterialModel::gold(), 1e-6, 2e-5, &[PI])[0].1;
    out.check(within(v, 0.7309, 0.02), format!("gold R=1um 180deg {v:.4} (0.7309 +-2%)"));
    let v = ratio(MaterialModel::pec(), 1e-6, 2e-5, &[PI])[0].1;
    out.check(within(v, 0.6918, 0.02), format!("PC R=1um 180deg {v:.4} (0.6918 +-2%)"));
    out
}

fn ht_ratio(m: MaterialModel, radius: f64, geom: HtGeometry) -> f64 {
    let p = sic_particle();
    heat_transfer(&p, &p, &geom, Some(&cyl(radius, m)), &QuadratureSpec::default(), None).unwrap().ratio_to_vacuum
}

fn c7_far_field() -> Outcome {
    let mut out = Outcome::new();
    let v = ht_ratio(MaterialModel::sic(), 1e-7, HtGeometry::Parallel { h: 1e-7, d: 1e-4 });
    out.check(within(v, 7.0, 0.20), format!("SiC R=h=100nm d=0.1mm ratio {v:.3} (7 +-20%)"));
    let v = ht_ratio(MaterialModel::pec(), 1e-8, HtGeometry::Parallel { h: 1e-7, d: 1e-2 });
    out.check(v > 1e10, format!("PC R=10nm h=100nm d=1cm ratio {v:.3e} (> 1e10)"));
    let pc = ht_ratio(MaterialModel::pec(), 1e-7, HtGeometry::Parallel { h: 1e-7, d: 1e-2 });
    out.note(format!("PC R=h=100nm d=1cm ratio {pc:.3e}"));
    let near = ht_ratio(MaterialModel::gold(), 1e-7, HtGeometry::Parallel { h: 1e-7, d: 1e-5 })
        / ht_ratio(MaterialModel::pec(), 1e-7, HtGeometry::Parallel { h: 1e-7, d: 1e-5 });
    let far = ht_ratio(MaterialModel::gold(), 1e-7, HtGeometry::Parallel { h: 1e-7, d: 1e-2 }) / pc;
    out.note(format!("gold/PC at R=h=100nm: d=10um {near:.3} (1..1.5), d=1cm {far:.2e} (< 0.1)"));
    out
}

fn c8_perpendicular() -> Outcome {
    let mut out = Outcome::new();
    let h = 1e-7;
    let perp = HtGeometry::Perpendicular { h };
    for (name, m) in [("gold", MaterialModel::gold()), ("PC", MaterialModel::pec())] {
        let s = 1.0 / ht_ratio(m, 1e-7, perp);
        out.check(within(s, 30.0, 0.20), format!("{name} R=h suppression {s:.1}x (30 +-20%)"));
    }
    let s = 1.0 / ht_ratio(MaterialModel::pec(), 1e-9, perp);
    out.check(s > 2.0, format!("PC R=1nm suppression {s:.2}x (> 2)"));

    let radii = [1e-7, 1.5e-7, 3e-7, 1e-6];
    let enh: Vec<f64> = radii.par_iter().map(|&r| ht_ratio(MaterialModel::sic(), r, perp)).collect();
    let ok = enh.iter().all(|&e| (1e2..=1e3).contains(&e));
    let list = enh.iter().map(|e| format!("{e:.0}")).collect::<Vec<_>>().join(", ");
    out.check(ok, format!("SiC enhancement for R=[1,1.5,3,10]h: {list} (1e2..1e3)"));

    let p = sic_particle();
    let q = QuadratureSpec::default();
    let fracs = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.2];
    let abs: Vec<f64> = fracs
        .par_iter()
        .map(|&f| {
            heat_transfer(&p, &p, &perp, Some(&cyl(f * h, MaterialModel::sic())), &q, None).unwrap().watts_per_vol2
        })
        .collect();
    let imax = (0..abs.len()).max_by(|&a, &b| abs[a].total_cmp(&abs[b])).unwrap();
    let interior = imax > 0 && imax < abs.len() - 1;
    out.check(
        interior && (0.55..=0.9).contains(&fracs[imax]),
        format!("SiC absolute HT peaks at R={:.1}h (local max near 0.7h)", fracs[imax]),
    );
    out
}

fn c9_convergence_profile() -> Outcome {
    let mut out = Outcome::new();
    let q = QuadratureSpec { rel_tol: 1e-4, ..Default::default() };
    let (radius, r) = (1e-6, 1.1e-6);
    let (_, pc) = tr_im_gt(r, OMEGA_0, &cyl(radius, MaterialModel::pec()), &q).unwrap();
    let (_, au) = tr_im_gt(r, OMEGA_0, &cyl(radius, MaterialModel::gold()), &q).unwrap();
    out.check(pc.n_used <= 10, format!("PC n_used {} (<= 10)", pc.n_used));
    out.check(au.n_used >= 25, format!("gold n_used {} (>= 25)", au.n_used));
    out
}

struct Case {
    exact: f64,
    value: f64,
    error: f64,
    rel_tol: f64,
}

fn battery() -> Vec<Case> {
    let mut cases = Vec::new();
    let tols = [1e-4, 1e-6, 1e-8, 1e-10];
    let run = |seg: Segment, tag: Weight, tol: f64, f: &dyn Fn(f64) -> f64| {
        let t = Tolerance { rel: tol, abs: 1e-300 };
        integrate::<(), _>(&[seg], &[tag], 1, t, 20_000, |_, xs, v| {
            for (o, &x) in v.iter_mut().zip(xs) {
                *o = Complex64::new(f(x), 0.0);
            }
            Ok(())
        })
        .unwrap()
    };
    for &tol in &tols {
        for a in [0.5, 1.0, 3.0, 10.0] {
            for l in [5.0, 20.0, 60.0] {
                let r = run(Segment::new(0.0, l), Weight::Plain, tol, &|x| (-a * x).exp());
                let exact = -(-a * l).exp_m1() / a;
                cases.push(Case { exact, value: r.value[0].re, error: r.error, rel_tol: tol });
            }
        }
        for kappa in [0.5f64, 1.0, 2.0] {
            for d in [1.0f64, 10.0, 100.0, 1000.0] {
                let a = 1.0 / kappa;
                let l = 40.0 * kappa;
                let (s, c) = (d * l).sin_cos();
                let e = (-a * l).exp();
                let den = a * a + d * d;
                let seg = || Segment::uniform(0.0, l, 4).with_freq(d);
                let r = run(seg(), Weight::Cos, tol, &|x| (-a * x).exp());
                cases.push(Case {
                    exact: (a + e * (d * s - a * c)) / den,
                    value: r.value[0].re,
                    error: r.error,
                    rel_tol: tol,
                });
                let r = run(seg(), Weight::Sin, tol, &|x| (-a * x).exp());
                cases.push(Case {
                    exact: (d - e * (a * s + d * c)) / den,
                    value: r.value[0].re,
                    error: r.error,
                    rel_tol: tol,
                });
            }
        }
        let smooth: [(f64, f64, f64, &dyn Fn(f64) -> f64); 3] = [
            (0.0, 1.0, PI / 4.0, &|x| 1.0 / (1.0 + x * x)),
            (0.0, 1.0, 2.0 / 3.0, &|x| x.sqrt()),
            (0.0, PI, 2.0, &|x| x.sin()),
        ];
        for (lo, hi, exact, f) in smooth {
            let r = run(Segment::new(lo, hi), Weight::Plain, tol, f);
            cases.push(Case { exact, value: r.value[0].re, error: r.error, rel_tol: tol });
        }
    }
    for tol in [1e-6, 1e-8, 1e-10] {
        for t in [150.0, 300.0, 600.0] {
            let spec = QuadratureSpec { omega_rel_tol: tol, omega_range_factor: (1e-4, 80.0), ..Default::default() };
            let r = integrate_omega(|_| Ok::<_, ()>(1.0), t, &spec, None).unwrap();
            let s = K_B * t / HBAR;
            cases.push(Case { exact: PI.powi(4) / 15.0 * s.powi(4), value: r.value, error: r.error, rel_tol: tol });
        }
    }
    cases
}

fn c10_quadrature() -> Outcome {
    let mut out = Outcome::new();
    let cases = battery();
    let n = cases.len();
    let accurate = cases.iter().filter(|c| (c.value - c.exact).abs() <= c.rel_tol * c.exact.abs()).count();
    let honest = cases.iter().filter(|c| (c.value - c.exact).abs() <= HONESTY_FACTOR * c.error).count();
    out.check(accurate == n, format!("{accurate}/{n} within requested tolerance"));
    let frac = honest as f64 / n as f64;
    out.check(frac >= HONESTY_FRACTION, format!("{honest}/{n} error bounds honest within 3x"));
    out
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(usize, &str, fn() -> Outcome); 10] = [
        (1, "analytic free-space trace identities", c1_free_traces),
        (2, "reciprocity and rotation oracle", c2_reciprocity),
        (3, "cross-formula consistency", c3_cross_formula),
        (4, "perfect-conductor restricted integration", c4_pc_restricted),
        (5, "heat radiation golden ratios", c5_radiation),
        (6, "angular heat transfer golden ratios", c6_angular),
        (7, "parallel far-field heat transfer", c7_far_field),
        (8, "perpendicular heat transfer", c8_perpendicular),
        (9, "multipole convergence profile", c9_convergence_profile),
        (10, "quadrature oracle battery", c10_quadrature),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let t0 = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name} ({:.1}s): {}", t0.elapsed().as_secs_f64(), o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
