//! Heat radiation of one particle and heat transfer between two particles
//! next to a cylinder, with their vacuum references.

use crate::constants::{C, HBAR};
use crate::error::{Error, Result};
use crate::greens::{
    g0_cylindrical, gt_equal_r, gt_general, gt_parallel, gt_perpendicular, modal_integrals, tr_g0_g0dag, tr_im_g0,
    tr_im_gt, ConvergenceReport, CylPoint, GreensError, GreensTensor,
};
use crate::materials::{clausius_mossotti, polarizability, CylinderSpec, MaterialKind, MaterialModel, ParticleSpec};
use crate::quadrature::{integrate_omega_vec, spectral_curve, OmegaGrid, OmegaIntegralVec, QuadratureSpec, SpectralCurve};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Mutex;

/// `8 hbar / c^2`
const HR_PREFACTOR: f64 = 8.0 * HBAR / (C * C);

/// `32 pi hbar / c^4 * (3 / 4 pi)^2`
fn ht_prefactor() -> f64 {
    let v = 3.0 / (4.0 * PI);
    32.0 * PI * HBAR / C.powi(4) * v * v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRResult {
    pub watts: f64,
    pub ratio_to_vacuum: f64,
    pub spectrum: Option<SpectralCurve>,
    pub convergence: ConvergenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HTResult {
    /// Heat transfer divided by `V1 V2`, W/m^6.
    pub watts_per_vol2: f64,
    pub ratio_to_vacuum: f64,
    pub ratio_to_reference_angle: Option<f64>,
    pub spectrum: Option<SpectralCurve>,
    pub convergence: ConvergenceReport,
}

/// Placement of the two particles relative to the cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HtGeometry {
    /// Both at distance `h` from the surface on a line parallel to the axis, `d` apart.
    Parallel { h: f64, d: f64 },
    /// Both at distance `h`, the second rotated by `dphi` and shifted by `dz`.
    Angular { h: f64, dphi: f64, dz: f64 },
    /// Both at distance `h` on opposite sides, `d = 2(R + h)`.
    Perpendicular { h: f64 },
    General { p1: CylPoint, p2: CylPoint },
}

impl HtGeometry {
    pub fn points(&self, radius: f64) -> (CylPoint, CylPoint) {
        match *self {
            HtGeometry::Parallel { h, d } => (CylPoint::new(radius + h, 0.0, 0.0), CylPoint::new(radius + h, 0.0, d)),
            HtGeometry::Angular { h, dphi, dz } => {
                (CylPoint::new(radius + h, 0.0, 0.0), CylPoint::new(radius + h, dphi, dz))
            }
            HtGeometry::Perpendicular { h } => (CylPoint::new(radius + h, 0.0, 0.0), CylPoint::new(radius + h, PI, 0.0)),
            HtGeometry::General { p1, p2 } => (p1, p2),
        }
    }

    fn validate(&self) -> Result<()> {
        let h = match *self {
            HtGeometry::Parallel { h, .. } | HtGeometry::Angular { h, .. } | HtGeometry::Perpendicular { h } => h,
            HtGeometry::General { .. } => 1.0,
        };
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput("h must be positive".into()));
        }
        Ok(())
    }
}

/// Cylinders made of vacuum do not scatter and are treated as absent.
fn active(cyl: Option<&CylinderSpec>) -> Option<&CylinderSpec> {
    cyl.filter(|c| !matches!(c.material.kind, MaterialKind::Vacuum))
}

/// Refined frequency band around any Lorentz resonance in play.
fn resonance_band(materials: &[&MaterialModel]) -> Option<(f64, f64)> {
    materials
        .iter()
        .filter_map(|m| m.reststrahlen_band())
        .map(|(to, lo)| (0.9 * to, 1.1 * lo))
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
}

/// Collects per-frequency convergence reports; non-converged Green's tensors
/// are kept with a flag.
struct Collector(Mutex<ConvergenceReport>);

impl Collector {
    fn new() -> Self {
        Self(Mutex::new(ConvergenceReport::default()))
    }

    fn take<T>(
        &self,
        res: std::result::Result<(T, ConvergenceReport), GreensError>,
        wrap: impl FnOnce(GreensTensor) -> T,
    ) -> std::result::Result<T, GreensError> {
        let (v, rep) = match res {
            Ok(ok) => ok,
            Err(GreensError::NotConverged { partial, mut report }) => {
                report.flags.push("greens_not_converged".into());
                (wrap(*partial), report)
            }
            Err(e) => return Err(e),
        };
        self.record(&rep);
        Ok(v)
    }

    fn record(&self, rep: &ConvergenceReport) {
        self.0.lock().unwrap_or_else(|p| p.into_inner()).merge(rep);
    }

    fn finish(self, omega: &OmegaIntegralVec) -> Result<ConvergenceReport> {
        let mut rep = self.0.into_inner().unwrap_or_else(|p| p.into_inner());
        rep.flags.sort();
        if !omega.converged {
            let value = omega.value.first().copied().unwrap_or(0.0);
            return Err(Error::OmegaNotConverged { value, error: omega.error });
        }
        Ok(rep)
    }
}

/// `Tr Im G(r, r)` at distance `h` from the cylinder surface.
pub fn tr_im_g_at(
    cyl: Option<&CylinderSpec>,
    h: f64,
    omega: f64,
    quad: &QuadratureSpec,
) -> std::result::Result<(f64, ConvergenceReport), GreensError> {
    match active(cyl) {
        None => Ok((tr_im_g0(omega), ConvergenceReport::default())),
        Some(c) => tr_im_gt(c.radius + h, omega, c, quad).map(|(v, rep)| (tr_im_g0(omega) + v, rep)),
    }
}

/// Scattered tensor for the geometry, through the specialized path where one exists.
pub fn gt_for(
    geom: &HtGeometry,
    omega: f64,
    cyl: &CylinderSpec,
    quad: &QuadratureSpec,
) -> std::result::Result<(GreensTensor, ConvergenceReport), GreensError> {
    match *geom {
        HtGeometry::Parallel { h, d } => gt_parallel(h, d, omega, cyl, quad),
        HtGeometry::Perpendicular { h } => gt_perpendicular(h, omega, cyl, quad),
        HtGeometry::Angular { h, dphi, dz } => gt_equal_r(cyl.radius + h, dphi, dz, omega, cyl, quad),
        HtGeometry::General { p1, p2 } => gt_general(&p1, &p2, omega, cyl, quad),
    }
}

/// Full tensor `G0 + G_T` for the geometry.
pub fn g_for(
    geom: &HtGeometry,
    omega: f64,
    cyl: Option<&CylinderSpec>,
    quad: &QuadratureSpec,
) -> std::result::Result<(GreensTensor, ConvergenceReport), GreensError> {
    let cyl = active(cyl);
    let (p1, p2) = geom.points(cyl.map_or(0.0, |c| c.radius));
    let g0 = g0_cylindrical(&p1, &p2, omega)?;
    match cyl {
        None => Ok((g0, ConvergenceReport::default())),
        Some(c) => match gt_for(geom, omega, c, quad) {
            Ok((gt, rep)) => Ok((g0.add(&gt), rep)),
            Err(GreensError::NotConverged { partial, report }) => {
                Err(GreensError::NotConverged { partial: Box::new(g0.add(&partial)), report })
            }
            Err(e) => Err(e),
        },
    }
}

pub fn heat_radiation_vacuum(particle: &ParticleSpec, quad: &QuadratureSpec) -> Result<f64> {
    let band = resonance_band(&[&particle.material]);
    let out = integrate_omega_vec(
        |w| -> Result<Vec<f64>> { Ok(vec![polarizability(particle, w)?.im * tr_im_g0(w)]) },
        1,
        particle.temperature,
        quad,
        band,
    )?;
    if !out.converged {
        return Err(Error::OmegaNotConverged { value: HR_PREFACTOR * out.value[0], error: out.error });
    }
    Ok(HR_PREFACTOR * out.value[0])
}

/// Heat radiated by `particle` at distance `h` from the cylinder surface.
pub fn heat_radiation(
    particle: &ParticleSpec,
    cyl: Option<&CylinderSpec>,
    h: f64,
    quad: &QuadratureSpec,
    spectrum: Option<&OmegaGrid>,
) -> Result<HRResult> {
    quad.validate()?;
    let cyl = active(cyl);
    if cyl.is_some() && !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput("h must be positive".into()));
    }
    let spectrum = spectrum.map(|g| tr_im_g_spectrum(cyl, h, g, quad)).transpose()?;
    let Some(c) = cyl else {
        let watts = heat_radiation_vacuum(particle, quad)?;
        return Ok(HRResult { watts, ratio_to_vacuum: 1.0, spectrum, convergence: ConvergenceReport::default() });
    };
    let band = resonance_band(&[&particle.material, &c.material]);
    let col = Collector::new();
    let out = integrate_omega_vec(
        |w| -> Result<Vec<f64>> {
            let im_a = polarizability(particle, w)?.im;
            let g = col.take(tr_im_g_at(Some(c), h, w, quad), |p| tr_im_g0(w) + p.m[0][0].im)?;
            Ok(vec![im_a * g, im_a * tr_im_g0(w)])
        },
        2,
        particle.temperature,
        quad,
        band,
    )?;
    let convergence = col.finish(&out)?;
    Ok(HRResult {
        watts: HR_PREFACTOR * out.value[0],
        ratio_to_vacuum: out.value[0] / out.value[1],
        spectrum,
        convergence,
    })
}

fn im_cm_product(p1: &ParticleSpec, p2: &ParticleSpec, w: f64) -> Result<f64> {
    Ok(clausius_mossotti(&p1.material, w)?.im * clausius_mossotti(&p2.material, w)?.im)
}

/// Heat transferred from `p1` (hot) to `p2`, normalized by both volumes.
pub fn heat_transfer(
    p1: &ParticleSpec,
    p2: &ParticleSpec,
    geom: &HtGeometry,
    cyl: Option<&CylinderSpec>,
    quad: &QuadratureSpec,
    spectrum: Option<&OmegaGrid>,
) -> Result<HTResult> {
    quad.validate()?;
    geom.validate()?;
    let cyl = active(cyl);
    let radius = cyl.map_or(0.0, |c| c.radius);
    let (a, b) = geom.points(radius);
    if a.distance(&b) == 0.0 {
        return Err(GreensError::Coincident.into());
    }
    let spectrum = spectrum.map(|g| tr_gg_spectrum(geom, cyl, g, quad)).transpose()?;
    let mut mats = vec![&p1.material, &p2.material];
    if let Some(c) = cyl {
        mats.push(&c.material);
    }
    let band = resonance_band(&mats);
    let reference = match *geom {
        HtGeometry::Angular { h, dz, .. } => Some(HtGeometry::Angular { h, dphi: 0.0, dz }),
        _ => None,
    };
    let d = a.distance(&b);
    let col = Collector::new();
    let ncomp = if reference.is_some() { 3 } else { 2 };
    let out = integrate_omega_vec(
        |w| -> Result<Vec<f64>> {
            let f = im_cm_product(p1, p2, w)? * w * w;
            let g = col.take(g_for(geom, w, cyl, quad), |p| p)?;
            let mut v = vec![f * g.tr_g_gdag(), f * tr_g0_g0dag(w, d)];
            if let Some(r) = &reference {
                let g = col.take(g_for(r, w, cyl, quad), |p| p)?;
                v.push(f * g.tr_g_gdag());
            }
            Ok(v)
        },
        ncomp,
        p1.temperature,
        quad,
        band,
    )?;
    let convergence = col.finish(&out)?;
    Ok(HTResult {
        watts_per_vol2: ht_prefactor() * out.value[0],
        ratio_to_vacuum: out.value[0] / out.value[1],
        ratio_to_reference_angle: reference.map(|_| out.value[0] / out.value[2]),
        spectrum,
        convergence,
    })
}

/// `H(dphi) / H(0)` for one particle rotated around the cylinder at fixed
/// `h` and axial offset `dz`. The modal integrals are shared by all angles.
pub fn angular_ratio(
    p1: &ParticleSpec,
    p2: &ParticleSpec,
    h: f64,
    dz: f64,
    cyl: Option<&CylinderSpec>,
    quad: &QuadratureSpec,
    angles: &[f64],
) -> Result<(Vec<(f64, f64)>, ConvergenceReport)> {
    quad.validate()?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput("h must be positive".into()));
    }
    let cyl = active(cyl);
    let r = cyl.map_or(0.0, |c| c.radius) + h;
    let mut all = vec![0.0];
    all.extend_from_slice(angles);
    let p0 = CylPoint::new(r, 0.0, 0.0);
    if all.iter().any(|&a| CylPoint::new(r, a, dz).distance(&p0) == 0.0) {
        return Err(GreensError::Coincident.into());
    }
    let mut mats = vec![&p1.material, &p2.material];
    if let Some(c) = cyl {
        mats.push(&c.material);
    }
    let band = resonance_band(&mats);
    let col = Collector::new();
    let out = integrate_omega_vec(
        |w| -> Result<Vec<f64>> {
            let f = im_cm_product(p1, p2, w)? * w * w;
            let modal = match cyl {
                Some(c) => {
                    let mi = modal_integrals(r, r, dz, w, c, quad)?;
                    col.record(&mi.report);
                    Some(mi)
                }
                None => None,
            };
            all.iter()
                .map(|&a| {
                    let mut g = g0_cylindrical(&p0, &CylPoint::new(r, a, dz), w)?;
                    if let Some(mi) = &modal {
                        g = g.add(&mi.assemble(a));
                    }
                    Ok(f * g.tr_g_gdag())
                })
                .collect()
        },
        all.len(),
        p1.temperature,
        quad,
        band,
    )?;
    let rep = col.finish(&out)?;
    let ratios = angles.iter().zip(&out.value[1..]).map(|(&a, &v)| (a, v / out.value[0])).collect();
    Ok((ratios, rep))
}

/// `Tr Im G(r, r)` tabulated over frequency.
pub fn tr_im_g_spectrum(
    cyl: Option<&CylinderSpec>,
    h: f64,
    grid: &OmegaGrid,
    quad: &QuadratureSpec,
) -> Result<SpectralCurve> {
    grid.validate().map_err(Error::InvalidInput)?;
    let mut curve = spectral_curve("tr_im_g", grid, |w| -> Result<f64> { Ok(tr_im_g_at(cyl, h, w, quad)?.0) })?;
    curve.metadata.push(("h_m".into(), h.to_string()));
    Ok(curve)
}

/// `Tr(G G^dagger)` between the two particle positions, tabulated over frequency.
pub fn tr_gg_spectrum(
    geom: &HtGeometry,
    cyl: Option<&CylinderSpec>,
    grid: &OmegaGrid,
    quad: &QuadratureSpec,
) -> Result<SpectralCurve> {
    grid.validate().map_err(Error::InvalidInput)?;
    let mut curve =
        spectral_curve("tr_gg_dagger", grid, |w| -> Result<f64> { Ok(g_for(geom, w, cyl, quad)?.0.tr_g_gdag()) })?;
    curve.metadata.push(("geometry".into(), format!("{geom:?}")));
    Ok(curve)
}

/// Vacuum heat transfer at distance `d`, normalized by both volumes.
pub fn heat_transfer_vacuum(p1: &ParticleSpec, p2: &ParticleSpec, d: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidInput("d must be positive".into()));
    }
    let band = resonance_band(&[&p1.material, &p2.material]);
    let out = integrate_omega_vec(
        |w| -> Result<Vec<f64>> { Ok(vec![im_cm_product(p1, p2, w)? * w * w * tr_g0_g0dag(w, d)]) },
        1,
        p1.temperature,
        quad,
        band,
    )?;
    if !out.converged {
        return Err(Error::OmegaNotConverged { value: ht_prefactor() * out.value[0], error: out.error });
    }
    Ok(ht_prefactor() * out.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::K_B;
    use crate::materials::thermal_wavelength;
    use crate::quadrature::{planck_weight, GridScale};

    fn sic(radius: f64) -> ParticleSpec {
        ParticleSpec::new(radius, MaterialModel::sic(), 300.0).unwrap()
    }

    #[test]
    fn no_cylinder_ratio_is_one() {
        let q = QuadratureSpec::default();
        let p = sic(1e-8);
        let a = heat_radiation(&p, None, 1e-7, &q, None).unwrap();
        assert_eq!(a.ratio_to_vacuum, 1.0);
        assert_eq!(a.watts, heat_radiation_vacuum(&p, &q).unwrap());
        let vac = CylinderSpec::new(1e-7, MaterialModel::vacuum()).unwrap();
        let b = heat_radiation(&p, Some(&vac), 1e-7, &q, None).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vacuum_radiation_scales_with_volume() {
        let q = QuadratureSpec::default();
        let a = heat_radiation_vacuum(&sic(1e-8), &q).unwrap();
        let b = heat_radiation_vacuum(&sic(2e-8), &q).unwrap();
        assert!(a > 0.0);
        assert!((b / a - 8.0).abs() < 1e-12);
        let lossless = ParticleSpec::new(1e-8, MaterialModel::vacuum(), 300.0).unwrap();
        assert_eq!(heat_radiation_vacuum(&lossless, &q).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_radiation_matches_simpson_grid() {
        let q = QuadratureSpec { omega_rel_tol: 1e-9, ..Default::default() };
        let p = sic(1e-8);
        let got = heat_radiation_vacuum(&p, &q).unwrap();
        let s = K_B * 300.0 / HBAR;
        let (lo, hi) = (0.01 * s, 50.0 * s);
        let n = 400_000;
        let h = (hi - lo) / n as f64;
        let f = |w: f64| planck_weight(w, 300.0) * polarizability(&p, w).unwrap().im * tr_im_g0(w);
        let mut sum = f(lo) + f(hi);
        for i in 1..n {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + i as f64 * h);
        }
        let want = HR_PREFACTOR * sum * h / 3.0;
        assert!(((got - want) / want).abs() < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn vacuum_transfer_far_field_slope() {
        let q = QuadratureSpec::default();
        let p = sic(1e-8);
        let lt = thermal_wavelength(300.0);
        let ds: Vec<f64> = (0..5).map(|i| 3.0 * lt * 10f64.powf(i as f64 / 4.0)).collect();
        let hs: Vec<f64> = ds.iter().map(|&d| heat_transfer_vacuum(&p, &p, d, &q).unwrap()).collect();
        let xs: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 5.0, ys.iter().sum::<f64>() / 5.0);
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = num / den;
        assert!((slope + 2.0).abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn transfer_without_cylinder_is_vacuum() {
        let q = QuadratureSpec::default();
        let p = sic(1e-8);
        let geom = HtGeometry::Parallel { h: 1e-7, d: 1e-6 };
        let r = heat_transfer(&p, &p, &geom, None, &q, None).unwrap();
        let v = heat_transfer_vacuum(&p, &p, 1e-6, &q).unwrap();
        assert!((r.ratio_to_vacuum - 1.0).abs() < 1e-12);
        assert!(((r.watts_per_vol2 - v) / v).abs() < 1e-12);
        assert!(r.ratio_to_reference_angle.is_none());
    }

    #[test]
    fn transfer_is_per_volume() {
        let q = QuadratureSpec::default();
        let a = heat_transfer_vacuum(&sic(1e-8), &sic(1e-8), 1e-6, &q).unwrap();
        let b = heat_transfer_vacuum(&sic(3e-8), &sic(2e-8), 1e-6, &q).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_geometry() {
        let q = QuadratureSpec::default();
        let p = sic(1e-8);
        let cyl = CylinderSpec::new(1e-7, MaterialModel::pec()).unwrap();
        let same = HtGeometry::Angular { h: 1e-7, dphi: 0.0, dz: 0.0 };
        assert!(matches!(heat_transfer(&p, &p, &same, Some(&cyl), &q, None), Err(Error::Greens(GreensError::Coincident))));
        let neg = HtGeometry::Parallel { h: -1e-7, d: 1e-6 };
        assert!(matches!(heat_transfer(&p, &p, &neg, Some(&cyl), &q, None), Err(Error::InvalidInput(_))));
        assert!(heat_radiation(&p, Some(&cyl), 0.0, &q, None).is_err());
        assert!(heat_transfer_vacuum(&p, &p, 0.0, &q).is_err());
    }

    #[test]
    fn vacuum_spectrum_is_linear() {
        let q = QuadratureSpec::default();
        let grid = OmegaGrid { min: 5e13, max: 3.5e14, points: 7, scale: GridScale::Lin };
        let c = tr_im_g_spectrum(None, 1e-7, &grid, &q).unwrap();
        for (w, v) in c.omega.iter().zip(&c.value) {
            assert!((v - w / (2.0 * PI * C)).abs() < 1e-12 * v);
        }
        let one = OmegaGrid { min: 1e14, max: 1e14, points: 1, scale: GridScale::Lin };
        assert_eq!(tr_im_g_spectrum(None, 1e-7, &one, &q).unwrap().value.len(), 1);
    }

    #[test]
    fn perfect_conductor_enhances_radiation() {
        let q = QuadratureSpec { rel_tol: 1e-4, omega_rel_tol: 1e-4, ..Default::default() };
        let p = sic(1e-8);
        let cyl = CylinderSpec::new(1e-8, MaterialModel::pec()).unwrap();
        let r = heat_radiation(&p, Some(&cyl), 1e-7, &q, None).unwrap();
        assert!(r.ratio_to_vacuum > 15.0 && r.ratio_to_vacuum < 30.0, "{}", r.ratio_to_vacuum);
        let v = heat_radiation_vacuum(&p, &q).unwrap();
        assert!(((r.watts / v) / r.ratio_to_vacuum - 1.0).abs() < 1e-3);
    }
}
