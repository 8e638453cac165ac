//! Expands a configuration into evaluation points and runs them.

use crate::config::{Observable, SpectrumQuantity, SweepConfig};
use crate::output::{Cell, Row, Table};
use anyhow::Result;
use cylheat::greens::{tr_g0_g0dag, tr_im_g0, ConvergenceReport, GreensError};
use cylheat::materials::{CylinderSpec, ParticleSpec};
use cylheat::observables::{angular_ratio, g_for, heat_radiation, heat_transfer, tr_im_g_at, HtGeometry};
use cylheat::quadrature::QuadratureSpec;
use rayon::prelude::*;
use std::time::Instant;

/// One geometry point; angular and spectrum points expand into several rows.
#[derive(Debug, Clone)]
struct Job {
    material: usize,
    radius: f64,
    h: f64,
    d: Option<f64>,
    dz: Option<f64>,
}

struct Ctx<'a> {
    cfg: &'a SweepConfig,
    particle: ParticleSpec,
    quad: QuadratureSpec,
}

fn expand(cfg: &SweepConfig) -> Vec<Job> {
    let (radii, hs) = (cfg.range("radius"), cfg.range("h"));
    let (ds, dzs) = (cfg.range("d"), cfg.range("dz"));
    let opt = |v: Vec<f64>| if v.is_empty() { vec![None] } else { v.into_iter().map(Some).collect() };
    let (ds, dzs) = match cfg.observable() {
        Some(Observable::HtParallel) => (opt(ds), vec![None]),
        Some(Observable::HtAngular) => (vec![None], opt(dzs)),
        Some(_) => (vec![None], vec![None]),
        None => (opt(ds), vec![None]),
    };
    let mut jobs = Vec::new();
    for material in 0..cfg.materials.len() {
        // Heat radiation and perpendicular sweeps run over R fastest.
        let r_inner = matches!(cfg.observable(), Some(Observable::Hr | Observable::HtPerpendicular));
        let pairs: Vec<(f64, f64)> = if r_inner {
            hs.iter().flat_map(|&h| radii.iter().map(move |&r| (r, h))).collect()
        } else {
            radii.iter().flat_map(|&r| hs.iter().map(move |&h| (r, h))).collect()
        };
        for &(radius, h) in &pairs {
            for &d in &ds {
                for &dz in &dzs {
                    jobs.push(Job { material, radius, h, d, dz });
                }
            }
        }
    }
    jobs
}

pub fn run(cfg: &SweepConfig) -> Result<Table> {
    let particle = ParticleSpec::new(cfg.particle.radius, cfg.particle.material.model()?, cfg.temperature)?;
    let ctx = Ctx { cfg, particle, quad: cfg.quad };
    let rows: Vec<Vec<Row>> = expand(cfg).par_iter().map(|job| evaluate(&ctx, job)).collect();
    Ok(Table { rows: rows.into_iter().flatten().collect() })
}

fn prefix(ctx: &Ctx, job: &Job) -> Row {
    vec![
        ("particle_material", Cell::Text(ctx.cfg.particle.material.label())),
        ("particle_radius_m", Cell::Num(ctx.particle.radius)),
        ("temperature_K", Cell::Num(ctx.cfg.temperature)),
        ("cylinder_material", Cell::Text(ctx.cfg.materials[job.material].label())),
        ("R_m", Cell::Num(job.radius)),
        ("h_m", Cell::Num(job.h)),
    ]
}

fn num_or_empty(v: Option<f64>) -> Cell {
    v.map_or(Cell::Empty, Cell::Num)
}

/// Trailing columns shared by every command.
fn status(row: &mut Row, rep: Option<&ConvergenceReport>, err: Option<String>, t0: Instant) {
    row.push(("est_rel_error", rep.map_or(Cell::Empty, |r| Cell::Num(r.est_rel_error))));
    row.push(("n_used", rep.map_or(Cell::Empty, |r| Cell::Int(r.n_used))));
    row.push(("flags", Cell::Text(rep.map(|r| r.flags.join(";")).unwrap_or_default())));
    row.push(("error", err.map_or(Cell::Empty, Cell::Text)));
    row.push(("wall_time_s", Cell::Num(t0.elapsed().as_secs_f64())));
}

fn evaluate(ctx: &Ctx, job: &Job) -> Vec<Row> {
    let t0 = Instant::now();
    let cyl = match ctx.cfg.materials[job.material].model().and_then(|m| Ok(CylinderSpec::new(job.radius, m)?)) {
        Ok(c) => c,
        Err(e) => {
            let mut row = prefix(ctx, job);
            status(&mut row, None, Some(e.to_string()), t0);
            return vec![row];
        }
    };
    match ctx.cfg.observable() {
        Some(Observable::Hr) => vec![hr_row(ctx, job, &cyl, t0)],
        Some(Observable::HtParallel) => {
            let d = job.d.unwrap_or_default();
            vec![ht_row(ctx, job, &cyl, HtGeometry::Parallel { h: job.h, d }, d, t0)]
        }
        Some(Observable::HtPerpendicular) => {
            let d = 2.0 * (job.radius + job.h);
            vec![ht_row(ctx, job, &cyl, HtGeometry::Perpendicular { h: job.h }, d, t0)]
        }
        Some(Observable::HtAngular) => angular_rows(ctx, job, &cyl, t0),
        None => spectrum_rows(ctx, job, &cyl),
    }
}

fn hr_row(ctx: &Ctx, job: &Job, cyl: &CylinderSpec, t0: Instant) -> Row {
    let mut row = prefix(ctx, job);
    let res = heat_radiation(&ctx.particle, Some(cyl), job.h, &ctx.quad, None);
    let ok = res.as_ref().ok();
    row.push(("hr_W", num_or_empty(ok.map(|r| r.watts))));
    row.push(("ratio_to_vacuum", num_or_empty(ok.map(|r| r.ratio_to_vacuum))));
    // Reference column for a flat substrate; not computed.
    row.push(("plate_limit_ratio", Cell::Empty));
    status(&mut row, ok.map(|r| &r.convergence), res.as_ref().err().map(|e| e.to_string()), t0);
    row
}

fn ht_row(ctx: &Ctx, job: &Job, cyl: &CylinderSpec, geom: HtGeometry, d: f64, t0: Instant) -> Row {
    let mut row = prefix(ctx, job);
    row.push(("d_m", Cell::Num(d)));
    let res = heat_transfer(&ctx.particle, &ctx.particle, &geom, Some(cyl), &ctx.quad, None);
    let ok = res.as_ref().ok();
    row.push(("ht_per_vol2_W_per_m6", num_or_empty(ok.map(|r| r.watts_per_vol2))));
    row.push(("ratio_to_vacuum", num_or_empty(ok.map(|r| r.ratio_to_vacuum))));
    status(&mut row, ok.map(|r| &r.convergence), res.as_ref().err().map(|e| e.to_string()), t0);
    row
}

fn angular_rows(ctx: &Ctx, job: &Job, cyl: &CylinderSpec, t0: Instant) -> Vec<Row> {
    let dz = job.dz.unwrap_or_default();
    let angles = ctx.cfg.range("dphi");
    let res = angular_ratio(&ctx.particle, &ctx.particle, job.h, dz, Some(cyl), &ctx.quad, &angles);
    let r = job.radius + job.h;
    angles
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut row = prefix(ctx, job);
            row.push(("dz_m", Cell::Num(dz)));
            row.push(("dphi_rad", Cell::Num(a)));
            let chord = 2.0 * r * (0.5 * a).sin();
            row.push(("d_m", Cell::Num(chord.hypot(dz))));
            let ok = res.as_ref().ok();
            row.push(("ratio_to_zero_angle", num_or_empty(ok.map(|(v, _)| v[i].1))));
            status(&mut row, ok.map(|(_, rep)| rep), res.as_ref().err().map(|e| e.to_string()), t0);
            row
        })
        .collect()
}

/// Keeps a non-converged value, flagged, instead of failing the row.
fn lenient<T>(
    res: std::result::Result<(T, ConvergenceReport), GreensError>,
    wrap: impl FnOnce(cylheat::greens::GreensTensor) -> T,
) -> std::result::Result<(T, ConvergenceReport), GreensError> {
    match res {
        Err(GreensError::NotConverged { partial, mut report }) => {
            report.flags.push("greens_not_converged".into());
            Ok((wrap(*partial), report))
        }
        other => other,
    }
}

fn spectrum_rows(ctx: &Ctx, job: &Job, cyl: &CylinderSpec) -> Vec<Row> {
    let Some(spec) = &ctx.cfg.spectrum else { return Vec::new() };
    let omegas = spec.omega.values();
    omegas
        .par_iter()
        .map(|&w| {
            let t0 = Instant::now();
            let mut row = prefix(ctx, job);
            let (res, reference) = match spec.quantity {
                SpectrumQuantity::TrImG => (
                    lenient(tr_im_g_at(Some(cyl), job.h, w, &ctx.quad), |p| tr_im_g0(w) + p.m[0][0].im),
                    tr_im_g0(w),
                ),
                SpectrumQuantity::TrGgDagger => {
                    let d = job.d.unwrap_or_default();
                    row.push(("d_m", Cell::Num(d)));
                    let geom = HtGeometry::Parallel { h: job.h, d };
                    let res = lenient(g_for(&geom, w, Some(cyl), &ctx.quad), |p| p).map(|(g, r)| (g.tr_g_gdag(), r));
                    (res, tr_g0_g0dag(w, d))
                }
            };
            let name = match spec.quantity {
                SpectrumQuantity::TrImG => "tr_im_g_per_m",
                SpectrumQuantity::TrGgDagger => "tr_gg_dagger_per_m2",
            };
            row.push(("omega_rad_per_s", Cell::Num(w)));
            let ok = res.as_ref().ok();
            row.push((name, num_or_empty(ok.map(|(v, _)| *v))));
            row.push(("ratio_to_vacuum", num_or_empty(ok.map(|(v, _)| v / reference))));
            status(&mut row, ok.map(|(_, r)| r), res.as_ref().err().map(|e| e.to_string()), t0);
            row
        })
        .collect()
}
