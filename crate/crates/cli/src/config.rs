//! Sweep configuration: TOML schema, per-command presets and validation.

use anyhow::{bail, ensure, Context, Result};
use cylheat::materials::{MaterialKind, MaterialModel};
use cylheat::quadrature::{GridScale, OmegaGrid, QuadratureSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    HrSweep,
    HtParallel,
    HtAngular,
    HtPerpendicular,
    Spectrum,
    Point,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::HrSweep => "hr-sweep",
            Command::HtParallel => "ht-parallel",
            Command::HtAngular => "ht-angular",
            Command::HtPerpendicular => "ht-perpendicular",
            Command::Spectrum => "spectrum",
            Command::Point => "point",
        }
    }
}

/// What a `point` run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Hr,
    HtParallel,
    HtAngular,
    HtPerpendicular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumQuantity {
    TrImG,
    TrGgDagger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A preset name (`sic`, `gold`, `pec`, `vacuum`) or an inline model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Named(String),
    Inline(MaterialModel),
}

impl MaterialSpec {
    pub fn named(s: &str) -> Self {
        MaterialSpec::Named(s.to_string())
    }

    pub fn model(&self) -> Result<MaterialModel> {
        match self {
            MaterialSpec::Named(n) => MaterialModel::preset(n).with_context(|| format!("unknown material preset `{n}`")),
            MaterialSpec::Inline(m) => {
                m.validate()?;
                Ok(*m)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            MaterialSpec::Named(n) => n.clone(),
            MaterialSpec::Inline(m) => match m.kind {
                MaterialKind::Lorentz { .. } => "lorentz".into(),
                MaterialKind::Drude { .. } => "drude".into(),
                MaterialKind::PerfectConductor => "pec".into(),
                MaterialKind::Vacuum => "vacuum".into(),
            },
        }
    }
}

/// A single value, an explicit list, or a `{min, max, points, scale}` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeSpec {
    Single(f64),
    List(Vec<f64>),
    Grid {
        min: f64,
        max: f64,
        points: usize,
        #[serde(default = "lin")]
        scale: GridScale,
    },
}

fn lin() -> GridScale {
    GridScale::Lin
}

impl RangeSpec {
    pub fn grid(min: f64, max: f64, points: usize, scale: GridScale) -> Self {
        RangeSpec::Grid { min, max, points, scale }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            RangeSpec::Single(v) => vec![*v],
            RangeSpec::List(v) => v.clone(),
            RangeSpec::Grid { min, max, points, scale } => {
                OmegaGrid { min: *min, max: *max, points: *points, scale: *scale }.values()
            }
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        match self {
            RangeSpec::Single(v) => ensure!(v.is_finite(), "{name}: value must be finite"),
            RangeSpec::List(v) => {
                ensure!(!v.is_empty(), "{name}: list is empty");
                ensure!(v.iter().all(|x| x.is_finite()), "{name}: values must be finite");
            }
            RangeSpec::Grid { min, max, points, scale } => {
                ensure!(*points >= 1, "{name}: points must be at least 1");
                ensure!(min.is_finite() && max.is_finite() && min <= max, "{name}: need min <= max");
                ensure!(*scale == GridScale::Lin || *min > 0.0, "{name}: log grid needs min > 0");
                ensure!(*points == 1 || max > min, "{name}: several points need max > min");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub material: MaterialSpec,
    /// Particle radius, m. Only the heat radiation depends on it.
    pub radius: f64,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self { material: MaterialSpec::named("sic"), radius: 1e-8 }
    }
}

/// Swept geometry, SI units. Which entries are needed depends on the command.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Cylinder radius.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<RangeSpec>,
    /// Distance of the particles from the cylinder surface.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<RangeSpec>,
    /// Axial separation in the parallel geometry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<RangeSpec>,
    /// Rotation angle, rad.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dphi: Option<RangeSpec>,
    /// Axial offset in the angular geometry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dz: Option<RangeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub quantity: SpectrumQuantity,
    pub omega: OmegaGrid,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Observable>,
    /// Temperature of the emitting particle, K.
    #[serde(default = "room_temperature")]
    pub temperature: f64,
    /// Cylinder materials; every geometry point is evaluated for each.
    pub materials: Vec<MaterialSpec>,
    #[serde(default)]
    pub particle: ParticleConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub quad: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn room_temperature() -> f64 {
    300.0
}

fn materials(names: &[&str]) -> Vec<MaterialSpec> {
    names.iter().map(|n| MaterialSpec::named(n)).collect()
}

fn one(v: f64) -> Option<RangeSpec> {
    Some(RangeSpec::Single(v))
}

impl SweepConfig {
    /// Built-in configuration of each command.
    pub fn preset(command: Command) -> Self {
        let mut c = SweepConfig {
            command: Some(command),
            observable: None,
            temperature: room_temperature(),
            materials: materials(&["sic", "gold", "pec"]),
            particle: ParticleConfig::default(),
            geometry: GeometryConfig::default(),
            quad: QuadratureSpec::default(),
            spectrum: None,
            output: OutputConfig::default(),
        };
        let g = &mut c.geometry;
        match command {
            Command::HrSweep => {
                g.h = Some(RangeSpec::List(vec![1e-7, 8e-7]));
                g.radius = Some(RangeSpec::grid(1e-9, 1e-5, 25, GridScale::Log));
            }
            Command::HtParallel => {
                g.radius = one(1e-7);
                g.h = one(1e-7);
                g.d = Some(RangeSpec::grid(1e-6, 1e-2, 17, GridScale::Log));
            }
            Command::HtAngular => {
                g.radius = one(1e-7);
                g.h = one(1e-7);
                g.dz = one(1e-4);
                g.dphi = Some(RangeSpec::grid(0.0, 2.0 * PI, 37, GridScale::Lin));
            }
            Command::HtPerpendicular => {
                g.h = one(1e-7);
                g.radius = Some(RangeSpec::grid(1e-9, 1e-6, 13, GridScale::Log));
            }
            Command::Spectrum => {
                c.materials = materials(&["vacuum", "sic", "gold", "pec"]);
                g.radius = one(1e-7);
                g.h = one(1e-7);
                c.spectrum = Some(SpectrumConfig {
                    quantity: SpectrumQuantity::TrImG,
                    omega: OmegaGrid { min: 5e13, max: 3.5e14, points: 400, scale: GridScale::Lin },
                });
            }
            Command::Point => {
                c.observable = Some(Observable::Hr);
                c.materials = materials(&["sic"]);
                g.radius = one(1e-7);
                g.h = one(1e-7);
            }
        }
        c
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of everything that affects the data columns.
    pub fn hash(&self) -> Result<String> {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        let digest = Sha256::digest(c.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn command(&self) -> Command {
        self.command.unwrap_or(Command::Point)
    }

    /// The observable a run evaluates, `point` runs included.
    pub fn observable(&self) -> Option<Observable> {
        match self.command() {
            Command::HrSweep => Some(Observable::Hr),
            Command::HtParallel => Some(Observable::HtParallel),
            Command::HtAngular => Some(Observable::HtAngular),
            Command::HtPerpendicular => Some(Observable::HtPerpendicular),
            Command::Spectrum => None,
            Command::Point => self.observable,
        }
    }

    /// Ranges that the current command reads, by name.
    pub fn required_ranges(&self) -> Vec<(&'static str, Option<&RangeSpec>)> {
        let g = &self.geometry;
        let mut out = vec![("radius", g.radius.as_ref()), ("h", g.h.as_ref())];
        match self.observable() {
            Some(Observable::HtParallel) => out.push(("d", g.d.as_ref())),
            Some(Observable::HtAngular) => {
                out.push(("dz", g.dz.as_ref()));
                out.push(("dphi", g.dphi.as_ref()));
            }
            Some(Observable::Hr | Observable::HtPerpendicular) => {}
            None => {
                if matches!(&self.spectrum, Some(s) if s.quantity == SpectrumQuantity::TrGgDagger) {
                    out.push(("d", g.d.as_ref()));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let Some(command) = self.command else { bail!("no command given") };
        ensure!(self.temperature.is_finite() && self.temperature > 0.0, "temperature must be positive");
        ensure!(!self.materials.is_empty(), "materials list is empty");
        for m in &self.materials {
            m.model()?;
        }
        let pm = self.particle.material.model()?;
        ensure!(
            matches!(pm.kind, MaterialKind::Lorentz { .. } | MaterialKind::Drude { .. }),
            "particle material must be absorbing (lorentz or drude)"
        );
        ensure!(self.particle.radius > 0.0 && self.particle.radius.is_finite(), "particle radius must be positive");
        self.quad.validate().context("quad")?;
        match command {
            Command::Point => ensure!(self.observable.is_some(), "point needs an `observable`"),
            _ => ensure!(self.observable.is_none(), "`observable` is only used by point"),
        }
        if command == Command::Spectrum {
            let s = self.spectrum.as_ref().context("spectrum needs a [spectrum] table")?;
            s.omega.validate().map_err(anyhow::Error::msg).context("spectrum.omega")?;
        }
        for (name, r) in self.required_ranges() {
            let r = r.with_context(|| format!("geometry.{name} is required by {}", command.name()))?;
            r.validate(&format!("geometry.{name}"))?;
            let v = r.values();
            let positive = name != "dphi" && name != "dz";
            ensure!(!positive || v.iter().all(|&x| x > 0.0), "geometry.{name} must be positive");
            if command == Command::Point {
                ensure!(v.len() == 1, "point needs a single value for geometry.{name}");
            }
        }
        if command == Command::Point {
            ensure!(self.materials.len() == 1, "point needs a single material");
        }
        Ok(())
    }

    pub fn range(&self, name: &str) -> Vec<f64> {
        let g = &self.geometry;
        let r = match name {
            "radius" => &g.radius,
            "h" => &g.h,
            "d" => &g.d,
            "dphi" => &g.dphi,
            "dz" => &g.dz,
            _ => &None,
        };
        r.as_ref().map(RangeSpec::values).unwrap_or_default()
    }
}
