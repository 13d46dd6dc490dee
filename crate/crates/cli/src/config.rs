//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use quantum_layers::eigensolver::{CountOptions, Refinement};
use quantum_layers::surface::{catalog, Surface};
use quantum_layers::variational::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Certify,
    Solve,
    Sweep,
    ProbeConjecture,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Plane {},
    PlaneChart {},
    GaussianBump {
        height: f64,
        width: f64,
    },
    Catenoid {
        waist: f64,
    },
    Paraboloid {
        p: f64,
    },
    SmoothedCone {
        theta: f64,
        sigma: f64,
    },
    Cylinder {
        radius: f64,
    },
    Sphere {
        radius: f64,
    },
    /// CSV with header `t,r,z`, relative to the config file.
    Tabulated {
        path: PathBuf,
    },
}

impl SurfaceSpec {
    pub fn build(&self, base: &Path) -> Result<Surface> {
        Ok(match self {
            SurfaceSpec::Plane {} => catalog::plane(),
            SurfaceSpec::PlaneChart {} => catalog::plane_chart(),
            SurfaceSpec::GaussianBump { height, width } => catalog::gaussian_bump(*height, *width)?,
            SurfaceSpec::Catenoid { waist } => catalog::catenoid(*waist)?,
            SurfaceSpec::Paraboloid { p } => catalog::paraboloid(*p)?,
            SurfaceSpec::SmoothedCone { theta, sigma } => catalog::smoothed_cone(*theta, *sigma)?,
            SurfaceSpec::Cylinder { radius } => catalog::cylinder(*radius)?,
            SurfaceSpec::Sphere { radius } => catalog::sphere(*radius)?,
            SurfaceSpec::Tabulated { path } => {
                let path = base.join(path);
                let (t, r, z) = read_profile(&path)?;
                let name = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("tabulated");
                catalog::tabulated(name, &t, &r, &z)?
            }
        })
    }
}

fn read_profile(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    #[derive(Deserialize)]
    struct Row {
        t: f64,
        r: f64,
        z: f64,
    }
    let mut rd = csv::Reader::from_path(path)
        .with_context(|| format!("profile table {}", path.display()))?;
    let (mut t, mut r, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for (i, row) in rd.deserialize::<Row>().enumerate() {
        let row = row.with_context(|| format!("{}: data row {}", path.display(), i + 1))?;
        t.push(row.t);
        r.push(row.r);
        z.push(row.z);
    }
    Ok((t, r, z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StrategyName {
    #[default]
    Auto,
    Basic,
    Deformed,
    Weighted,
}

impl From<StrategyName> for Strategy {
    fn from(s: StrategyName) -> Self {
        match s {
            StrategyName::Auto => Strategy::Auto,
            StrategyName::Basic => Strategy::Basic,
            StrategyName::Deformed => Strategy::Deformed,
            StrategyName::Weighted => Strategy::Weighted,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute tolerance for surface and form quadratures.
    pub quadrature: f64,
    /// Number of truncation radii in the growth analyses.
    pub radii: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-8,
            radii: 10,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifySection {
    pub strategy: StrategyName,
    pub n_max: u32,
}

impl Default for CertifySection {
    fn default() -> Self {
        Self {
            strategy: StrategyName::Auto,
            n_max: 12,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    /// Truncation length `S`.
    pub length: f64,
    pub m_max: u32,
    /// Meridian cells; defaults to ten per unit of `length`.
    pub n_s: Option<usize>,
    /// Transverse cells of each refinement, increasing.
    pub n_u: Vec<usize>,
    pub margin: f64,
    pub seed: u64,
}

impl Default for SolveSection {
    fn default() -> Self {
        let d = CountOptions::default();
        Self {
            length: 40.0,
            m_max: d.m_max,
            n_s: None,
            n_u: d.schedule.iter().map(|r| r.n_u).collect(),
            margin: d.margin,
            seed: d.seed,
        }
    }
}

impl SolveSection {
    pub fn options(&self) -> CountOptions {
        let n_s = self.n_s.unwrap_or((10.0 * self.length).ceil() as usize);
        let schedule = self
            .n_u
            .iter()
            .map(|&n_u| Refinement::new(self.length, n_s, n_u))
            .collect();
        CountOptions {
            margin: self.margin,
            seed: self.seed,
            ..CountOptions::new(self.m_max, schedule)
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// `half_width` or a numeric field of the surface table.
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Command run at every point.
    pub command: Command,
    #[serde(rename = "axis")]
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub surface: SurfaceSpec,
    pub half_width: f64,
    #[serde(default)]
    pub genus: u32,
    #[serde(default = "one")]
    pub ends: u32,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub certify: CertifySection,
    #[serde(default)]
    pub solve: SolveSection,
    pub sweep: Option<SweepSection>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base: PathBuf,
}

fn one() -> u32 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bail!("field `{name}` must be positive, got {v}")
            }
        };
        positive("half_width", self.half_width)?;
        positive("tolerances.quadrature", self.tolerances.quadrature)?;
        positive("solve.length", self.solve.length)?;
        positive("solve.margin", self.solve.margin)?;
        if self.ends == 0 {
            bail!("field `ends` must be at least 1 for a non-compact surface");
        }
        if self.solve.n_u.len() < 2 || self.solve.n_u.windows(2).any(|w| w[1] <= w[0]) {
            bail!("field `solve.n_u` must list at least two increasing grid sizes");
        }
        if let Some(sw) = &self.sweep {
            if sw.command == Command::Sweep {
                bail!("field `sweep.command` cannot itself be `sweep`");
            }
            if sw.axes.is_empty() || sw.axes.iter().any(|a| a.values.is_empty()) {
                bail!("field `sweep.axis` needs at least one axis with values");
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base.join(&self.output_dir)
    }

    pub fn build_surface(&self) -> Result<Surface> {
        self.surface.build(&self.base)
    }

    /// Copy with the named parameters replaced.
    pub fn with_overrides(&self, values: &[(&str, f64)]) -> Result<Self> {
        let mut out = self.clone();
        let mut table = toml::Table::try_from(&self.surface)?;
        for &(name, v) in values {
            if name == "half_width" {
                out.half_width = v;
            } else if table.contains_key(name) && name != "kind" {
                table.insert(name.to_string(), toml::Value::Float(v));
            } else {
                bail!("sweep axis `{name}` is neither `half_width` nor a numeric field of the surface");
            }
        }
        out.surface = table
            .try_into()
            .context("applying sweep overrides to the surface")?;
        out.validate()?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONE: &str = r#"
half_width = 1.0
[surface]
kind = "smoothed_cone"
theta = 0.7853981633974483
sigma = 1.2
"#;

    #[test]
    fn defaults_fill_in() {
        let c: RunConfig = toml::from_str(CONE).unwrap();
        c.validate().unwrap();
        assert_eq!((c.genus, c.ends), (0, 1));
        assert_eq!(c.solve.options().schedule.len(), 3);
        assert_eq!(c.solve.options().schedule[0].n_s, 400);
    }

    #[test]
    fn unknown_fields_report_their_location() {
        let bad = CONE.replace("sigma = 1.2", "sigma = 1.2\nradius = 3.0");
        let err = toml::from_str::<RunConfig>(&bad).unwrap_err().to_string();
        assert!(err.contains("radius") && err.contains("line"), "{err}");
    }

    #[test]
    fn overrides_touch_only_named_fields() {
        let c: RunConfig = toml::from_str(CONE).unwrap();
        let d = c
            .with_overrides(&[("theta", 0.5), ("half_width", 0.8)])
            .unwrap();
        assert_eq!(d.half_width, 0.8);
        assert!(
            matches!(d.surface, SurfaceSpec::SmoothedCone { theta, sigma } if theta == 0.5 && sigma == 1.2)
        );
        assert!(c.with_overrides(&[("width", 1.0)]).is_err());
    }
}
