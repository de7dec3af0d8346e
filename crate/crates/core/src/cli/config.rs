use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::em_core::{ExtendedState, FieldPoint, Grid1D, MediumSpec, SourceSpec, Vec3};
use crate::error::{Error, Result};
use crate::schemes::{BoundaryCondition, Gauge, InitialCondition, SchemeKind};

use super::csv::read_initial_condition;

const REQUIRED: [&str; 5] = ["domain", "nx", "dt", "t_end", "scheme"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    #[serde(default)]
    pub x0: f64,
    pub length: f64,
}

/// `"vacuum"`, `"eps=2+sin(x);mu=1"` or `{"eps": .., "mu": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MediumInput {
    Text(String),
    Spec(MediumSpec),
}

impl Default for MediumInput {
    fn default() -> Self {
        MediumInput::Spec(MediumSpec::vacuum())
    }
}

impl MediumInput {
    pub fn resolve(&self) -> Result<MediumSpec> {
        let spec = match self {
            MediumInput::Text(s) => s.parse()?,
            MediumInput::Spec(s) => *s,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BcConfig {
    Periodic,
    DirichletExact {
        #[serde(default)]
        gauge: Gauge,
    },
    /// Constant `(H1, H2, H3, E1, E2, E3)` at each end.
    DirichletFixed { left: [f64; 6], right: [f64; 6] },
}

impl Default for BcConfig {
    fn default() -> Self {
        BcConfig::DirichletExact { gauge: Gauge::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IcConfig {
    ExactPlaneWave {
        #[serde(default)]
        gauge: Gauge,
    },
    /// CSV with columns `x,H1,H2,H3,E1,E2,E3` (extra columns ignored; `V1..Q3`
    /// used when all twelve are present).
    Sampled { file: PathBuf },
}

impl Default for IcConfig {
    fn default() -> Self {
        IcConfig::ExactPlaneWave { gauge: Gauge::default() }
    }
}

fn default_directory() -> PathBuf {
    PathBuf::from("out")
}

fn default_stride() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub gnuplot: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            snapshot_stride: default_stride(),
            gnuplot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub domain: Domain,
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: SchemeKind,
    #[serde(default)]
    pub medium: MediumInput,
    #[serde(default)]
    pub source: SourceSpec,
    #[serde(default)]
    pub bc: BcConfig,
    #[serde(default)]
    pub initial_condition: IcConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

/// Reads, validates and resolves a configuration file. Relative paths inside
/// it are taken relative to the file's directory.
pub fn load_config(path: &Path) -> Result<SimulationConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config(&text, path)?;
    let base = path.parent().unwrap_or(Path::new(""));
    if let IcConfig::Sampled { file } = &mut cfg.initial_condition {
        if file.is_relative() {
            *file = base.join(&*file);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a configuration document without touching the file system.
pub fn parse_config(text: &str, path: &Path) -> Result<SimulationConfig> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Some(obj) = value.as_object() else {
        return Err(Error::Validation("configuration must be a JSON object".into()));
    };
    let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !obj.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(Error::Validation(format!(
            "missing required fields: {}",
            missing.join(", ")
        )));
    }
    let mut de = serde_json::Deserializer::from_str(text);
    SimulationConfig::deserialize(&mut de).map_err(|e| {
        let (line, column) = (e.line(), e.column());
        if e.is_data() {
            Error::Validation(format!("{e}"))
        } else {
            let (l, c) = if line == 0 { line_col(text, 0) } else { (line, column) };
            Error::Parse {
                path: path.to_path_buf(),
                line: l,
                column: c,
                message: e.to_string(),
            }
        }
    })
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive".into());
        }
        if !(self.domain.length > 0.0 && self.domain.length.is_finite()) {
            return bad("domain.length must be positive".into());
        }
        if !self.domain.x0.is_finite() {
            return bad("domain.x0 must be finite".into());
        }
        if self.nx < 8 {
            return bad(format!("nx must be at least 8 (got {})", self.nx));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be nonnegative".into());
        }
        let ratio = self.t_end / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return bad(format!("t_end/dt = {ratio} is not an integer"));
        }
        if self.output.snapshot_stride == 0 {
            return bad("output.snapshot_stride must be at least 1".into());
        }
        let medium = self.medium.resolve().map_err(|e| Error::Validation(format!("medium: {e}")))?;
        self.source.validate()?;
        if matches!(self.bc, BcConfig::Periodic) && self.nx.is_multiple_of(2) {
            return bad(format!("periodic grids need an odd nx (got {})", self.nx));
        }
        if let IcConfig::Sampled { file } = &self.initial_condition {
            if !file.is_file() {
                return bad(format!("initial_condition.file {} does not exist", file.display()));
            }
        }
        if self.needs_wave_constants() && medium.constants().is_none() {
            return bad("exact plane-wave data needs a constant medium".into());
        }
        Ok(())
    }

    fn needs_wave_constants(&self) -> bool {
        matches!(self.bc, BcConfig::DirichletExact { .. })
            || matches!(self.initial_condition, IcConfig::ExactPlaneWave { .. })
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.domain.x0, self.domain.length, self.nx, self.dt, self.steps())
    }

    pub fn medium_spec(&self) -> Result<MediumSpec> {
        self.medium.resolve()
    }

    fn wave_constants(&self) -> Result<(f64, f64)> {
        self.medium_spec()?
            .constants()
            .ok_or_else(|| Error::Validation("exact plane-wave data needs a constant medium".into()))
    }

    /// Whether the plane wave is the exact solution of this configuration.
    pub fn has_exact_solution(&self) -> bool {
        matches!(self.initial_condition, IcConfig::ExactPlaneWave { .. })
            && self.source.is_zero()
            && !matches!(self.bc, BcConfig::DirichletFixed { .. })
            && self.medium_spec().map(|m| m.is_constant()).unwrap_or(false)
    }

    pub fn exact_fields(&self, x: f64, t: f64) -> Result<FieldPoint> {
        let (eps, mu) = self.wave_constants()?;
        crate::em_core::exact_plane_wave(x, t, eps, mu)
    }

    pub fn boundary_condition(&self) -> Result<BoundaryCondition> {
        Ok(match &self.bc {
            BcConfig::Periodic => BoundaryCondition::Periodic,
            BcConfig::DirichletExact { gauge } => {
                let (eps, mu) = self.wave_constants()?;
                BoundaryCondition::DirichletExact { eps, mu, gauge: *gauge }
            }
            BcConfig::DirichletFixed { left, right } => {
                let grid = self.grid()?;
                let medium = self.medium_spec()?.sample(&grid)?;
                let levels = grid.nt() + 1;
                // constant fields with potentials in the zero gauge
                let series = |v: &[f64; 6], right: bool| -> Vec<ExtendedState> {
                    let (eps, mu) = medium.node_values(if right { grid.nx() } else { 0 }, false);
                    let h = Vec3::new(v[0], v[1], v[2]);
                    let e = Vec3::new(v[3], v[4], v[5]);
                    (0..levels)
                        .map(|j| {
                            let t = grid.time(j);
                            ExtendedState {
                                h,
                                e,
                                v: h * t,
                                u: e * t,
                                p: h * mu,
                                q: e * eps,
                            }
                        })
                        .collect()
                };
                BoundaryCondition::DirichletFixed {
                    left: series(left, false),
                    right: series(right, true),
                }
            }
        })
    }

    pub fn initial_condition(&self, grid: &Grid1D) -> Result<InitialCondition> {
        match &self.initial_condition {
            IcConfig::ExactPlaneWave { gauge } => {
                let (eps, mu) = self.wave_constants()?;
                Ok(InitialCondition::ExactPlaneWave { eps, mu, gauge: *gauge })
            }
            IcConfig::Sampled { file } => {
                let (fields, aux) = read_initial_condition(file)?;
                if fields.len() != grid.nodes() {
                    return Err(Error::Validation(format!(
                        "{} has {} rows, the grid has {} nodes",
                        file.display(),
                        fields.len(),
                        grid.nodes()
                    )));
                }
                Ok(InitialCondition::Sampled { fields, aux })
            }
        }
    }
}
