//! TOML experiment configuration.
//!
//! Every field has a default, so a config only needs the keys it changes.
//! Command-line overrides are applied to the parsed TOML table before it
//! is deserialized, with dotted keys such as `radon.alpha=0.02`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavetomo_core::phantoms::RECON_HALF_WIDTH;
use wavetomo_core::sources::default_cutoff;
use wavetomo_core::specdiff::worked::{WorkedParams, DEFAULT_SAMPLES};
use wavetomo_core::tomo::{angle_range, uniform_offsets};
use wavetomo_core::{PhantomSpec, PhantomTerm, PointwiseConfig, RadonReconConfig, SpaceTimeGrid, SpatialGrid};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Forward,
    Radon,
    Pointwise,
    Fbp,
    SpecdiffDemo,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Forward => "forward",
            Mode::Radon => "radon",
            Mode::Pointwise => "pointwise",
            Mode::Fbp => "fbp",
            Mode::SpecdiffDemo => "specdiff-demo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_phantom")]
    pub phantom: PhantomConfig,
    #[serde(default)]
    pub radon: RadonSection,
    #[serde(default)]
    pub pointwise: PointwiseSection,
    #[serde(default)]
    pub forward: ForwardSection,
    #[serde(default)]
    pub fbp: FbpSection,
    #[serde(default)]
    pub specdiff: SpecdiffSection,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_phantom() -> PhantomConfig {
    PhantomConfig { preset: Some("example1".into()), terms: Vec::new() }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// `[a1, b1, a2, b2]`.
    pub domain: [f64; 4],
    pub n1: usize,
    pub n2: usize,
    pub t_final: f64,
    pub nt: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { domain: [-0.5, 0.5, -0.5, 0.5], n1: 80, n2: 80, t_final: 3.0, nt: 1500 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<SpaceTimeGrid> {
        let [a1, b1, a2, b2] = self.domain;
        let space = SpatialGrid::new(a1, b1, a2, b2, self.n1, self.n2).map_err(CliError::core("validate"))?;
        SpaceTimeGrid::new(space, self.t_final, self.nt).map_err(CliError::core("validate"))
    }
}

/// Either a named preset or an explicit list of terms. Example 1 when the
/// section is missing; no terms at all is the zero potential.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhantomConfig {
    pub preset: Option<String>,
    pub terms: Vec<PhantomTerm>,
}

impl PhantomConfig {
    pub fn build(&self) -> Result<PhantomSpec> {
        match (&self.preset, self.terms.is_empty()) {
            (Some(_), false) => Err(CliError::Config("phantom: give either `preset` or `terms`, not both".into())),
            (Some(name), true) => PhantomSpec::preset(name)
                .ok_or_else(|| CliError::Config(format!("phantom: unknown preset {name:?}"))),
            (None, _) => Ok(PhantomSpec::new(self.terms.clone())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AngleRange {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Default for AngleRange {
    fn default() -> Self {
        Self { start: 0.0, step: 1.0, count: 180 }
    }
}

impl AngleRange {
    pub fn values(&self) -> Vec<f64> {
        angle_range(self.start, self.step, self.count)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OffsetRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for OffsetRange {
    fn default() -> Self {
        Self { min: -0.4, max: 0.4, count: 63 }
    }
}

impl OffsetRange {
    pub fn values(&self) -> Vec<f64> {
        uniform_offsets(self.min, self.max, self.count)
    }
}

/// Square grid on which images are reconstructed and compared.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconWindow {
    pub half_width: f64,
    pub n: usize,
}

impl Default for ReconWindow {
    fn default() -> Self {
        Self { half_width: RECON_HALF_WIDTH, n: 44 }
    }
}

impl ReconWindow {
    pub fn build(&self) -> Result<SpatialGrid> {
        SpatialGrid::centered_square(self.half_width, self.n).map_err(CliError::core("validate"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadonSection {
    pub eps: f64,
    pub n_eps: usize,
    pub tau: f64,
    /// Cutoff half-width; `5 / sqrt(tau)` when absent.
    pub h: Option<f64>,
    pub alpha: f64,
    pub window: f64,
    pub angles: AngleRange,
    pub offsets: OffsetRange,
    pub noise_sigma: f64,
    pub strict_window: bool,
    pub recon: ReconWindow,
    /// Keep measured traces under `<output>/cache`. One trace holds
    /// `nt x boundary nodes` doubles, so this is off by default.
    pub cache: bool,
}

impl Default for RadonSection {
    fn default() -> Self {
        Self {
            eps: 1.5,
            n_eps: 16,
            tau: 700.0,
            h: None,
            alpha: 0.01,
            window: wavetomo_core::specdiff::DEFAULT_WINDOW,
            angles: AngleRange::default(),
            offsets: OffsetRange::default(),
            noise_sigma: 0.02,
            strict_window: false,
            recon: ReconWindow::default(),
            cache: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointwiseSection {
    pub recon: ReconWindow,
    pub eps: f64,
    pub tau: f64,
    pub h: Option<f64>,
    pub theta_deg: f64,
    pub t0: Option<f64>,
    pub noise_sigma: f64,
}

impl Default for PointwiseSection {
    fn default() -> Self {
        Self {
            recon: ReconWindow::default(),
            eps: 0.1,
            tau: 700.0,
            h: None,
            theta_deg: 45.0,
            t0: None,
            noise_sigma: 0.02,
        }
    }
}

/// Single forward solve with the plane wave `eps * H1` as Dirichlet data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForwardSection {
    pub theta_deg: f64,
    pub eps: f64,
    pub tau: f64,
    pub h: Option<f64>,
    /// Focus time; `T/2` when absent.
    pub t0: Option<f64>,
    pub power: u32,
    pub noise_sigma: f64,
}

impl Default for ForwardSection {
    fn default() -> Self {
        Self { theta_deg: 0.0, eps: 1.5, tau: 700.0, h: None, t0: None, power: 3, noise_sigma: 0.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FbpSection {
    /// Sinogram CSV to invert; the phantom's oracle sinogram when absent.
    pub sinogram: Option<PathBuf>,
    pub angles: AngleRange,
    pub offsets: OffsetRange,
    pub recon: ReconWindow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePreset {
    High,
    Low,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpecdiffSection {
    pub noise: NoisePreset,
    /// Overrides of the preset filter settings.
    pub noise_std: Option<f64>,
    pub first_alpha: Option<f64>,
    pub first_xi_max: Option<f64>,
    pub second_alpha: Option<f64>,
    pub second_xi_max: Option<f64>,
    pub window: Option<f64>,
    pub samples: usize,
    pub seeds: u64,
}

impl Default for SpecdiffSection {
    fn default() -> Self {
        Self {
            noise: NoisePreset::High,
            noise_std: None,
            first_alpha: None,
            first_xi_max: None,
            second_alpha: None,
            second_xi_max: None,
            window: None,
            samples: DEFAULT_SAMPLES,
            seeds: 20,
        }
    }
}

impl SpecdiffSection {
    pub fn params(&self) -> WorkedParams {
        let base = match self.noise {
            NoisePreset::High => WorkedParams::high_noise(),
            NoisePreset::Low => WorkedParams::low_noise(),
        };
        WorkedParams {
            noise_std: self.noise_std.unwrap_or(base.noise_std),
            first_alpha: self.first_alpha.unwrap_or(base.first_alpha),
            first_xi_max: self.first_xi_max.unwrap_or(base.first_xi_max),
            second_alpha: self.second_alpha.unwrap_or(base.second_alpha),
            second_xi_max: self.second_xi_max.unwrap_or(base.second_xi_max),
            window: self.window.unwrap_or(base.window),
        }
    }
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            seed: 0,
            workers: 0,
            output: default_output(),
            grid: GridConfig::default(),
            phantom: default_phantom(),
            radon: RadonSection::default(),
            pointwise: PointwiseSection::default(),
            forward: ForwardSection::default(),
            fbp: FbpSection::default(),
            specdiff: SpecdiffSection::default(),
        }
    }

    pub fn radon_config(&self) -> Result<RadonReconConfig> {
        let r = &self.radon;
        Ok(RadonReconConfig {
            grid: self.grid.build()?,
            phantom: self.phantom.build()?,
            power: 3,
            eps: r.eps,
            n_eps: r.n_eps,
            tau: r.tau,
            h: r.h.unwrap_or_else(|| default_cutoff(r.tau)),
            alpha: r.alpha,
            window: r.window,
            angles_deg: r.angles.values(),
            offsets: r.offsets.values(),
            noise_sigma: r.noise_sigma,
            seed: self.seed,
            strict_window: r.strict_window,
        })
    }

    pub fn pointwise_config(&self) -> Result<PointwiseConfig> {
        let p = &self.pointwise;
        Ok(PointwiseConfig {
            grid: self.grid.build()?,
            phantom: self.phantom.build()?,
            power: 3,
            recon: p.recon.build()?,
            eps: p.eps,
            tau: p.tau,
            h: p.h.unwrap_or_else(|| default_cutoff(p.tau)),
            theta_deg: p.theta_deg,
            t0: p.t0,
            noise_sigma: p.noise_sigma,
            seed: self.seed,
        })
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::Radon => {
                self.radon_config()?.validate().map_err(CliError::core("validate"))?;
                self.radon.recon.build()?;
                if self.radon.angles.count < 2 {
                    return Err(CliError::Config("radon: backprojection needs at least two angles".into()));
                }
            }
            Mode::Pointwise => self.pointwise_config()?.validate().map_err(CliError::core("validate"))?,
            Mode::Forward => {
                let grid = self.grid.build()?;
                grid.check_cfl().map_err(CliError::core("validate"))?;
                self.phantom.build()?.validate(&grid.space).map_err(CliError::core("validate"))?;
                let f = &self.forward;
                if f.power < 2 {
                    return Err(CliError::Config(format!("forward.power must be at least 2, got {}", f.power)));
                }
                if !(f.tau > 0.0) || !(f.noise_sigma >= 0.0) {
                    return Err(CliError::Config("forward: tau must be positive and noise_sigma >= 0".into()));
                }
            }
            Mode::Fbp => {
                self.fbp.recon.build()?;
                if self.fbp.sinogram.is_none() && (self.fbp.angles.count < 2 || self.fbp.offsets.count < 2) {
                    return Err(CliError::Config("fbp: need at least two angles and two offsets".into()));
                }
                if self.fbp.sinogram.is_none() {
                    let grid = self.grid.build()?;
                    self.phantom.build()?.validate(&grid.space).map_err(CliError::core("validate"))?;
                }
            }
            Mode::SpecdiffDemo => {
                let s = &self.specdiff;
                if s.samples < 4 || s.seeds == 0 {
                    return Err(CliError::Config("specdiff: need samples >= 4 and seeds >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// Reads a TOML config and applies `key=value` overrides.
pub fn load(path: Option<&Path>, mode: Mode, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(CliError::io(p))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Parse { path: p.into(), message: e.to_string() })?
        }
        None => toml::Table::new(),
    };
    if let Some(m) = table.get("mode").and_then(|v| v.as_str()) {
        if m != mode.name() {
            return Err(CliError::Config(format!("config is for mode {m:?}, not {:?}", mode.name())));
        }
    }
    table.insert("mode".into(), toml::Value::String(mode.name().into()));
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    let origin = path.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("<defaults>"));
    table.try_into().map_err(|e: toml::de::Error| CliError::Parse { path: origin, message: e.to_string() })
}

/// Sets `a.b.c = value`, parsing `value` as a TOML value and falling back
/// to a plain string.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {item:?} is not of the form key=value")))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("override key {key:?} is malformed")));
    }
    let (last, parents) = parts.split_last().expect("at least one part");
    let mut node = table;
    for part in parents {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key:?}: {part:?} is not a section")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
