//! Run configuration for the command-line driver, read from TOML.
//!
//! ```toml
//! [scene]
//! seed = 7
//! t60_grid = [0.16, 0.36, 0.61]
//! array = { kind = "ula", mics = 4, spacing = 0.08 }
//!
//! [features]
//! variant = "lstsc-3"
//!
//! [output]
//! dir = "runs/seed7"
//! ```

use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coherence::{CoherenceConfig, Variant, DEFAULT_ERB_BANDS};
use crate::error::{Error, Result};
use crate::room::{
    AbsorptionModel, ArrayGeometry, MixSpec, Point, SceneConstraints, CLIP_SECONDS, SIR_GRID_DB, SNR_GRID_DB,
};

/// Accepted reverberation times, seconds.
pub const T60_DOMAIN: RangeInclusive<f64> = 0.05..=3.0;
/// Accepted signal-to-interference ratios, dB.
pub const SIR_DOMAIN: RangeInclusive<f64> = -30.0..=60.0;
/// Accepted sensor signal-to-noise ratios, dB.
pub const SNR_DOMAIN: RangeInclusive<f64> = -20.0..=80.0;
/// Accepted clip lengths, seconds.
pub const CLIP_DOMAIN: RangeInclusive<f64> = 0.1..=600.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scene: SceneSection,
    pub stems: StemsSection,
    pub features: FeaturesSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSection {
    pub seed: u64,
    pub array: ArrayGeometry,
    pub room_dims: Point,
    pub array_center: Point,
    pub min_range: f64,
    pub max_range: f64,
    pub min_separation_deg: f64,
    pub absorption_model: AbsorptionModel,
    pub max_attempts: usize,
    pub t60_grid: Vec<f64>,
    pub sir_grid_db: Vec<f64>,
    pub snr_grid_db: Vec<f64>,
    pub clip_seconds: f64,
}

impl Default for SceneSection {
    fn default() -> Self {
        let c = SceneConstraints::default();
        Self {
            seed: 0,
            array: ArrayGeometry::default(),
            room_dims: c.room_dims,
            array_center: c.array_center,
            min_range: c.min_range,
            max_range: c.max_range,
            min_separation_deg: c.min_separation_deg,
            absorption_model: c.absorption_model,
            max_attempts: c.max_attempts,
            t60_grid: c.t60_grid,
            sir_grid_db: SIR_GRID_DB.to_vec(),
            snr_grid_db: SNR_GRID_DB.to_vec(),
            clip_seconds: CLIP_SECONDS,
        }
    }
}

impl SceneSection {
    pub fn constraints(&self) -> SceneConstraints {
        SceneConstraints {
            room_dims: self.room_dims,
            array_center: self.array_center,
            min_range: self.min_range,
            max_range: self.max_range,
            min_separation_deg: self.min_separation_deg,
            t60_grid: self.t60_grid.clone(),
            absorption_model: self.absorption_model,
            max_attempts: self.max_attempts,
        }
    }

    /// Draws levels from the configured grids.
    pub fn draw_mix<R: Rng>(&self, rng: &mut R) -> MixSpec {
        MixSpec {
            sir_db: self.sir_grid_db[rng.gen_range(0..self.sir_grid_db.len())],
            snr_db: self.snr_grid_db[rng.gen_range(0..self.snr_grid_db.len())],
            clip_seconds: self.clip_seconds,
            noise_seed: rng.gen(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_grid("t60_grid", &self.t60_grid, &T60_DOMAIN)?;
        check_grid("sir_grid_db", &self.sir_grid_db, &SIR_DOMAIN)?;
        check_grid("snr_grid_db", &self.snr_grid_db, &SNR_DOMAIN)?;
        if !CLIP_DOMAIN.contains(&self.clip_seconds) {
            return Err(Error::InvalidConfig(format!(
                "clip_seconds = {} outside [{}, {}]",
                self.clip_seconds,
                CLIP_DOMAIN.start(),
                CLIP_DOMAIN.end()
            )));
        }
        if self.room_dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidConfig(format!("room_dims {:?} must be positive", self.room_dims)));
        }
        if !(self.min_range > 0.0 && self.min_range <= self.max_range) {
            return Err(Error::InvalidConfig(format!(
                "source range bounds [{}, {}] are invalid",
                self.min_range, self.max_range
            )));
        }
        if !(0.0..180.0).contains(&self.min_separation_deg) {
            return Err(Error::InvalidConfig(format!(
                "min_separation_deg = {} outside [0, 180)",
                self.min_separation_deg
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::InvalidConfig("max_attempts must be positive".into()));
        }
        self.array.validate().map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

fn check_grid(name: &str, grid: &[f64], domain: &RangeInclusive<f64>) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig(format!("{name} is empty")));
    }
    if let Some(v) = grid.iter().find(|v| !domain.contains(v)) {
        return Err(Error::InvalidConfig(format!("{name} value {v} outside [{}, {}]", domain.start(), domain.end())));
    }
    Ok(())
}

/// Dry source recordings. Missing entries are synthesized.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StemsSection {
    pub target: Option<PathBuf>,
    pub non_target: Option<PathBuf>,
    pub interferer: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FeaturesSection {
    pub variant: Variant,
    /// Forces ERB pooling on or off regardless of the variant.
    pub erb: Option<bool>,
    pub erb_bands: usize,
    pub half_window: Option<usize>,
    pub beta: Option<f64>,
}

impl Default for FeaturesSection {
    fn default() -> Self {
        Self { variant: Variant::Lstsc3, erb: None, erb_bands: DEFAULT_ERB_BANDS, half_window: None, beta: None }
    }
}

impl FeaturesSection {
    pub fn coherence(&self) -> Result<CoherenceConfig> {
        let mut cfg = self.variant.config();
        match self.erb {
            Some(true) => cfg.erb_bands = Some(self.erb_bands),
            Some(false) => cfg.erb_bands = None,
            None if cfg.erb_bands.is_some() => cfg.erb_bands = Some(self.erb_bands),
            None => {}
        }
        if let Some(r) = self.half_window {
            cfg.half_window = r;
        }
        if let Some(b) = self.beta {
            cfg.beta = b;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.features.coherence()?;
        Ok(())
    }
}
