use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{distance, ArrayGeometry, Point};
use super::rir::{simulate_rir, AbsorptionModel, Rir, ShoeboxRoom};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceRole {
    Target,
    NonTarget,
    Interferer,
}

impl SourceRole {
    pub const ALL: [SourceRole; 3] = [SourceRole::Target, SourceRole::NonTarget, SourceRole::Interferer];

    pub fn name(self) -> &'static str {
        match self {
            SourceRole::Target => "target",
            SourceRole::NonTarget => "non_target",
            SourceRole::Interferer => "interferer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub role: SourceRole,
    pub position: Point,
}

/// Placement rules for sampled scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConstraints {
    pub room_dims: Point,
    pub array_center: Point,
    pub min_range: f64,
    pub max_range: f64,
    pub min_separation_deg: f64,
    /// Candidate reverberation times, one is drawn per scene.
    pub t60_grid: Vec<f64>,
    pub absorption_model: AbsorptionModel,
    pub max_attempts: usize,
}

/// Reverberation times used for training-style scenes.
pub const T60_TRAIN_GRID: [f64; 4] = [0.1, 0.3, 0.5, 0.7];
/// Reverberation times used for held-out test scenes.
pub const T60_TEST_GRID: [f64; 3] = [0.16, 0.36, 0.61];

impl Default for SceneConstraints {
    fn default() -> Self {
        Self {
            room_dims: [6.0, 5.0, 3.0],
            array_center: [3.0, 1.0, 1.2],
            min_range: 0.7,
            max_range: 2.0,
            min_separation_deg: 15.0,
            t60_grid: T60_TRAIN_GRID.to_vec(),
            absorption_model: AbsorptionModel::default(),
            max_attempts: 10_000,
        }
    }
}

/// A shoebox room, a placed array, and the sources around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomScene {
    pub room_dims: Point,
    pub t60: f64,
    pub absorption_model: AbsorptionModel,
    pub array: ArrayGeometry,
    pub array_center: Point,
    pub mics: Vec<Point>,
    pub sources: Vec<Source>,
}

impl RoomScene {
    pub fn room(&self) -> Result<ShoeboxRoom> {
        ShoeboxRoom::from_t60(self.room_dims, self.t60, self.absorption_model)
    }

    pub fn source(&self, role: SourceRole) -> Option<&Source> {
        self.sources.iter().find(|s| s.role == role)
    }

    pub fn range(&self, s: &Source) -> f64 {
        distance(&s.position, &self.array_center)
    }

    /// Azimuth of a source about the array center, in degrees.
    pub fn azimuth_deg(&self, s: &Source) -> f64 {
        let dx = s.position[0] - self.array_center[0];
        let dy = s.position[1] - self.array_center[1];
        dy.atan2(dx).to_degrees()
    }

    /// The same sources and room with a different array at the same center.
    pub fn with_array(&self, array: ArrayGeometry) -> Result<Self> {
        array.validate()?;
        let mut s = self.clone();
        s.mics = array.place(self.array_center);
        s.array = array;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(&SceneConstraints { room_dims: self.room_dims, ..SceneConstraints::default() })
    }

    pub fn validate_with(&self, c: &SceneConstraints) -> Result<()> {
        if !(self.t60 > 0.0) {
            return Err(Error::Geometry(format!("T60 {} must be positive", self.t60)));
        }
        let inside = |p: &Point| p.iter().zip(&self.room_dims).all(|(v, d)| *v > 0.0 && v < d);
        if let Some(m) = self.mics.iter().position(|p| !inside(p)) {
            return Err(Error::Geometry(format!("microphone {m} is outside the room")));
        }
        for s in &self.sources {
            if !inside(&s.position) {
                return Err(Error::Geometry(format!("{} source is outside the room", s.role.name())));
            }
            let r = self.range(s);
            if r < c.min_range - 1e-9 || r > c.max_range + 1e-9 {
                return Err(Error::Geometry(format!(
                    "{} source range {r:.3} m outside [{}, {}]",
                    s.role.name(),
                    c.min_range,
                    c.max_range
                )));
            }
        }
        for (i, a) in self.sources.iter().enumerate() {
            for b in &self.sources[i + 1..] {
                let sep = self.separation_deg(a, b);
                if sep < c.min_separation_deg - 1e-9 {
                    return Err(Error::Geometry(format!(
                        "{} and {} are only {sep:.2} degrees apart",
                        a.role.name(),
                        b.role.name()
                    )));
                }
            }
        }
        if let Some(t) = self.source(SourceRole::Target) {
            let rt = self.range(t);
            if self.sources.iter().any(|s| s.role != SourceRole::Target && self.range(s) < rt) {
                return Err(Error::Geometry("target must be the closest source".into()));
            }
        }
        Ok(())
    }

    pub fn separation_deg(&self, a: &Source, b: &Source) -> f64 {
        let c = self.array_center;
        let u: Vec<f64> = (0..3).map(|i| a.position[i] - c[i]).collect();
        let v: Vec<f64> = (0..3).map(|i| b.position[i] - c[i]).collect();
        let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (dot / (nu * nv)).clamp(-1.0, 1.0).acos().to_degrees()
    }

    /// Image-source responses, indexed `[source][mic]`.
    pub fn simulate_rirs(&self, fs: u32) -> Result<Vec<Vec<Rir>>> {
        let room = self.room()?;
        self.sources
            .iter()
            .map(|s| self.mics.iter().map(|m| simulate_rir(&room, &s.position, m, fs)).collect())
            .collect()
    }
}

/// Draws a scene with a target, a non-target talker and an interferer in
/// the frontal half-plane of the array. Deterministic for a given seed.
pub fn sample_scene(seed: u64, array: &ArrayGeometry, c: &SceneConstraints) -> Result<RoomScene> {
    sample_scene_with_roles(seed, array, c, &SourceRole::ALL)
}

pub fn sample_scene_with_roles(
    seed: u64,
    array: &ArrayGeometry,
    c: &SceneConstraints,
    roles: &[SourceRole],
) -> Result<RoomScene> {
    array.validate()?;
    if c.t60_grid.is_empty() || c.t60_grid.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::InvalidConfig("t60 grid must hold positive values".into()));
    }
    if !(c.min_range > 0.0 && c.min_range <= c.max_range) {
        return Err(Error::InvalidConfig(format!("bad range bounds [{}, {}]", c.min_range, c.max_range)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t60 = c.t60_grid[rng.gen_range(0..c.t60_grid.len())];
    let mics = array.place(c.array_center);
    for _ in 0..c.max_attempts {
        let mut placed: Vec<(f64, f64)> =
            roles.iter().map(|_| (rng.gen_range(c.min_range..=c.max_range), rng.gen_range(0.0..=180.0))).collect();
        // closest draw goes to the target
        if let Some(ti) = roles.iter().position(|r| *r == SourceRole::Target) {
            let closest = (0..placed.len()).min_by(|&a, &b| placed[a].0.total_cmp(&placed[b].0)).unwrap();
            let r = placed[closest].0;
            placed[closest].0 = placed[ti].0;
            placed[ti].0 = r;
        }
        let sources: Vec<Source> = roles
            .iter()
            .zip(&placed)
            .map(|(&role, &(r, az))| {
                let a = az.to_radians();
                Source {
                    role,
                    position: [c.array_center[0] + r * a.cos(), c.array_center[1] + r * a.sin(), c.array_center[2]],
                }
            })
            .collect();
        let scene = RoomScene {
            room_dims: c.room_dims,
            t60,
            absorption_model: c.absorption_model,
            array: array.clone(),
            array_center: c.array_center,
            mics: mics.clone(),
            sources,
        };
        if scene.validate_with(c).is_ok() {
            return Ok(scene);
        }
    }
    Err(Error::SamplingBudgetExhausted(c.max_attempts))
}
