use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rir::Rir;
use super::scene::{RoomScene, SourceRole};
use crate::error::{Error, Result};
use crate::signal::{fft_convolve, power, MultichannelAudio, PIPELINE_SAMPLE_RATE};

pub const SIR_GRID_DB: [f64; 4] = [0.0, 5.0, 10.0, 15.0];
pub const SNR_GRID_DB: [f64; 3] = [20.0, 25.0, 30.0];
pub const CLIP_SECONDS: f64 = 8.0;

/// Levels of one mixture. All levels are referenced to microphone 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixSpec {
    /// Target image power over interferer image power.
    pub sir_db: f64,
    /// Total directional power over sensor noise power.
    pub snr_db: f64,
    pub clip_seconds: f64,
    pub noise_seed: u64,
}

impl MixSpec {
    /// Draws SIR and SNR from the standard grids.
    pub fn draw<R: Rng>(rng: &mut R) -> Self {
        Self {
            sir_db: SIR_GRID_DB[rng.gen_range(0..SIR_GRID_DB.len())],
            snr_db: SNR_GRID_DB[rng.gen_range(0..SNR_GRID_DB.len())],
            clip_seconds: CLIP_SECONDS,
            noise_seed: rng.gen(),
        }
    }

    pub fn clip_len(&self, fs: u32) -> usize {
        (self.clip_seconds * fs as f64).round() as usize
    }
}

/// Dry mono source signals.
#[derive(Debug, Clone, PartialEq)]
pub struct Stems {
    pub sample_rate: u32,
    pub target: Vec<f64>,
    pub non_target: Vec<f64>,
    pub interferer: Vec<f64>,
}

impl Stems {
    pub fn get(&self, role: SourceRole) -> &[f64] {
        match role {
            SourceRole::Target => &self.target,
            SourceRole::NonTarget => &self.non_target,
            SourceRole::Interferer => &self.interferer,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixGains {
    pub target: f64,
    pub non_target: f64,
    pub interferer: f64,
    pub noise: f64,
}

#[derive(Debug, Clone)]
pub struct MixOutput {
    pub mixture: MultichannelAudio,
    /// Reverberant image of each scene source, in scene order.
    pub images: Vec<(SourceRole, MultichannelAudio)>,
    pub noise: MultichannelAudio,
    pub gains: MixGains,
    pub realized_sir_db: Option<f64>,
    pub realized_snr_db: f64,
}

impl MixOutput {
    pub fn image(&self, role: SourceRole) -> Option<&MultichannelAudio> {
        self.images.iter().find(|(r, _)| *r == role).map(|(_, a)| a)
    }
}

fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Convolves each source with its responses, sets levels, adds noise.
///
/// Responses come from `external_rirs` (indexed `[source][mic]`, scene
/// order) when given, otherwise from the image-source simulator. The
/// non-target talker is matched in power to the target, the interferer is
/// set by `sir_db`, and white noise by `snr_db` against the sum of all
/// images. The mixture is the sum of the images in scene order plus noise.
pub fn mix_scene(
    scene: &RoomScene,
    stems: &Stems,
    spec: &MixSpec,
    external_rirs: Option<&[Vec<Rir>]>,
) -> Result<MixOutput> {
    if stems.sample_rate != PIPELINE_SAMPLE_RATE {
        return Err(Error::SampleRate { expected: PIPELINE_SAMPLE_RATE, found: stems.sample_rate });
    }
    if scene.source(SourceRole::Target).is_none() {
        return Err(Error::InvalidArgument("scene has no target source".into()));
    }
    let fs = stems.sample_rate;
    let len = spec.clip_len(fs);
    for s in &scene.sources {
        let stem = stems.get(s.role);
        if stem.len() < len {
            return Err(Error::StemTooShort { name: s.role.name().into(), len: stem.len(), needed: len });
        }
    }
    let simulated;
    let rirs: &[Vec<Rir>] = match external_rirs {
        Some(r) => {
            for (si, _) in scene.sources.iter().enumerate() {
                for mi in 0..scene.mics.len() {
                    if r.get(si).and_then(|v| v.get(mi)).is_none() {
                        return Err(Error::MissingRir { source_index: si, mic: mi });
                    }
                }
            }
            r
        }
        None => {
            simulated = scene.simulate_rirs(fs)?;
            &simulated
        }
    };

    let raw: Vec<Vec<Vec<f64>>> = scene
        .sources
        .iter()
        .zip(rirs)
        .map(|(s, per_mic)| {
            let dry = &stems.get(s.role)[..len];
            per_mic.iter().take(scene.mics.len()).map(|h| fft_convolve(dry, &h.taps, len)).collect()
        })
        .collect();

    let ref_power = |role: SourceRole| scene.sources.iter().position(|s| s.role == role).map(|i| power(&raw[i][0]));
    let p_target = ref_power(SourceRole::Target).unwrap_or(0.0);
    if p_target == 0.0 {
        return Err(Error::InvalidArgument("target image is silent at the reference microphone".into()));
    }
    let match_to = |p: Option<f64>, want: f64| match p {
        Some(p) if p > 0.0 => (want / p).sqrt(),
        _ => 0.0,
    };
    let g_non_target = match_to(ref_power(SourceRole::NonTarget), p_target);
    let g_interferer = match_to(ref_power(SourceRole::Interferer), p_target / 10f64.powf(spec.sir_db / 10.0));

    let images: Vec<(SourceRole, Vec<Vec<f64>>)> = scene
        .sources
        .iter()
        .zip(raw)
        .map(|(s, chans)| {
            let g = match s.role {
                SourceRole::Target => 1.0,
                SourceRole::NonTarget => g_non_target,
                SourceRole::Interferer => g_interferer,
            };
            let chans =
                if g == 1.0 { chans } else { chans.into_iter().map(|c| c.iter().map(|v| v * g).collect()).collect() };
            (s.role, chans)
        })
        .collect();

    let mics = scene.mics.len();
    let mut directional = vec![vec![0.0; len]; mics];
    for (_, chans) in &images {
        for (acc, c) in directional.iter_mut().zip(chans) {
            for (a, v) in acc.iter_mut().zip(c) {
                *a += v;
            }
        }
    }
    let p_dir = power(&directional[0]);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed);
    let raw_noise: Vec<Vec<f64>> =
        (0..mics).map(|_| (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    let g_noise = (p_dir / (power(&raw_noise[0]) * 10f64.powf(spec.snr_db / 10.0))).sqrt();
    let noise: Vec<Vec<f64>> = raw_noise.into_iter().map(|c| c.into_iter().map(|v| v * g_noise).collect()).collect();

    let mixture: Vec<Vec<f64>> =
        directional.iter().zip(&noise).map(|(d, n)| d.iter().zip(n).map(|(a, b)| a + b).collect()).collect();

    let realized_sir_db = images
        .iter()
        .find(|(r, _)| *r == SourceRole::Interferer)
        .map(|(_, c)| power(&c[0]))
        .filter(|&p| p > 0.0)
        .map(|p_i| db(p_target / p_i));
    let realized_snr_db = db(p_dir / power(&noise[0]));

    Ok(MixOutput {
        mixture: MultichannelAudio::new(fs, mixture)?,
        images: images
            .into_iter()
            .map(|(r, c)| MultichannelAudio::new(fs, c).map(|a| (r, a)))
            .collect::<Result<_>>()?,
        noise: MultichannelAudio::new(fs, noise)?,
        gains: MixGains { target: 1.0, non_target: g_non_target, interferer: g_interferer, noise: g_noise },
        realized_sir_db,
        realized_snr_db,
    })
}
