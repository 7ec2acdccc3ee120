//! Deterministic speech-like test signals.
//!
//! Voiced syllables are built from a glottal-like harmonic series shaped by
//! three formant resonances, with a slowly drifting pitch and a raised-cosine
//! syllable envelope. They stand in for recorded talkers when exercising the
//! scene generator and the coherence features.

use std::f64::consts::PI;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::room::Stems;

/// Sample ranges where a talker is active.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub ranges: Vec<Range<usize>>,
}

impl Activity {
    pub fn new(ranges: Vec<Range<usize>>) -> Self {
        Self { ranges }
    }

    pub fn always(len: usize) -> Self {
        Self { ranges: std::iter::once(0..len).collect() }
    }

    pub fn is_active(&self, n: usize) -> bool {
        self.ranges.iter().any(|r| r.contains(&n))
    }

    /// Number of active samples in `span`.
    pub fn overlap(&self, span: Range<usize>) -> usize {
        self.ranges.iter().map(|r| r.end.min(span.end).saturating_sub(r.start.max(span.start))).sum()
    }

    pub fn active_samples(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).sum()
    }
}

/// Alternating silence and speech, starting with `lead_in` seconds of
/// silence. Segment lengths are drawn from the given ranges (seconds).
pub fn intermittent_activity(
    seed: u64,
    fs: u32,
    len: usize,
    lead_in: f64,
    talk: Range<f64>,
    pause: Range<f64>,
) -> Activity {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = fs as f64;
    let mut t = (lead_in * fs) as usize;
    let mut ranges = Vec::new();
    while t < len {
        let on = (rng.gen_range(talk.clone()) * fs) as usize;
        let end = (t + on).min(len);
        ranges.push(t..end);
        t = end + (rng.gen_range(pause.clone()) * fs) as usize;
    }
    Activity { ranges }
}

/// Parameters of one synthetic voice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Voice {
    pub f0: f64,
    /// Mean syllable length in seconds.
    pub syllable: f64,
    pub breathiness: f64,
}

impl Voice {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        Self {
            f0: rng.gen_range(100.0..220.0),
            syllable: rng.gen_range(0.16..0.28),
            breathiness: rng.gen_range(0.02..0.08),
        }
    }
}

const FORMANT_BW: [f64; 3] = [90.0, 120.0, 180.0];

fn formant_gain(freq: f64, formants: &[f64; 3]) -> f64 {
    let mut g = 0.0;
    for (fc, bw) in formants.iter().zip(FORMANT_BW) {
        let x = (freq - fc) / bw;
        g += 1.0 / (1.0 + x * x);
    }
    // roughly -6 dB per octave source tilt
    g * (200.0 / freq.max(200.0))
}

/// Speech-like signal that is silent outside `activity`.
pub fn speech_like(seed: u64, fs: u32, len: usize, activity: &Activity) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let voice = Voice::random(&mut rng);
    let fs_f = fs as f64;
    let nyq = fs_f / 2.0;
    let mut out = vec![0.0; len];
    let mut phase = 0.0f64;
    let max_h = (nyq * 0.9 / (voice.f0 * 0.8)) as usize;
    let mut amps = vec![0.0; max_h];

    for seg in &activity.ranges {
        let seg = seg.start.min(len)..seg.end.min(len);
        let mut t = seg.start;
        while t < seg.end {
            let syl = ((voice.syllable * rng.gen_range(0.6..1.4)) * fs_f) as usize;
            let end = (t + syl.max(16)).min(seg.end);
            let formants = [rng.gen_range(300.0..800.0), rng.gen_range(900.0..2300.0), rng.gen_range(2400.0..3200.0)];
            let f0_start = voice.f0 * rng.gen_range(0.85..1.15);
            let f0_end = voice.f0 * rng.gen_range(0.85..1.15);
            let level = rng.gen_range(0.5..1.0);
            let n = (end - t) as f64;
            let h_count = ((nyq * 0.9) / f0_start.max(f0_end)) as usize;
            for (h, a) in amps.iter_mut().enumerate().take(h_count) {
                *a = formant_gain((h + 1) as f64 * (f0_start + f0_end) / 2.0, &formants);
            }
            for (i, s) in out[t..end].iter_mut().enumerate() {
                let u = i as f64 / n;
                let f0 = f0_start + (f0_end - f0_start) * u;
                phase = (phase + 2.0 * PI * f0 / fs_f) % (2.0 * PI);
                let env = (PI * u).sin().powi(2);
                let mut v = 0.0;
                for (h, a) in amps.iter().enumerate().take(h_count) {
                    v += a * ((h + 1) as f64 * phase).sin();
                }
                v += voice.breathiness * rng.gen_range(-1.0..1.0);
                *s = level * env * v;
            }
            t = end;
        }
    }
    normalize(&mut out, 0.5);
    out
}

/// Continuous program material: two overlapping talkers over a low noise
/// bed, active for the whole clip.
pub fn tv_like(seed: u64, fs: u32, len: usize) -> Vec<f64> {
    let all = Activity::always(len);
    let a = speech_like(seed ^ 0x5456_0001, fs, len, &all);
    let b = speech_like(seed ^ 0x5456_0002, fs, len, &all);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5456_0003);
    let mut lp = 0.0;
    let mut out: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| {
            lp = 0.9 * lp + 0.1 * rng.gen_range(-1.0..1.0);
            x + 0.7 * y + 0.3 * lp
        })
        .collect();
    normalize(&mut out, 0.5);
    out
}

fn normalize(x: &mut [f64], peak: f64) {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        let g = peak / m;
        x.iter_mut().for_each(|v| *v *= g);
    }
}

/// Stems for a three-source scene and the talkers' activity.
#[derive(Debug, Clone)]
pub struct SyntheticStems {
    pub stems: Stems,
    pub target_activity: Activity,
    pub non_target_activity: Activity,
}

/// Intermittent target and non-target talkers that never overlap, and a
/// continuous interferer. The target starts after one second of silence,
/// or an eighth of the clip if that is shorter.
pub fn scene_stems(seed: u64, fs: u32, len: usize) -> SyntheticStems {
    let lead_in = (len as f64 / fs as f64 / 8.0).min(1.0);
    let target_activity = intermittent_activity(seed, fs, len, lead_in, 0.8..1.6, 0.8..1.6);
    let mut non = Vec::new();
    let mut prev = 0;
    let guard = (0.1 * fs as f64) as usize;
    for r in target_activity.ranges.iter().chain(std::iter::once(&(len..len))) {
        let gap = prev + guard..r.start.saturating_sub(guard);
        // early pauses hold a non-target burst in their middle half
        if gap.len() > 2 * guard && non.len() * 2 <= target_activity.ranges.len() && prev > 0 {
            let q = gap.len() / 4;
            non.push(gap.start + q..gap.end - q);
        }
        prev = r.end;
    }
    let non_target_activity = Activity::new(non);
    SyntheticStems {
        stems: Stems {
            sample_rate: fs,
            target: speech_like(seed.wrapping_mul(3).wrapping_add(1), fs, len, &target_activity),
            non_target: speech_like(seed.wrapping_mul(3).wrapping_add(2), fs, len, &non_target_activity),
            interferer: tv_like(seed.wrapping_mul(3).wrapping_add(3), fs, len),
        },
        target_activity,
        non_target_activity,
    }
}
