//! Reference implementations used only by tests. They recompute everything
//! from first principles, without the library's incremental state.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lstsc::room::{
    mix_scene, sample_scene_with_roles, ArrayGeometry, MixOutput, MixSpec, RoomScene, SceneConstraints, SourceRole,
    Stems,
};
use lstsc::signal::ComplexSpectrogram;

/// Spectra indexed `[mic][frame][bin]`.
pub type Field = Vec<Vec<Vec<Complex64>>>;

pub fn random_field(rng: &mut ChaCha8Rng, mics: usize, frames: usize, bins: usize) -> Field {
    (0..mics)
        .map(|_| {
            (0..frames)
                .map(|_| {
                    (0..bins)
                        .map(|_| {
                            // occasional exact zeros exercise the low-energy path
                            if rng.gen_bool(0.03) {
                                Complex64::new(0.0, 0.0)
                            } else {
                                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn to_specs(field: &Field) -> Vec<ComplexSpectrogram> {
    field
        .iter()
        .map(|mic| {
            let frames = mic.len();
            let bins = mic[0].len();
            ComplexSpectrogram::new(frames, bins, mic.iter().flatten().copied().collect()).unwrap()
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub half_window: usize,
    pub lambda_local: f64,
    /// `None` selects the mask-gated schedule.
    pub lambda_global: Option<f64>,
    pub beta: f64,
    pub eps: f64,
    pub warp: bool,
}

#[derive(Debug, Clone, Default)]
pub struct OracleOutput {
    pub gamma_local: Vec<Vec<f64>>,
    pub gamma_global: Vec<Vec<f64>>,
    pub gamma_local_primed: Vec<Vec<f64>>,
    pub gamma_global_primed: Vec<Vec<f64>>,
    pub lambda: Vec<Vec<f64>>,
    pub masks: Vec<Vec<f64>>,
}

/// Whitened short-term RTF of frame `l`, bin `f`: window of `2R+1` frames
/// cut at the edges; placeholder ones when the reference auto spectrum or
/// an entry is at or below `eps`.
pub fn whitened_rtf(field: &Field, l: usize, f: usize, p: &OracleParams) -> Vec<Complex64> {
    let frames = field[0].len() as i64;
    let mut auto = 0.0;
    let mut cross = vec![Complex64::new(0.0, 0.0); field.len() - 1];
    for n in (l as i64 - p.half_window as i64)..=(l as i64 + p.half_window as i64) {
        if n < 0 || n >= frames {
            continue;
        }
        let y1 = field[0][n as usize][f];
        auto += (y1 * y1.conj()).re;
        for m in 1..field.len() {
            cross[m - 1] += field[m][n as usize][f] * y1.conj();
        }
    }
    cross
        .iter()
        .map(|c| {
            if auto <= p.eps {
                return Complex64::new(1.0, 0.0);
            }
            let h = c / auto;
            let mag = (h.re * h.re + h.im * h.im).sqrt();
            if mag <= p.eps {
                Complex64::new(1.0, 0.0)
            } else {
                h / mag
            }
        })
        .collect()
}

/// Long-term average seen by frame `l`, written as the closed-form sum
/// over all earlier observations:
/// `prod_{k=1}^{l-1} lambda_k r_0 + sum_{j=1}^{l-1} (1 - lambda_j) prod_{k=j+1}^{l-1} lambda_k r_j`.
fn closed_form_average(obs: &[Vec<Complex64>], lambdas: &[f64], l: usize) -> Vec<Complex64> {
    let dims = obs[0].len();
    let mut out = vec![Complex64::new(0.0, 0.0); dims];
    let upto = l.saturating_sub(1);
    for j in 0..=upto {
        let mut w = if j == 0 { 1.0 } else { 1.0 - lambdas[j] };
        for lam in lambdas.iter().take(upto + 1).skip(j + 1) {
            w *= lam;
        }
        for d in 0..dims {
            out[d] += obs[j][d] * w;
        }
    }
    out
}

fn unit_or_zero(v: &[Complex64], eps: f64) -> Vec<Complex64> {
    v.iter().map(|z| if z.norm() > eps { z / z.norm() } else { Complex64::new(0.0, 0.0) }).collect()
}

fn cosine(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut num = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += x.re * y.re + x.im * y.im;
        na += x.re * x.re + x.im * x.im;
        nb += y.re * y.re + y.im * y.im;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (num / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
    }
}

/// `(2 / pi) asin(cos theta)` with `theta` the angle between `a` and `b` as
/// real vectors, taken as `2 atan2(|u - v|, |u + v|)` on the unit vectors.
fn warp(a: &[Complex64], b: &[Complex64]) -> f64 {
    let flat = |v: &[Complex64]| v.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<f64>>();
    let (a, b) = (flat(a), flat(b));
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let d: f64 = a.iter().zip(&b).map(|(x, y)| (x / na - y / nb).powi(2)).sum();
    let s: f64 = a.iter().zip(&b).map(|(x, y)| (x / na + y / nb).powi(2)).sum();
    let theta = 2.0 * d.sqrt().atan2(s.sqrt());
    (2.0 / PI * (PI / 2.0 - theta)).clamp(-1.0, 1.0)
}

/// Mask source for the oracle: gets the primed local and global rows.
pub type OracleMask<'a> = &'a mut dyn FnMut(&[f64], &[f64]) -> Vec<f64>;

/// Recomputes every frame from scratch.
pub fn brute_force_lstsc(field: &Field, p: &OracleParams, mut mask: Option<OracleMask<'_>>) -> OracleOutput {
    let frames = field[0].len();
    let bins = field[0][0].len();
    let mut out = OracleOutput::default();
    let obs: Vec<Vec<Vec<Complex64>>> =
        (0..bins).map(|f| (0..frames).map(|l| whitened_rtf(field, l, f, p)).collect()).collect();
    // lambda_global[f][l], filled as frames are decided
    let mut lam_g = vec![vec![0.0; frames]; bins];
    let lam_l = vec![p.lambda_local; frames];

    for l in 0..frames {
        let mut gl = vec![0.0; bins];
        let mut gg = vec![0.0; bins];
        let prev_mask = if l == 0 { vec![0.0; bins] } else { out.masks.get(l - 1).cloned().unwrap_or(vec![0.0; bins]) };
        let activity = prev_mask.iter().map(|m| m * m).sum::<f64>() / bins as f64;
        let mut lam_row = vec![0.0; bins];
        let (mut wl, mut wg) = (vec![0.0; bins], vec![0.0; bins]);
        for f in 0..bins {
            let local = unit_or_zero(&closed_form_average(&obs[f], &lam_l, l), p.eps);
            gl[f] = cosine(&obs[f][l], &local);
            wl[f] = warp(&obs[f][l], &local);
            lam_row[f] = match p.lambda_global {
                Some(v) => v,
                None if activity > p.beta => 1.0,
                None => (1.0 - gl[f] / 20.0).clamp(0.95, 1.0),
            };
            lam_g[f][l] = lam_row[f];
            let global = unit_or_zero(&closed_form_average(&obs[f], &lam_g[f], l), p.eps);
            gg[f] = cosine(&obs[f][l], &global);
            wg[f] = warp(&obs[f][l], &global);
        }
        let (glp, ggp) = if p.warp { (wl, wg) } else { (gl.clone(), gg.clone()) };
        if let Some(m) = mask.as_mut() {
            out.masks.push(m(&glp, &ggp));
        }
        out.gamma_local.push(gl);
        out.gamma_global.push(gg);
        out.gamma_local_primed.push(glp);
        out.gamma_global_primed.push(ggp);
        out.lambda.push(lam_row);
    }
    out
}

/// ERB-rate triangular filterbank evaluated densely, one full row per band.
pub fn dense_erb(sample_rate: f64, fft_size: usize, bands: usize) -> Vec<Vec<f64>> {
    let bins = fft_size / 2 + 1;
    let cam = |hz: f64| 21.4 * (1.0 + 0.00437 * hz).log10();
    let inv = |e: f64| (10f64.powf(e / 21.4) - 1.0) / 0.00437;
    let nyq = sample_rate / 2.0;
    let centers: Vec<f64> =
        (0..bands).map(|b| if b == bands - 1 { nyq } else { inv(cam(nyq) * b as f64 / (bands - 1) as f64) }).collect();
    (0..bands)
        .map(|b| {
            let mut row: Vec<f64> = (0..bins)
                .map(|k| {
                    let f = k as f64 * sample_rate / fft_size as f64;
                    let rise = if b > 0 { (f - centers[b - 1]) / (centers[b] - centers[b - 1]) } else { f64::NAN };
                    let fall =
                        if b + 1 < bands { (centers[b + 1] - f) / (centers[b + 1] - centers[b]) } else { f64::NAN };
                    if f == centers[b] {
                        1.0
                    } else if f < centers[b] {
                        if rise.is_nan() {
                            0.0
                        } else {
                            rise.max(0.0)
                        }
                    } else if fall.is_nan() {
                        0.0
                    } else {
                        fall.max(0.0)
                    }
                })
                .collect();
            if row.iter().all(|&w| w == 0.0) {
                let k = (centers[b] / nyq * (bins - 1) as f64).round() as usize;
                row[k] = 1.0;
            }
            row
        })
        .collect()
}

pub fn dense_pool(weights: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .map(|row| {
            let num: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            num / row.iter().sum::<f64>()
        })
        .collect()
}

/// SI-SDR by explicit orthogonal decomposition against the unit reference.
pub fn projection_si_sdr(reference: &[f64], estimate: &[f64]) -> f64 {
    let norm = reference.iter().map(|v| v * v).sum::<f64>().sqrt();
    let unit: Vec<f64> = reference.iter().map(|v| v / norm).collect();
    let coef: f64 = unit.iter().zip(estimate).map(|(u, e)| u * e).sum();
    let parallel: Vec<f64> = unit.iter().map(|u| coef * u).collect();
    let p: f64 = parallel.iter().map(|v| v * v).sum();
    let r: f64 = estimate.iter().zip(&parallel).map(|(e, q)| (e - q) * (e - q)).sum();
    10.0 * (p / r).log10()
}

/// A two- or three-source scene at a fixed reverberation time.
pub fn scene(seed: u64, t60: f64, roles: &[SourceRole], array: &ArrayGeometry) -> RoomScene {
    let c = SceneConstraints { t60_grid: vec![t60], ..Default::default() };
    sample_scene_with_roles(seed, array, &c, roles).unwrap()
}

pub fn mix(scene: &RoomScene, stems: &Stems, seed: u64) -> MixOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
    let spec = MixSpec::draw(&mut rng);
    mix_scene(scene, stems, &spec, None).unwrap()
}

/// Frames (hop 160, length 400) that lie completely inside or completely
/// outside the given activity.
pub fn classify_frames(activity: &lstsc::synth::Activity, frames: usize, skip: usize) -> (Vec<usize>, Vec<usize>) {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for l in skip..frames {
        let span = l * 160..l * 160 + 400;
        match activity.overlap(span) {
            0 => outside.push(l),
            400 => inside.push(l),
            _ => {}
        }
    }
    (inside, outside)
}
