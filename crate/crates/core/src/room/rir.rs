use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use super::geometry::{distance, Point};
use crate::error::{Error, Result};

pub const SPEED_OF_SOUND: f64 = 343.0;

/// How a requested reverberation time is turned into wall absorption.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbsorptionModel {
    Sabine,
    Eyring,
    /// Absorption whose image-source decay, averaged over directions and
    /// measured over the -5 to -35 dB range, has the requested T60.
    #[default]
    ImageDecay,
}

/// Octant quadrature resolution for the direction-averaged decay.
const DIRS: usize = 48;
const DECAY_POINTS: usize = 2048;

/// Reflections per meter travelled along each quadrature direction, with
/// the solid-angle weights.
fn reflection_rates(dims: Point) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(DIRS * DIRS);
    for i in 0..DIRS {
        let th = (i as f64 + 0.5) / DIRS as f64 * PI / 2.0;
        for j in 0..DIRS {
            let ph = (j as f64 + 0.5) / DIRS as f64 * PI / 2.0;
            let u = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let r: f64 = u.iter().zip(&dims).map(|(c, l)| c / l).sum();
            out.push((r, th.sin()));
        }
    }
    out
}

/// Path length (meters) times energy attenuation per reflection (nepers)
/// over which the direction-averaged image field shows a 60 dB decay, as
/// fitted between -5 and -35 dB of its Schroeder curve.
///
/// Along direction `u` image energy falls as `exp(-a * s * r(u))` after a
/// path `s`, so the backward integral is `exp(-a s r) / (a r)` and the
/// fitted decay scales exactly as `1 / a`.
fn image_decay_constant(dims: Point) -> f64 {
    let rates = reflection_rates(dims);
    let curve = |s: f64| rates.iter().map(|(r, w)| w * (-s * r).exp() / r).sum::<f64>();
    let c0 = curve(0.0);
    let db = |s: f64| 10.0 * (curve(s) / c0).log10();
    let mut s_max = 1.0;
    while db(s_max) > -36.0 {
        s_max *= 2.0;
    }
    let (mut n, mut ss, mut sv, mut sss, mut ssv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..=DECAY_POINTS {
        let s = s_max * k as f64 / DECAY_POINTS as f64;
        let v = db(s);
        if (-35.0..=-5.0).contains(&v) {
            n += 1.0;
            ss += s;
            sv += v;
            sss += s * s;
            ssv += s * v;
        }
    }
    let slope = (n * ssv - ss * sv) / (n * sss - ss * ss);
    -60.0 / slope
}

/// Shoebox room with uniform wall absorption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShoeboxRoom {
    pub dims: Point,
    /// Energy absorption coefficient, `0 < a <= 1`.
    pub absorption: f64,
}

impl ShoeboxRoom {
    pub fn new(dims: Point, absorption: f64) -> Result<Self> {
        if dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Geometry(format!("room dimensions {dims:?} must be positive")));
        }
        if !(absorption > 0.0 && absorption <= 1.0) {
            return Err(Error::InvalidArgument(format!("absorption {absorption} outside (0, 1]")));
        }
        Ok(Self { dims, absorption })
    }

    pub fn anechoic(dims: Point) -> Result<Self> {
        Self::new(dims, 1.0)
    }

    /// Absorption that yields `t60` seconds under the given model.
    pub fn from_t60(dims: Point, t60: f64, model: AbsorptionModel) -> Result<Self> {
        if !(t60 > 0.0 && t60.is_finite()) {
            return Err(Error::InvalidArgument(format!("T60 {t60} must be positive")));
        }
        let [x, y, z] = dims;
        let volume = x * y * z;
        let surface = 2.0 * (x * y + x * z + y * z);
        let k = 24.0 * LN_10 * volume / (SPEED_OF_SOUND * surface * t60);
        let absorption = match model {
            AbsorptionModel::Sabine => k,
            AbsorptionModel::Eyring => 1.0 - (-k).exp(),
            AbsorptionModel::ImageDecay => 1.0 - (-image_decay_constant(dims) / (SPEED_OF_SOUND * t60)).exp(),
        };
        if absorption > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "T60 {t60} s is too short for a {x}x{y}x{z} m room under Sabine's formula"
            )));
        }
        Self::new(dims, absorption)
    }

    /// Pressure reflection coefficient of every wall.
    pub fn reflection(&self) -> f64 {
        (1.0 - self.absorption).max(0.0).sqrt()
    }

    /// Decay time of this room's image field, as measured between -5 and
    /// -35 dB of the direction-averaged Schroeder curve.
    pub fn expected_t60(&self) -> Option<f64> {
        if self.absorption >= 1.0 {
            return None;
        }
        let a = -(1.0 - self.absorption).ln();
        Some(image_decay_constant(self.dims) / (SPEED_OF_SOUND * a))
    }

    /// Time for the most slowly decaying image direction (along the longest
    /// wall-to-wall axis) to lose `db` decibels.
    fn slowest_decay_secs(&self, db: f64) -> Option<f64> {
        if self.absorption >= 1.0 {
            return None;
        }
        let a = -(1.0 - self.absorption).ln();
        let longest = self.dims.iter().fold(0.0f64, |m, d| m.max(*d));
        Some(db / 10.0 * LN_10 * longest / (a * SPEED_OF_SOUND))
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.iter().zip(&self.dims).all(|(v, d)| *v > 0.0 && v < d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rir {
    pub sample_rate: u32,
    pub taps: Vec<f64>,
    pub source_distance: f64,
}

impl Rir {
    /// Sample index of the direct path: `round(d / c * fs)`.
    pub fn direct_delay(&self) -> usize {
        (self.source_distance / SPEED_OF_SOUND * self.sample_rate as f64).round() as usize
    }

    /// First nonzero tap.
    pub fn onset(&self) -> Option<usize> {
        self.taps.iter().position(|&t| t != 0.0)
    }
}

/// Decay (in dB of reverberant energy) the generated response must cover
/// past the direct path.
const TAIL_DB: f64 = 72.0;

/// Corner of the high-pass applied to reverberant responses.
pub const HIGHPASS_HZ: f64 = 100.0;

/// First-order DC blocker. With zero initial state the first nonzero tap
/// passes unchanged.
fn highpass(taps: &mut [f64], fs: f64) {
    let r = (-2.0 * PI * HIGHPASS_HZ / fs).exp();
    let (mut x1, mut y1) = (0.0, 0.0);
    for t in taps.iter_mut() {
        let y = *t - x1 + r * y1;
        x1 = *t;
        y1 = y;
        *t = y;
    }
}

/// Image-source impulse response between `src` and `mic`.
///
/// Every image contributes `beta^k / (4 pi d)` at the nearest sample to its
/// propagation delay, where `k` counts wall reflections. Images are kept
/// until even the most slowly decaying direction has lost 72 dB.
///
/// Reverberant responses are high-passed at [`HIGHPASS_HZ`]. All images
/// arrive with positive sign, so without it the late tail carries a
/// growing DC component that stretches the measured decay.
pub fn simulate_rir(room: &ShoeboxRoom, src: &Point, mic: &Point, fs: u32) -> Result<Rir> {
    if fs == 0 {
        return Err(Error::InvalidArgument("sample rate must be positive".into()));
    }
    for (name, p) in [("source", src), ("microphone", mic)] {
        if !room.contains(p) {
            return Err(Error::Geometry(format!("{name} at {p:?} is outside the room {:?}", room.dims)));
        }
    }
    let d0 = distance(src, mic);
    if d0 < 1e-6 {
        return Err(Error::Geometry("source and microphone coincide".into()));
    }
    let fs_f = fs as f64;
    let direct = d0 / SPEED_OF_SOUND * fs_f;
    let beta = room.reflection();
    let tail_secs = room.slowest_decay_secs(TAIL_DB).unwrap_or(0.0);
    let len = (direct + tail_secs * fs_f).ceil() as usize + 2;
    let mut taps = vec![0.0; len];
    let max_dist = (len - 1) as f64 / fs_f * SPEED_OF_SOUND;

    if beta == 0.0 {
        taps[direct.round() as usize] = 1.0 / (4.0 * PI * d0);
        return Ok(Rir { sample_rate: fs, taps, source_distance: d0 });
    }

    let [lx, ly, lz] = room.dims;
    let bound = |l: f64| (max_dist / (2.0 * l)).ceil() as i64 + 1;
    let (nx_max, ny_max, nz_max) = (bound(lx), bound(ly), bound(lz));
    let ln_beta = beta.ln();
    let axis = |n: i64, q: i64, s: f64, m: f64, l: f64| {
        let pos = (1 - 2 * q) as f64 * s + 2.0 * n as f64 * l;
        (pos - m, (n - q).abs() + n.abs())
    };
    for qx in 0..2 {
        for nx in -nx_max..=nx_max {
            let (dx, kx) = axis(nx, qx, src[0], mic[0], lx);
            if dx.abs() > max_dist {
                continue;
            }
            for qy in 0..2 {
                for ny in -ny_max..=ny_max {
                    let (dy, ky) = axis(ny, qy, src[1], mic[1], ly);
                    let dxy2 = dx * dx + dy * dy;
                    if dxy2 > max_dist * max_dist {
                        continue;
                    }
                    for qz in 0..2 {
                        for nz in -nz_max..=nz_max {
                            let (dz, kz) = axis(nz, qz, src[2], mic[2], lz);
                            let d = (dxy2 + dz * dz).sqrt();
                            if d > max_dist {
                                continue;
                            }
                            let idx = (d / SPEED_OF_SOUND * fs_f).round() as usize;
                            if idx >= len {
                                continue;
                            }
                            let gain = ((kx + ky + kz) as f64 * ln_beta).exp();
                            taps[idx] += gain / (4.0 * PI * d);
                        }
                    }
                }
            }
        }
    }
    highpass(&mut taps, fs_f);
    Ok(Rir { sample_rate: fs, taps, source_distance: d0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anechoic_is_a_single_tap() {
        let room = ShoeboxRoom::anechoic([6.0, 5.0, 3.0]).unwrap();
        let src = [3.0, 2.5, 1.2];
        let mic = [3.0, 1.0, 1.2];
        let rir = simulate_rir(&room, &src, &mic, 16_000).unwrap();
        let d = 1.5;
        let idx = (d / 343.0 * 16_000.0_f64).round() as usize;
        assert_eq!(rir.onset(), Some(idx));
        assert!((rir.taps[idx] - 1.0 / (4.0 * PI * d)).abs() < 1e-15);
        let floor = rir.taps[idx] * 1e-6;
        assert!(rir.taps.iter().enumerate().all(|(i, &t)| i == idx || t.abs() <= floor));
    }

    #[test]
    fn mirror_symmetric_mics_get_identical_responses() {
        let room = ShoeboxRoom::from_t60([6.0, 5.0, 3.0], 0.3, AbsorptionModel::default()).unwrap();
        let src = [3.0, 2.7, 1.2];
        let a = simulate_rir(&room, &src, &[2.9, 1.0, 1.2], 16_000).unwrap();
        let b = simulate_rir(&room, &src, &[3.1, 1.0, 1.2], 16_000).unwrap();
        assert_eq!(a.taps.len(), b.taps.len());
        for (x, y) in a.taps.iter().zip(&b.taps) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn geometry_errors() {
        let room = ShoeboxRoom::from_t60([6.0, 5.0, 3.0], 0.3, AbsorptionModel::Eyring).unwrap();
        assert!(simulate_rir(&room, &[7.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 16_000).is_err());
        assert!(simulate_rir(&room, &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], 16_000).is_err());
        assert!(ShoeboxRoom::from_t60([6.0, 5.0, 3.0], 0.1, AbsorptionModel::Sabine).is_err());
        assert!(ShoeboxRoom::from_t60([6.0, 5.0, 3.0], 0.1, AbsorptionModel::Eyring).is_ok());
        assert!(ShoeboxRoom::from_t60([6.0, 5.0, 3.0], 0.1, AbsorptionModel::ImageDecay).is_ok());
    }

    #[test]
    fn cube_image_decay_is_between_sabine_and_slowest_axis() {
        let room = ShoeboxRoom::new([4.0, 4.0, 4.0], 0.2).unwrap();
        let t = room.expected_t60().unwrap();
        let a = -(0.8f64).ln();
        // mean reflection rate 3/(2L) and slowest 1/L
        let mean_rate = SPEED_OF_SOUND * a * 1.5 / 4.0;
        let slow_rate = SPEED_OF_SOUND * a / 4.0;
        assert!(t > 6.0 * LN_10 / mean_rate && t < 6.0 * LN_10 / slow_rate, "{t}");
    }

    #[test]
    fn requested_t60_is_measured() {
        let room = ShoeboxRoom::from_t60([6.0, 5.0, 3.0], 0.3, AbsorptionModel::ImageDecay).unwrap();
        assert!((room.expected_t60().unwrap() - 0.3).abs() < 1e-9);
        let rir = simulate_rir(&room, &[4.2, 2.1, 1.2], &[3.0, 1.0, 1.2], 16_000).unwrap();
        let t = crate::room::measure_t60(&rir).unwrap();
        assert!((t - 0.3).abs() <= 0.25 * 0.3, "{t}");
    }

    #[test]
    fn direct_path_is_earliest_and_correctly_scaled() {
        let room = ShoeboxRoom::from_t60([6.0, 5.0, 3.0], 0.16, AbsorptionModel::default()).unwrap();
        let src = [1.3, 3.1, 1.5];
        let mic = [3.0, 1.0, 1.2];
        let rir = simulate_rir(&room, &src, &mic, 16_000).unwrap();
        assert_eq!(rir.onset(), Some(rir.direct_delay()));
        let d = distance(&src, &mic);
        assert!((rir.taps[rir.direct_delay()] - 1.0 / (4.0 * PI * d)).abs() < 1e-15);
    }
}
