use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::erb::ErbFilterbank;
use crate::error::{Error, Result};

/// Magic bytes of the feature container.
pub const LSTS_MAGIC: &[u8; 4] = b"LSTS";
pub const LSTS_VERSION: u32 = 1;

/// Feature planes, in export order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    GammaLocal,
    GammaGlobal,
    GammaGlobalWarped,
    Lambda,
    GammaLocalWarped,
}

impl Plane {
    /// Planes written to `.lsts` files, in order.
    pub const EXPORTED: [Plane; 4] = [Plane::GammaLocal, Plane::GammaGlobal, Plane::GammaGlobalWarped, Plane::Lambda];
}

/// Per-bin (or per-band) coherence features of a whole clip. Every plane
/// is `frames x bins`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LstscFeatures {
    pub(crate) frames: usize,
    pub(crate) bins: usize,
    pub gamma_local: Vec<f64>,
    pub gamma_global: Vec<f64>,
    /// Arcsine-warped coherences when the configuration asks for the
    /// warp, plain copies otherwise. These are what estimators see.
    pub gamma_local_warped: Vec<f64>,
    pub gamma_global_warped: Vec<f64>,
    /// Forgetting factor applied to the global tracker.
    pub lambda_trace: Vec<f64>,
    /// Bins whose short-term RTF fell back to placeholders.
    pub low_energy: Vec<bool>,
    /// Frames where mask feedback froze the global tracker.
    pub halted: Vec<bool>,
    pub warm_up_frames: usize,
    pub banded: bool,
}

impl LstscFeatures {
    pub(crate) fn with_capacity(frames: usize, bins: usize, warm_up_frames: usize) -> Self {
        let n = frames * bins;
        Self {
            frames: 0,
            bins,
            gamma_local: Vec::with_capacity(n),
            gamma_global: Vec::with_capacity(n),
            gamma_local_warped: Vec::with_capacity(n),
            gamma_global_warped: Vec::with_capacity(n),
            lambda_trace: Vec::with_capacity(n),
            low_energy: Vec::with_capacity(n),
            halted: Vec::with_capacity(frames),
            warm_up_frames,
            banded: false,
        }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Frequency bins, or bands once pooled.
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn plane(&self, p: Plane) -> &[f64] {
        match p {
            Plane::GammaLocal => &self.gamma_local,
            Plane::GammaGlobal => &self.gamma_global,
            Plane::GammaGlobalWarped => &self.gamma_global_warped,
            Plane::GammaLocalWarped => &self.gamma_local_warped,
            Plane::Lambda => &self.lambda_trace,
        }
    }

    pub fn row(&self, p: Plane, l: usize) -> &[f64] {
        &self.plane(p)[l * self.bins..(l + 1) * self.bins]
    }

    pub fn is_warm_up(&self, l: usize) -> bool {
        l < self.warm_up_frames
    }

    /// ERB-pools every plane. A band is flagged low-energy only when all
    /// bins of its support are.
    pub fn pooled(&self, fb: &ErbFilterbank) -> Result<Self> {
        if self.banded || fb.num_bins() != self.bins {
            return Err(Error::ShapeMismatch(format!(
                "cannot pool {} {} with a {}-bin filterbank",
                self.bins,
                if self.banded { "bands" } else { "bins" },
                fb.num_bins()
            )));
        }
        let bands = fb.num_bands();
        let mut out = Self::with_capacity(self.frames, bands, self.warm_up_frames);
        for l in 0..self.frames {
            out.gamma_local.extend(fb.pool_feature(self.row(Plane::GammaLocal, l))?);
            out.gamma_global.extend(fb.pool_feature(self.row(Plane::GammaGlobal, l))?);
            out.gamma_local_warped.extend(fb.pool_feature(self.row(Plane::GammaLocalWarped, l))?);
            out.gamma_global_warped.extend(fb.pool_feature(self.row(Plane::GammaGlobalWarped, l))?);
            out.lambda_trace.extend(fb.pool_feature(self.row(Plane::Lambda, l))?);
            let flags = &self.low_energy[l * self.bins..(l + 1) * self.bins];
            out.low_energy.extend((0..bands).map(|b| flags[fb.support(b)].iter().all(|&x| x)));
        }
        out.frames = self.frames;
        out.halted = self.halted.clone();
        out.banded = true;
        Ok(out)
    }

    /// Little-endian container: magic, version, `(frames, bins, planes)` as
    /// `u32`, then each plane as row-major `f32`.
    pub fn write_lsts<W: Write>(&self, w: W) -> std::io::Result<()> {
        let planes: Vec<&[f64]> = Plane::EXPORTED.iter().map(|&p| self.plane(p)).collect();
        write_planes(w, self.frames, self.bins, &planes)
    }

    /// `frame,bin,gamma_local,gamma_global,gamma_global_warped,lambda`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("frame,bin,gamma_local,gamma_global,gamma_global_warped,lambda\n");
        for l in 0..self.frames {
            for f in 0..self.bins {
                let i = l * self.bins + f;
                let _ = writeln!(
                    s,
                    "{l},{f},{},{},{},{}",
                    self.gamma_local[i], self.gamma_global[i], self.gamma_global_warped[i], self.lambda_trace[i]
                );
            }
        }
        s
    }
}

/// Writes arbitrary equally-shaped planes in the `.lsts` layout.
pub fn write_planes<W: Write>(mut w: W, frames: usize, bins: usize, planes: &[&[f64]]) -> std::io::Result<()> {
    w.write_all(LSTS_MAGIC)?;
    for v in [LSTS_VERSION, frames as u32, bins as u32, planes.len() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    for plane in planes {
        debug_assert_eq!(plane.len(), frames * bins);
        for &x in plane.iter() {
            w.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    w.flush()
}

/// Decoded `.lsts` container.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFile {
    pub version: u32,
    pub frames: usize,
    pub bins: usize,
    pub planes: Vec<Vec<f32>>,
}

impl FeatureFile {
    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| Error::Format(e.to_string()))?;
        if bytes.len() < 20 || &bytes[..4] != LSTS_MAGIC {
            return Err(Error::Format("missing LSTS header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap());
        let (version, frames, bins, n) = (word(0), word(1) as usize, word(2) as usize, word(3) as usize);
        if version != LSTS_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let body = &bytes[20..];
        if body.len() != frames * bins * n * 4 {
            return Err(Error::Format(format!(
                "body has {} bytes, header implies {}",
                body.len(),
                frames * bins * n * 4
            )));
        }
        let values: Vec<f32> = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        let planes = values.chunks(frames * bins).take(n).map(<[f32]>::to_vec).collect();
        Ok(Self { version, frames, bins, planes })
    }
}
