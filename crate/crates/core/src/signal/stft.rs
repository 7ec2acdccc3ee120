use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};

/// Analysis/synthesis window family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    /// Periodic square-root Hann, used for both analysis and synthesis.
    SqrtHann,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::SqrtHann => (0..len).map(|n| (PI * n as f64 / len as f64).sin()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub window: WindowKind,
}

impl Default for StftConfig {
    /// 25 ms frames, 10 ms hop, 512-point FFT at 16 kHz.
    fn default() -> Self {
        Self { frame_len: 400, hop: 160, fft_size: 512, window: WindowKind::SqrtHann }
    }
}

impl StftConfig {
    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Number of full frames that fit in `len` samples (no padding).
    pub fn num_frames(&self, len: usize) -> usize {
        if len < self.frame_len {
            0
        } else {
            1 + (len - self.frame_len) / self.hop
        }
    }

    /// Samples spanned by `frames` overlapping frames.
    pub fn span(&self, frames: usize) -> usize {
        if frames == 0 {
            0
        } else {
            (frames - 1) * self.hop + self.frame_len
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_len || self.frame_len > self.fft_size {
            return Err(Error::InvalidConfig(format!(
                "need 0 < hop <= frame_len <= fft_size (got hop={}, frame_len={}, fft_size={})",
                self.hop, self.frame_len, self.fft_size
            )));
        }
        if !self.fft_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig("fft_size must be even".into()));
        }
        // Weighted overlap-add needs a strictly positive squared-window sum
        // in the fully overlapped region.
        let w = self.window.coefficients(self.frame_len);
        let min_env = (0..self.hop)
            .map(|n| w.iter().skip(n).step_by(self.hop).map(|x| x * x).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        if min_env < 1e-8 {
            return Err(Error::InvalidConfig(format!(
                "window is not invertible at hop {} (min overlap energy {min_env:e})",
                self.hop
            )));
        }
        Ok(())
    }
}

/// One-sided spectrogram, `frames x bins`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    frames: usize,
    bins: usize,
    data: Vec<Complex64>,
}

impl ComplexSpectrogram {
    pub fn new(frames: usize, bins: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != frames * bins {
            return Err(Error::ShapeMismatch(format!(
                "spectrogram data has {} entries, expected {frames}x{bins}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("spectrogram contains non-finite values".into()));
        }
        Ok(Self { frames, bins, data })
    }

    pub fn zeros(frames: usize, bins: usize) -> Self {
        Self { frames, bins, data: vec![Complex64::new(0.0, 0.0); frames * bins] }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frame(&self, l: usize) -> &[Complex64] {
        &self.data[l * self.bins..(l + 1) * self.bins]
    }

    pub fn frame_mut(&mut self, l: usize) -> &mut [Complex64] {
        &mut self.data[l * self.bins..(l + 1) * self.bins]
    }

    pub fn get(&self, l: usize, f: usize) -> Complex64 {
        self.data[l * self.bins + f]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { frames: self.frames, bins: self.bins, data: self.data.iter().map(|z| z * k).collect() }
    }
}

/// Reusable forward/inverse transform pair for one configuration.
pub struct Stft {
    cfg: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("cfg", &self.cfg).finish()
    }
}

impl Stft {
    pub fn new(cfg: StftConfig) -> Result<Self> {
        cfg.validate()?;
        let mut planner = RealFftPlanner::<f64>::new();
        Ok(Self {
            cfg,
            window: cfg.window.coefficients(cfg.frame_len),
            forward: planner.plan_fft_forward(cfg.fft_size),
            inverse: planner.plan_fft_inverse(cfg.fft_size),
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Windowed, zero-padded one-sided DFT of `frame_len` samples.
    pub fn analyze_frame(&self, segment: &[f64], out: &mut [Complex64]) {
        debug_assert_eq!(segment.len(), self.cfg.frame_len);
        let mut buf = vec![0.0; self.cfg.fft_size];
        for ((b, &x), &w) in buf.iter_mut().zip(segment).zip(&self.window) {
            *b = x * w;
        }
        self.forward.process(&mut buf, out).expect("fft buffer sizes are fixed by the plan");
    }

    pub fn forward(&self, signal: &[f64]) -> Result<ComplexSpectrogram> {
        let cfg = &self.cfg;
        if signal.len() < cfg.frame_len {
            return Err(Error::SignalTooShort { len: signal.len(), frame_len: cfg.frame_len });
        }
        let frames = cfg.num_frames(signal.len());
        let bins = cfg.num_bins();
        let mut data = vec![Complex64::new(0.0, 0.0); frames * bins];
        let mut buf = vec![0.0; cfg.fft_size];
        for (l, row) in data.chunks_mut(bins).enumerate() {
            let start = l * cfg.hop;
            buf.iter_mut().for_each(|b| *b = 0.0);
            for (n, (b, &w)) in buf.iter_mut().zip(&self.window).enumerate() {
                *b = signal[start + n] * w;
            }
            self.forward.process(&mut buf, row).expect("fft buffer sizes are fixed by the plan");
        }
        Ok(ComplexSpectrogram { frames, bins, data })
    }

    /// Weighted overlap-add resynthesis. Output covers `span(frames)`
    /// samples; samples with no synthesis support are zero.
    pub fn inverse(&self, spec: &ComplexSpectrogram) -> Result<Vec<f64>> {
        let cfg = &self.cfg;
        if spec.bins != cfg.num_bins() {
            return Err(Error::ShapeMismatch(format!(
                "spectrogram has {} bins, configuration expects {}",
                spec.bins,
                cfg.num_bins()
            )));
        }
        let len = cfg.span(spec.frames);
        let mut out = vec![0.0; len];
        let mut env = vec![0.0; len];
        let mut time = vec![0.0; cfg.fft_size];
        let mut freq = vec![Complex64::new(0.0, 0.0); cfg.num_bins()];
        let norm = 1.0 / cfg.fft_size as f64;
        for l in 0..spec.frames {
            freq.copy_from_slice(spec.frame(l));
            // A real signal has real DC and Nyquist terms.
            freq[0].im = 0.0;
            let last = freq.len() - 1;
            freq[last].im = 0.0;
            self.inverse.process(&mut freq, &mut time).expect("fft buffer sizes are fixed by the plan");
            let start = l * cfg.hop;
            for (n, &w) in self.window.iter().enumerate() {
                out[start + n] += time[n] * norm * w;
                env[start + n] += w * w;
            }
        }
        for (y, e) in out.iter_mut().zip(&env) {
            *y = if *e > 1e-10 { *y / e } else { 0.0 };
        }
        Ok(out)
    }
}

pub fn stft(channel: &[f64], cfg: &StftConfig) -> Result<ComplexSpectrogram> {
    Stft::new(*cfg)?.forward(channel)
}

pub fn istft(spec: &ComplexSpectrogram, cfg: &StftConfig) -> Result<Vec<f64>> {
    Stft::new(*cfg)?.inverse(spec)
}

/// Range of sample indices covered by at least `frame_len / hop` frames
/// (rounded down), i.e. away from the first and last frame's ramps.
pub fn interior_range(cfg: &StftConfig, frames: usize) -> std::ops::Range<usize> {
    let span = cfg.span(frames);
    let start = cfg.frame_len.min(span);
    let end = span.saturating_sub(cfg.frame_len).max(start);
    start..end
}
