use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::ComplexSpectrogram;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Short-term cross/auto spectra of one time-frequency bin, reference
/// microphone first.
#[derive(Debug, Clone, PartialEq)]
pub struct RtfEstimate {
    /// `sum_n Y^m(n,f) conj(Y^1(n,f))` for `m = 2..M`.
    pub cross_spectra: Vec<Complex64>,
    /// `sum_n |Y^1(n,f)|^2`.
    pub auto_spectrum: f64,
    /// Cross over auto, `None` where the auto spectrum is at or below epsilon.
    pub ratio: Option<Vec<Complex64>>,
}

impl RtfEstimate {
    pub fn compute(specs: &[ComplexSpectrogram], l: usize, f: usize, half_window: usize, epsilon: f64) -> Self {
        let frames = specs[0].frames();
        let lo = l.saturating_sub(half_window);
        let hi = (l + half_window).min(frames - 1);
        let mut auto_spectrum = 0.0;
        let mut cross_spectra = vec![Complex64::new(0.0, 0.0); specs.len() - 1];
        for n in lo..=hi {
            let y1 = specs[0].get(n, f);
            auto_spectrum += y1.norm_sqr();
            for (c, spec) in cross_spectra.iter_mut().zip(&specs[1..]) {
                *c += spec.get(n, f) * y1.conj();
            }
        }
        let ratio = (auto_spectrum > epsilon).then(|| cross_spectra.iter().map(|c| c / auto_spectrum).collect());
        Self { cross_spectra, auto_spectrum, ratio }
    }

    /// Unit-modulus entries; `None` marks a low-energy bin whose entries are
    /// replaced by `1 + 0j`.
    pub fn whiten(&self, epsilon: f64) -> (Vec<Complex64>, bool) {
        match &self.ratio {
            None => (vec![ONE; self.cross_spectra.len()], true),
            Some(ratio) => {
                let mut low = false;
                let entries = ratio
                    .iter()
                    .map(|r| {
                        let m = r.norm();
                        if m > epsilon {
                            r / m
                        } else {
                            low = true;
                            ONE
                        }
                    })
                    .collect();
                (entries, low)
            }
        }
    }
}

/// Whitened short-term RTF vectors of one frame: `bins x (M - 1)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitenedRtf {
    bins: usize,
    dims: usize,
    entries: Vec<Complex64>,
    low_energy: Vec<bool>,
}

impl WhitenedRtf {
    pub fn from_parts(bins: usize, dims: usize, entries: Vec<Complex64>, low_energy: Vec<bool>) -> Result<Self> {
        if entries.len() != bins * dims || low_energy.len() != bins {
            return Err(Error::ShapeMismatch("whitened RTF parts disagree in size".into()));
        }
        Ok(Self { bins, dims, entries, low_energy })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// `M - 1`.
    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn bin(&self, f: usize) -> &[Complex64] {
        &self.entries[f * self.dims..(f + 1) * self.dims]
    }

    pub fn is_low_energy(&self, f: usize) -> bool {
        self.low_energy[f]
    }

    pub fn low_energy(&self) -> &[bool] {
        &self.low_energy
    }
}

pub(crate) fn check_specs(specs: &[ComplexSpectrogram]) -> Result<()> {
    if specs.len() < 2 {
        return Err(Error::TooFewMicrophones(specs.len()));
    }
    let (l, f) = (specs[0].frames(), specs[0].bins());
    if specs.iter().any(|s| s.frames() != l || s.bins() != f) {
        return Err(Error::ShapeMismatch("all channel spectrograms must share frames x bins".into()));
    }
    Ok(())
}

/// Whitened short-term RTF of frame `l` for every bin. Windows are
/// truncated at the spectrogram edges.
pub fn short_term_whitened_rtf(
    specs: &[ComplexSpectrogram],
    l: usize,
    half_window: usize,
    epsilon: f64,
) -> Result<WhitenedRtf> {
    check_specs(specs)?;
    if l >= specs[0].frames() {
        return Err(Error::InvalidArgument(format!("frame {l} out of range ({} frames)", specs[0].frames())));
    }
    let bins = specs[0].bins();
    let dims = specs.len() - 1;
    let mut entries = Vec::with_capacity(bins * dims);
    let mut low_energy = Vec::with_capacity(bins);
    for f in 0..bins {
        let (e, low) = RtfEstimate::compute(specs, l, f, half_window, epsilon).whiten(epsilon);
        entries.extend(e);
        low_energy.push(low);
    }
    Ok(WhitenedRtf { bins, dims, entries, low_energy })
}
