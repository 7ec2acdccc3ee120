//! ERB-rate band pooling of spectra and per-bin features.
//!
//! Band centers are spaced uniformly on the ERB-rate scale from 0 Hz to
//! Nyquist. Each band has a triangular response that peaks at its own
//! center and reaches zero at its neighbours' centers, so the weights of
//! adjacent bands sum to one.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};

/// ERB-rate (in Cams) of a frequency in Hz.
pub fn hz_to_erb_rate(hz: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * hz).log10()
}

pub fn erb_rate_to_hz(erb: f64) -> f64 {
    (10f64.powf(erb / 21.4) - 1.0) / 0.00437
}

/// Equivalent rectangular bandwidth at `hz`.
pub fn erb_bandwidth(hz: f64) -> f64 {
    24.7 * (4.37 * hz / 1000.0 + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErbFilterbank {
    sample_rate: u32,
    fft_size: usize,
    bins: usize,
    centers_hz: Vec<f64>,
    /// `bands x bins`, row-major.
    weights: Vec<f64>,
    supports: Vec<Range<usize>>,
    normalizers: Vec<f64>,
}

impl ErbFilterbank {
    pub fn design(sample_rate: u32, fft_size: usize, bands: usize) -> Result<Self> {
        if sample_rate == 0 || fft_size < 2 || !fft_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "filterbank needs a positive rate and an even fft size (got {sample_rate} Hz, {fft_size})"
            )));
        }
        let bins = fft_size / 2 + 1;
        if bands < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 bands (got {bands})")));
        }
        if bands > bins {
            return Err(Error::InvalidConfig(format!("{bands} bands exceed {bins} frequency bins")));
        }
        let nyquist = sample_rate as f64 / 2.0;
        let top = hz_to_erb_rate(nyquist);
        let centers_hz: Vec<f64> = (0..bands)
            .map(|b| if b + 1 == bands { nyquist } else { erb_rate_to_hz(top * b as f64 / (bands - 1) as f64) })
            .collect();
        let bin_hz = |k: usize| k as f64 * sample_rate as f64 / fft_size as f64;

        let mut weights = vec![0.0; bands * bins];
        for b in 0..bands {
            let c = centers_hz[b];
            let lo = (b > 0).then(|| centers_hz[b - 1]);
            let hi = (b + 1 < bands).then(|| centers_hz[b + 1]);
            let row = &mut weights[b * bins..(b + 1) * bins];
            for (k, w) in row.iter_mut().enumerate() {
                let f = bin_hz(k);
                *w = if f == c {
                    1.0
                } else if f < c {
                    lo.map_or(0.0, |lo| if f > lo { (f - lo) / (c - lo) } else { 0.0 })
                } else {
                    hi.map_or(0.0, |hi| if f < hi { (hi - f) / (hi - c) } else { 0.0 })
                };
            }
            // Bands narrower than the bin spacing may miss every bin; give
            // them the bin nearest their center.
            if row.iter().all(|&w| w == 0.0) {
                let k = ((c / nyquist) * (bins - 1) as f64).round() as usize;
                row[k.min(bins - 1)] = 1.0;
            }
        }

        let supports = (0..bands)
            .map(|b| {
                let row = &weights[b * bins..(b + 1) * bins];
                let first = row.iter().position(|&w| w > 0.0).unwrap_or(0);
                let last = row.iter().rposition(|&w| w > 0.0).unwrap_or(0);
                first..last + 1
            })
            .collect();
        let normalizers = (0..bands).map(|b| weights[b * bins..(b + 1) * bins].iter().sum()).collect();

        Ok(Self { sample_rate, fft_size, bins, centers_hz, weights, supports, normalizers })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn fft_size(&self) -> usize {
        self.fft_size
    }

    pub fn num_bands(&self) -> usize {
        self.centers_hz.len()
    }

    pub fn num_bins(&self) -> usize {
        self.bins
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn weights(&self, band: usize) -> &[f64] {
        &self.weights[band * self.bins..(band + 1) * self.bins]
    }

    pub fn weight(&self, band: usize, bin: usize) -> f64 {
        self.weights[band * self.bins + bin]
    }

    /// Bins with nonzero weight in `band`.
    pub fn support(&self, band: usize) -> Range<usize> {
        self.supports[band].clone()
    }

    /// Sum of the band's weights.
    pub fn normalizer(&self, band: usize) -> f64 {
        self.normalizers[band]
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.bins {
            return Err(Error::ShapeMismatch(format!("frame has {n} bins, filterbank expects {}", self.bins)));
        }
        Ok(())
    }

    /// Unnormalized weighted sum of a power spectrum per band.
    pub fn pool_spectrum(&self, power: &[f64]) -> Result<Vec<f64>> {
        self.check_len(power.len())?;
        if let Some(bad) = power.iter().find(|p| !(**p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("power spectrum entry {bad} is negative")));
        }
        Ok(self.weighted_sums(power))
    }

    /// Weighted mean of a per-bin feature per band.
    pub fn pool_feature(&self, feature: &[f64]) -> Result<Vec<f64>> {
        self.check_len(feature.len())?;
        Ok(self.weighted_sums(feature).into_iter().zip(&self.normalizers).map(|(s, p)| s / p).collect())
    }

    fn weighted_sums(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_bands())
            .map(|b| {
                let r = self.support(b);
                self.weights(b)[r.clone()].iter().zip(&x[r]).map(|(w, v)| w * v).sum()
            })
            .collect()
    }

    /// One row per band: index, center, support, normalizer, then the
    /// full weight row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("band,center_hz,erb_hz,first_bin,last_bin,normalizer");
        for k in 0..self.bins {
            let _ = write!(out, ",w{k}");
        }
        out.push('\n');
        for b in 0..self.num_bands() {
            let s = self.support(b);
            let c = self.centers_hz[b];
            let _ = write!(out, "{b},{c},{},{},{},{}", erb_bandwidth(c), s.start, s.end - 1, self.normalizers[b]);
            for w in self.weights(b) {
                let _ = write!(out, ",{w}");
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fb48() -> ErbFilterbank {
        ErbFilterbank::design(16_000, 512, 48).unwrap()
    }

    #[test]
    fn default_design_shape() {
        let fb = fb48();
        assert_eq!(fb.num_bands(), 48);
        assert_eq!(fb.num_bins(), 257);
        assert!((0..48).all(|b| fb.normalizer(b) > 0.0));
        assert!(fb.centers_hz().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(fb.centers_hz()[0], 0.0);
        assert_eq!(fb.centers_hz()[47], 8000.0);
        for k in 0..257 {
            assert!((0..48).any(|b| fb.weight(b, k) > 0.0), "bin {k} uncovered");
        }
    }

    #[test]
    fn two_band_design() {
        let fb = ErbFilterbank::design(16_000, 512, 2).unwrap();
        assert_eq!(fb.centers_hz(), &[0.0, 8000.0]);
        for k in 0..257 {
            assert!((fb.weight(0, k) + fb.weight(1, k) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn design_errors() {
        assert!(ErbFilterbank::design(16_000, 512, 258).is_err());
        assert!(ErbFilterbank::design(16_000, 512, 1).is_err());
        assert!(ErbFilterbank::design(16_000, 511, 8).is_err());
    }

    #[test]
    fn spectrum_pooling_examples() {
        let fb = fb48();
        assert!(fb.pool_spectrum(&[0.0; 257]).unwrap().iter().all(|&v| v == 0.0));
        let mut imp = vec![0.0; 257];
        imp[37] = 1.0;
        let out = fb.pool_spectrum(&imp).unwrap();
        for (b, v) in out.iter().enumerate() {
            assert_eq!(*v, fb.weight(b, 37));
        }
        let ones = fb.pool_spectrum(&[1.0; 257]).unwrap();
        for (b, v) in ones.iter().enumerate() {
            assert!((v - fb.normalizer(b)).abs() < 1e-12);
        }
        let mut neg = vec![0.0; 257];
        neg[3] = -1.0;
        assert!(fb.pool_spectrum(&neg).is_err());
        assert!(fb.pool_spectrum(&[0.0; 10]).is_err());
    }

    #[test]
    fn constant_feature_is_preserved() {
        let fb = fb48();
        for c in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            let out = fb.pool_feature(&[c; 257]).unwrap();
            assert!(out.iter().all(|v| (v - c).abs() < 1e-12));
        }
    }

    #[test]
    fn csv_dump_has_one_row_per_band() {
        let csv = fb48().to_csv();
        assert_eq!(csv.lines().count(), 49);
        assert_eq!(csv.lines().nth(1).unwrap().split(',').count(), 6 + 257);
    }

    proptest! {
        #[test]
        fn pooled_feature_is_convex_and_linear(
            x in prop::collection::vec(-1.0f64..=1.0, 257),
            y in prop::collection::vec(-1.0f64..=1.0, 257),
            a in -2.0f64..2.0,
        ) {
            let fb = fb48();
            let px = fb.pool_feature(&x).unwrap();
            for b in 0..48 {
                let s = &x[fb.support(b)];
                let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(px[b] >= lo - 1e-12 && px[b] <= hi + 1e-12);
            }
            let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + q).collect();
            let pz = fb.pool_feature(&z).unwrap();
            let py = fb.pool_feature(&y).unwrap();
            for b in 0..48 {
                prop_assert!((pz[b] - (a * px[b] + py[b])).abs() < 1e-12);
            }
        }
    }
}
