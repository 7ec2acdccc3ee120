use crate::error::{Error, Result};
use crate::signal::stft::ComplexSpectrogram;

/// Real-valued time-frequency gain, every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    frames: usize,
    bins: usize,
    data: Vec<f64>,
}

impl Mask {
    pub fn new(frames: usize, bins: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != frames * bins {
            return Err(Error::ShapeMismatch(format!(
                "mask data has {} entries, expected {frames}x{bins}",
                data.len()
            )));
        }
        validate_row(&data, 0).map_err(|e| match e {
            Error::MaskOutOfRange { bin, value, .. } => {
                Error::MaskOutOfRange { frame: bin / bins.max(1), bin: bin % bins.max(1), value }
            }
            other => other,
        })?;
        Ok(Self { frames, bins, data })
    }

    pub fn filled(frames: usize, bins: usize, value: f64) -> Result<Self> {
        Self::new(frames, bins, vec![value; frames * bins])
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.data[l * self.bins..(l + 1) * self.bins]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Appends one frame; used by streaming producers.
    pub(crate) fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.bins {
            return Err(Error::ShapeMismatch(format!("mask row has {} bins, expected {}", row.len(), self.bins)));
        }
        validate_row(row, self.frames)?;
        self.data.extend_from_slice(row);
        self.frames += 1;
        Ok(())
    }

    pub(crate) fn empty(bins: usize) -> Self {
        Self { frames: 0, bins, data: Vec::new() }
    }
}

/// Checks that every value of a mask row lies in `[0, 1]`.
pub fn validate_row(row: &[f64], frame: usize) -> Result<()> {
    match row.iter().position(|v| !(0.0..=1.0).contains(v)) {
        Some(bin) => Err(Error::MaskOutOfRange { frame, bin, value: row[bin] }),
        None => Ok(()),
    }
}

/// Element-wise gain; phase is untouched.
pub fn apply_mask(spec: &ComplexSpectrogram, mask: &Mask) -> Result<ComplexSpectrogram> {
    if spec.frames() != mask.frames() || spec.bins() != mask.bins() {
        return Err(Error::ShapeMismatch(format!(
            "spectrogram is {}x{}, mask is {}x{}",
            spec.frames(),
            spec.bins(),
            mask.frames(),
            mask.bins()
        )));
    }
    let data = spec.data().iter().zip(mask.data()).map(|(z, g)| z * g).collect();
    ComplexSpectrogram::new(spec.frames(), spec.bins(), data)
}
