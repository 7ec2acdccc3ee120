//! Mask-based enhancement of the reference channel.
//!
//! A [`MaskEstimator`] turns each frame's warped coherence features into a
//! soft mask. The mask both gates the reference spectrum and, one frame
//! later, decides whether the global tracker may adapt. The built-in
//! [`HeuristicMask`] stands in for a trained speaker-conditioned model.

use crate::coherence::{compute_lstsc_with_mask, CoherenceConfig, LstscFeatures};
use crate::error::{Error, Result};
use crate::signal::{apply_mask, Mask, MultichannelAudio, Stft, StftConfig};

/// ERB-pooled copies of the warped features.
#[derive(Debug, Clone, Copy)]
pub struct BandedFeatures<'a> {
    pub gamma_local_warped: &'a [f64],
    pub gamma_global_warped: &'a [f64],
}

/// What an estimator sees for one frame.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorInput<'a> {
    pub frame: usize,
    pub reference_magnitude: &'a [f64],
    pub gamma_local_warped: &'a [f64],
    pub gamma_global_warped: &'a [f64],
    pub banded: Option<BandedFeatures<'a>>,
}

/// Frame-wise causal mask producer. Called once per frame, in order; must
/// return one value in `[0, 1]` per frequency bin.
pub trait MaskEstimator {
    fn estimate(&mut self, input: &EstimatorInput<'_>) -> Vec<f64>;
}

impl<F> MaskEstimator for F
where
    F: FnMut(&EstimatorInput<'_>) -> Vec<f64>,
{
    fn estimate(&mut self, input: &EstimatorInput<'_>) -> Vec<f64> {
        self(input)
    }
}

/// Passes directional bins that do not match the long-term spatial average:
/// `clamp(gl', 0, 1) * (1 - clamp(gg', 0, 1))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicMask;

pub fn heuristic_mask(gamma_local_warped: &[f64], gamma_global_warped: &[f64]) -> Vec<f64> {
    gamma_local_warped
        .iter()
        .zip(gamma_global_warped)
        .map(|(&l, &g)| l.clamp(0.0, 1.0) * (1.0 - g.clamp(0.0, 1.0)))
        .collect()
}

impl MaskEstimator for HeuristicMask {
    fn estimate(&mut self, input: &EstimatorInput<'_>) -> Vec<f64> {
        heuristic_mask(input.gamma_local_warped, input.gamma_global_warped)
    }
}

/// Same gain everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ConstantMask(pub f64);

impl MaskEstimator for ConstantMask {
    fn estimate(&mut self, input: &EstimatorInput<'_>) -> Vec<f64> {
        vec![self.0; input.gamma_local_warped.len()]
    }
}

#[derive(Debug, Clone)]
pub struct EnhanceResult {
    /// Mono, same length and rate as the input.
    pub enhanced: MultichannelAudio,
    pub mask: Mask,
    pub features: LstscFeatures,
}

impl EnhanceResult {
    pub fn warm_up_frames(&self) -> usize {
        self.features.warm_up_frames
    }
}

/// Runs features, mask estimation and resynthesis over a clip.
///
/// Lookahead is `half_window` frames; the output is trimmed (or
/// zero-extended past the last full frame) to the input length.
pub fn enhance_stream(
    mixture: &MultichannelAudio,
    cfg: &CoherenceConfig,
    stft_cfg: &StftConfig,
    estimator: &mut dyn MaskEstimator,
) -> Result<EnhanceResult> {
    mixture.require_pipeline_rate()?;
    if mixture.num_channels() < 2 {
        return Err(Error::TooFewMicrophones(mixture.num_channels()));
    }
    let engine = Stft::new(*stft_cfg)?;
    let specs = mixture.channels().iter().map(|c| engine.forward(c)).collect::<Result<Vec<_>>>()?;
    let (features, mask) = compute_lstsc_with_mask(&specs, cfg, Some(estimator))?;
    let mask = mask.expect("estimator was supplied");
    let masked = apply_mask(&specs[0], &mask)?;
    let mut samples = engine.inverse(&masked)?;
    samples.resize(mixture.len(), 0.0);
    let enhanced = MultichannelAudio::mono(mixture.sample_rate(), samples)?;
    Ok(EnhanceResult { enhanced, mask, features })
}
