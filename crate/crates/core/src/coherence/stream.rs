use super::config::{CoherenceConfig, GlobalForgetting};
use super::features::LstscFeatures;
use super::rtf::{check_specs, short_term_whitened_rtf, WhitenedRtf};
use super::tracker::{coherence, lambda_schedule, mask_activity, warped_coherence, TrackerState};
use crate::enhance::{BandedFeatures, EstimatorInput, MaskEstimator};
use crate::erb::ErbFilterbank;
use crate::error::{Error, Result};
use crate::signal::{validate_row, ComplexSpectrogram, Mask, PIPELINE_SAMPLE_RATE};

/// Everything computed for one frame.
#[derive(Debug, Clone)]
pub struct FrameOutput {
    pub frame: usize,
    pub rtf: WhitenedRtf,
    pub gamma_local: Vec<f64>,
    pub gamma_global: Vec<f64>,
    pub gamma_local_warped: Vec<f64>,
    pub gamma_global_warped: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Global tracking was frozen by the previous frame's mask.
    pub halted: bool,
    pub mask: Option<Vec<f64>>,
}

/// Frame-by-frame feature computation over a set of channel spectrograms,
/// reference microphone first.
///
/// Each frame is compared against the trackers' state from the previous
/// frame before the trackers absorb it. Both trackers start from the
/// first frame's observation.
#[derive(Debug)]
pub struct LstscStream<'a> {
    specs: &'a [ComplexSpectrogram],
    cfg: CoherenceConfig,
    local: Option<TrackerState>,
    global: Option<TrackerState>,
    prev_mask: Vec<f64>,
    next: usize,
    erb: Option<ErbFilterbank>,
}

impl<'a> LstscStream<'a> {
    pub fn new(specs: &'a [ComplexSpectrogram], cfg: CoherenceConfig) -> Result<Self> {
        cfg.validate()?;
        check_specs(specs)?;
        let bins = specs[0].bins();
        let erb = match cfg.erb_bands {
            Some(b) => Some(ErbFilterbank::design(PIPELINE_SAMPLE_RATE, 2 * (bins - 1), b)?),
            None => None,
        };
        Ok(Self { specs, cfg, local: None, global: None, prev_mask: vec![0.0; bins], next: 0, erb })
    }

    pub fn config(&self) -> &CoherenceConfig {
        &self.cfg
    }

    pub fn frames(&self) -> usize {
        self.specs[0].frames()
    }

    pub fn bins(&self) -> usize {
        self.specs[0].bins()
    }

    pub fn next_frame(&self) -> usize {
        self.next
    }

    pub fn local_state(&self) -> Option<&TrackerState> {
        self.local.as_ref()
    }

    pub fn global_state(&self) -> Option<&TrackerState> {
        self.global.as_ref()
    }

    /// Mask row that will gate the next frame (zeros before any feedback).
    pub fn previous_mask(&self) -> &[f64] {
        &self.prev_mask
    }

    pub fn filterbank(&self) -> Option<&ErbFilterbank> {
        self.erb.as_ref()
    }

    /// Processes the next frame. Returns `None` once all frames are done.
    pub fn step(&mut self, estimator: Option<&mut (dyn MaskEstimator + '_)>) -> Result<Option<FrameOutput>> {
        let l = self.next;
        if l >= self.frames() {
            return Ok(None);
        }
        let eps = self.cfg.epsilon;
        let bins = self.bins();
        let r = short_term_whitened_rtf(self.specs, l, self.cfg.half_window, eps)?;
        let local = self.local.get_or_insert_with(|| TrackerState::from_observation(&r));
        let global = self.global.get_or_insert_with(|| TrackerState::from_observation(&r));

        let warp = self.cfg.apply_arcsine;
        let compare = |state: &TrackerState| -> (Vec<f64>, Vec<f64>) {
            (0..bins)
                .map(|f| {
                    let rbar = state.whitened(f, eps);
                    let g = coherence(r.bin(f), &rbar);
                    (g, if warp { warped_coherence(r.bin(f), &rbar) } else { g })
                })
                .unzip()
        };
        let (gamma_local, gamma_local_warped) = compare(local);
        local.recursive_update(&r, &vec![self.cfg.lambda_local; bins])?;

        let (lambda, halted) = match self.cfg.lambda_global {
            GlobalForgetting::Fixed(v) => (vec![v; bins], false),
            GlobalForgetting::TimeVarying => (
                lambda_schedule(&self.prev_mask, &gamma_local, self.cfg.beta),
                mask_activity(&self.prev_mask) > self.cfg.beta,
            ),
        };
        let (gamma_global, gamma_global_warped) = compare(global);
        global.recursive_update(&r, &lambda)?;

        let mask = match estimator {
            None => None,
            Some(est) => {
                let reference_magnitude: Vec<f64> = self.specs[0].frame(l).iter().map(|z| z.norm()).collect();
                let banded = match &self.erb {
                    Some(fb) => Some((fb.pool_feature(&gamma_local_warped)?, fb.pool_feature(&gamma_global_warped)?)),
                    None => None,
                };
                let input = EstimatorInput {
                    frame: l,
                    reference_magnitude: &reference_magnitude,
                    gamma_local_warped: &gamma_local_warped,
                    gamma_global_warped: &gamma_global_warped,
                    banded: banded
                        .as_ref()
                        .map(|(lw, gw)| BandedFeatures { gamma_local_warped: lw, gamma_global_warped: gw }),
                };
                let row = est.estimate(&input);
                if row.len() != bins {
                    return Err(Error::ShapeMismatch(format!(
                        "estimator returned {} mask values for {bins} bins",
                        row.len()
                    )));
                }
                validate_row(&row, l)?;
                self.prev_mask.copy_from_slice(&row);
                Some(row)
            }
        };

        self.next += 1;
        Ok(Some(FrameOutput {
            frame: l,
            rtf: r,
            gamma_local,
            gamma_global,
            gamma_local_warped,
            gamma_global_warped,
            lambda,
            halted,
            mask,
        }))
    }
}

/// Features for a whole clip, with optional mask feedback. Features stay
/// per-bin even when the configuration requests ERB bands; use
/// [`LstscFeatures::pooled`] or [`model_features`] for the banded form.
pub fn compute_lstsc(
    specs: &[ComplexSpectrogram],
    cfg: &CoherenceConfig,
    estimator: Option<&mut (dyn MaskEstimator + '_)>,
) -> Result<LstscFeatures> {
    compute_lstsc_with_mask(specs, cfg, estimator).map(|(f, _)| f)
}

/// Like [`compute_lstsc`], also returning the estimator's mask.
pub fn compute_lstsc_with_mask(
    specs: &[ComplexSpectrogram],
    cfg: &CoherenceConfig,
    mut estimator: Option<&mut (dyn MaskEstimator + '_)>,
) -> Result<(LstscFeatures, Option<Mask>)> {
    let mut stream = LstscStream::new(specs, *cfg)?;
    let bins = stream.bins();
    let mut feats = LstscFeatures::with_capacity(stream.frames(), bins, cfg.warm_up_frames());
    let mut mask = estimator.as_ref().map(|_| Mask::empty(bins));
    while let Some(out) = stream.step(estimator.as_deref_mut())? {
        feats.gamma_local.extend_from_slice(&out.gamma_local);
        feats.gamma_global.extend_from_slice(&out.gamma_global);
        feats.gamma_local_warped.extend_from_slice(&out.gamma_local_warped);
        feats.gamma_global_warped.extend_from_slice(&out.gamma_global_warped);
        feats.lambda_trace.extend_from_slice(&out.lambda);
        feats.low_energy.extend_from_slice(out.rtf.low_energy());
        feats.halted.push(out.halted);
        feats.frames += 1;
        if let (Some(m), Some(row)) = (mask.as_mut(), out.mask.as_ref()) {
            m.push_row(row)?;
        }
    }
    Ok((feats, mask))
}

/// The feature form a configuration asks for: ERB-pooled when
/// `erb_bands` is set, per-bin otherwise.
pub fn model_features(features: &LstscFeatures, cfg: &CoherenceConfig) -> Result<LstscFeatures> {
    match cfg.erb_bands {
        Some(b) if !features.banded => {
            let fb = ErbFilterbank::design(PIPELINE_SAMPLE_RATE, 2 * (features.bins() - 1), b)?;
            features.pooled(&fb)
        }
        _ => Ok(features.clone()),
    }
}
