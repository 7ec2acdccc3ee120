//! Long-short-term spatial coherence.
//!
//! For every time-frequency bin a short-term relative transfer function
//! (RTF) against the reference microphone is estimated and whitened to unit
//! modulus. Two recursive trackers average these vectors, a fast local one
//! and a slow global one. The coherence between the current vector and each
//! tracker's (whitened) average is a scalar in `[-1, 1]` whatever the number
//! of microphones.

mod config;
mod features;
mod rtf;
mod stream;
mod tracker;

pub use config::{CoherenceConfig, GlobalForgetting, Variant, DEFAULT_ERB_BANDS};
pub use features::{write_planes, FeatureFile, LstscFeatures, Plane, LSTS_MAGIC, LSTS_VERSION};
pub use rtf::{short_term_whitened_rtf, RtfEstimate, WhitenedRtf};
pub use stream::{compute_lstsc, compute_lstsc_with_mask, model_features, FrameOutput, LstscStream};
pub use tracker::{
    arcsine_warp, coherence, coherence_whitened, lambda_schedule, mask_activity, warped_coherence, TrackerState,
};
