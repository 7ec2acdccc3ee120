//! Long-short-term spatial coherence (LSTSC) features for microphone arrays
//! of any size and layout, a synthetic reverberant scene generator, and a
//! mask-based enhancement loop driven by the features.
//!
//! The pipeline at a glance:
//!
//! ```no_run
//! use lstsc::coherence::{compute_lstsc, Variant};
//! use lstsc::signal::{load_wav, stft, StftConfig};
//!
//! let audio = load_wav("mixture.wav")?;
//! let cfg = StftConfig::default();
//! let specs = audio
//!     .channels()
//!     .iter()
//!     .map(|c| stft(c, &cfg))
//!     .collect::<lstsc::Result<Vec<_>>>()?;
//! let features = compute_lstsc(&specs, &Variant::Lstsc3.config(), None)?;
//! println!("{} frames x {} bins", features.frames(), features.bins());
//! # Ok::<(), lstsc::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherence;
pub mod config;
pub mod enhance;
pub mod erb;
mod error;
pub mod metrics;
pub mod room;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
