use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of ERB bands used by the banded variant.
pub const DEFAULT_ERB_BANDS: usize = 48;

/// Forgetting factor of the global (long-term) tracker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GlobalForgetting {
    Fixed(f64),
    /// Mask-gated, local-coherence-driven factor; see [`lambda_schedule`](super::lambda_schedule).
    TimeVarying,
}

/// The four preset feature settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "lstsc-1")]
    Lstsc1,
    #[serde(rename = "lstsc-2")]
    Lstsc2,
    #[serde(rename = "lstsc-3")]
    Lstsc3,
    #[serde(rename = "lstsc-4")]
    Lstsc4,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Lstsc1, Variant::Lstsc2, Variant::Lstsc3, Variant::Lstsc4];

    pub fn config(self) -> CoherenceConfig {
        let base = CoherenceConfig::default();
        match self {
            Variant::Lstsc1 => base,
            Variant::Lstsc2 => CoherenceConfig { lambda_global: GlobalForgetting::TimeVarying, ..base },
            Variant::Lstsc3 => {
                CoherenceConfig { lambda_global: GlobalForgetting::TimeVarying, apply_arcsine: true, ..base }
            }
            Variant::Lstsc4 => CoherenceConfig {
                lambda_global: GlobalForgetting::TimeVarying,
                apply_arcsine: true,
                erb_bands: Some(DEFAULT_ERB_BANDS),
                ..base
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Lstsc1 => "lstsc-1",
            Variant::Lstsc2 => "lstsc-2",
            Variant::Lstsc3 => "lstsc-3",
            Variant::Lstsc4 => "lstsc-4",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant '{s}' (expected lstsc-1..lstsc-4)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherenceConfig {
    /// Short-term averaging uses `2 * half_window + 1` frames.
    pub half_window: usize,
    pub lambda_local: f64,
    pub lambda_global: GlobalForgetting,
    /// Mean squared mask above which global tracking halts.
    pub beta: f64,
    pub epsilon: f64,
    /// Warp the coherences handed to the estimator and exported as
    /// primed planes.
    pub apply_arcsine: bool,
    /// Pool features into this many ERB bands.
    pub erb_bands: Option<usize>,
}

impl Default for CoherenceConfig {
    /// The `lstsc-1` settings.
    fn default() -> Self {
        Self {
            half_window: 1,
            lambda_local: 0.01,
            lambda_global: GlobalForgetting::Fixed(0.99),
            beta: 0.01,
            epsilon: 1e-12,
            apply_arcsine: false,
            erb_bands: None,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} is outside [0, 1]")))
            }
        };
        unit("lambda_local", self.lambda_local)?;
        if let GlobalForgetting::Fixed(l) = self.lambda_global {
            unit("lambda_global", l)?;
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig(format!("beta = {} must be positive", self.beta)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if let Some(b) = self.erb_bands {
            if b < 2 {
                return Err(Error::InvalidConfig(format!("erb_bands = {b} must be at least 2")));
            }
        }
        Ok(())
    }

    /// The preset this configuration corresponds to, if any.
    pub fn variant(&self) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.config() == *self)
    }

    pub fn is_time_varying(&self) -> bool {
        matches!(self.lambda_global, GlobalForgetting::TimeVarying)
    }

    /// Frames at the start whose short-term window or trackers are not yet settled.
    pub fn warm_up_frames(&self) -> usize {
        2 * self.half_window + 1
    }
}
