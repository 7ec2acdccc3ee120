use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reported value for a numerically perfect estimate; its negative is
/// reported for an estimate with no component along the reference.
pub const SI_SDR_CAP_DB: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiSdrReport {
    pub value_db: f64,
    /// Optimal scaling of the reference onto the estimate.
    pub projection_gain: f64,
}

/// Scale-invariant signal-to-distortion ratio over the whole signal.
pub fn si_sdr(reference: &[f64], estimate: &[f64]) -> Result<SiSdrReport> {
    if reference.len() != estimate.len() {
        return Err(Error::ShapeMismatch(format!(
            "reference has {} samples, estimate {}",
            reference.len(),
            estimate.len()
        )));
    }
    let ref_energy: f64 = reference.iter().map(|x| x * x).sum();
    if ref_energy == 0.0 {
        return Err(Error::InvalidArgument("reference signal is all zero".into()));
    }
    let dot: f64 = reference.iter().zip(estimate).map(|(r, e)| r * e).sum();
    let alpha = dot / ref_energy;
    let target = alpha * alpha * ref_energy;
    let residual: f64 = reference.iter().zip(estimate).map(|(r, e)| (e - alpha * r).powi(2)).sum();
    let value_db = if target == 0.0 {
        -SI_SDR_CAP_DB
    } else if residual <= target * 10f64.powf(-SI_SDR_CAP_DB / 10.0) {
        SI_SDR_CAP_DB
    } else {
        10.0 * (target / residual).log10()
    };
    Ok(SiSdrReport { value_db: value_db.clamp(-SI_SDR_CAP_DB, SI_SDR_CAP_DB), projection_gain: alpha })
}
