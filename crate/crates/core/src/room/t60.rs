use super::rir::Rir;
use crate::error::{Error, Result};

/// Normalized Schroeder energy decay curve in dB.
pub fn schroeder_curve_db(taps: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut curve: Vec<f64> = taps
        .iter()
        .rev()
        .map(|h| {
            acc += h * h;
            acc
        })
        .collect();
    curve.reverse();
    let total = curve.first().copied().unwrap_or(0.0);
    curve.iter().map(|e| 10.0 * (e / total).log10()).collect()
}

/// Reverberation time from a least-squares line through the -5 dB to
/// -35 dB part of the Schroeder curve, extrapolated to 60 dB.
pub fn measure_t60(rir: &Rir) -> Result<f64> {
    measure_t60_taps(&rir.taps, rir.sample_rate)
}

pub fn measure_t60_taps(taps: &[f64], sample_rate: u32) -> Result<f64> {
    if taps.is_empty() || taps.iter().all(|&t| t == 0.0) {
        return Err(Error::InvalidArgument("impulse response is empty".into()));
    }
    let curve = schroeder_curve_db(taps);
    let start = curve.iter().position(|&v| v <= -5.0).ok_or(Error::DecayRangeNotReached)?;
    let end = curve.iter().position(|&v| v <= -35.0).ok_or(Error::DecayRangeNotReached)?;
    if !curve[end].is_finite() || end <= start + 1 {
        return Err(Error::DecayRangeNotReached);
    }
    let fs = sample_rate as f64;
    let n = (end - start + 1) as f64;
    let (mut st, mut sv, mut stt, mut stv) = (0.0, 0.0, 0.0, 0.0);
    for (i, &v) in curve.iter().enumerate().take(end + 1).skip(start) {
        let t = i as f64 / fs;
        st += t;
        sv += v;
        stt += t * t;
        stv += t * v;
    }
    let slope = (n * stv - st * sv) / (n * stt - st * st);
    if !(slope < 0.0) {
        return Err(Error::DecayRangeNotReached);
    }
    Ok(-60.0 / slope)
}
