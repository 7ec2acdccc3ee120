//! Framing, STFT/iSTFT, WAV I/O and spectral masking.

mod audio;
mod mask;
mod stft;

pub use audio::{load_wav, save_wav, MultichannelAudio, PIPELINE_SAMPLE_RATE};
pub use mask::{apply_mask, validate_row, Mask};
pub use stft::{interior_range, istft, stft, ComplexSpectrogram, Stft, StftConfig, WindowKind};

/// Mean power of a signal.
pub fn power(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

/// Linear convolution of `x` with `h`, truncated to `out_len` samples.
pub fn fft_convolve(x: &[f64], h: &[f64], out_len: usize) -> Vec<f64> {
    use realfft::RealFftPlanner;

    if x.is_empty() || h.is_empty() {
        return vec![0.0; out_len];
    }
    let n = (x.len() + h.len() - 1).next_power_of_two();
    let mut planner = RealFftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a = vec![0.0; n];
    a[..x.len()].copy_from_slice(x);
    let mut b = vec![0.0; n];
    b[..h.len()].copy_from_slice(h);
    let mut fa = fwd.make_output_vec();
    let mut fb = fwd.make_output_vec();
    fwd.process(&mut a, &mut fa).expect("sized by plan");
    fwd.process(&mut b, &mut fb).expect("sized by plan");
    for (p, q) in fa.iter_mut().zip(&fb) {
        *p *= q;
    }
    fa[0].im = 0.0;
    let last = fa.len() - 1;
    fa[last].im = 0.0;
    inv.process(&mut fa, &mut a).expect("sized by plan");
    let scale = 1.0 / n as f64;
    let mut out: Vec<f64> = a.into_iter().take(out_len.min(x.len() + h.len() - 1)).map(|v| v * scale).collect();
    out.resize(out_len, 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_matches_direct_sum() {
        let x: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64 - 50.0) / 50.0).collect();
        let h: Vec<f64> = (0..45).map(|i| (-(i as f64) / 9.0).exp()).collect();
        let fast = fft_convolve(&x, &h, 400);
        for (n, &v) in fast.iter().enumerate() {
            let direct: f64 = (0..h.len()).filter(|&k| k <= n && n - k < x.len()).map(|k| h[k] * x[n - k]).sum();
            assert!((v - direct).abs() < 1e-10);
        }
        assert_eq!(fft_convolve(&x, &h, 10).len(), 10);
    }
}
