use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64;

use super::rtf::WhitenedRtf;
use crate::error::{Error, Result};

/// Recursive long-term average of whitened RTFs, kept un-whitened.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    bins: usize,
    dims: usize,
    rbar: Vec<Complex64>,
    frame_index: usize,
}

impl TrackerState {
    /// Seeds the average with a first observation.
    pub fn from_observation(r: &WhitenedRtf) -> Self {
        let rbar = (0..r.bins()).flat_map(|f| r.bin(f).iter().copied()).collect();
        Self { bins: r.bins(), dims: r.dims(), rbar, frame_index: 0 }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Number of updates absorbed so far.
    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn bin(&self, f: usize) -> &[Complex64] {
        &self.rbar[f * self.dims..(f + 1) * self.dims]
    }

    pub fn raw(&self) -> &[Complex64] {
        &self.rbar
    }

    /// Unit-modulus copy of bin `f`. Entries whose modulus is at or below
    /// `epsilon` become zero, so they drop out of the coherence.
    pub fn whitened(&self, f: usize, epsilon: f64) -> Vec<Complex64> {
        self.bin(f)
            .iter()
            .map(|z| {
                let m = z.norm();
                if m > epsilon {
                    z / m
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// `rbar <- lambda * rbar + (1 - lambda) * r`, per bin.
    ///
    /// `lambda == 1` leaves a bin untouched bit for bit and `lambda == 0`
    /// copies the observation.
    pub fn recursive_update(&mut self, r: &WhitenedRtf, lambda: &[f64]) -> Result<()> {
        if r.bins() != self.bins || r.dims() != self.dims || lambda.len() != self.bins {
            return Err(Error::ShapeMismatch(format!(
                "tracker is {}x{}, observation {}x{}, lambda {}",
                self.bins,
                self.dims,
                r.bins(),
                r.dims(),
                lambda.len()
            )));
        }
        if let Some(bad) = lambda.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return Err(Error::InvalidArgument(format!("forgetting factor {bad} outside [0, 1]")));
        }
        for (f, &lam) in lambda.iter().enumerate() {
            let obs = r.bin(f);
            let state = &mut self.rbar[f * self.dims..(f + 1) * self.dims];
            if lam == 1.0 {
                continue;
            } else if lam == 0.0 {
                state.copy_from_slice(obs);
            } else {
                for (s, o) in state.iter_mut().zip(obs) {
                    *s = *s * lam + *o * (1.0 - lam);
                }
            }
        }
        self.frame_index += 1;
        Ok(())
    }
}

/// Sign-sensitive cosine similarity `Re{r^H rbar} / (|r| |rbar|)`, clamped
/// to `[-1, 1]`. Zero-norm inputs yield 0.
pub fn coherence(r: &[Complex64], rbar: &[Complex64]) -> f64 {
    debug_assert_eq!(r.len(), rbar.len());
    let inner: f64 = r.iter().zip(rbar).map(|(a, b)| (a.conj() * b).re).sum();
    let nr: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = rbar.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nr == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (inner / (nr * nb)).clamp(-1.0, 1.0)
}

/// Fraction-free form valid when both vectors are whitened:
/// `Re{r^H rbar} / (M - 1)`.
pub fn coherence_whitened(r: &[Complex64], rbar: &[Complex64]) -> f64 {
    let inner: f64 = r.iter().zip(rbar).map(|(a, b)| (a.conj() * b).re).sum();
    (inner / r.len() as f64).clamp(-1.0, 1.0)
}

/// Mean squared mask of the previous frame.
pub fn mask_activity(prev_mask_row: &[f64]) -> f64 {
    if prev_mask_row.is_empty() {
        return 0.0;
    }
    prev_mask_row.iter().map(|m| m * m).sum::<f64>() / prev_mask_row.len() as f64
}

/// Per-bin global forgetting factor: 1 when the previous frame's mask is
/// active (mean square above `beta`), otherwise `1 - gamma_local / 20`
/// clamped to `[0.95, 1]`.
pub fn lambda_schedule(prev_mask_row: &[f64], gamma_local: &[f64], beta: f64) -> Vec<f64> {
    if mask_activity(prev_mask_row) > beta {
        vec![1.0; gamma_local.len()]
    } else {
        gamma_local.iter().map(|g| (1.0 - g / 20.0).clamp(0.95, 1.0)).collect()
    }
}

/// `(2 / pi) * asin(gamma)` after clamping the input to `[-1, 1]`.
pub fn arcsine_warp(gamma: f64) -> f64 {
    FRAC_2_PI * gamma.clamp(-1.0, 1.0).asin()
}

/// `arcsine_warp(coherence(r, rbar))`, evaluated through the angle between
/// the two normalized vectors, `1 - 2 theta / pi` with
/// `theta = 2 atan2(|u - v|, |u + v|)`. Near `gamma = +-1` the arcsine
/// magnifies rounding in `gamma` by orders of magnitude; this form does not.
pub fn warped_coherence(r: &[Complex64], rbar: &[Complex64]) -> f64 {
    debug_assert_eq!(r.len(), rbar.len());
    let nr: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = rbar.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nr == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in r.iter().zip(rbar) {
        let (u, v) = (a / nr, b / nb);
        diff += (u - v).norm_sqr();
        sum += (u + v).norm_sqr();
    }
    let theta = 2.0 * diff.sqrt().atan2(sum.sqrt());
    (1.0 - FRAC_2_PI * theta).clamp(-1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn field(entries: Vec<Complex64>, dims: usize) -> WhitenedRtf {
        let bins = entries.len() / dims;
        WhitenedRtf::from_parts(bins, dims, entries, vec![false; bins]).unwrap()
    }

    #[test]
    fn update_extremes() {
        let r0 = field(vec![c(0.0, 1.0), c(1.0, 0.0)], 1);
        let r1 = field(vec![c(-1.0, 0.0), c(0.0, -1.0)], 1);
        let mut s = TrackerState::from_observation(&r0);
        let before = s.clone();
        s.recursive_update(&r1, &[1.0, 1.0]).unwrap();
        assert_eq!(s.raw(), before.raw());
        s.recursive_update(&r1, &[0.0, 0.0]).unwrap();
        assert_eq!(s.raw(), &[c(-1.0, 0.0), c(0.0, -1.0)]);
        assert!(s.recursive_update(&r1, &[1.01, 0.5]).is_err());
        assert!(s.recursive_update(&r1, &[0.5]).is_err());
    }

    #[test]
    fn geometric_recursion() {
        let target = c(0.6, 0.8);
        let r0 = field(vec![c(1.0, 0.0)], 1);
        let r = field(vec![target], 1);
        let mut s = TrackerState::from_observation(&r0);
        for _ in 0..50 {
            s.recursive_update(&r, &[0.99]).unwrap();
        }
        let expect = target + (c(1.0, 0.0) - target) * 0.99f64.powi(50);
        assert!((s.bin(0)[0] - expect).norm() < 1e-12);
        assert_eq!(s.frame_index(), 50);
    }

    #[test]
    fn coherence_examples() {
        let r = [c(1.0, 0.0), c(0.0, 1.0)];
        assert!((coherence(&r, &r) - 1.0).abs() < 1e-15);
        let neg: Vec<_> = r.iter().map(|z| -z).collect();
        assert!((coherence(&r, &neg) + 1.0).abs() < 1e-15);
        assert_eq!(coherence(&[c(1.0, 0.0), c(1.0, 0.0)], &[c(0.0, 1.0), c(0.0, -1.0)]), 0.0);
        assert_eq!(coherence(&r, &[c(0.0, 0.0), c(0.0, 0.0)]), 0.0);
    }

    #[test]
    fn schedule_branches() {
        let below = vec![0.05; 4]; // mean square 0.0025
        assert!(lambda_schedule(&below, &[1.0; 4], 0.01).iter().all(|&l| l == 0.95));
        let active = vec![(0.08f64).sqrt(); 4]; // mean square 0.08 > 0.01
        assert!(lambda_schedule(&active, &[1.0; 4], 0.01).iter().all(|&l| l == 1.0));
        let quiet = vec![0.0; 4];
        assert_eq!(lambda_schedule(&quiet, &[1.0, -1.0, 0.0, 0.5], 0.01), vec![0.95, 1.0, 1.0, 0.975]);
    }

    #[test]
    fn halting_threshold_at_two_percent() {
        let row = vec![(0.02f64).sqrt(); 257];
        assert!((mask_activity(&row) - 0.02).abs() < 1e-15);
        assert!(lambda_schedule(&row, &vec![0.3; 257], 0.01).iter().all(|&l| l == 1.0));
    }

    #[test]
    fn warp_fixed_points() {
        assert_eq!(arcsine_warp(0.0), 0.0);
        assert_eq!(arcsine_warp(1.0), 1.0);
        assert_eq!(arcsine_warp(-1.0), -1.0);
        assert!((arcsine_warp(std::f64::consts::FRAC_1_SQRT_2) - 0.5).abs() < 1e-15);
        assert_eq!(arcsine_warp(1.0 + 1e-12), 1.0);
    }

    #[test]
    fn angle_form_near_the_ends() {
        let r = [c(1.0, 0.0), c(0.0, 1.0)];
        assert_eq!(warped_coherence(&r, &r), 1.0);
        let neg: Vec<_> = r.iter().map(|z| -z).collect();
        assert_eq!(warped_coherence(&r, &neg), -1.0);
        // a tiny rotation: gamma rounds to 1 but the warp still sees the angle
        let t = 1e-9f64;
        let rot = [c(t.cos(), t.sin()), c(0.0, 1.0)];
        let expect = 1.0 - std::f64::consts::FRAC_2_PI * (t / 2.0f64.sqrt());
        assert!((warped_coherence(&r, &rot) - expect).abs() < 1e-15);
        assert_eq!(warped_coherence(&r, &[c(0.0, 0.0), c(0.0, 0.0)]), 0.0);
    }

    fn unit() -> impl Strategy<Value = Complex64> {
        (0.0..std::f64::consts::TAU).prop_map(|p| Complex64::from_polar(1.0, p))
    }

    proptest! {
        #[test]
        fn warp_is_odd_and_monotone(a in -1.0f64..=1.0, b in -1.0f64..=1.0) {
            prop_assert!((arcsine_warp(-a) + arcsine_warp(a)).abs() < 1e-15);
            if a < b {
                prop_assert!(arcsine_warp(a) < arcsine_warp(b));
            }
            prop_assert!((-1.0..=1.0).contains(&arcsine_warp(a)));
        }

        #[test]
        fn both_coherence_forms_agree(r in prop::collection::vec(unit(), 1..8), seed in any::<u64>()) {
            let mut s = seed;
            let rbar: Vec<Complex64> = r.iter().map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                Complex64::from_polar(1.0, (s >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU)
            }).collect();
            let a = coherence(&r, &rbar);
            let b = coherence_whitened(&r, &rbar);
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&a));
        }

        #[test]
        fn angle_form_matches_arcsine(
            r in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
            rbar in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
        ) {
            let r: Vec<Complex64> = r.into_iter().map(|(a, b)| c(a, b)).collect();
            let rbar: Vec<Complex64> = rbar[..r.len()].iter().map(|&(a, b)| c(a, b)).collect();
            let g = coherence(&r, &rbar);
            // away from the ends both forms are well conditioned
            prop_assume!(g.abs() < 0.99);
            prop_assert!((warped_coherence(&r, &rbar) - arcsine_warp(g)).abs() < 1e-12);
        }
    }
}
