//! Root-raised-cosine pulse shaping and matched filtering.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::{Error, Result};

const SINGULAR_EPS: f64 = 1e-9;

/// RRC impulse response at `t` symbol periods (unnormalized, `T = 1`).
pub fn rrc_impulse(t: f64, alpha: f64) -> f64 {
    if t.abs() < SINGULAR_EPS {
        return 1.0 - alpha + 4.0 * alpha / PI;
    }
    let four_at = 4.0 * alpha * t;
    if (1.0 - four_at * four_at).abs() < SINGULAR_EPS {
        let x = PI / (4.0 * alpha);
        return alpha * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * x.sin() + (1.0 - 2.0 / PI) * x.cos());
    }
    let num = (PI * t * (1.0 - alpha)).sin() + four_at * (PI * t * (1.0 + alpha)).cos();
    num / (PI * t * (1.0 - four_at * four_at))
}

/// `ntaps` centered RRC taps at `sps` samples per symbol, scaled to unit energy.
pub fn rrc_taps(sps: usize, alpha: f64, ntaps: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::config(format!(
            "roll-off must lie in (0, 1], got {alpha}"
        )));
    }
    if ntaps.is_multiple_of(2) {
        return Err(Error::config(format!("tap count must be odd, got {ntaps}")));
    }
    if sps == 0 {
        return Err(Error::config("samples per symbol must be positive"));
    }
    let center = (ntaps / 2) as f64;
    let mut taps: Vec<f64> = (0..ntaps)
        .map(|i| rrc_impulse((i as f64 - center) / sps as f64, alpha))
        .collect();
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    let scale = energy.sqrt().recip();
    taps.iter_mut().for_each(|h| *h *= scale);
    Ok(taps)
}

/// Full linear convolution; output length `x.len() + h.len() - 1`.
pub fn convolve(x: &[Complex64], h: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        if xi.re == 0.0 && xi.im == 0.0 {
            continue;
        }
        for (yj, &hj) in y[i..i + h.len()].iter_mut().zip(h) {
            *yj += xi * hj;
        }
    }
    y
}

/// Zero-stuffs by `sps` and filters; scaled by `sqrt(sps)` so the waveform
/// carries unit mean power for unit-power symbols.
pub fn shape(symbols: &[Complex64], taps: &[f64], sps: usize) -> Vec<Complex64> {
    if symbols.is_empty() {
        return Vec::new();
    }
    let gain = (sps as f64).sqrt();
    let mut up = vec![Complex64::new(0.0, 0.0); symbols.len() * sps];
    for (i, &s) in symbols.iter().enumerate() {
        up[i * sps] = s * gain;
    }
    convolve(&up, taps)
}

/// Filters with the same taps scaled by `1/sqrt(sps)`, restoring unit symbol
/// amplitude at the optimum sampling instants of a shaped waveform.
pub fn matched(rx: &[Complex64], taps: &[f64], sps: usize) -> Vec<Complex64> {
    let gain = (sps as f64).sqrt().recip();
    let scaled: Vec<f64> = taps.iter().map(|h| h * gain).collect();
    convolve(rx, &scaled)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_and_unit_energy() {
        let h = rrc_taps(4, 0.35, 45).unwrap();
        for i in 0..45 {
            assert!((h[i] - h[44 - i]).abs() < 1e-15);
        }
        let e: f64 = h.iter().map(|x| x * x).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singularity_uses_limit() {
        for alpha in [0.25, 0.35, 0.5, 1.0] {
            let ts = 1.0 / (4.0 * alpha);
            let closed = alpha / 2f64.sqrt()
                * ((1.0 + 2.0 / PI) * (PI / (4.0 * alpha)).sin()
                    + (1.0 - 2.0 / PI) * (PI / (4.0 * alpha)).cos());
            assert!((rrc_impulse(ts, alpha) - closed).abs() < 1e-15);
            assert!((rrc_impulse(-ts, alpha) - closed).abs() < 1e-15);
            // Approach the removable singularity from both sides.
            for d in [1e-6, -1e-6] {
                assert!(
                    (rrc_impulse(ts + d, alpha) - closed).abs() < 1e-5,
                    "alpha {alpha}"
                );
            }
        }
        let near0 = rrc_impulse(1e-7, 0.35);
        assert!((near0 - rrc_impulse(0.0, 0.35)).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(rrc_taps(4, 0.0, 45).is_err());
        assert!(rrc_taps(4, 1.2, 45).is_err());
        assert!(rrc_taps(4, 0.35, 44).is_err());
    }

    #[test]
    fn impulse_response() {
        let h = rrc_taps(4, 0.35, 45).unwrap();
        let y = shape(&[Complex64::new(1.0, 0.0)], &h, 4);
        assert_eq!(y.len(), 4 + 44);
        for (i, &hi) in h.iter().enumerate() {
            assert!((y[i].re - 2.0 * hi).abs() < 1e-15);
            assert_eq!(y[i].im, 0.0);
        }
    }
}
