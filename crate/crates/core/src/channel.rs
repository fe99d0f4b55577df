//! Channel impairments: flat Rayleigh fading, carrier frequency offset,
//! sampling clock offset and additive white Gaussian noise, applied in that
//! order.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::modem::timing::interpolate;
use crate::modem::IqStream;
use crate::rng::{mix64, SplitMix64};
use crate::{Error, Result};

const FADING_STREAM: u64 = 0xFADE_0000_0000_0001;
const NOISE_STREAM: u64 = 0x0A3E_0000_0000_0002;
/// Samples between exact re-evaluations of the fading oscillators.
const RESYNC_INTERVAL: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    /// Standard deviation of the complex noise (total variance `σ²`).
    pub noise_voltage: f64,
    pub fading: bool,
    pub n_sinusoids: usize,
    /// Maximum Doppler shift times the sample period.
    pub doppler_norm: f64,
    /// Carrier offset times the sample period.
    pub freq_offset_norm: f64,
    /// Receiver/transmitter clock ratio.
    pub timing_ratio: f64,
    pub seed: u64,
}

impl Default for ChannelParams {
    /// Rayleigh fading with 16 sinusoids at normalized Doppler 10⁻³, no noise.
    fn default() -> Self {
        Self {
            noise_voltage: 0.0,
            fading: true,
            n_sinusoids: 16,
            doppler_norm: 1e-3,
            freq_offset_norm: 0.0,
            timing_ratio: 1.0,
            seed: 0,
        }
    }
}

impl ChannelParams {
    /// Every impairment disabled.
    pub fn ideal() -> Self {
        Self {
            fading: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_voltage >= 0.0 && self.noise_voltage.is_finite()) {
            return Err(Error::config(format!(
                "noise voltage must be finite and non-negative, got {}",
                self.noise_voltage
            )));
        }
        if self.n_sinusoids == 0 {
            return Err(Error::config("fading needs at least one sinusoid"));
        }
        if !(0.0..0.5).contains(&self.doppler_norm) {
            return Err(Error::config(format!(
                "normalized Doppler must lie in [0, 0.5), got {}",
                self.doppler_norm
            )));
        }
        if !self.freq_offset_norm.is_finite() {
            return Err(Error::config("frequency offset must be finite"));
        }
        if !(0.99..=1.01).contains(&self.timing_ratio) {
            return Err(Error::config(format!(
                "timing ratio must lie in [0.99, 1.01], got {}",
                self.timing_ratio
            )));
        }
        Ok(())
    }
}

/// Sum-of-sinusoids flat Rayleigh fading gain
///
/// `h(t) = N^{-1/2} Σ_q exp(i(2π f_D t cos α_q + φ_q))`
///
/// with arrival angles on a quarter-offset grid `α_q = 2π(q + 1/4)/N + θ`.
/// The quarter offset keeps mirror-image angles from producing equal Doppler
/// shifts, so the gain has no slow beat terms; `θ` and the phases `φ_q` are
/// drawn from the seed.
#[derive(Debug, Clone)]
pub struct RayleighFader {
    /// Oscillator frequencies in radians per sample.
    omegas: Vec<f64>,
    phases: Vec<f64>,
    scale: f64,
}

impl RayleighFader {
    pub fn new(n_sinusoids: usize, doppler_norm: f64, seed: u64) -> Result<Self> {
        if n_sinusoids == 0 {
            return Err(Error::config("fading needs at least one sinusoid"));
        }
        let n = n_sinusoids as f64;
        let mut rng = SplitMix64::new(seed);
        let theta = (rng.next_f64() - 0.5) * PI / (2.0 * n);
        let omegas = (0..n_sinusoids)
            .map(|q| {
                let alpha = TAU * (q as f64 + 0.25) / n + theta;
                TAU * doppler_norm * alpha.cos()
            })
            .collect();
        let phases = (0..n_sinusoids).map(|_| TAU * rng.next_f64()).collect();
        Ok(Self {
            omegas,
            phases,
            scale: n.sqrt().recip(),
        })
    }

    /// Exact gain at sample time `t`.
    pub fn gain(&self, t: f64) -> Complex64 {
        self.omegas
            .iter()
            .zip(&self.phases)
            .map(|(w, p)| Complex64::from_polar(1.0, w * t + p))
            .sum::<Complex64>()
            * self.scale
    }

    /// Gains for samples `0..len`, by phasor recursion with periodic exact
    /// re-evaluation.
    pub fn gains(&self, len: usize) -> Vec<Complex64> {
        let steps: Vec<Complex64> = self
            .omegas
            .iter()
            .map(|&w| Complex64::from_polar(1.0, w))
            .collect();
        let mut phasors = vec![Complex64::default(); self.omegas.len()];
        let mut out = Vec::with_capacity(len);
        for t in 0..len {
            if t % RESYNC_INTERVAL == 0 {
                for ((z, w), p) in phasors.iter_mut().zip(&self.omegas).zip(&self.phases) {
                    *z = Complex64::from_polar(1.0, w * t as f64 + p);
                }
            }
            out.push(phasors.iter().sum::<Complex64>() * self.scale);
            for (z, s) in phasors.iter_mut().zip(&steps) {
                *z *= s;
            }
        }
        out
    }
}

fn keep_shape(x: &IqStream, samples: Vec<Complex64>) -> IqStream {
    IqStream::new(samples, x.sample_rate, x.sps)
}

/// Adds complex Gaussian noise of total variance `noise_voltage²`.
pub fn awgn(x: &IqStream, noise_voltage: f64, seed: u64) -> IqStream {
    if noise_voltage == 0.0 {
        return x.clone();
    }
    let sigma = noise_voltage * std::f64::consts::FRAC_1_SQRT_2;
    let mut rng = SplitMix64::new(seed);
    let samples = x
        .samples
        .iter()
        .map(|s| s + Complex64::new(sigma * rng.next_normal(), sigma * rng.next_normal()))
        .collect();
    keep_shape(x, samples)
}

pub fn rayleigh_fade(x: &IqStream, params: &ChannelParams) -> Result<IqStream> {
    params.validate()?;
    let fader = RayleighFader::new(
        params.n_sinusoids,
        params.doppler_norm,
        mix64(params.seed ^ FADING_STREAM),
    )?;
    let h = fader.gains(x.len());
    Ok(keep_shape(
        x,
        x.samples.iter().zip(&h).map(|(s, g)| s * g).collect(),
    ))
}

/// `y[t] = x[t]·exp(i2π f t)`.
pub fn freq_offset(x: &IqStream, freq_offset_norm: f64) -> IqStream {
    if freq_offset_norm == 0.0 {
        return x.clone();
    }
    let samples = x
        .samples
        .iter()
        .enumerate()
        .map(|(t, s)| s * Complex64::from_polar(1.0, TAU * (freq_offset_norm * t as f64).fract()))
        .collect();
    keep_shape(x, samples)
}

/// Resamples at instants `j·ratio` with cubic interpolation, as seen by a
/// receiver whose clock differs from the transmitter's by `ratio`.
pub fn timing_offset(x: &IqStream, timing_ratio: f64) -> Result<IqStream> {
    if !(0.99..=1.01).contains(&timing_ratio) {
        return Err(Error::config(format!(
            "timing ratio must lie in [0.99, 1.01], got {timing_ratio}"
        )));
    }
    if timing_ratio == 1.0 || x.is_empty() {
        return Ok(x.clone());
    }
    let count = ((x.len() - 1) as f64 / timing_ratio).floor() as usize + 1;
    let samples = (0..count)
        .map(|j| interpolate(&x.samples, j as f64 * timing_ratio))
        .collect();
    Ok(keep_shape(x, samples))
}

/// `10·log10(P̂ / σ²)` with `P̂` the measured mean power of `x`; `+∞` when
/// there is no noise.
pub fn snr_from_noise_voltage(x: &IqStream, noise_voltage: f64) -> f64 {
    snr_db(x.mean_power(), noise_voltage)
}

pub fn snr_db(signal_power: f64, noise_voltage: f64) -> f64 {
    if noise_voltage == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (signal_power / (noise_voltage * noise_voltage)).log10()
}

/// Fading → frequency offset → timing offset → AWGN.
pub fn apply(x: &IqStream, params: &ChannelParams) -> Result<IqStream> {
    Ok(apply_measured(x, params)?.0)
}

/// [`apply`], also returning the SNR in dB measured on the signal that
/// enters the noise stage.
pub fn apply_measured(x: &IqStream, params: &ChannelParams) -> Result<(IqStream, f64)> {
    params.validate()?;
    let mut y = if params.fading {
        rayleigh_fade(x, params)?
    } else {
        x.clone()
    };
    y = freq_offset(&y, params.freq_offset_norm);
    y = timing_offset(&y, params.timing_ratio)?;
    let snr = snr_from_noise_voltage(&y, params.noise_voltage);
    Ok((
        awgn(&y, params.noise_voltage, mix64(params.seed ^ NOISE_STREAM)),
        snr,
    ))
}
