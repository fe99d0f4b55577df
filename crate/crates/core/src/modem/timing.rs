//! Closed-loop symbol timing recovery with a sign-of-maximum-likelihood
//! timing error detector.
//!
//! At each strobe the loop interpolates the matched-filter output `x̂` and its
//! time derivative `x̂'` (central difference of interpolated samples one input
//! sample apart) and forms
//!
//! ```text
//! e = sgn(Re x̂)·Re x̂' + sgn(Im x̂)·Im x̂'
//! ```
//!
//! which is zero at the pulse peak and negative when sampling late. A
//! proportional-integral filter turns `e` into a correction of the next
//! strobe interval.

use num_complex::Complex64;

use super::loop_gains;
use crate::{Error, Result};

/// Largest tolerated deviation of the tracked symbol period, as a fraction of
/// the nominal samples per symbol.
pub const MAX_PERIOD_DEVIATION: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct SymbolSync {
    sps: f64,
    kp: f64,
    ki: f64,
    /// Integrator output in samples per symbol.
    period_offset: f64,
    /// Position of the next strobe, in input samples.
    next_strobe: f64,
}

impl SymbolSync {
    /// `ted_gain` is the slope of the detector S-curve at zero timing error
    /// (per sample of error), used to normalize the loop gains.
    pub fn new(sps: usize, loop_bw: f64, damping: f64, ted_gain: f64) -> Result<Self> {
        if sps < 2 {
            return Err(Error::config(format!(
                "symbol sync needs at least 2 samples per symbol, got {sps}"
            )));
        }
        if !(loop_bw > 0.0 && damping > 0.0 && ted_gain > 0.0) {
            return Err(Error::config(
                "symbol sync loop bandwidth, damping and detector gain must be positive",
            ));
        }
        let (kp, ki) = loop_gains(loop_bw, damping);
        Ok(Self {
            sps: sps as f64,
            kp: kp / ted_gain,
            ki: ki / ted_gain,
            period_offset: 0.0,
            next_strobe: 0.0,
        })
    }

    /// Current tracked symbol period in input samples.
    pub fn period(&self) -> f64 {
        self.sps + self.period_offset
    }

    /// Processes a whole buffer, one output per recovered symbol. The first
    /// strobe is placed at sample 0.
    pub fn process(&mut self, x: &[Complex64]) -> Vec<Complex64> {
        let last = x.len() as f64 - 1.0;
        let max_dev = MAX_PERIOD_DEVIATION * self.sps;
        let mut out = Vec::with_capacity((x.len() as f64 / self.sps) as usize + 1);
        while !x.is_empty() && self.next_strobe <= last {
            let t = self.next_strobe;
            let sample = interpolate(x, t);
            let deriv = (interpolate(x, t + 1.0) - interpolate(x, t - 1.0)) * 0.5;
            out.push(sample);

            let e = (sgn(sample.re) * deriv.re + sgn(sample.im) * deriv.im).clamp(-1.0, 1.0);
            self.period_offset = (self.period_offset + self.ki * e).clamp(-max_dev, max_dev);
            self.next_strobe += self.sps + self.period_offset + self.kp * e;
        }
        self.next_strobe -= x.len() as f64;
        out
    }
}

#[inline]
fn sgn(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn sample_at(x: &[Complex64], i: isize) -> Complex64 {
    if i < 0 {
        Complex64::new(0.0, 0.0)
    } else {
        x.get(i as usize).copied().unwrap_or_default()
    }
}

/// Cubic Lagrange interpolation through the four samples around `t`;
/// exact at integer `t`. Samples outside the buffer read as zero.
pub fn interpolate(x: &[Complex64], t: f64) -> Complex64 {
    let base = t.floor();
    let mu = t - base;
    let i = base as isize;
    let c_m1 = -mu * (mu - 1.0) * (mu - 2.0) / 6.0;
    let c_0 = (mu + 1.0) * (mu - 1.0) * (mu - 2.0) / 2.0;
    let c_1 = -(mu + 1.0) * mu * (mu - 2.0) / 2.0;
    let c_2 = (mu + 1.0) * mu * (mu - 1.0) / 6.0;
    sample_at(x, i - 1) * c_m1
        + sample_at(x, i) * c_0
        + sample_at(x, i + 1) * c_1
        + sample_at(x, i + 2) * c_2
}

/// Detector S-curve slope for a unit-amplitude QPSK signal whose end-to-end
/// pulse is the autocorrelation of the unit-energy `taps`.
pub fn ted_gain_for_taps(taps: &[f64]) -> f64 {
    // Raised-cosine pulse at integer sample lags, normalized to p(0) = 1.
    let lag = |j: usize| -> f64 { taps.iter().zip(&taps[j..]).map(|(a, b)| a * b).sum() };
    let p0 = lag(0);
    let slope_at_one = (lag(2) - p0) / 2.0 / p0;
    // Each QPSK rail carries amplitude 1/sqrt(2); both rails contribute.
    (-std::f64::consts::SQRT_2 * slope_at_one).max(1e-3)
}
