//! Fourth-power (QPSK) Costas loop for carrier phase and frequency recovery.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::loop_gains;
use crate::{Error, Result};

const COSTAS_DAMPING: f64 = std::f64::consts::FRAC_1_SQRT_2;
const MAX_FREQ: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct Costas {
    alpha: f64,
    beta: f64,
    phase: f64,
    freq: f64,
}

impl Costas {
    pub fn new(loop_bw: f64) -> Result<Self> {
        if !(loop_bw > 0.0) {
            return Err(Error::config(format!(
                "Costas loop bandwidth must be positive, got {loop_bw}"
            )));
        }
        let (alpha, beta) = loop_gains(loop_bw, COSTAS_DAMPING);
        Ok(Self {
            alpha,
            beta,
            phase: 0.0,
            freq: 0.0,
        })
    }

    /// NCO phase in radians, wrapped to `[-π, π)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// NCO frequency in radians per symbol.
    pub fn frequency(&self) -> f64 {
        self.freq
    }

    #[inline]
    pub fn step(&mut self, x: Complex64) -> Complex64 {
        let y = x * Complex64::from_polar(1.0, -self.phase);
        let e = (sgn(y.re) * y.im - sgn(y.im) * y.re).clamp(-1.0, 1.0);
        self.freq = (self.freq + self.beta * e).clamp(-MAX_FREQ, MAX_FREQ);
        self.phase = wrap(self.phase + self.freq + self.alpha * e);
        y
    }

    pub fn process(&mut self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().map(|&s| self.step(s)).collect()
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
fn wrap(p: f64) -> f64 {
    (p + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI
}
