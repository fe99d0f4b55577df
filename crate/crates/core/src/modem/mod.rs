//! QPSK transmitter and receiver.
//!
//! Transmit: Gray mapping → zero-stuffing → RRC pulse shaping.
//! Receive: RRC matched filter → symbol timing recovery → Costas carrier
//! recovery → hard decisions. The Costas loop leaves a 90° ambiguity which the
//! correlator resolves by searching all four rotations of the syncword.

pub mod carrier;
mod iq;
pub mod mapping;
pub mod rrc;
pub mod timing;

pub use carrier::Costas;
pub use iq::{decode_iq, encode_iq, read_iq, write_iq};
pub use mapping::{rotate_bits, rotate_pair};
pub use timing::SymbolSync;

use num_complex::Complex64;

use crate::framing::BitStream;
use crate::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: f64 = 32_000.0;

/// Complex baseband samples with their nominal rate and oversampling.
#[derive(Debug, Clone, PartialEq)]
pub struct IqStream {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    /// Samples per symbol; 1 for symbol-rate streams.
    pub sps: usize,
}

impl IqStream {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, sps: usize) -> Self {
        Self {
            samples,
            sample_rate,
            sps,
        }
    }

    pub fn symbols(samples: Vec<Complex64>) -> Self {
        Self::new(samples, DEFAULT_SAMPLE_RATE, 1)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    fn with_samples(&self, samples: Vec<Complex64>, sps: usize) -> Self {
        Self::new(samples, self.sample_rate, sps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModemParams {
    pub sps: usize,
    /// RRC roll-off.
    pub excess_bw: f64,
    pub rrc_taps: usize,
    pub sync_loop_bw: f64,
    pub sync_damping: f64,
    pub costas_loop_bw: f64,
}

impl Default for ModemParams {
    fn default() -> Self {
        Self {
            sps: 4,
            excess_bw: 0.35,
            rrc_taps: 45,
            sync_loop_bw: 0.045,
            sync_damping: 1.0,
            costas_loop_bw: 0.0628,
        }
    }
}

impl ModemParams {
    pub fn validate(&self) -> Result<()> {
        if self.sps < 2 {
            return Err(Error::config(format!(
                "sps must be at least 2, got {}",
                self.sps
            )));
        }
        if !(self.excess_bw > 0.0 && self.excess_bw <= 1.0) {
            return Err(Error::config(format!(
                "excess bandwidth must lie in (0, 1], got {}",
                self.excess_bw
            )));
        }
        if self.rrc_taps.is_multiple_of(2) {
            return Err(Error::config(format!(
                "RRC tap count must be odd, got {}",
                self.rrc_taps
            )));
        }
        if !(self.sync_loop_bw > 0.0 && self.sync_damping > 0.0 && self.costas_loop_bw > 0.0) {
            return Err(Error::config(
                "loop bandwidths and damping must be positive",
            ));
        }
        Ok(())
    }

    pub fn taps(&self) -> Result<Vec<f64>> {
        rrc::rrc_taps(self.sps, self.excess_bw, self.rrc_taps)
    }

    /// Symbols a timing loop needs to settle, about `2 / loop_bw`.
    pub fn settling_symbols(&self) -> usize {
        (2.0 / self.sync_loop_bw).ceil() as usize
    }
}

/// Second-order loop filter gains `(proportional, integral)` for a normalized
/// loop bandwidth and damping factor.
pub(crate) fn loop_gains(loop_bw: f64, damping: f64) -> (f64, f64) {
    let denom = 1.0 + 2.0 * damping * loop_bw + loop_bw * loop_bw;
    (
        4.0 * damping * loop_bw / denom,
        4.0 * loop_bw * loop_bw / denom,
    )
}

pub fn qpsk_map(bits: &BitStream) -> Result<IqStream> {
    Ok(IqStream::symbols(mapping::map_symbols(bits)?))
}

pub fn hard_decide(symbols: &IqStream) -> Result<BitStream> {
    if symbols.sps != 1 {
        return Err(Error::config(format!(
            "hard decisions need a symbol-rate stream, got sps={}",
            symbols.sps
        )));
    }
    Ok(mapping::decide_symbols(&symbols.samples))
}

/// Output length is `symbols·sps + ntaps − 1`.
pub fn pulse_shape(symbols: &IqStream, params: &ModemParams) -> Result<IqStream> {
    params.validate()?;
    let taps = params.taps()?;
    Ok(IqStream::new(
        rrc::shape(&symbols.samples, &taps, params.sps),
        symbols.sample_rate * params.sps as f64,
        params.sps,
    ))
}

pub fn matched_filter(rx: &IqStream, params: &ModemParams) -> Result<IqStream> {
    params.validate()?;
    let taps = params.taps()?;
    Ok(rx.with_samples(rrc::matched(&rx.samples, &taps, params.sps), rx.sps))
}

/// Timing recovery on a matched-filtered stream; one output per symbol.
pub fn symbol_sync(rx: &IqStream, params: &ModemParams) -> Result<IqStream> {
    params.validate()?;
    if rx.sps < 2 {
        return Err(Error::config(format!(
            "symbol sync needs an oversampled stream, got sps={}",
            rx.sps
        )));
    }
    let available = rx.len() / rx.sps;
    let needed = params.settling_symbols();
    if available > 0 && available < needed {
        return Err(Error::InsufficientInput {
            got: available,
            needed,
        });
    }
    let gain = timing::ted_gain_for_taps(&params.taps()?);
    let mut sync = SymbolSync::new(rx.sps, params.sync_loop_bw, params.sync_damping, gain)?;
    let out = sync.process(&rx.samples);
    Ok(IqStream::new(out, rx.sample_rate / rx.sps as f64, 1))
}

pub fn costas(symbols: &IqStream, params: &ModemParams) -> Result<IqStream> {
    if symbols.sps != 1 {
        return Err(Error::config(format!(
            "Costas loop runs on symbols, got sps={}",
            symbols.sps
        )));
    }
    let mut cl = Costas::new(params.costas_loop_bw)?;
    Ok(symbols.with_samples(cl.process(&symbols.samples), 1))
}

pub fn modulate(bits: &BitStream, params: &ModemParams) -> Result<IqStream> {
    pulse_shape(&qpsk_map(bits)?, params)
}

/// matched filter → symbol sync → Costas → hard decisions.
pub fn demodulate(rx: &IqStream, params: &ModemParams) -> Result<BitStream> {
    params.validate()?;
    if rx.is_empty() {
        return Ok(BitStream::new());
    }
    let filtered = matched_filter(rx, params)?;
    let synced = symbol_sync(&filtered, params)?;
    let derotated = costas(&synced, params)?;
    hard_decide(&derotated)
}
