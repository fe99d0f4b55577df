//! Cycle-level model of the correlator hardware: an `m + k − 1` bit shift
//! register feeding `m` adder trees (one per window position), a comparator
//! tree selecting the largest sum, and a threshold comparator.

use super::{Correlator, DetectionEvent};
use crate::framing::BitStream;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct ArchState<'a> {
    correlator: &'a Correlator,
    /// The trailing `m + k − 1` stream bits (zeros before the stream starts).
    register: BitStream,
    /// Bits consumed so far.
    offset: usize,
    /// First window position eligible after the current payload capture.
    resume_at: usize,
}

impl<'a> ArchState<'a> {
    pub(super) fn new(correlator: &'a Correlator) -> Self {
        let m = correlator.options().parallelism;
        Self {
            correlator,
            register: BitStream::zeros(m + correlator.k() - 1),
            offset: 0,
            resume_at: 0,
        }
    }

    pub fn register(&self) -> &BitStream {
        &self.register
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Payload bits still to arrive for the capture in progress.
    pub fn capture_remaining(&self) -> usize {
        self.resume_at
            .saturating_sub(self.offset)
            .min(self.correlator.options().payload_bits)
    }

    /// One clock cycle: shift in exactly `m` bits and evaluate the `m`
    /// window positions that completed.
    pub fn step(&mut self, bits: &BitStream) -> Result<Option<DetectionEvent>> {
        let m = self.correlator.options().parallelism;
        if bits.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                actual: bits.len(),
            });
        }
        Ok(self.cycle(bits))
    }

    /// Final partial cycle with fewer than `m` bits.
    pub fn flush(&mut self, bits: &BitStream) -> Result<Option<DetectionEvent>> {
        let m = self.correlator.options().parallelism;
        if bits.len() >= m {
            return Err(Error::config(format!(
                "flush takes fewer than {m} bits, got {}",
                bits.len()
            )));
        }
        Ok(self.cycle(bits))
    }

    fn cycle(&mut self, bits: &BitStream) -> Option<DetectionEvent> {
        let c = self.correlator;
        let k = c.k();
        let keep = k - 1;
        let mut reg = self.register.slice(self.register.len() - keep, keep);
        reg.extend_from(bits);
        self.register = reg;

        // Register bit 0 holds stream bit `offset − (k − 1)`. The window ending
        // at new bit `i` starts at register bit `i`.
        let base = self.offset;
        self.offset += bits.len();
        // Positions whose window would start before the stream are invalid.
        let skip = keep.saturating_sub(base);
        if skip >= bits.len() {
            return None;
        }
        let first_pos = base + skip - keep;
        let best = c.evaluate_block(
            &self.register,
            skip,
            first_pos,
            bits.len() - skip,
            self.resume_at,
        )?;
        if best.corr < c.options().threshold {
            return None;
        }
        if c.options().suspend {
            self.resume_at = best.pos + k + c.options().payload_bits;
        }
        Some(DetectionEvent {
            pos: best.pos,
            corr: best.corr,
            rot: best.rot,
        })
    }

    /// Folds the model over a whole stream: full `m`-bit cycles, then one
    /// partial cycle for any remainder.
    pub fn run(&mut self, stream: &BitStream) -> Vec<DetectionEvent> {
        let m = self.correlator.options().parallelism;
        let full = stream.len() / m * m;
        let mut events = Vec::new();
        let mut off = 0;
        while off < full {
            events.extend(self.cycle(&stream.slice(off, m)));
            off += m;
        }
        if full < stream.len() {
            events.extend(self.cycle(&stream.slice(full, stream.len() - full)));
        }
        events
    }
}
