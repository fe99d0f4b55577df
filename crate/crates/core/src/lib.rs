//! Long-syncword frame synchronization by digital correlation.
//!
//! The crate models a complete transmit/receive chain:
//!
//! - [`framing`]: syncword and frame generation, bitstreams and their file formats
//! - [`modem`]: QPSK mapping, root-raised-cosine shaping, timing and carrier recovery
//! - [`channel`]: flat Rayleigh fading, frequency/timing offsets and AWGN
//! - [`correlator`]: the block-parallel sliding-window correlator and its hardware model
//! - [`analysis`]: false-alarm/detection probabilities and frame-loss measurement
//! - [`pipeline`]: file-based commands and the noise-voltage sweep

pub mod analysis;
pub mod channel;
pub mod correlator;
mod error;
pub mod framing;
pub mod modem;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
pub use framing::{BitStream, FrameConfig, Syncword};
