//! Syncwords, frames and bitstreams.
//!
//! A transmission is a concatenation of frames, each a `k`-bit syncword
//! followed by an `n`-bit payload. Syncwords come from a seeded SplitMix64
//! generator (bit 63 of each output), so both ends regenerate the same word
//! from the seed alone.

mod bitstream;
mod io;

pub use bitstream::BitStream;
pub use io::{
    decode_one_bit_per_byte, encode_one_bit_per_byte, pack, read_bits, sidecar_path, unpack,
    write_bits, BitFormat, Sidecar, BITS_PER_BYTE_FORMAT, PACKED_FORMAT,
};

use log::warn;

use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A known random bit pattern prepended to every frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syncword {
    bits: BitStream,
    seed: u64,
}

impl Syncword {
    pub fn bits(&self) -> &BitStream {
        &self.bits
    }

    pub fn k(&self) -> usize {
        self.bits.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Generates a `k`-bit syncword: bit `i` is the top bit of the `i`-th
/// SplitMix64 output for `seed`.
pub fn gen_syncword(k: usize, seed: u64) -> Result<Syncword> {
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::config(format!(
            "syncword length must be even and at least 2, got {k}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let bits = (0..k).map(|_| rng.next_u64() >> 63 == 1).collect();
    Ok(Syncword { bits, seed })
}

/// Seed of the syncword used during refresh epoch `epoch`.
pub fn epoch_seed(sync_seed: u64, epoch: u64) -> u64 {
    sync_seed.wrapping_add(epoch)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameConfig {
    /// Payload bits per frame.
    pub n: usize,
    /// Syncword bits per frame.
    pub k: usize,
    /// Detection threshold on the correlation count.
    pub threshold: usize,
    /// Window positions evaluated per correlator cycle.
    pub parallelism: usize,
    pub frames: usize,
    pub sync_seed: u64,
    pub payload_seed: u64,
    /// Frames per syncword before a fresh one is drawn; 0 keeps one syncword.
    pub refresh_interval: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            n: 4700,
            k: 300,
            threshold: 210,
            parallelism: 8,
            frames: 20_000,
            sync_seed: 0x5EED_0001,
            payload_seed: 0x5EED_0002,
            refresh_interval: 0,
        }
    }
}

impl FrameConfig {
    pub fn frame_bits(&self) -> usize {
        self.n + self.k
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 || !self.k.is_multiple_of(2) {
            return Err(Error::config(format!(
                "k must be even and at least 2, got {}",
                self.k
            )));
        }
        if self.n == 0 || !self.n.is_multiple_of(2) {
            return Err(Error::config(format!(
                "n must be positive and even, got {}",
                self.n
            )));
        }
        if self.threshold == 0 || self.threshold > self.k {
            return Err(Error::config(format!(
                "threshold must lie in 1..={}, got {}",
                self.k, self.threshold
            )));
        }
        if self.parallelism == 0 {
            return Err(Error::config("parallelism m must be at least 1"));
        }
        if self.n < self.k {
            warn!(
                "payload ({} bits) is shorter than the syncword ({} bits)",
                self.n, self.k
            );
        }
        Ok(())
    }

    /// The syncword in force for frame `index`.
    pub fn syncword_for_frame(&self, index: usize) -> Result<Syncword> {
        let epoch = match self.refresh_interval {
            0 => 0,
            r => index / r,
        };
        gen_syncword(self.k, epoch_seed(self.sync_seed, epoch as u64))
    }

    /// Every distinct syncword used over `frames` frames, in order.
    pub fn syncword_schedule(&self) -> Result<Vec<Syncword>> {
        let epochs = match (self.refresh_interval, self.frames) {
            (_, 0) => 1,
            (0, _) => 1,
            (r, f) => f.div_ceil(r),
        };
        (0..epochs as u64)
            .map(|e| gen_syncword(self.k, epoch_seed(self.sync_seed, e)))
            .collect()
    }
}

/// The output of [`gen_frames`].
#[derive(Debug, Clone)]
pub struct FrameSet {
    pub syncwords: Vec<Syncword>,
    pub payloads: Vec<BitStream>,
    pub stream: BitStream,
}

/// Draws `frames` payloads of `n` bits from `payload_seed`, consuming each
/// SplitMix64 output MSB-first.
pub fn gen_payloads(n: usize, frames: usize, payload_seed: u64) -> Vec<BitStream> {
    let mut rng = SplitMix64::new(payload_seed);
    (0..frames)
        .map(|_| {
            let mut p = BitStream::with_capacity(n);
            let mut left = n;
            while left > 0 {
                let take = left.min(64);
                p.push_word(rng.next_u64(), take);
                left -= take;
            }
            p
        })
        .collect()
}

/// Builds the transmit stream `sync ‖ payload` repeated `frames` times.
pub fn gen_frames(cfg: &FrameConfig) -> Result<FrameSet> {
    cfg.validate()?;
    let syncwords = cfg.syncword_schedule()?;
    let payloads = gen_payloads(cfg.n, cfg.frames, cfg.payload_seed);
    let mut stream = BitStream::with_capacity(cfg.frames * cfg.frame_bits());
    for (i, payload) in payloads.iter().enumerate() {
        let epoch = match cfg.refresh_interval {
            0 => 0,
            r => i / r,
        };
        stream.extend_from(syncwords[epoch].bits());
        stream.extend_from(payload);
    }
    Ok(FrameSet {
        syncwords,
        payloads,
        stream,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent SplitMix64 used only as a test oracle.
    fn splitmix_reference(seed: u64, count: usize) -> Vec<u64> {
        let mut x = seed;
        (0..count)
            .map(|_| {
                x = x.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = x;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                z ^ (z >> 31)
            })
            .collect()
    }

    #[test]
    fn syncword_seed_zero() {
        let oracle: BitStream = splitmix_reference(0, 4)
            .iter()
            .map(|w| w >> 63 == 1)
            .collect();
        assert_eq!(oracle.to_string(), "1001");
        assert_eq!(gen_syncword(4, 0).unwrap().bits(), &oracle);
    }

    #[test]
    fn syncword_long_matches_oracle() {
        let s = gen_syncword(300, 12345).unwrap();
        let oracle: BitStream = splitmix_reference(12345, 300)
            .iter()
            .map(|w| w >> 63 == 1)
            .collect();
        assert_eq!(s.bits(), &oracle);
        assert_eq!(s, gen_syncword(300, 12345).unwrap());
    }

    #[test]
    fn syncword_rejects_bad_lengths() {
        assert!(gen_syncword(3, 0).is_err());
        assert!(gen_syncword(0, 0).is_err());
    }

    #[test]
    fn single_frame_concatenation() {
        let cfg = FrameConfig {
            n: 4,
            k: 4,
            threshold: 4,
            parallelism: 1,
            frames: 1,
            sync_seed: 0,
            payload_seed: 99,
            refresh_interval: 0,
        };
        let set = gen_frames(&cfg).unwrap();
        assert_eq!(set.syncwords[0].bits().to_string(), "1001");
        let mut expect: BitStream = "1001".parse().unwrap();
        expect.extend_from(&set.payloads[0]);
        assert_eq!(set.stream, expect);
        assert_eq!(set.stream.len(), 8);
    }

    #[test]
    fn stream_length_and_determinism() {
        let cfg = FrameConfig {
            frames: 20_000,
            ..FrameConfig::default()
        };
        let a = gen_frames(&cfg).unwrap();
        assert_eq!(a.stream.len(), 20_000 * (4700 + 300));
        let b = gen_frames(&cfg).unwrap();
        assert_eq!(a.stream, b.stream);
    }

    #[test]
    fn refresh_switches_syncword() {
        let cfg = FrameConfig {
            n: 8,
            k: 8,
            threshold: 6,
            frames: 5,
            refresh_interval: 2,
            ..FrameConfig::default()
        };
        let set = gen_frames(&cfg).unwrap();
        assert_eq!(set.syncwords.len(), 3);
        for f in 0..5 {
            let got = set.stream.slice(f * 16, 8);
            assert_eq!(&got, set.syncwords[f / 2].bits());
            assert_eq!(got, *cfg.syncword_for_frame(f).unwrap().bits());
        }
    }

    #[test]
    fn config_validation() {
        let ok = FrameConfig::default();
        assert!(ok.validate().is_ok());
        assert!(FrameConfig {
            threshold: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(FrameConfig {
            threshold: 301,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(FrameConfig { n: 3, ..ok.clone() }.validate().is_err());
        assert!(FrameConfig {
            parallelism: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(FrameConfig { n: 100, ..ok }.validate().is_ok());
    }

    #[test]
    fn distinct_syncwords_stay_below_threshold() {
        // Independent k=300 words agree in ~150 positions; 210 is ~7 sigma out.
        let words: Vec<_> = (0..15)
            .map(|s| gen_syncword(300, 1000 + s).unwrap())
            .collect();
        let mut pairs = 0;
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                let d = words[i].bits().hamming_distance(words[j].bits()).unwrap();
                assert!(300 - d < 210);
                pairs += 1;
            }
        }
        assert!(pairs >= 100);
    }
}
