//! Sliding-window syncword correlator.
//!
//! The correlation of two equal-length bit vectors is the number of positions
//! where they agree (XNOR then sum), computed here as `k − popcount(a ⊕ b)`
//! over packed 64-bit words.
//!
//! The detector mirrors a block-parallel hardware correlator: each cycle
//! brings in `m` new bits and evaluates the `m` window positions whose last
//! bit arrived in that cycle. Block `b` therefore holds the positions whose
//! window ends at a bit index in `[b·m, (b+1)·m)`. Within a block the best
//! correlation (over positions and over the four 90° rotations of every
//! syncword) is compared with the threshold; at most one detection per block.
//! After a detection the detector stays quiet while the `n` payload bits are
//! captured, unless suspension is disabled.

mod arch;
mod resources;

pub use arch::ArchState;
pub use resources::{arch_resources, ResourceReport};

use std::io::Write;

use log::warn;

use crate::framing::{BitStream, FrameConfig, Syncword};
use crate::modem::rotate_bits;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DetectionEvent {
    /// Bit index of the syncword start.
    pub pos: usize,
    /// Number of agreeing bits.
    pub corr: usize,
    /// Constellation rotation in quarter turns under which the syncword matched.
    pub rot: u8,
}

/// Number of positions where `window` and `sync` agree.
pub fn correlate(window: &BitStream, sync: &BitStream) -> Result<usize> {
    let d = window.hamming_distance(sync)?;
    Ok(window.len() - d)
}

/// The syncword as decoded under each of the four constellation rotations.
pub fn rotated_variants(sync: &Syncword) -> Result<[BitStream; 4]> {
    let bits = sync.bits();
    Ok([
        bits.clone(),
        rotate_bits(bits, 1)?,
        rotate_bits(bits, 2)?,
        rotate_bits(bits, 3)?,
    ])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOptions {
    pub threshold: usize,
    /// Window positions per cycle (`m`).
    pub parallelism: usize,
    /// Payload bits captured after each detection (`n`).
    pub payload_bits: usize,
    /// Pause detection while a payload is being captured.
    pub suspend: bool,
    /// Also correlate against the three rotated variants of each syncword.
    pub search_rotations: bool,
}

impl ScanOptions {
    pub fn from_config(cfg: &FrameConfig) -> Self {
        Self {
            threshold: cfg.threshold,
            parallelism: cfg.parallelism,
            payload_bits: cfg.n,
            suspend: true,
            search_rotations: true,
        }
    }

    pub fn continuous(mut self) -> Self {
        self.suspend = false;
        self
    }

    /// Correlate against the syncword as sent only.
    pub fn unrotated(mut self) -> Self {
        self.search_rotations = false;
        self
    }
}

#[derive(Debug, Clone)]
struct Template {
    words: Vec<u64>,
    rot: u8,
}

/// The best candidate of one block.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BlockBest {
    pub corr: usize,
    pub pos: usize,
    pub rot: u8,
}

/// A bank of rotation-variant correlators for one or more syncwords.
#[derive(Debug, Clone)]
pub struct Correlator {
    k: usize,
    /// Ordered by rotation, then syncword index: the tie-break order.
    templates: Vec<Template>,
    /// Valid-bit mask for each template word.
    masks: Vec<u64>,
    opts: ScanOptions,
}

impl Correlator {
    pub fn new(syncs: &[Syncword], opts: ScanOptions) -> Result<Self> {
        let k = syncs
            .first()
            .ok_or_else(|| Error::config("at least one syncword is required"))?
            .k();
        if syncs.iter().any(|s| s.k() != k) {
            return Err(Error::config("all syncwords must have the same length"));
        }
        if opts.threshold == 0 || opts.threshold > k {
            return Err(Error::config(format!(
                "threshold must lie in 1..={k}, got {}",
                opts.threshold
            )));
        }
        if opts.parallelism == 0 {
            return Err(Error::config("parallelism m must be at least 1"));
        }
        let variants = syncs
            .iter()
            .map(rotated_variants)
            .collect::<Result<Vec<_>>>()?;
        let mut templates = Vec::with_capacity(4 * syncs.len());
        let rotations = if opts.search_rotations { 4 } else { 1 };
        for rot in 0..rotations {
            for v in &variants {
                templates.push(Template {
                    words: v[rot as usize].words().to_vec(),
                    rot,
                });
            }
        }
        let nwords = k.div_ceil(64);
        let masks = (0..nwords)
            .map(|j| {
                let valid = (k - 64 * j).min(64);
                if valid == 64 {
                    !0
                } else {
                    !0u64 << (64 - valid)
                }
            })
            .collect();
        Ok(Self {
            k,
            templates,
            masks,
            opts,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn options(&self) -> &ScanOptions {
        &self.opts
    }

    /// Best candidate among windows of `source` starting at `start + i` for
    /// `i` in `0..count`, reported at absolute position `abs_start + i`.
    /// Positions below `min_pos` are skipped.
    pub(crate) fn evaluate_block(
        &self,
        source: &BitStream,
        start: usize,
        abs_start: usize,
        count: usize,
        min_pos: usize,
    ) -> Option<BlockBest> {
        let skip = min_pos.saturating_sub(abs_start);
        if skip >= count {
            return None;
        }
        let mut best: Option<BlockBest> = None;
        for t in &self.templates {
            let mut local: Option<(usize, usize)> = None;
            for i in skip..count {
                let off = start + i;
                let mismatches: u32 = t
                    .words
                    .iter()
                    .zip(&self.masks)
                    .enumerate()
                    .map(|(j, (s, m))| ((source.word_at(off + 64 * j) ^ s) & m).count_ones())
                    .sum();
                let corr = self.k - mismatches as usize;
                // Earliest position wins ties within a variant.
                if local.is_none_or(|(c, _)| corr > c) {
                    local = Some((corr, abs_start + i));
                }
            }
            if let Some((corr, pos)) = local {
                // Lowest rotation wins ties across variants.
                if best.is_none_or(|b| corr > b.corr) {
                    best = Some(BlockBest {
                        corr,
                        pos,
                        rot: t.rot,
                    });
                }
            }
        }
        best
    }

    /// Scans a whole stream block by block.
    pub fn scan(&self, stream: &BitStream) -> Vec<DetectionEvent> {
        let k = self.k;
        let m = self.opts.parallelism;
        let len = stream.len();
        let mut events = Vec::new();
        if len < k {
            return events;
        }
        let mut resume = 0usize;
        for block in (k - 1) / m..=(len - 1) / m {
            let end_lo = (block * m).max(k - 1);
            let end_hi = ((block + 1) * m).min(len);
            let first = end_lo + 1 - k;
            if let Some(best) = self.evaluate_block(stream, first, first, end_hi - end_lo, resume) {
                if best.corr >= self.opts.threshold {
                    events.push(DetectionEvent {
                        pos: best.pos,
                        corr: best.corr,
                        rot: best.rot,
                    });
                    if self.opts.suspend {
                        resume = best.pos + k + self.opts.payload_bits;
                    }
                }
            }
        }
        events
    }

    /// A fresh streaming model of the hardware register and adder trees.
    pub fn arch(&self) -> ArchState<'_> {
        ArchState::new(self)
    }
}

/// Scans `stream` for `sync` with the threshold, parallelism and payload
/// length of `cfg`.
pub fn scan(stream: &BitStream, cfg: &FrameConfig, sync: &Syncword) -> Result<Vec<DetectionEvent>> {
    let c = Correlator::new(std::slice::from_ref(sync), ScanOptions::from_config(cfg))?;
    Ok(c.scan(stream))
}

/// Payloads captured after detections.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub captured: Vec<(DetectionEvent, BitStream)>,
    /// Detections too close to the end of the stream for a full payload.
    pub truncated: Vec<DetectionEvent>,
}

impl Extraction {
    pub fn payloads(&self) -> Vec<BitStream> {
        self.captured.iter().map(|(_, p)| p.clone()).collect()
    }
}

/// Captures the `n` bits after each detected syncword, undoing the detected
/// constellation rotation pair by pair.
pub fn extract_payloads(
    stream: &BitStream,
    events: &[DetectionEvent],
    k: usize,
    n: usize,
) -> Result<Extraction> {
    let mut out = Extraction::default();
    for &ev in events {
        let start = ev.pos + k;
        if start + n > stream.len() {
            warn!(
                "detection at bit {} leaves only {} of {n} payload bits; capture truncated",
                ev.pos,
                stream.len().saturating_sub(start)
            );
            out.truncated.push(ev);
            continue;
        }
        let raw = stream.slice(start, n);
        let payload = if ev.rot == 0 {
            raw
        } else {
            rotate_bits(&raw, (4 - ev.rot % 4) % 4)?
        };
        out.captured.push((ev, payload));
    }
    Ok(out)
}

/// Writes events as CSV with header `pos,corr,rot`.
pub fn write_events_csv<W: Write>(writer: W, events: &[DetectionEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::format(e.to_string());
    w.write_record(["pos", "corr", "rot"]).map_err(csv_err)?;
    for ev in events {
        w.write_record([ev.pos.to_string(), ev.corr.to_string(), ev.rot.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::format(format!("flushing events CSV: {e}")))
}
