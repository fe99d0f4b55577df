//! Transmit → channel → receive → detect → compare, either through files
//! (one command per stage) or in memory for a sweep over noise voltages.
//!
//! IQ files store `f32` samples. The in-memory path rounds the transmitted
//! and received waveforms to `f32` at the same points, so chaining the file
//! commands reproduces a sweep row exactly.

mod commands;
pub mod config;
mod plot;

pub use commands::{cmd_channel, cmd_detect, cmd_fser, cmd_generate, cmd_rx, cmd_tx, DetectOutput};
pub use config::{RunConfig, SweepSpec};
pub use plot::write_fser_plot;

use log::info;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::{match_payloads, FserReport};
use crate::channel::{self, ChannelParams};
use crate::correlator::{extract_payloads, Correlator, DetectionEvent, Extraction, ScanOptions};
use crate::framing::{gen_frames, BitStream, FrameConfig, FrameSet};
use crate::modem::{self, IqStream};
use crate::rng::derive_seed;
use crate::Result;

/// Rounds every sample to `f32` precision, as an IQ file round trip does.
pub fn quantize(x: IqStream) -> IqStream {
    let samples = x
        .samples
        .into_iter()
        .map(|s| Complex64::new(s.re as f32 as f64, s.im as f32 as f64))
        .collect();
    IqStream::new(samples, x.sample_rate, x.sps)
}

/// Seed of repeat `repeat` at sweep point `condition`.
pub fn condition_seed(master: u64, condition: usize, repeat: usize) -> u64 {
    derive_seed(master ^ ((condition as u64) << 32) ^ repeat as u64)
}

pub fn condition_label(frame: &FrameConfig) -> String {
    format!("k{}-T{}", frame.k, frame.threshold)
}

/// Runs the correlator bank for every syncword of `frame` over `bits` and
/// captures the payloads.
pub fn detect(
    bits: &BitStream,
    frame: &FrameConfig,
    continuous: bool,
) -> Result<(Vec<DetectionEvent>, Extraction)> {
    let mut opts = ScanOptions::from_config(frame);
    if continuous {
        opts = opts.continuous();
    }
    let correlator = Correlator::new(&frame.syncword_schedule()?, opts)?;
    let events = correlator.scan(bits);
    let extraction = extract_payloads(bits, &events, frame.k, frame.n)?;
    Ok((events, extraction))
}

/// The frames of `cfg` and their `f32`-rounded transmit waveform.
pub fn transmit(cfg: &RunConfig) -> Result<(FrameSet, IqStream)> {
    let frames = gen_frames(&cfg.frame)?;
    let tx = quantize(modem::modulate(&frames.stream, &cfg.modem)?);
    Ok((frames, tx))
}

/// One sweep point: channel at `noise_voltage` seeded by `seed`, receiver,
/// detection and payload matching.
pub fn run_condition(
    cfg: &RunConfig,
    frames: &FrameSet,
    tx: &IqStream,
    noise_voltage: f64,
    seed: u64,
) -> Result<FserReport> {
    let params = ChannelParams {
        noise_voltage,
        seed,
        ..cfg.channel.clone()
    };
    let (rx, snr_db) = channel::apply_measured(tx, &params)?;
    let bits = modem::demodulate(&quantize(rx), &cfg.modem)?;
    let (_, extraction) = detect(&bits, &cfg.frame, cfg.continuous)?;
    let report = match_payloads(&frames.payloads, &extraction.payloads(), cfg.match_delta)?;
    Ok(report.with_condition(&condition_label(&cfg.frame), noise_voltage, snr_db, seed))
}

/// Sort order of sweep rows.
fn row_key(r: &FserReport) -> (String, u64, u64) {
    (
        r.label.clone(),
        (r.noise_voltage * 1e9).round() as u64,
        r.seed,
    )
}

/// Runs every sweep point and repeat on the rayon pool. `on_row` sees each
/// row as soon as its condition finishes; the returned rows are sorted by
/// label, noise voltage and seed.
pub fn sweep<F>(cfg: &RunConfig, on_row: F) -> Result<Vec<FserReport>>
where
    F: Fn(&FserReport) + Sync,
{
    cfg.validate()?;
    let (frames, tx) = transmit(cfg)?;
    let jobs: Vec<(usize, f64, usize)> = cfg
        .sweep
        .points()
        .into_iter()
        .enumerate()
        .flat_map(|(ci, nv)| (0..cfg.sweep.repeats).map(move |r| (ci, nv, r)))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(ci, nv, r)| {
            let seed = condition_seed(cfg.master_seed, ci, r);
            let row = run_condition(cfg, &frames, &tx, nv, seed)?;
            info!(
                "noise {nv}: fser {:.4} ({} of {} missed, {} false alarms)",
                row.fser, row.frames_missed, row.frames_total, row.false_alarms
            );
            on_row(&row);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(row_key);
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.frame.frames = 30;
        cfg.frame.n = 600;
        cfg
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for c in 0..16 {
            for r in 0..16 {
                assert!(seen.insert(condition_seed(7, c, r)));
            }
        }
    }

    #[test]
    fn clean_condition_has_no_loss() {
        let mut cfg = small();
        cfg.channel = ChannelParams::ideal();
        let (frames, tx) = transmit(&cfg).unwrap();
        let r = run_condition(&cfg, &frames, &tx, 0.0, 1).unwrap();
        assert_eq!((r.fser, r.false_alarms), (0.0, 0));
        assert_eq!(r.snr_db, f64::INFINITY);
    }

    #[test]
    fn sweep_is_deterministic_and_sorted() {
        let mut cfg = small();
        cfg.sweep = SweepSpec {
            start: 0.4,
            stop: 0.6,
            step: 0.1,
            repeats: 2,
        };
        let count = std::sync::atomic::AtomicUsize::new(0);
        let a = sweep(&cfg, |_| {
            count.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        })
        .unwrap();
        assert_eq!(count.into_inner(), 6);
        assert_eq!(a.len(), 6);
        let b = sweep(&cfg, |_| {}).unwrap();
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!(row_key(&w[0]) <= row_key(&w[1]));
        }
        let nv: Vec<f64> = a.iter().map(|r| r.noise_voltage).collect();
        assert_eq!(nv, vec![0.4, 0.4, 0.5, 0.5, 0.6, 0.6]);
        assert_ne!(a[0].seed, a[1].seed);
    }
}
