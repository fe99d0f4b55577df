//! One function per pipeline stage, each reading and writing files.
//!
//! Every output gets a `<path>.meta` sidecar. Entries of the input sidecar
//! are carried forward, so the frame settings written by [`cmd_generate`]
//! and the channel seed written by [`cmd_channel`] reach [`cmd_fser`].

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::config::{frame_echo, frame_from_sidecar, parse_seed};
use super::{condition_label, detect, quantize};
use crate::analysis::{match_payloads, FserReport};
use crate::channel::{self, ChannelParams};
use crate::correlator::{write_events_csv, DetectionEvent, Extraction};
use crate::framing::{
    gen_frames, gen_payloads, read_bits, sidecar_path, write_bits, BitFormat, BitStream,
    FrameConfig, FrameSet, Sidecar,
};
use crate::modem::{self, read_iq, write_iq, IqStream, ModemParams, DEFAULT_SAMPLE_RATE};
use crate::{Error, Result};

/// Sidecar keys written by a stage itself; everything else is forwarded.
const STAGE_KEYS: &[&str] = &["bits", "format", "samples", "sample_rate", "sps"];

fn forward(from: &Sidecar) -> Sidecar {
    let mut out = Sidecar::new();
    for (k, v) in from.entries() {
        if !STAGE_KEYS.contains(&k) {
            out.insert(k, v);
        }
    }
    out
}

/// Reads a sidecar if one exists next to `path`.
fn optional_sidecar(path: &Path) -> Result<Sidecar> {
    let meta = sidecar_path(path);
    if meta.exists() {
        Sidecar::read(&meta)
    } else {
        Ok(Sidecar::new())
    }
}

fn write_iq_with_meta(path: &Path, x: &IqStream, extra: Sidecar) -> Result<()> {
    write_iq(path, &x.samples)?;
    let mut meta = extra;
    meta.insert("samples", x.len());
    meta.insert("sample_rate", x.sample_rate);
    meta.insert("sps", x.sps);
    meta.write(&sidecar_path(path))
}

fn read_iq_with_meta(path: &Path, default_sps: usize) -> Result<(IqStream, Sidecar)> {
    let samples = read_iq(path)?;
    let meta = optional_sidecar(path)?;
    let sample_rate = match meta.get("sample_rate") {
        Some(_) => meta.parsed("sample_rate")?,
        None => DEFAULT_SAMPLE_RATE * default_sps as f64,
    };
    let sps = match meta.get("sps") {
        Some(_) => meta.parsed("sps")?,
        None => default_sps,
    };
    Ok((IqStream::new(samples, sample_rate, sps), meta))
}

/// Writes the transmit bitstream (packed) with the frame settings in its
/// sidecar; the payloads can be regenerated from them.
pub fn cmd_generate(cfg: &FrameConfig, out: &Path) -> Result<FrameSet> {
    let frames = gen_frames(cfg)?;
    write_bits(out, &frames.stream, BitFormat::Packed, &frame_echo(cfg))?;
    Ok(frames)
}

/// QPSK mapping and pulse shaping of a bit file into an IQ file.
pub fn cmd_tx(
    input: &Path,
    format: BitFormat,
    params: &ModemParams,
    out: &Path,
) -> Result<IqStream> {
    let (bits, meta) = read_bits(input, format)?;
    if bits.len() % 2 != 0 {
        return Err(Error::format(format!(
            "{} holds {} bits; QPSK needs an even count",
            input.display(),
            bits.len()
        )));
    }
    let tx = quantize(modem::modulate(&bits, params)?);
    write_iq_with_meta(out, &tx, forward(&meta))?;
    Ok(tx)
}

/// Applies the channel; the seed, noise voltage and measured SNR go into the
/// output sidecar. Returns the output and its SNR in dB.
pub fn cmd_channel(input: &Path, params: &ChannelParams, out: &Path) -> Result<(IqStream, f64)> {
    let (x, meta) = read_iq_with_meta(input, ModemParams::default().sps)?;
    let (y, snr_db) = channel::apply_measured(&x, params)?;
    let y = quantize(y);
    let mut extra = forward(&meta);
    extra.insert("channel_seed", params.seed);
    extra.insert("noise_voltage", params.noise_voltage);
    extra.insert("snr_db", snr_db);
    extra.insert("fading", params.fading);
    extra.insert("n_sinusoids", params.n_sinusoids);
    extra.insert("doppler_norm", params.doppler_norm);
    extra.insert("freq_offset", params.freq_offset_norm);
    extra.insert("timing_ratio", params.timing_ratio);
    write_iq_with_meta(out, &y, extra)?;
    Ok((y, snr_db))
}

/// Demodulates an IQ file into a bit file.
pub fn cmd_rx(
    input: &Path,
    params: &ModemParams,
    out: &Path,
    format: BitFormat,
) -> Result<BitStream> {
    let (x, meta) = read_iq_with_meta(input, params.sps)?;
    if x.sps != params.sps {
        return Err(Error::config(format!(
            "{} was recorded at {} samples per symbol, receiver expects {}",
            input.display(),
            x.sps,
            params.sps
        )));
    }
    let bits = modem::demodulate(&x, params)?;
    write_bits(out, &bits, format, &forward(&meta))?;
    Ok(bits)
}

#[derive(Debug, Clone)]
pub struct DetectOutput {
    pub events: Vec<DetectionEvent>,
    pub extraction: Extraction,
}

/// Frame settings for detection: those recorded in the bit file's sidecar,
/// else `fallback`.
fn sync_spec(meta: &Sidecar, fallback: Option<&FrameConfig>) -> Result<FrameConfig> {
    if meta.get("k").is_some() {
        return frame_from_sidecar(meta);
    }
    fallback.cloned().ok_or_else(|| {
        Error::config(
            "no syncword settings: the input carries none and none were given",
        )
    })
}

/// Scans a bit file, writes the events as CSV and the captured payloads,
/// concatenated, as a packed bit file. `frame` overrides the settings
/// recorded with the input.
pub fn cmd_detect(
    input: &Path,
    format: BitFormat,
    frame: Option<&FrameConfig>,
    continuous: bool,
    events_out: &Path,
    payloads_out: &Path,
) -> Result<DetectOutput> {
    let (bits, meta) = read_bits(input, format)?;
    let cfg = match frame {
        Some(f) => f.clone(),
        None => sync_spec(&meta, None)?,
    };
    cfg.validate()?;
    let (events, extraction) = detect(&bits, &cfg, continuous)?;
    let file = File::create(events_out).map_err(|e| Error::io(events_out, e))?;
    write_events_csv(BufWriter::new(file), &events)?;

    let mut joined = BitStream::with_capacity(extraction.captured.len() * cfg.n);
    for (_, p) in &extraction.captured {
        joined.extend_from(p);
    }
    let mut extra = forward(&meta);
    for (k, v) in frame_echo(&cfg).entries() {
        extra.insert(k, v);
    }
    extra.insert("payload_bits", cfg.n);
    extra.insert("payloads", extraction.captured.len());
    extra.insert("continuous", continuous);
    write_bits(payloads_out, &joined, BitFormat::Packed, &extra)?;
    Ok(DetectOutput { events, extraction })
}

/// Compares a payload file with the payloads regenerated from `manifest`
/// (a sidecar written by [`cmd_generate`]) or, if absent, from the frame
/// settings carried in the payload file's own sidecar.
pub fn cmd_fser(payloads: &Path, manifest: Option<&Path>, delta: f64) -> Result<FserReport> {
    let (joined, meta) = read_bits(payloads, BitFormat::Packed)?;
    let cfg = match manifest {
        Some(m) => frame_from_sidecar(&Sidecar::read(m)?)?,
        None => frame_from_sidecar(&meta)?,
    };
    let n: usize = meta.parsed("payload_bits")?;
    if n != cfg.n {
        return Err(Error::format(format!(
            "payload file holds {n}-bit payloads but the manifest declares n={}",
            cfg.n
        )));
    }
    if joined.len() % n != 0 {
        return Err(Error::format(format!(
            "payload file length {} is not a multiple of {n}",
            joined.len()
        )));
    }
    let extracted: Vec<BitStream> = (0..joined.len() / n)
        .map(|i| joined.slice(i * n, n))
        .collect();
    let originals = gen_payloads(cfg.n, cfg.frames, cfg.payload_seed);
    let report = match_payloads(&originals, &extracted, delta)?;
    let noise_voltage = match meta.get("noise_voltage") {
        Some(_) => meta.parsed("noise_voltage")?,
        None => 0.0,
    };
    let snr_db = match meta.get("snr_db") {
        Some(_) => meta.parsed("snr_db")?,
        None => f64::INFINITY,
    };
    let seed = match meta.get("channel_seed") {
        Some(s) => parse_seed("channel_seed", s)?,
        None => 0,
    };
    Ok(report.with_condition(&condition_label(&cfg), noise_voltage, snr_db, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_zero_frames() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("tx.bin");
        let cfg = FrameConfig {
            frames: 0,
            ..FrameConfig::default()
        };
        cmd_generate(&cfg, &out).unwrap();
        assert_eq!(std::fs::read(&out).unwrap().len(), 0);
        let meta = Sidecar::read(&sidecar_path(&out)).unwrap();
        assert_eq!(meta.packed_bit_count().unwrap(), 0);
        assert_eq!(frame_from_sidecar(&meta).unwrap(), cfg);
    }

    #[test]
    fn generate_unwritable_path() {
        let cfg = FrameConfig {
            frames: 1,
            ..FrameConfig::default()
        };
        assert!(cmd_generate(&cfg, Path::new("/nonexistent-dir/x.bin")).is_err());
    }

    #[test]
    fn tx_rejects_odd_bit_count() {
        let dir = tempfile::tempdir().unwrap();
        let bits = dir.path().join("b.bin");
        write_bits(
            &bits,
            &"101".parse().unwrap(),
            BitFormat::Packed,
            &Sidecar::new(),
        )
        .unwrap();
        let r = cmd_tx(
            &bits,
            BitFormat::Packed,
            &ModemParams::default(),
            &dir.path().join("t.iq"),
        );
        assert!(matches!(r, Err(Error::Format(_))));
    }

    #[test]
    fn detect_without_sync_spec_fails() {
        let dir = tempfile::tempdir().unwrap();
        let bits = dir.path().join("b.bin");
        write_bits(
            &bits,
            &BitStream::zeros(1000),
            BitFormat::Packed,
            &Sidecar::new(),
        )
        .unwrap();
        let r = cmd_detect(
            &bits,
            BitFormat::Packed,
            None,
            false,
            &dir.path().join("e.csv"),
            &dir.path().join("p.bin"),
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn fser_rejects_manifest_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let gen = dir.path().join("tx.bin");
        let cfg = FrameConfig {
            frames: 3,
            n: 400,
            ..FrameConfig::default()
        };
        cmd_generate(&cfg, &gen).unwrap();
        let events = dir.path().join("e.csv");
        let pay = dir.path().join("p.bin");
        cmd_detect(&gen, BitFormat::Packed, None, false, &events, &pay).unwrap();
        let other = dir.path().join("other.bin");
        cmd_generate(&FrameConfig { n: 500, ..cfg }, &other).unwrap();
        assert!(cmd_fser(&pay, Some(&sidecar_path(&other)), 0.3).is_err());
        let ok = cmd_fser(&pay, Some(&sidecar_path(&gen)), 0.3).unwrap();
        assert_eq!((ok.fser, ok.false_alarms, ok.frames_total), (0.0, 0, 3));
    }
}
