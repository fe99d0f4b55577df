//! Run configuration: a flat `key=value` file with command-line overrides.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::DEFAULT_MATCH_DELTA;
use crate::channel::ChannelParams;
use crate::framing::{FrameConfig, Sidecar};
use crate::modem::ModemParams;
use crate::{Error, Result};

/// Noise-voltage grid `start, start + step, …, stop` with `repeats` seeded
/// runs per point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub repeats: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            start: 0.4,
            stop: 1.1,
            step: 0.1,
            repeats: 1,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::config(format!(
                "sweep step must be positive, got {}",
                self.step
            )));
        }
        if !(self.start >= 0.0 && self.stop >= self.start) {
            return Err(Error::config(format!(
                "sweep range {}:{} is empty or negative",
                self.start, self.stop
            )));
        }
        if self.repeats == 0 {
            return Err(Error::config("sweep repeats must be at least 1"));
        }
        Ok(())
    }

    /// Grid points, rounded to 1e-9 so `0.4 + 3·0.1` prints as `0.7`.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| ((self.start + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }

    /// Parses `start:stop:step`.
    pub fn parse_range(&mut self, text: &str) -> Result<()> {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(Error::config(format!(
                "sweep range {text:?} is not start:stop:step"
            )));
        };
        self.start = parse_value("sweep start", start)?;
        self.stop = parse_value("sweep stop", stop)?;
        self.step = parse_value("sweep step", step)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub frame: FrameConfig,
    pub modem: ModemParams,
    pub channel: ChannelParams,
    pub sweep: SweepSpec,
    pub master_seed: u64,
    /// Mismatch fraction for payload matching.
    pub match_delta: f64,
    /// Keep detecting while payloads are captured.
    pub continuous: bool,
    pub csv_path: Option<PathBuf>,
    pub plot_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            frame: FrameConfig::default(),
            modem: ModemParams::default(),
            channel: ChannelParams::default(),
            sweep: SweepSpec::default(),
            master_seed: 0x5EED_0000,
            match_delta: DEFAULT_MATCH_DELTA,
            continuous: false,
            csv_path: None,
            plot_path: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::config(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(Error::config(format!(
            "invalid boolean {other:?} for {key}"
        ))),
    }
}

/// Accepts decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(key: &str, value: &str) -> Result<u64> {
    let v = value.trim();
    let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16).ok(),
        None => v.replace('_', "").parse().ok(),
    };
    parsed.ok_or_else(|| Error::config(format!("invalid seed {value:?} for {key}")))
}

impl RunConfig {
    pub const KEYS: &'static [&'static str] = &[
        "n",
        "k",
        "threshold",
        "parallelism",
        "frames",
        "sync_seed",
        "payload_seed",
        "refresh_interval",
        "sps",
        "excess_bw",
        "rrc_taps",
        "sync_loop_bw",
        "sync_damping",
        "costas_loop_bw",
        "noise_voltage",
        "fading",
        "n_sinusoids",
        "doppler_norm",
        "freq_offset",
        "timing_ratio",
        "channel_seed",
        "sweep",
        "sweep_start",
        "sweep_stop",
        "sweep_step",
        "repeats",
        "master_seed",
        "match_delta",
        "continuous",
        "csv",
        "plot",
    ];

    /// Sets one key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "n" => self.frame.n = parse_value(key, v)?,
            "k" => self.frame.k = parse_value(key, v)?,
            "threshold" => self.frame.threshold = parse_value(key, v)?,
            "parallelism" => self.frame.parallelism = parse_value(key, v)?,
            "frames" => self.frame.frames = parse_value(key, v)?,
            "sync_seed" => self.frame.sync_seed = parse_seed(key, v)?,
            "payload_seed" => self.frame.payload_seed = parse_seed(key, v)?,
            "refresh_interval" => self.frame.refresh_interval = parse_value(key, v)?,
            "sps" => self.modem.sps = parse_value(key, v)?,
            "excess_bw" => self.modem.excess_bw = parse_value(key, v)?,
            "rrc_taps" => self.modem.rrc_taps = parse_value(key, v)?,
            "sync_loop_bw" => self.modem.sync_loop_bw = parse_value(key, v)?,
            "sync_damping" => self.modem.sync_damping = parse_value(key, v)?,
            "costas_loop_bw" => self.modem.costas_loop_bw = parse_value(key, v)?,
            "noise_voltage" => self.channel.noise_voltage = parse_value(key, v)?,
            "fading" => self.channel.fading = parse_bool(key, v)?,
            "n_sinusoids" => self.channel.n_sinusoids = parse_value(key, v)?,
            "doppler_norm" => self.channel.doppler_norm = parse_value(key, v)?,
            "freq_offset" => self.channel.freq_offset_norm = parse_value(key, v)?,
            "timing_ratio" => self.channel.timing_ratio = parse_value(key, v)?,
            "channel_seed" => self.channel.seed = parse_seed(key, v)?,
            "sweep" => self.sweep.parse_range(v)?,
            "sweep_start" => self.sweep.start = parse_value(key, v)?,
            "sweep_stop" => self.sweep.stop = parse_value(key, v)?,
            "sweep_step" => self.sweep.step = parse_value(key, v)?,
            "repeats" => self.sweep.repeats = parse_value(key, v)?,
            "master_seed" => self.master_seed = parse_seed(key, v)?,
            "match_delta" => self.match_delta = parse_value(key, v)?,
            "continuous" => self.continuous = parse_bool(key, v)?,
            "csv" => self.csv_path = Some(PathBuf::from(v.trim())),
            "plot" => self.plot_path = Some(PathBuf::from(v.trim())),
            other => {
                return Err(Error::config(format!(
                    "unknown configuration key {other:?}"
                )))
            }
        }
        Ok(())
    }

    /// Parses `key=value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let entries = Sidecar::parse(text)?;
        for (k, v) in entries.entries() {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override {o:?} is not key=value")))?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        self.modem.validate()?;
        self.channel.validate()?;
        self.sweep.validate()?;
        if !(0.0..0.5).contains(&self.match_delta) {
            return Err(Error::config(format!(
                "match_delta must lie in [0, 0.5), got {}",
                self.match_delta
            )));
        }
        Ok(())
    }

    /// Every setting as `key=value` entries, parseable by [`RunConfig::parse`].
    pub fn echo(&self) -> Sidecar {
        let mut s = Sidecar::new();
        let mut put = |k: &str, v: &dyn Display| s.insert(k, v);
        put("n", &self.frame.n);
        put("k", &self.frame.k);
        put("threshold", &self.frame.threshold);
        put("parallelism", &self.frame.parallelism);
        put("frames", &self.frame.frames);
        put("sync_seed", &self.frame.sync_seed);
        put("payload_seed", &self.frame.payload_seed);
        put("refresh_interval", &self.frame.refresh_interval);
        put("sps", &self.modem.sps);
        put("excess_bw", &self.modem.excess_bw);
        put("rrc_taps", &self.modem.rrc_taps);
        put("sync_loop_bw", &self.modem.sync_loop_bw);
        put("sync_damping", &self.modem.sync_damping);
        put("costas_loop_bw", &self.modem.costas_loop_bw);
        put("noise_voltage", &self.channel.noise_voltage);
        put("fading", &self.channel.fading);
        put("n_sinusoids", &self.channel.n_sinusoids);
        put("doppler_norm", &self.channel.doppler_norm);
        put("freq_offset", &self.channel.freq_offset_norm);
        put("timing_ratio", &self.channel.timing_ratio);
        put("channel_seed", &self.channel.seed);
        put("sweep_start", &self.sweep.start);
        put("sweep_stop", &self.sweep.stop);
        put("sweep_step", &self.sweep.step);
        put("repeats", &self.sweep.repeats);
        put("master_seed", &self.master_seed);
        put("match_delta", &self.match_delta);
        put("continuous", &self.continuous);
        s
    }
}

/// Frame settings as recorded in a generated stream's sidecar.
pub fn frame_echo(cfg: &FrameConfig) -> Sidecar {
    let mut s = Sidecar::new();
    s.insert("n", cfg.n);
    s.insert("k", cfg.k);
    s.insert("threshold", cfg.threshold);
    s.insert("parallelism", cfg.parallelism);
    s.insert("frames", cfg.frames);
    s.insert("sync_seed", cfg.sync_seed);
    s.insert("payload_seed", cfg.payload_seed);
    s.insert("refresh_interval", cfg.refresh_interval);
    s
}

/// Inverse of [`frame_echo`].
pub fn frame_from_sidecar(meta: &Sidecar) -> Result<FrameConfig> {
    let cfg = FrameConfig {
        n: meta.parsed("n")?,
        k: meta.parsed("k")?,
        threshold: meta.parsed("threshold")?,
        parallelism: meta.parsed("parallelism")?,
        frames: meta.parsed("frames")?,
        sync_seed: parse_seed("sync_seed", meta.require("sync_seed")?)?,
        payload_seed: parse_seed("payload_seed", meta.require("payload_seed")?)?,
        refresh_interval: meta.parsed("refresh_interval")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_eight_points() {
        let p = SweepSpec::default().points();
        assert_eq!(p, vec![0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1]);
        let single = SweepSpec {
            start: 0.8,
            stop: 0.8,
            ..SweepSpec::default()
        };
        assert_eq!(single.points(), vec![0.8]);
    }

    #[test]
    fn parse_and_override() {
        let mut cfg =
            RunConfig::parse("# test\nk = 500\nthreshold=350\nsweep=0.4:0.6:0.1\nfading=off\n")
                .unwrap();
        assert_eq!(cfg.frame.k, 500);
        assert_eq!(cfg.frame.threshold, 350);
        assert!(!cfg.channel.fading);
        assert_eq!(cfg.sweep.points(), vec![0.4, 0.5, 0.6]);
        cfg.apply_overrides(&["frames=10", "master_seed=0xFF"])
            .unwrap();
        assert_eq!(cfg.frame.frames, 10);
        assert_eq!(cfg.master_seed, 255);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.frame.k = 500;
        cfg.channel.noise_voltage = 0.7;
        cfg.continuous = true;
        let back = RunConfig::parse(&cfg.echo().to_string()).unwrap();
        assert_eq!(back, cfg);
        let f = frame_from_sidecar(&frame_echo(&cfg.frame)).unwrap();
        assert_eq!(f, cfg.frame);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RunConfig::parse("bogus=1").is_err());
        assert!(RunConfig::parse("k=abc").is_err());
        assert!(RunConfig::parse("fading=maybe").is_err());
        assert!(RunConfig::parse("sweep=1:2").is_err());
        let mut cfg = RunConfig::default();
        cfg.sweep.step = 0.0;
        assert!(cfg.validate().is_err());
        assert!(cfg.apply_overrides(&["k"]).is_err());
    }
}
