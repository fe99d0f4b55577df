//! `longsync`: generate frames, pass them through the modem and channel,
//! detect syncwords and measure frame loss, one file-based stage at a time
//! or as a noise-voltage sweep.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use longsync::analysis::{
    binom_tail, detection_prob, false_alarm_prob, recommend_threshold_with, write_fser_csv,
    FserReport, DEFAULT_MISS_BUDGET, FSER_CSV_HEADER,
};
use longsync::correlator::arch_resources;
use longsync::framing::{sidecar_path, BitFormat};
use longsync::pipeline::{self, RunConfig};

#[derive(Parser)]
#[command(
    name = "longsync",
    version,
    about = "Long-syncword frame synchronization simulator"
)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run configuration file of key=value lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable), e.g. --set k=500.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn given(&self) -> bool {
        self.config.is_some() || !self.overrides.is_empty()
    }

    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply_overrides(&self.overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the framed transmit bitstream (packed, with a sidecar manifest).
    Generate {
        #[arg(long)]
        out: PathBuf,
    },
    /// QPSK-modulate a bit file into an IQ file.
    Tx {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// packed or bytes.
        #[arg(long, default_value = "packed")]
        format: BitFormat,
    },
    /// Apply fading, offsets and noise to an IQ file.
    Channel {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        noise_voltage: Option<f64>,
        #[arg(long)]
        seed: Option<String>,
    },
    /// Demodulate an IQ file into a bit file.
    Rx {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "packed")]
        format: BitFormat,
    },
    /// Detect syncwords and capture payloads.
    Detect {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "packed")]
        format: BitFormat,
        /// Sidecar written by `generate` holding the syncword settings.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        payloads: PathBuf,
        /// Keep detecting while a payload is being captured.
        #[arg(long)]
        continuous: bool,
    },
    /// Compare captured payloads with the originals.
    Fser {
        #[arg(long)]
        payloads: PathBuf,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        delta: Option<f64>,
        /// CSV output; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the whole chain over a grid of noise voltages.
    Sweep {
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Probability and resource calculator.
    Analyze {
        #[command(subcommand)]
        what: Analyze,
    },
}

#[derive(Subcommand)]
enum Analyze {
    /// P(X ≥ t) for X ~ Binomial(k, p).
    Tail {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        t: usize,
    },
    /// Per-position false alarm probability on random bits.
    FalseAlarm {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
    },
    /// Detection probability at a bit error rate.
    Detection {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        ber: f64,
    },
    /// Smallest threshold meeting the false alarm and miss targets.
    Threshold {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ber_max: f64,
        #[arg(long)]
        fa_max: f64,
        #[arg(long, default_value_t = DEFAULT_MISS_BUDGET)]
        miss_max: f64,
    },
    /// Gate and register counts of the correlator for k and m.
    Resources {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
    },
}

fn write_rows(out: Option<&Path>, rows: &[FserReport]) -> Result<()> {
    match out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_fser_csv(BufWriter::new(f), rows)?;
        }
        None => write_fser_csv(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn partial_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

fn sweep(mut cfg: RunConfig, csv: Option<PathBuf>, plot: Option<PathBuf>) -> Result<()> {
    if csv.is_some() {
        cfg.csv_path = csv;
    }
    if plot.is_some() {
        cfg.plot_path = plot;
    }
    // Rows are appended here as conditions finish, so an interrupted sweep
    // keeps what it has done.
    let partial = match &cfg.csv_path {
        Some(p) => {
            let path = partial_path(p);
            let mut f =
                File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            writeln!(f, "{}", FSER_CSV_HEADER.join(","))?;
            Some((path, Mutex::new(f)))
        }
        None => None,
    };
    let rows = pipeline::sweep(&cfg, |row| {
        if let Some((path, f)) = &partial {
            let mut f = f.lock().expect("partial CSV lock poisoned");
            let line = row.record().join(",");
            if let Err(e) = writeln!(f, "{line}").and_then(|_| f.flush()) {
                log::warn!("could not append to {}: {e}", path.display());
            }
        }
    })?;
    write_rows(cfg.csv_path.as_deref(), &rows)?;
    if let Some((path, _)) = partial {
        fs::remove_file(&path).with_context(|| format!("removing {}", path.display()))?;
    }
    if let Some(p) = &cfg.plot_path {
        pipeline::write_fser_plot(p, &rows)?;
        info!("plot written to {}", p.display());
    }
    Ok(())
}

fn analyze(what: Analyze) -> Result<()> {
    match what {
        Analyze::Tail { k, p, t } => {
            if !(0.0..=1.0).contains(&p) {
                bail!("p must lie in [0, 1], got {p}");
            }
            println!("{:e}", binom_tail(k, p, t));
        }
        Analyze::FalseAlarm { k, t } => println!("{:e}", false_alarm_prob(k, t)),
        Analyze::Detection { k, t, ber } => {
            if !(0.0..=0.5).contains(&ber) {
                bail!("ber must lie in [0, 0.5], got {ber}");
            }
            println!("{:e}", detection_prob(k, t, ber));
        }
        Analyze::Threshold {
            k,
            ber_max,
            fa_max,
            miss_max,
        } => {
            let c = recommend_threshold_with(k, ber_max, fa_max, miss_max)?;
            println!("threshold={}", c.threshold);
            println!("false_alarm={:e}", c.false_alarm);
            println!("miss={:e}", c.miss);
        }
        Analyze::Resources { k, m } => {
            let r = arch_resources(k, m)?;
            println!("xnor_gates={}", r.xnor_gates);
            println!("adders={}", r.adders);
            println!("comparators={}", r.comparators);
            println!("register_bits={}", r.register_bits);
            println!("adder_tree_depth={}", r.adder_tree_depth);
            println!("comparator_tree_depth={}", r.comparator_tree_depth);
            println!("bits_per_cycle={}", r.bits_per_cycle);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { out } => {
            let cfg = cli.config.load()?;
            let frames = pipeline::cmd_generate(&cfg.frame, &out)?;
            info!(
                "{} frames, {} bits",
                frames.payloads.len(),
                frames.stream.len()
            );
        }
        Command::Tx { input, out, format } => {
            let cfg = cli.config.load()?;
            let tx = pipeline::cmd_tx(&input, format, &cfg.modem, &out)?;
            info!("{} samples", tx.len());
        }
        Command::Channel {
            input,
            out,
            noise_voltage,
            seed,
        } => {
            let mut cfg = cli.config.load()?;
            if let Some(nv) = noise_voltage {
                cfg.set("noise_voltage", &nv.to_string())?;
            }
            if let Some(s) = seed {
                cfg.set("channel_seed", &s)?;
            }
            let (_, snr) = pipeline::cmd_channel(&input, &cfg.channel, &out)?;
            info!("SNR {snr:.2} dB");
        }
        Command::Rx { input, out, format } => {
            let cfg = cli.config.load()?;
            let bits = pipeline::cmd_rx(&input, &cfg.modem, &out, format)?;
            info!("{} bits", bits.len());
        }
        Command::Detect {
            input,
            format,
            manifest,
            events,
            payloads,
            continuous,
        } => {
            let cfg = cli.config.load()?;
            let frame = match &manifest {
                Some(m) => Some(pipeline::config::frame_from_sidecar(
                    &longsync::framing::Sidecar::read(m)?,
                )?),
                None if cli.config.given() => Some(cfg.frame.clone()),
                None => None,
            };
            let out = pipeline::cmd_detect(
                &input,
                format,
                frame.as_ref(),
                continuous || cfg.continuous,
                &events,
                &payloads,
            )?;
            info!(
                "{} detections, {} payloads captured",
                out.events.len(),
                out.extraction.captured.len()
            );
        }
        Command::Fser {
            payloads,
            manifest,
            delta,
            out,
        } => {
            let cfg = cli.config.load()?;
            let manifest = manifest.map(|m| {
                // Accept either the generated stream or its sidecar.
                if m.extension().is_some_and(|e| e == "meta") {
                    m
                } else {
                    sidecar_path(&m)
                }
            });
            let report = pipeline::cmd_fser(
                &payloads,
                manifest.as_deref(),
                delta.unwrap_or(cfg.match_delta),
            )?;
            write_rows(out.as_deref(), &[report])?;
        }
        Command::Sweep { csv, plot } => sweep(cli.config.load()?, csv, plot)?,
        Command::Analyze { what } => analyze(what)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
