//! The file-based stages chained together reproduce the in-memory sweep.

use longsync::channel::ChannelParams;
use longsync::framing::{read_bits, sidecar_path, BitFormat, Sidecar};
use longsync::pipeline::{self, RunConfig};

fn small() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.frame.frames = 40;
    cfg.frame.n = 800;
    cfg
}

fn chain(
    cfg: &RunConfig,
    nv: f64,
    seed: u64,
    rx_format: BitFormat,
) -> longsync::analysis::FserReport {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    pipeline::cmd_generate(&cfg.frame, &p("tx.bin")).unwrap();
    pipeline::cmd_tx(&p("tx.bin"), BitFormat::Packed, &cfg.modem, &p("tx.iq")).unwrap();
    let ch = ChannelParams {
        noise_voltage: nv,
        seed,
        ..cfg.channel.clone()
    };
    pipeline::cmd_channel(&p("tx.iq"), &ch, &p("rx.iq")).unwrap();
    pipeline::cmd_rx(&p("rx.iq"), &cfg.modem, &p("rx.bin"), rx_format).unwrap();
    pipeline::cmd_detect(
        &p("rx.bin"),
        rx_format,
        None,
        false,
        &p("events.csv"),
        &p("payloads.bin"),
    )
    .unwrap();
    pipeline::cmd_fser(
        &p("payloads.bin"),
        Some(&sidecar_path(&p("tx.bin"))),
        cfg.match_delta,
    )
    .unwrap()
}

#[test]
fn file_chain_equals_in_memory_condition() {
    let cfg = small();
    let (frames, tx) = pipeline::transmit(&cfg).unwrap();
    for (nv, seed) in [(0.4, 11u64), (0.9, 12)] {
        let direct = pipeline::run_condition(&cfg, &frames, &tx, nv, seed).unwrap();
        assert_eq!(chain(&cfg, nv, seed, BitFormat::Packed), direct);
        assert_eq!(chain(&cfg, nv, seed, BitFormat::OneBitPerByte), direct);
    }
}

#[test]
fn clean_chain_recovers_every_frame() {
    let mut cfg = small();
    cfg.channel = ChannelParams::ideal();
    let r = chain(&cfg, 0.0, 1, BitFormat::Packed);
    assert_eq!(
        (r.frames_detected, r.frames_missed, r.false_alarms),
        (40, 0, 0)
    );
    assert_eq!(r.label, "k300-T210");
}

#[test]
fn sidecars_carry_the_condition() {
    let cfg = small();
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    pipeline::cmd_generate(&cfg.frame, &p("tx.bin")).unwrap();
    pipeline::cmd_tx(&p("tx.bin"), BitFormat::Packed, &cfg.modem, &p("tx.iq")).unwrap();
    let ch = ChannelParams {
        noise_voltage: 0.7,
        seed: 99,
        ..cfg.channel.clone()
    };
    let (_, snr) = pipeline::cmd_channel(&p("tx.iq"), &ch, &p("rx.iq")).unwrap();
    pipeline::cmd_rx(&p("rx.iq"), &cfg.modem, &p("rx.bin"), BitFormat::Packed).unwrap();
    let (_, meta) = read_bits(&p("rx.bin"), BitFormat::Packed).unwrap();
    assert_eq!(meta.get("channel_seed"), Some("99"));
    assert_eq!(meta.get("noise_voltage"), Some("0.7"));
    assert_eq!(meta.parsed::<f64>("snr_db").unwrap(), snr);
    assert_eq!(meta.get("k"), Some("300"));
    let iq_meta = Sidecar::read(&sidecar_path(&p("rx.iq"))).unwrap();
    assert_eq!(iq_meta.get("sps"), Some("4"));
}
