//! Modem loopback without noise or fading: once the loops settle, every bit
//! comes back, up to the rotation ambiguity and the filter delay.

mod common;

use common::*;
use longsync::channel;
use longsync::modem::{self, timing::interpolate, IqStream, ModemParams};

const SYMBOLS: usize = 4000;
const SETTLE: usize = 500;

/// Bit errors after `SETTLE` symbols under the best rotation and lag.
fn errors_after_settling(tx: &[bool], rx: &[bool]) -> (usize, usize) {
    let mut best = (usize::MAX, 0);
    for rot in 0..4u8 {
        let turned = rotate(&tx[..tx.len() - tx.len() % 2], rot);
        for lag in -4i64..=32 {
            let mut errors = 0;
            let mut compared = 0;
            for s in SETTLE..SYMBOLS - 40 {
                let r = s as i64 + lag;
                if r < 0 || (2 * r as usize + 1) >= rx.len() {
                    continue;
                }
                let r = r as usize;
                for b in 0..2 {
                    errors += (turned[2 * s + b] != rx[2 * r + b]) as usize;
                    compared += 1;
                }
            }
            if compared > 0 && errors < best.0 {
                best = (errors, compared);
            }
        }
    }
    best
}

fn run(apply: impl Fn(&IqStream) -> IqStream, seed: u64) -> (usize, usize) {
    let p = ModemParams::default();
    let bits = random_bools(2 * SYMBOLS, seed);
    let tx = modem::modulate(&to_stream(&bits), &p).unwrap();
    let rx = modem::demodulate(&apply(&tx), &p).unwrap();
    let rx: Vec<bool> = rx.iter().collect();
    errors_after_settling(&bits, &rx)
}

#[test]
fn clean_loopback_is_error_free() {
    let (errors, compared) = run(|x| x.clone(), 1);
    assert!(compared > 6000);
    assert_eq!(errors, 0);
}

#[test]
fn fractional_delay_is_tracked() {
    // 0.3 symbol = 1.2 samples at 4 samples per symbol.
    let delayed = |x: &IqStream| {
        let d = 0.3 * x.sps as f64;
        let samples = (0..x.len())
            .map(|j| interpolate(&x.samples, j as f64 - d))
            .collect();
        IqStream::new(samples, x.sample_rate, x.sps)
    };
    let (errors, compared) = run(delayed, 2);
    assert!(compared > 6000);
    assert_eq!(errors, 0);
}

#[test]
fn clock_mismatch_is_tracked() {
    let (errors, compared) = run(|x| channel::timing_offset(x, 1.0005).unwrap(), 3);
    assert!(compared > 6000);
    assert_eq!(errors, 0);
}

/// The carrier loop removes a static phase; the timing detector itself is
/// phase sensitive and loses lock near 45°, so the angle stays well clear.
#[test]
fn static_phase_is_removed() {
    let turn = |x: &IqStream| {
        let r = num_complex::Complex64::from_polar(1.0, 20f64.to_radians());
        IqStream::new(
            x.samples.iter().map(|s| s * r).collect(),
            x.sample_rate,
            x.sps,
        )
    };
    let (errors, compared) = run(turn, 5);
    assert!(compared > 6000);
    assert_eq!(errors, 0);
}
