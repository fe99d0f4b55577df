//! Detection statistics and payload comparison.
//!
//! A syncword correlation against `k` bits that each agree with probability
//! `p` is Binomial(k, p). Random data agrees with probability ½, a syncword
//! seen through a binary symmetric channel with probability `1 − ber`, so
//! both the false alarm and the detection probability at threshold `T` are
//! upper binomial tails.

use std::io::Write;

use crate::framing::BitStream;
use crate::{Error, Result};

/// Mismatch fraction under which an extracted payload counts as a copy of
/// an original.
pub const DEFAULT_MATCH_DELTA: f64 = 0.3;

/// Default ceiling on the per-frame miss probability used by
/// [`recommend_threshold`].
pub const DEFAULT_MISS_BUDGET: f64 = 1e-4;

/// `P(X ≥ t)` for `X ~ Binomial(k, p)`.
///
/// Terms are formed in log-space and summed relative to the largest one with
/// compensated summation. When `t` lies below the mean the lower tail is
/// summed instead and subtracted from one, so values near 1 keep their
/// ordering.
pub fn binom_tail(k: usize, p: f64, t: usize) -> f64 {
    if t == 0 {
        return 1.0;
    }
    if t > k {
        return 0.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if (t as f64) <= k as f64 * p {
        (1.0 - pmf_sum(k, p, 0, t - 1)).max(0.0)
    } else {
        pmf_sum(k, p, t, k).min(1.0)
    }
}

/// `Σ_{j=lo}^{hi} P(X = j)` for `0 < p < 1`.
fn pmf_sum(k: usize, p: f64, lo: usize, hi: usize) -> f64 {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let kf = k as f64;
    // ln C(k, lo) as a sum of ratios, then updated term by term.
    let mut ln_c: f64 = (1..=lo)
        .map(|i| ((kf - lo as f64 + i as f64) / i as f64).ln())
        .sum();
    let mut logs = Vec::with_capacity(hi - lo + 1);
    for j in lo..=hi {
        logs.push(ln_c + j as f64 * lp + (kf - j as f64) * lq);
        if j < k {
            ln_c += ((kf - j as f64) / (j as f64 + 1.0)).ln();
        }
    }
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for l in logs {
        let v = (l - top).exp();
        let s = sum + v;
        comp += if sum >= v {
            (sum - s) + v
        } else {
            (v - s) + sum
        };
        sum = s;
    }
    ((sum + comp).ln() + top).exp()
}

/// Per-position false alarm probability on equiprobable random bits.
pub fn false_alarm_prob(k: usize, t: usize) -> f64 {
    binom_tail(k, 0.5, t)
}

/// Probability that a syncword received with bit error rate `ber` still
/// reaches the threshold.
pub fn detection_prob(k: usize, t: usize, ber: f64) -> f64 {
    binom_tail(k, 1.0 - ber, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdChoice {
    pub threshold: usize,
    pub false_alarm: f64,
    pub miss: f64,
}

/// [`recommend_threshold_with`] under [`DEFAULT_MISS_BUDGET`].
pub fn recommend_threshold(k: usize, ber_max: f64, fa_max: f64) -> Result<ThresholdChoice> {
    recommend_threshold_with(k, ber_max, fa_max, DEFAULT_MISS_BUDGET)
}

/// Smallest threshold whose false alarm probability is at most `fa_max`,
/// provided the miss probability at `ber_max` stays within `miss_max`.
/// The detection probability falls as the threshold rises, so if the
/// smallest admissible threshold misses too often every larger one does too
/// and the operating point is infeasible.
pub fn recommend_threshold_with(
    k: usize,
    ber_max: f64,
    fa_max: f64,
    miss_max: f64,
) -> Result<ThresholdChoice> {
    if !(ber_max > 0.0 && ber_max < 0.5) {
        return Err(Error::config(format!(
            "ber_max must lie in (0, 0.5), got {ber_max}"
        )));
    }
    if !(fa_max > 0.0 && fa_max < 1.0) {
        return Err(Error::config(format!(
            "fa_max must lie in (0, 1), got {fa_max}"
        )));
    }
    if !(miss_max > 0.0 && miss_max < 1.0) {
        return Err(Error::config(format!(
            "miss_max must lie in (0, 1), got {miss_max}"
        )));
    }
    let threshold = (0..=k)
        .find(|&t| false_alarm_prob(k, t) <= fa_max)
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "k={k}: even a perfect match has false alarm probability {:.3e} > {fa_max:e}",
                false_alarm_prob(k, k)
            ))
        })?;
    let miss = 1.0 - detection_prob(k, threshold, ber_max);
    if miss > miss_max {
        return Err(Error::Infeasible(format!(
            "k={k}: threshold {threshold} meets the false alarm target but misses with \
             probability {miss:.3e} > {miss_max:e} at ber {ber_max}"
        )));
    }
    Ok(ThresholdChoice {
        threshold,
        false_alarm: false_alarm_prob(k, threshold),
        miss,
    })
}

/// Frame synchronization outcome for one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct FserReport {
    pub label: String,
    pub noise_voltage: f64,
    pub snr_db: f64,
    pub frames_total: usize,
    pub frames_detected: usize,
    pub frames_missed: usize,
    pub false_alarms: usize,
    pub fser: f64,
    /// Seed that reproduces the row.
    pub seed: u64,
}

pub const FSER_CSV_HEADER: [&str; 9] = [
    "label",
    "noise_voltage",
    "snr_db",
    "total",
    "detected",
    "missed",
    "false_alarms",
    "fser",
    "seed",
];

impl FserReport {
    fn from_counts(total: usize, detected: usize, false_alarms: usize) -> Self {
        let missed = total - detected;
        Self {
            label: String::new(),
            noise_voltage: 0.0,
            snr_db: f64::INFINITY,
            frames_total: total,
            frames_detected: detected,
            frames_missed: missed,
            false_alarms,
            fser: if total == 0 {
                0.0
            } else {
                missed as f64 / total as f64
            },
            seed: 0,
        }
    }

    pub fn with_condition(
        mut self,
        label: &str,
        noise_voltage: f64,
        snr_db: f64,
        seed: u64,
    ) -> Self {
        self.label = label.to_string();
        self.noise_voltage = noise_voltage;
        self.snr_db = snr_db;
        self.seed = seed;
        self
    }

    pub fn record(&self) -> [String; 9] {
        [
            self.label.clone(),
            format!("{}", self.noise_voltage),
            format!("{:.4}", self.snr_db),
            self.frames_total.to_string(),
            self.frames_detected.to_string(),
            self.frames_missed.to_string(),
            self.false_alarms.to_string(),
            format!("{}", self.fser),
            self.seed.to_string(),
        ]
    }
}

pub fn write_fser_csv<W: Write>(writer: W, rows: &[FserReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let to_err = |e: csv::Error| Error::format(format!("CSV write failed: {e}"));
    w.write_record(FSER_CSV_HEADER).map_err(to_err)?;
    for r in rows {
        w.write_record(r.record()).map_err(to_err)?;
    }
    w.flush()
        .map_err(|e| Error::format(format!("CSV write failed: {e}")))
}

fn check_lengths(payloads: &[BitStream], n: usize, what: &str) -> Result<()> {
    match payloads.iter().find(|p| p.len() != n) {
        Some(p) => Err(Error::format(format!(
            "{what} payload has {} bits, expected {n}",
            p.len()
        ))),
        None => Ok(()),
    }
}

/// Sequential alignment of extracted payloads to originals. Returns
/// `(extracted index, original index)` for every match.
pub fn match_pairs(
    originals: &[BitStream],
    extracted: &[BitStream],
    delta: f64,
) -> Result<Vec<(usize, usize)>> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::config(format!(
            "match delta must lie in [0, 0.5), got {delta}"
        )));
    }
    let n = match originals.first().or(extracted.first()) {
        Some(p) => p.len(),
        None => return Ok(Vec::new()),
    };
    check_lengths(originals, n, "original")?;
    check_lengths(extracted, n, "extracted")?;
    let limit = delta * n as f64;
    let mut cursor = 0;
    let mut pairs = Vec::new();
    for (ei, e) in extracted.iter().enumerate() {
        let hit = (cursor..originals.len()).find(|&oi| {
            e.hamming_distance(&originals[oi]).expect("lengths checked") as f64 <= limit
        });
        if let Some(oi) = hit {
            pairs.push((ei, oi));
            cursor = oi + 1;
        }
    }
    Ok(pairs)
}

pub fn match_payloads(
    originals: &[BitStream],
    extracted: &[BitStream],
    delta: f64,
) -> Result<FserReport> {
    let pairs = match_pairs(originals, extracted, delta)?;
    Ok(FserReport::from_counts(
        originals.len(),
        pairs.len(),
        extracted.len() - pairs.len(),
    ))
}

/// Fraction of differing bits; 0 for empty inputs.
pub fn ber_measure(a: &BitStream, b: &BitStream) -> Result<f64> {
    let d = a.hamming_distance(b)?;
    Ok(if a.is_empty() {
        0.0
    } else {
        d as f64 / a.len() as f64
    })
}
