//! Reference implementations shared by the integration tests. They work bit
//! by bit on plain vectors and share no code with the library.

#![allow(dead_code)]

use longsync::rng::SplitMix64;
use longsync::BitStream;

pub fn random_bools(n: usize, seed: u64) -> Vec<bool> {
    let mut rng = SplitMix64::new(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = rng.next_u64();
        for i in 0..64 {
            if out.len() == n {
                break;
            }
            out.push((w >> (63 - i)) & 1 == 1);
        }
    }
    out
}

pub fn to_stream(bits: &[bool]) -> BitStream {
    bits.iter().copied().collect()
}

/// Gray quadrant of a bit pair: 00, 01, 11, 10 counter-clockwise from the
/// first quadrant.
fn quadrant(b0: bool, b1: bool) -> u8 {
    match (b0, b1) {
        (false, false) => 0,
        (false, true) => 1,
        (true, true) => 2,
        (true, false) => 3,
    }
}

fn pair(q: u8) -> (bool, bool) {
    match q % 4 {
        0 => (false, false),
        1 => (false, true),
        2 => (true, true),
        _ => (true, false),
    }
}

/// The bits a receiver decodes when the constellation is turned by
/// `rot`·90° counter-clockwise.
pub fn rotate(bits: &[bool], rot: u8) -> Vec<bool> {
    bits.chunks(2)
        .flat_map(|c| {
            let (a, b) = pair(quadrant(c[0], c[1]) + rot);
            [a, b]
        })
        .collect()
}

/// Agreement count of `sync` with the window starting at every position.
pub fn correlations(stream: &[bool], sync: &[bool]) -> Vec<u16> {
    let k = sync.len();
    if stream.len() < k {
        return Vec::new();
    }
    (0..=stream.len() - k)
        .map(|p| {
            sync.iter()
                .zip(&stream[p..p + k])
                .filter(|(a, b)| a == b)
                .count() as u16
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefEvent {
    pub pos: usize,
    pub corr: usize,
    pub rot: u8,
}

/// Block decisions over precomputed correlations, one table per rotation.
/// Block `b` holds the windows whose last bit lies in `[b·m, (b+1)·m)`; the
/// best window of a block fires when it reaches `threshold`. Within a
/// rotation the earliest maximum wins, across rotations the lowest rotation
/// wins ties. With `suspend`, detection pauses for `k + n` bits.
pub fn reference_events(
    corrs: &[Vec<u16>],
    k: usize,
    m: usize,
    threshold: usize,
    n: usize,
    suspend: bool,
) -> Vec<RefEvent> {
    let positions = corrs[0].len();
    if positions == 0 {
        return Vec::new();
    }
    let len = positions + k - 1;
    let mut out = Vec::new();
    let mut resume = 0usize;
    for b in 0..=(len - 1) / m {
        let mut best: Option<RefEvent> = None;
        for (rot, table) in corrs.iter().enumerate() {
            let mut local: Option<(usize, usize)> = None;
            for end in b * m..((b + 1) * m).min(len) {
                if end + 1 < k {
                    continue;
                }
                let p = end + 1 - k;
                if p < resume {
                    continue;
                }
                let c = table[p] as usize;
                if local.is_none_or(|(lc, _)| c > lc) {
                    local = Some((c, p));
                }
            }
            if let Some((c, p)) = local {
                if best.is_none_or(|e| c > e.corr) {
                    best = Some(RefEvent {
                        pos: p,
                        corr: c,
                        rot: rot as u8,
                    });
                }
            }
        }
        if let Some(e) = best {
            if e.corr >= threshold {
                out.push(e);
                if suspend {
                    resume = e.pos + k + n;
                }
            }
        }
    }
    out
}

/// A random stream with `count` copies of `sync` planted at random
/// non-overlapping positions, each turned by `i % 4` quarter turns and with
/// `corrupt` of its bits flipped.
pub fn planted_stream(
    len: usize,
    sync: &[bool],
    count: usize,
    corrupt: usize,
    seed: u64,
) -> (Vec<bool>, Vec<usize>) {
    let mut bits = random_bools(len, seed);
    let mut rng = SplitMix64::new(seed ^ 0xA5A5);
    let k = sync.len();
    let slot = len / count;
    let mut positions = Vec::with_capacity(count);
    for i in 0..count {
        let pos = i * slot + (rng.next_u64() as usize) % (slot - k);
        let mut word = rotate(sync, (i % 4) as u8);
        let mut flipped = std::collections::HashSet::new();
        while flipped.len() < corrupt {
            flipped.insert((rng.next_u64() as usize) % k);
        }
        for f in flipped {
            word[f] = !word[f];
        }
        bits[pos..pos + k].copy_from_slice(&word);
        positions.push(pos);
    }
    (bits, positions)
}

/// Standard normal upper tail.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// `J₀(x) = (1/π)∫₀^π cos(x sin θ) dθ` by composite Simpson.
pub fn bessel_j0(x: f64) -> f64 {
    let n = 2000;
    let h = std::f64::consts::PI / n as f64;
    let f = |t: f64| (x * t.sin()).cos();
    let mut s = f(0.0) + f(std::f64::consts::PI);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / std::f64::consts::PI
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &ix in &idx[i..=j] {
                r[ix] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return f64::NAN;
    }
    cov / (vx * vy).sqrt()
}

/// Prints a line that bypasses the test harness's output capture.
pub fn report(line: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}
