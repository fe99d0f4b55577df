use num_complex::Complex64;

use crate::framing::BitStream;
use crate::{Error, Result};

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Gray-coded constellation indexed by quadrant (counter-clockwise from 45°).
const QUADRANT_POINTS: [(f64, f64); 4] = [(H, H), (-H, H), (-H, -H), (H, -H)];

/// Bit pair (first bit in bit 1) for each quadrant: 00, 01, 11, 10.
const QUADRANT_PAIRS: [u8; 4] = [0b00, 0b01, 0b11, 0b10];

/// Quadrant of a bit pair; inverse of `QUADRANT_PAIRS`.
const PAIR_QUADRANTS: [u8; 4] = [0, 1, 3, 2];

#[inline]
pub fn pair_to_symbol(pair: u8) -> Complex64 {
    let (re, im) = QUADRANT_POINTS[PAIR_QUADRANTS[(pair & 3) as usize] as usize];
    Complex64::new(re, im)
}

/// Quadrant decision; zero components decide toward positive.
#[inline]
pub fn symbol_to_pair(s: Complex64) -> u8 {
    (u8::from(s.im < 0.0) << 1) | u8::from(s.re < 0.0)
}

/// The pair decoded after the constellation rotates by `quarter_turns`·90°.
#[inline]
pub fn rotate_pair(pair: u8, quarter_turns: u8) -> u8 {
    let q = PAIR_QUADRANTS[(pair & 3) as usize];
    QUADRANT_PAIRS[((q + quarter_turns) % 4) as usize]
}

/// Applies [`rotate_pair`] to consecutive bit pairs.
pub fn rotate_bits(bits: &BitStream, quarter_turns: u8) -> Result<BitStream> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::config(format!(
            "bit count must be even to rotate symbols, got {}",
            bits.len()
        )));
    }
    let mut out = BitStream::with_capacity(bits.len());
    for i in (0..bits.len()).step_by(2) {
        let pair = (u8::from(bits.get(i)) << 1) | u8::from(bits.get(i + 1));
        let r = rotate_pair(pair, quarter_turns);
        out.push(r & 2 != 0);
        out.push(r & 1 != 0);
    }
    Ok(out)
}

/// Gray-maps bit pairs onto unit-power QPSK points.
pub fn map_symbols(bits: &BitStream) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::config(format!(
            "QPSK needs an even bit count, got {}",
            bits.len()
        )));
    }
    Ok((0..bits.len())
        .step_by(2)
        .map(|i| pair_to_symbol((u8::from(bits.get(i)) << 1) | u8::from(bits.get(i + 1))))
        .collect())
}

pub fn decide_symbols(symbols: &[Complex64]) -> BitStream {
    let mut out = BitStream::with_capacity(2 * symbols.len());
    for &s in symbols {
        let p = symbol_to_pair(s);
        out.push(p & 2 != 0);
        out.push(p & 1 != 0);
    }
    out
}
