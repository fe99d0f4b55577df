//! Raw IQ files: interleaved little-endian `f32` pairs (I then Q), no header.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::{Error, Result};

pub fn encode_iq(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&(s.re as f32).to_le_bytes());
        out.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_iq(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::format(format!(
            "IQ data length {} is not a whole number of 32-bit floats",
            bytes.len()
        )));
    }
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::format(format!(
            "IQ data holds {} floats; I/Q pairs need an even count",
            bytes.len() / 4
        )));
    }
    bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, c)| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            if re.is_finite() && im.is_finite() {
                Ok(Complex64::new(re as f64, im as f64))
            } else {
                Err(Error::format(format!("IQ sample {i} is not finite")))
            }
        })
        .collect()
}

pub fn read_iq(path: &Path) -> Result<Vec<Complex64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_iq(&bytes)
}

pub fn write_iq(path: &Path, samples: &[Complex64]) -> Result<()> {
    fs::write(path, encode_iq(samples)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_interleaved_le_f32() {
        let bytes = encode_iq(&[Complex64::new(1.0, -2.0)]);
        assert_eq!(&bytes[..4], &1f32.to_le_bytes());
        assert_eq!(&bytes[4..], &(-2f32).to_le_bytes());
        assert_eq!(decode_iq(&bytes).unwrap(), vec![Complex64::new(1.0, -2.0)]);
    }

    #[test]
    fn odd_float_count_rejected() {
        assert!(decode_iq(&[0u8; 12]).is_err());
        assert!(decode_iq(&[0u8; 7]).is_err());
        assert!(decode_iq(&[]).unwrap().is_empty());
    }

    #[test]
    fn non_finite_rejected() {
        let mut bytes = encode_iq(&[Complex64::new(0.0, 0.0)]);
        bytes[..4].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(decode_iq(&bytes).is_err());
    }
}
