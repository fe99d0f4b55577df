//! Bitstream file formats.
//!
//! Two layouts are supported:
//!
//! - **packed**: raw bytes, MSB-first, final byte zero-padded, with a sidecar
//!   text file `<path>.meta` holding `bits=<count>` and `format=packed-msb`
//!   (plus any extra `key=value` lines the writer chose to record);
//! - **one-bit-per-byte**: every bit stored as a `0x00`/`0x01` byte, the
//!   layout SDR file source/sink blocks use for unpacked bits. The sidecar is
//!   written too but optional on reading.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::BitStream;
use crate::{Error, Result};

pub const PACKED_FORMAT: &str = "packed-msb";
pub const BITS_PER_BYTE_FORMAT: &str = "one-bit-per-byte";

/// Packs bits MSB-first into bytes; the final byte is zero-padded.
pub fn pack(bs: &BitStream) -> Vec<u8> {
    let nbytes = bs.len().div_ceil(8);
    let mut out = Vec::with_capacity(nbytes);
    for w in bs.words() {
        out.extend_from_slice(&w.to_be_bytes());
    }
    out.truncate(nbytes);
    out
}

/// Inverse of [`pack`]: reads `bits` bits from `bytes`.
pub fn unpack(bytes: &[u8], bits: usize) -> Result<BitStream> {
    if bits > bytes.len().saturating_mul(8) {
        return Err(Error::format(format!(
            "{bits} bits claimed but only {} bytes available",
            bytes.len()
        )));
    }
    let used = &bytes[..bits.div_ceil(8)];
    let words = used
        .chunks(8)
        .map(|chunk| {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            u64::from_be_bytes(buf)
        })
        .collect();
    BitStream::from_words(words, bits)
}

pub fn encode_one_bit_per_byte(bs: &BitStream) -> Vec<u8> {
    bs.iter().map(u8::from).collect()
}

pub fn decode_one_bit_per_byte(bytes: &[u8]) -> Result<BitStream> {
    bytes
        .iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::format(format!(
                "byte {i} has value {other:#04x}; one-bit-per-byte files hold only 0x00/0x01"
            ))),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitFormat {
    #[default]
    Packed,
    OneBitPerByte,
}

impl FromStr for BitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "packed" | PACKED_FORMAT => Ok(BitFormat::Packed),
            "bytes" | BITS_PER_BYTE_FORMAT => Ok(BitFormat::OneBitPerByte),
            other => Err(Error::format(format!("unknown bit format {other:?}"))),
        }
    }
}

impl fmt::Display for BitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitFormat::Packed => PACKED_FORMAT,
            BitFormat::OneBitPerByte => BITS_PER_BYTE_FORMAT,
        })
    }
}

/// Ordered `key=value` metadata.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sidecar {
    entries: Vec<(String, String)>,
}

impl Sidecar {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an existing value in place.
    pub fn insert(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::format(format!("metadata is missing key {key:?}")))
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.require(key)?;
        raw.parse()
            .map_err(|_| Error::format(format!("metadata key {key:?} has invalid value {raw:?}")))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Sidecar::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::format(format!("metadata line {} is not key=value", lineno + 1))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::format(format!(
                    "metadata line {} has an empty key",
                    lineno + 1
                )));
            }
            if out.get(key).is_some() {
                return Err(Error::format(format!("duplicate metadata key {key:?}")));
            }
            out.entries
                .push((key.to_string(), value.trim().to_string()));
        }
        Ok(out)
    }

    /// Validates the keys a packed bitstream sidecar must carry and returns
    /// the bit count.
    pub fn packed_bit_count(&self) -> Result<usize> {
        let format = self.require("format")?;
        if format != PACKED_FORMAT {
            return Err(Error::format(format!(
                "sidecar declares format {format:?}, expected {PACKED_FORMAT:?}"
            )));
        }
        self.parsed("bits")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }
}

impl fmt::Display for Sidecar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// `<path>.meta`
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes `bs` and a sidecar with `bits`, `format` and the entries of
/// `extra`. The data file itself is the same either way, so a
/// one-bit-per-byte file stays readable by tools that ignore the sidecar.
pub fn write_bits(path: &Path, bs: &BitStream, format: BitFormat, extra: &Sidecar) -> Result<()> {
    let bytes = match format {
        BitFormat::Packed => pack(bs),
        BitFormat::OneBitPerByte => encode_one_bit_per_byte(bs),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let mut meta = Sidecar::new();
    meta.insert("bits", bs.len());
    meta.insert("format", format);
    for (k, v) in extra.entries() {
        if k != "bits" && k != "format" {
            meta.insert(k, v);
        }
    }
    meta.write(&sidecar_path(path))
}

/// Reads a bitstream and its sidecar. Packed files need the sidecar for
/// their length; for one-bit-per-byte files it is optional.
pub fn read_bits(path: &Path, format: BitFormat) -> Result<(BitStream, Sidecar)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    match format {
        BitFormat::Packed => {
            let meta = Sidecar::read(&sidecar_path(path))?;
            let bits = meta.packed_bit_count()?;
            if bytes.len() != bits.div_ceil(8) {
                return Err(Error::format(format!(
                    "{} holds {} bytes but sidecar declares {bits} bits",
                    path.display(),
                    bytes.len()
                )));
            }
            Ok((unpack(&bytes, bits)?, meta))
        }
        BitFormat::OneBitPerByte => {
            let bits = decode_one_bit_per_byte(&bytes)?;
            let meta_path = sidecar_path(path);
            if !meta_path.exists() {
                return Ok((bits, Sidecar::new()));
            }
            let meta = Sidecar::read(&meta_path)?;
            if let Some(f) = meta.get("format") {
                if f != BITS_PER_BYTE_FORMAT {
                    return Err(Error::format(format!(
                        "sidecar declares format {f:?}, expected {BITS_PER_BYTE_FORMAT:?}"
                    )));
                }
            }
            if meta.get("bits").is_some() && meta.parsed::<usize>("bits")? != bits.len() {
                return Err(Error::format(format!(
                    "{} holds {} bits but sidecar declares {}",
                    path.display(),
                    bits.len(),
                    meta.require("bits")?
                )));
            }
            Ok((bits, meta))
        }
    }
}
