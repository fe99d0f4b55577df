use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// An arbitrary-length bit sequence packed MSB-first into 64-bit words.
///
/// Bit `i` lives in word `i / 64` at bit position `63 - i % 64`. Storage past
/// `len` is always zero, which lets word-level operations (XOR, popcount)
/// run over the tail without masking.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(words_for(bits)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    /// Builds a stream from raw words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Result<Self> {
        if len > words.len() * 64 {
            return Err(Error::format(format!(
                "{len} bits claimed but only {} words supplied",
                words.len()
            )));
        }
        words.truncate(words_for(len));
        let mut bs = Self { words, len };
        bs.clear_padding();
        Ok(bs)
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 << (64 - rem);
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// # Panics
    /// If `i >= len`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (63 - i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let b = self.get(i);
        self.set(i, !b);
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            let i = self.len;
            self.words[i / 64] |= 1u64 << (63 - i % 64);
        }
        self.len += 1;
    }

    /// Appends the top `count` bits of `word` (MSB first).
    pub fn push_word(&mut self, word: u64, count: usize) {
        assert!(count <= 64);
        if count == 0 {
            return;
        }
        let word = if count == 64 {
            word
        } else {
            word & (!0u64 << (64 - count))
        };
        let rem = self.len % 64;
        if rem == 0 {
            self.words.push(word);
        } else {
            let last = self.words.len() - 1;
            self.words[last] |= word >> rem;
            if rem + count > 64 {
                self.words.push(word << (64 - rem));
            }
        }
        self.len += count;
    }

    pub fn extend_from(&mut self, other: &BitStream) {
        let full = other.len / 64;
        for &w in &other.words[..full] {
            self.push_word(w, 64);
        }
        let rem = other.len % 64;
        if rem > 0 {
            self.push_word(other.words[full], rem);
        }
    }

    /// The 64 bits starting at `offset`, zero-filled past the end.
    #[inline]
    pub fn word_at(&self, offset: usize) -> u64 {
        let q = offset / 64;
        let r = offset % 64;
        let hi = match self.words.get(q) {
            Some(&w) => w << r,
            None => return 0,
        };
        if r == 0 {
            hi
        } else {
            hi | self.words.get(q + 1).map_or(0, |&w| w >> (64 - r))
        }
    }

    /// Copies `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> BitStream {
        assert!(
            start + len <= self.len,
            "slice {start}..{} out of range for length {}",
            start + len,
            self.len
        );
        let mut words = Vec::with_capacity(words_for(len));
        let mut off = start;
        while off < start + len {
            words.push(self.word_at(off));
            off += 64;
        }
        let mut out = BitStream { words, len };
        out.clear_padding();
        out
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bitwise complement over the valid bits.
    pub fn complement(&self) -> BitStream {
        let mut out = BitStream {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        out.clear_padding();
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming_distance(&self, other: &BitStream) -> Result<usize> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let iter = iter.into_iter();
        let mut bs = BitStream::with_capacity(iter.size_hint().0);
        for b in iter {
            bs.push(b);
        }
        bs
    }
}

impl FromStr for BitStream {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; whitespace and `_` are ignored.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace() && *c != '_')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::format(format!("invalid bit character {other:?}"))),
            })
            .collect()
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "BitStream({self})")
        } else {
            write!(f, "BitStream(len={}, ones={})", self.len, self.count_ones())
        }
    }
}
