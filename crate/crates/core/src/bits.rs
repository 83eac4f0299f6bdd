//! Binary words and a minimal MSB-first bit stream used by the concrete coders.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A nonempty finite binary word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    bits: Vec<u8>,
}

impl BitWord {
    /// Builds a word from a slice of 0/1 values.
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::EmptyWord);
        }
        if let Some(pos) = bits.iter().position(|&b| b > 1) {
            return Err(Error::InvalidBit {
                pos,
                value: bits[pos],
            });
        }
        Ok(Self { bits })
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Result<Self> {
        Self::new(bits.into_iter().map(u8::from).collect())
    }

    /// The `len` low bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        assert!(len <= 64);
        Self::new((0..len).rev().map(|i| ((value >> i) & 1) as u8).collect())
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0; n])
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    /// `0101...` of length `n`.
    pub fn alternating(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (i % 2) as u8).collect())
    }

    /// Expands bytes MSB first, 8 bits per byte.
    pub fn from_bytes_msb(bytes: &[u8]) -> Result<Self> {
        Self::new(
            bytes
                .iter()
                .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1))
                .collect(),
        )
    }

    /// Packs MSB first, zero padding the last byte.
    pub fn to_bytes_msb(&self) -> Vec<u8> {
        pack_msb(&self.bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn is_constant(&self) -> bool {
        let w = self.weight();
        w == 0 || w == self.len()
    }

    /// The first `len` bits, or `None` if `len` is 0 or exceeds the word.
    pub fn prefix(&self, len: usize) -> Option<BitWord> {
        if len == 0 || len > self.len() {
            return None;
        }
        Some(Self {
            bits: self.bits[..len].to_vec(),
        })
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len() <= 128 {
            write!(f, "BitWord({self})")
        } else {
            write!(f, "BitWord(n={}, w={})", self.len(), self.weight())
        }
    }
}

impl FromStr for BitWord {
    type Err = Error;

    /// Parses a string of `0`/`1` characters; nothing else is accepted.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .enumerate()
            .map(|(pos, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidChar { pos, found: other }),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }
}

pub(crate) fn pack_msb(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | (b << (7 - i)))
        })
        .collect()
}

/// Append-only bit sink.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct BitWriter {
    bits: Vec<u8>,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(u8::from(bit));
    }

    pub fn extend_from_bits(&mut self, bits: &[u8]) {
        self.bits.extend_from_slice(bits);
    }

    /// Writes the low `width` bits of `value`, most significant first.
    pub fn write_u64(&mut self, value: u64, width: u32) {
        debug_assert!(width == 64 || value >> width == 0);
        for i in (0..width).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        pack_msb(&self.bits)
    }
}

/// Cursor over a bit slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bits: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a [u8]) -> Self {
        Self { bits, pos: 0 }
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        let b = *self.bits.get(self.pos).ok_or(Error::Truncated)?;
        self.pos += 1;
        Ok(b == 1)
    }

    pub fn read_u64(&mut self, width: u32) -> Result<u64> {
        if width > 64 {
            return Err(Error::Malformed("integer field wider than 64 bits"));
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.read_bit()?);
        }
        Ok(v)
    }

    pub fn read_bits(&mut self, count: usize) -> Result<&'a [u8]> {
        if self.remaining() < count {
            return Err(Error::Truncated);
        }
        let out = &self.bits[self.pos..self.pos + count];
        self.pos += count;
        Ok(out)
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}
