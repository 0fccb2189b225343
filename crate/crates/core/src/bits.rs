//! Arbitrary-length bit strings used for measurement outcomes.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitStringError {
    #[error("invalid character {0:?} in bit string")]
    InvalidChar(char),
    #[error("bit string has length {found}, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("hex value needs {needed} bits but only {available} qubits are available")]
    HexOverflow { needed: usize, available: usize },
}

/// A bit string of fixed length. Index 0 is qubit 0.
///
/// The textual form is little-endian: character `i` is bit `i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Low `len` bits of `value`, bit `i` of the integer becoming index `i`.
    pub fn from_u128(len: usize, value: u128) -> Self {
        let mut s = Self::zeros(len);
        for i in 0..len.min(128) {
            s.set(i, (value >> i) & 1 == 1);
        }
        s
    }

    /// Build from little-endian words; bits past `len` are cleared.
    pub fn from_words(len: usize, words: &[u64]) -> Self {
        let mut s = Self::zeros(len);
        for (dst, src) in s.words.iter_mut().zip(words) {
            *dst = *src;
        }
        s.clear_tail();
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Parse a `0`/`1` string or a `0x`-prefixed hexadecimal integer (bit `i`
    /// of the integer is qubit `i`) into a string of length `len`.
    pub fn parse_with_len(text: &str, len: usize) -> Result<Self, BitStringError> {
        let text = text.trim();
        if let Some(hex) = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
            let mut s = Self::zeros(len);
            for (nibble_index, c) in hex.chars().rev().enumerate() {
                let d = c.to_digit(16).ok_or(BitStringError::InvalidChar(c))? as u64;
                for b in 0..4 {
                    if (d >> b) & 1 == 1 {
                        let i = nibble_index * 4 + b;
                        if i >= len {
                            return Err(BitStringError::HexOverflow {
                                needed: i + 1,
                                available: len,
                            });
                        }
                        s.set(i, true);
                    }
                }
            }
            return Ok(s);
        }
        let s: BitString = text.parse()?;
        if s.len() != len {
            return Err(BitStringError::Length {
                expected: len,
                found: s.len(),
            });
        }
        Ok(s)
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

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "BitString length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| crate::gf2kernel::BitIter(w).map(move |b| wi * 64 + b))
    }

    /// Value as an integer (bit `i` = qubit `i`); only for `len <= 128`.
    pub fn to_u128(&self) -> u128 {
        assert!(
            self.len <= 128,
            "BitString of length {} does not fit u128",
            self.len
        );
        self.words
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &w)| acc | (u128::from(w) << (64 * i)))
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let mut out = BitString::zeros(s.chars().count());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => out.set(i, true),
                other => return Err(BitStringError::InvalidChar(other)),
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}
