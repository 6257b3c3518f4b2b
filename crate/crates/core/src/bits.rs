//! Bit strings with hex packing for trace dumps.

use std::fmt;
use std::ops::BitXor;

use crate::error::{Error, Result};

/// A binary string `x^n`, one `bool` per position.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString(vec![false; n])
    }

    pub fn ones(n: usize) -> Self {
        BitString(vec![true; n])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// Bits of `value` in positions `0..n`, position 0 being the most significant.
    /// Used to enumerate `{0,1}^n` in lexicographic order.
    pub fn from_index(value: u64, n: usize) -> Self {
        BitString((0..n).map(|i| (value >> (n - 1 - i)) & 1 == 1).collect())
    }

    /// Inverse of [`BitString::from_index`].
    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        self.0[i] = bit;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    /// Positions holding a zero.
    pub fn zero_positions(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (!b).then_some(i))
            .collect()
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(BitString(
            self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect(),
        ))
    }

    /// Hex packing: bit `i` lands in byte `i / 8` at bit `7 - i % 8`; the
    /// trailing byte is zero-padded. Length is carried separately.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len().div_ceil(8) * 2);
        for chunk in self.0.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (j, &b)| acc | ((b as u8) << (7 - j)));
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_hex(hex: &str, n: usize) -> Result<BitString> {
        if hex.len() != n.div_ceil(8) * 2 {
            return Err(Error::Parse(format!(
                "hex string of length {} cannot hold {n} bits",
                hex.len()
            )));
        }
        let mut bits = Vec::with_capacity(n);
        for i in 0..hex.len() / 2 {
            let byte = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16)
                .map_err(|e| Error::Parse(e.to_string()))?;
            for j in 0..8 {
                if bits.len() < n {
                    bits.push((byte >> (7 - j)) & 1 == 1);
                }
            }
        }
        Ok(BitString(bits))
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    /// Panics on length mismatch; use [`BitString::xor`] for a checked version.
    fn bitxor(self, rhs: &BitString) -> BitString {
        self.xor(rhs)
            .expect("xor of bit strings with different lengths")
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        BitString(iter.into_iter().collect())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!(
                    "unexpected character {other:?} in bit string"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}
