//! MSB-first bit vectors used for logical packets.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// An ordered sequence of bits, most significant bit first.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        Self(Vec::with_capacity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![false; n])
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self(bits.to_vec())
    }

    /// Takes the first `n` bits of `bytes`, MSB first.
    pub fn from_bytes(bytes: &[u8], n: usize) -> Self {
        assert!(n <= bytes.len() * 8, "not enough bytes for {n} bits");
        Self((0..n).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect())
    }

    /// Packs into bytes, zero-padding the final byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = alloc::vec![0u8; self.0.len().div_ceil(8)];
        for (i, &b) in self.0.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = !self.0[i];
    }

    pub fn push(&mut self, b: bool) {
        self.0.push(b);
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }

    pub fn extend(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    /// Appends the low `width` bits of `value`, MSB first.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        debug_assert!(width <= 64);
        for k in (0..width).rev() {
            self.0.push(value >> k & 1 == 1);
        }
    }

    pub fn push_bytes(&mut self, bytes: &[u8], n: usize) {
        self.extend(&Bits::from_bytes(bytes, n));
    }

    /// Reads `width` bits starting at `start` as an unsigned integer.
    pub fn read_uint(&self, start: usize, width: usize) -> u64 {
        debug_assert!(width <= 64);
        self.0[start..start + width]
            .iter()
            .fold(0u64, |acc, &b| acc << 1 | b as u64)
    }

    pub fn slice(&self, start: usize, end: usize) -> Bits {
        Bits(self.0[start..end].to_vec())
    }

    pub fn truncate(&mut self, n: usize) {
        self.0.truncate(n);
    }

    pub fn resize(&mut self, n: usize) {
        self.0.resize(n, false);
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Number of positions where `self` and `other` differ. Lengths must match.
    pub fn hamming(&self, other: &Bits) -> usize {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Lower-case hex, `ceil(len / 4)` digits, trailing pad bits zero.
    pub fn to_hex(&self) -> String {
        const DIGITS: &[u8; 16] = b"0123456789abcdef";
        let mut s = String::with_capacity(self.len().div_ceil(4));
        for chunk in self.0.chunks(4) {
            let mut nib = 0u8;
            for (k, &b) in chunk.iter().enumerate() {
                if b {
                    nib |= 8 >> k;
                }
            }
            s.push(DIGITS[nib as usize] as char);
        }
        s
    }

    /// Parses `len` bits from a hex string written by [`Bits::to_hex`].
    pub fn from_hex(hex: &str, len: usize) -> Result<Bits, HexError> {
        let mut nibbles = Vec::with_capacity(hex.len());
        for c in hex.chars() {
            nibbles.push(c.to_digit(16).ok_or(HexError::InvalidDigit(c))? as u8);
        }
        if nibbles.len() != len.div_ceil(4) {
            return Err(HexError::Length {
                expected: len.div_ceil(4),
                found: nibbles.len(),
            });
        }
        let mut bits = Bits::with_capacity(nibbles.len() * 4);
        for n in nibbles {
            bits.push_uint(n as u64, 4);
        }
        if bits.as_slice()[len..].iter().any(|&b| b) {
            return Err(HexError::NonZeroPadding);
        }
        bits.truncate(len);
        Ok(bits)
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits[{}](", self.len())?;
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HexError {
    #[error("invalid hex digit {0:?}")]
    InvalidDigit(char),
    #[error("expected {expected} hex digits, found {found}")]
    Length { expected: usize, found: usize },
    #[error("non-zero padding bits")]
    NonZeroPadding,
}
