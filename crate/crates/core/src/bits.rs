//! Fixed-length bit strings, written most-significant (leftmost) bit first.
//!
//! Position 0 is the leftmost character of the textual form, so `"1011"`
//! has `get(0) == true` and `get(1) == false`. Databases, queries, subset
//! characteristic vectors and register contents all use this convention.

use std::fmt;

use crate::error::{Error, Result};

pub const MAX_BITS: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct BitString {
    len: u8,
    bits: u64,
}

fn mask(len: usize) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl BitString {
    pub fn new(value: u64, len: usize) -> Result<Self> {
        if len > MAX_BITS {
            return Err(Error::Length(format!("bit string of length {len} exceeds {MAX_BITS}")));
        }
        if value & !mask(len) != 0 {
            return Err(Error::Length(format!("value {value:#x} does not fit in {len} bits")));
        }
        Ok(Self { len: len as u8, bits: value })
    }

    /// Internal constructor; callers guarantee `value < 2^len`.
    pub(crate) fn from_raw(value: u64, len: usize) -> Self {
        debug_assert!(len <= MAX_BITS && value & !mask(len) == 0);
        Self { len: len as u8, bits: value }
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_raw(0, len)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let len = text.len();
        if len > MAX_BITS {
            return Err(Error::Length(format!("bit string of length {len} exceeds {MAX_BITS}")));
        }
        let mut bits = 0u64;
        for c in text.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                other => return Err(Error::Length(format!("invalid bit character {other:?}"))),
            }
        }
        Ok(Self::from_raw(bits, len))
    }

    /// Parses a hex string (optional `0x` prefix) into exactly `len` bits.
    pub fn from_hex(text: &str, len: usize) -> Result<Self> {
        let digits = text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")).unwrap_or(text);
        if digits.is_empty() || digits.len() != len.div_ceil(4) {
            return Err(Error::Length(format!(
                "expected {} hex digit(s) for {len} bits, got {:?}",
                len.div_ceil(4),
                text
            )));
        }
        let value = u64::from_str_radix(digits, 16)
            .map_err(|e| Error::Length(format!("malformed hex {text:?}: {e}")))?;
        Self::new(value, len)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The bits read as an unsigned integer, leftmost bit most significant.
    pub fn value(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, pos: usize) -> bool {
        assert!(pos < self.len(), "bit {pos} out of range for length {}", self.len);
        (self.bits >> (self.len() - 1 - pos)) & 1 == 1
    }

    pub fn toggle(&self, pos: usize) -> Self {
        assert!(pos < self.len(), "bit {pos} out of range for length {}", self.len);
        Self::from_raw(self.bits ^ (1 << (self.len() - 1 - pos)), self.len())
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len, "dot product of unequal lengths");
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        Self::from_raw(self.bits ^ other.bits, self.len())
    }

    pub fn concat(&self, other: &Self) -> Self {
        let len = self.len() + other.len();
        assert!(len <= MAX_BITS, "concatenation exceeds {MAX_BITS} bits");
        Self::from_raw((self.bits << other.len()) | other.bits, len)
    }

    /// Bits `start..start + len`.
    pub fn substring(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len(), "substring out of range");
        let shift = self.len() - start - len;
        Self::from_raw((self.bits >> shift) & mask(len), len)
    }

    /// First and second halves of an even-length string.
    pub fn halves(&self) -> Result<(Self, Self)> {
        if !self.len().is_multiple_of(2) || self.is_empty() {
            return Err(Error::Length(format!("cannot halve a string of length {}", self.len)));
        }
        let half = self.len() / 2;
        Ok((self.substring(0, half), self.substring(half, half)))
    }

    /// Recursive halving: `z[j_1, .., j_k] = (z[j_1, .., j_{k-1}])[j_k]`,
    /// where index 0 selects the first half and 1 the second.
    pub fn slice(&self, path: &[bool]) -> Result<Self> {
        if !self.len().is_power_of_two() {
            return Err(Error::Length(format!("length {} is not a power of two", self.len)));
        }
        let depth = self.len().trailing_zeros() as usize;
        if path.len() > depth {
            return Err(Error::Length(format!(
                "path of length {} too deep for a string of length {}",
                path.len(),
                self.len
            )));
        }
        let len = self.len() >> path.len();
        let offset = path.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        Ok(self.substring(offset * len, len))
    }

    /// All strings of the given length in increasing numeric order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < MAX_BITS, "cannot enumerate {len}-bit strings");
        (0..1u64 << len).map(move |v| BitString::from_raw(v, len))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for pos in 0..self.len() {
            f.write_str(if self.get(pos) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_roundtrip() {
        let b = BitString::parse("10100110").unwrap();
        assert_eq!(b.value(), 0xA6);
        assert_eq!(b.to_string(), "10100110");
        assert!(b.get(0));
        assert!(!b.get(1));
    }

    #[test]
    fn halves_and_slices() {
        let z = BitString::parse("10100110").unwrap();
        let (a, b) = z.halves().unwrap();
        assert_eq!(a.to_string(), "1010");
        assert_eq!(b.to_string(), "0110");
        assert_eq!(z.slice(&[false, true]).unwrap().to_string(), "10");
        assert_eq!(z.slice(&[true, false]).unwrap().to_string(), "01");
        // follows from the recurrence: second bit of z[1,0] = 01
        assert_eq!(z.slice(&[true, false, true]).unwrap().to_string(), "1");
        assert_eq!(z.slice(&[true, true, true]).unwrap().to_string(), "0");
        assert_eq!(z.slice(&[false, false, false]).unwrap().to_string(), "1");
        assert_eq!(z.slice(&[]).unwrap(), z);
        assert!(z.slice(&[true; 4]).is_err());
        assert!(BitString::parse("101").unwrap().slice(&[true]).is_err());
    }

    #[test]
    fn hex_parsing() {
        assert_eq!(BitString::from_hex("0xA6", 8).unwrap().to_string(), "10100110");
        assert_eq!(BitString::from_hex("2", 2).unwrap().to_string(), "10");
        assert!(BitString::from_hex("4", 2).is_err());
        assert!(BitString::from_hex("A6", 4).is_err());
        assert!(BitString::from_hex("zz", 8).is_err());
    }

    #[test]
    fn dot_and_toggle() {
        let a = BitString::parse("1011").unwrap();
        let b = BitString::parse("1101").unwrap();
        assert!(!a.dot(&b));
        assert_eq!(a.toggle(1).to_string(), "1111");
        assert_eq!(a.concat(&b).to_string(), "10111101");
    }
}
