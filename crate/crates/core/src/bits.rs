//! Fixed-length bit strings, most significant bit first.
//!
//! A [`Bits`] of length `len` keeps its bits right-aligned in a `u128`, so
//! the string `"101"` is stored as `value == 0b101, len == 3`. Addresses are
//! just `Bits` whose length equals the address width.

use std::fmt;

pub const MAX_WIDTH: usize = 128;

#[inline]
pub fn mask(len: u32) -> u128 {
    if len >= 128 {
        u128::MAX
    } else {
        (1u128 << len) - 1
    }
}

#[inline]
pub(crate) fn shr(v: u128, n: u32) -> u128 {
    v.checked_shr(n).unwrap_or(0)
}

#[inline]
pub(crate) fn shl(v: u128, n: u32) -> u128 {
    v.checked_shl(n).unwrap_or(0)
}

/// `2^n`, saturating at `u128::MAX`.
#[inline]
pub fn pow2_saturating(n: u32) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        1u128 << n
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    value: u128,
    len: u8,
}

impl Bits {
    pub const EMPTY: Bits = Bits { value: 0, len: 0 };

    /// Builds from the low `len` bits of `value`; higher bits are discarded.
    pub fn new(value: u128, len: usize) -> Self {
        assert!(len <= MAX_WIDTH, "bit string longer than 128");
        Bits {
            value: value & mask(len as u32),
            len: len as u8,
        }
    }

    #[inline]
    pub fn value(self) -> u128 {
        self.value
    }

    #[inline]
    pub fn len(self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    /// Bit `i` counted from the most significant end.
    pub fn bit(self, i: usize) -> bool {
        debug_assert!(i < self.len());
        (self.value >> (self.len() - 1 - i)) & 1 == 1
    }

    /// The first `n` bits.
    pub fn prefix(self, n: usize) -> Bits {
        debug_assert!(n <= self.len());
        Bits::new(shr(self.value, (self.len() - n) as u32), n)
    }

    /// Bits `[start, start + len)`.
    pub fn slice(self, start: usize, len: usize) -> Bits {
        debug_assert!(start + len <= self.len());
        let tail = self.len() - start - len;
        Bits::new(shr(self.value, tail as u32), len)
    }

    /// Everything from `start` on.
    pub fn skip(self, start: usize) -> Bits {
        self.slice(start, self.len() - start)
    }

    pub fn push(self, bit: bool) -> Bits {
        Bits::new((self.value << 1) | bit as u128, self.len() + 1)
    }

    pub fn concat(self, other: Bits) -> Bits {
        Bits::new(shl(self.value, other.len as u32) | other.value, self.len() + other.len())
    }

    /// Pads on the right with zeros (or ones) up to `width` bits.
    pub fn pad_to(self, width: usize, fill_ones: bool) -> Bits {
        debug_assert!(width >= self.len());
        let extra = (width - self.len()) as u32;
        let fill = if fill_ones { mask(extra) } else { 0 };
        Bits::new(shl(self.value, extra) | fill, width)
    }

    /// True when `self` is a prefix of `other`.
    pub fn is_prefix_of(self, other: Bits) -> bool {
        self.len <= other.len && other.prefix(self.len()) == self
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_binary(s: &str) -> Option<Bits> {
        if s.len() > MAX_WIDTH {
            return None;
        }
        let mut out = Bits::EMPTY;
        for c in s.chars() {
            out = match c {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return None,
            };
        }
        Some(out)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self}/{})", self.len)
    }
}

impl serde::Serialize for Bits {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
