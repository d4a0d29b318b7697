//! Fixed-width bit strings, the arithmetic substrate of the protocol.
//!
//! Identifiers and messages are `l`-bit strings where `l` is a positive
//! multiple of 4 (so values print as whole hex digits) of at most 128 bits,
//! which covers realistic tag identifier widths. A value is kept
//! right-aligned in a `u128`; bit 0 of the logical string is the most
//! significant bit of the masked value, matching the order in which bits are
//! fed to the hash.

use std::fmt;
use std::ops::BitXor;

/// Direction of a circular rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Left,
    Right,
}

/// Width limit for [`BitStr`] values.
pub const MAX_BITS: u32 = 128;

/// Is `len` a legal bit-string width? (positive multiple of 4, at most 128)
pub fn width_is_valid(len: u32) -> bool {
    len > 0 && len % 4 == 0 && len <= MAX_BITS
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitStr {
    value: u128,
    len: u32,
}

impl BitStr {
    /// Build a bit string of width `len`. Panics if the width is illegal or
    /// the value does not fit — constructing malformed strings is a
    /// programming error, not a runtime condition.
    pub fn new(value: u128, len: u32) -> Self {
        assert!(width_is_valid(len), "illegal bit width {len}");
        assert!(
            len == 128 || value < (1u128 << len),
            "value 0x{value:x} does not fit in {len} bits"
        );
        BitStr { value, len }
    }

    pub fn zero(len: u32) -> Self {
        BitStr::new(0, len)
    }

    pub fn value(&self) -> u128 {
        self.value
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    fn mask(len: u32) -> u128 {
        if len == 128 {
            u128::MAX
        } else {
            (1u128 << len) - 1
        }
    }

    /// Circular rotation by `k` positions (`k` may equal the width, which is
    /// the identity). The caller is responsible for `k <= len`.
    pub fn rotate(&self, k: u32, dir: Rotation) -> Self {
        assert!(k <= self.len, "rotation by {k} exceeds width {}", self.len);
        let k = k % self.len;
        if k == 0 {
            return *self;
        }
        let m = Self::mask(self.len);
        let v = match dir {
            Rotation::Left => ((self.value << k) | (self.value >> (self.len - k))) & m,
            Rotation::Right => ((self.value >> k) | (self.value << (self.len - k))) & m,
        };
        BitStr { value: v, len: self.len }
    }

    /// The bits packed MSB-first into whole bytes, zero-padded on the right
    /// when the width is not a byte multiple. This is the canonical encoding
    /// fed to hashes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = BitWriter::new();
        w.push(*self);
        w.finish()
    }

    /// Lowercase hex, exactly `len / 4` digits.
    pub fn to_hex(&self) -> String {
        format!("{:0width$x}", self.value, width = (self.len / 4) as usize)
    }

    /// Parse `len / 4` lowercase or uppercase hex digits.
    pub fn from_hex(s: &str, len: u32) -> Option<Self> {
        if !width_is_valid(len) || s.len() != (len / 4) as usize {
            return None;
        }
        u128::from_str_radix(s, 16).ok().map(|v| BitStr::new(v, len))
    }
}

impl BitXor for BitStr {
    type Output = BitStr;
    fn bitxor(self, rhs: BitStr) -> BitStr {
        assert_eq!(self.len, rhs.len, "xor of mismatched widths");
        BitStr { value: self.value ^ rhs.value, len: self.len }
    }
}

impl fmt::Debug for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStr(0x{}/{})", self.to_hex(), self.len)
    }
}

impl fmt::Display for BitStr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Accumulates bit strings MSB-first into a byte stream, padding the final
/// partial byte with zero bits. Used to build hash inputs, where `k ∥ m`
/// concatenation must be defined down to the bit level.
pub struct BitWriter {
    buf: Vec<u8>,
    pending: u16,
    pending_bits: u32,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter { buf: Vec::new(), pending: 0, pending_bits: 0 }
    }

    pub fn push(&mut self, b: BitStr) {
        // Append nibble by nibble; widths are multiples of 4 so this is exact.
        let nibbles = b.len() / 4;
        for i in (0..nibbles).rev() {
            let nib = ((b.value() >> (i * 4)) & 0xF) as u16;
            self.pending = (self.pending << 4) | nib;
            self.pending_bits += 4;
            if self.pending_bits == 8 {
                self.buf.push(self.pending as u8);
                self.pending = 0;
                self.pending_bits = 0;
            }
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        if self.pending_bits > 0 {
            self.buf.push((self.pending << (8 - self.pending_bits)) as u8);
        }
        self.buf
    }
}

impl Default for BitWriter {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rotation_worked_example() {
        let x = BitStr::new(0b1011_0010, 8);
        assert_eq!(x.rotate(2, Rotation::Right).value(), 0b1010_1100);
        assert_eq!(x.rotate(2, Rotation::Left).value(), 0b1100_1010);
    }

    #[test]
    fn rotation_by_zero_and_width_is_identity() {
        let x = BitStr::new(0xdead, 16);
        assert_eq!(x.rotate(0, Rotation::Left), x);
        assert_eq!(x.rotate(16, Rotation::Left), x);
        assert_eq!(x.rotate(16, Rotation::Right), x);
    }

    #[test]
    fn full_width_values_rotate_without_overflow() {
        let x = BitStr::new(u128::MAX - 1, 128);
        let left = x.rotate(1, Rotation::Left);
        assert_eq!(left.value(), u128::MAX ^ 2);
        assert_eq!(left.rotate(1, Rotation::Right), x);
    }

    #[test]
    fn packing_is_msb_first_and_nibble_exact() {
        assert_eq!(BitStr::new(0xe3, 8).to_bytes(), vec![0xe3]);
        assert_eq!(BitStr::new(0xabc, 12).to_bytes(), vec![0xab, 0xc0]);

        // Two 4-bit strings concatenate into one byte.
        let mut w = BitWriter::new();
        w.push(BitStr::new(0xa, 4));
        w.push(BitStr::new(0x3, 4));
        assert_eq!(w.finish(), vec![0xa3]);
    }

    #[test]
    fn hex_round_trip() {
        let x = BitStr::new(0x0123_4567_89ab_cdef, 64);
        assert_eq!(x.to_hex(), "0123456789abcdef");
        assert_eq!(BitStr::from_hex(&x.to_hex(), 64), Some(x));
        assert_eq!(BitStr::from_hex("f", 4), Some(BitStr::new(0xf, 4)));
        assert_eq!(BitStr::from_hex("ff", 4), None);
    }

    proptest! {
        #[test]
        fn rotate_then_unrotate_is_identity(v in any::<u64>(), k in 0u32..=64) {
            let x = BitStr::new(v as u128, 64);
            prop_assert_eq!(x.rotate(k, Rotation::Left).rotate(k, Rotation::Right), x);
        }

        #[test]
        fn rotation_preserves_popcount(v in any::<u64>(), k in 0u32..=64) {
            let x = BitStr::new(v as u128, 64);
            prop_assert_eq!(
                x.rotate(k, Rotation::Left).value().count_ones(),
                x.value().count_ones()
            );
        }

        #[test]
        fn xor_is_involutive(a in any::<u64>(), b in any::<u64>()) {
            let a = BitStr::new(a as u128, 64);
            let b = BitStr::new(b as u128, 64);
            prop_assert_eq!((a ^ b) ^ b, a);
        }
    }
}
