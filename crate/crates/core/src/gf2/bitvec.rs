use std::fmt;
use std::ops::{Add, AddAssign};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ambient dimension supported by [`BitVec`].
pub const MAX_DIM: usize = 128;

/// Mask with the low `m` bits set.
#[inline]
pub(crate) fn mask(m: usize) -> u128 {
    if m >= 128 {
        u128::MAX
    } else {
        (1u128 << m) - 1
    }
}

/// An element of F₂^m, `m ≤ 128`.
///
/// Coordinate `i` is bit `i` of the packed value, so coordinate 0 (the first
/// entry of a tuple) is the least significant bit. Byte `k` of the vector is
/// coordinates `8k..8k+8`, with coordinate `8k` as the low bit of that byte.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(into = "BitVecRepr", try_from = "BitVecRepr")]
pub struct BitVec {
    dim: usize,
    bits: u128,
}

impl BitVec {
    pub fn new(dim: usize, bits: u128) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::Capacity {
                what: "bit vector dimension",
                requested: dim,
                limit: MAX_DIM,
            });
        }
        if bits & !mask(dim) != 0 {
            return Err(Error::Parse(format!(
                "value has bits set beyond dimension {dim}"
            )));
        }
        Ok(Self { dim, bits })
    }

    /// Builds a vector, silently truncating bits beyond `dim`.
    pub fn truncated(dim: usize, bits: u128) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Self {
            dim,
            bits: bits & mask(dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::truncated(dim, 0)
    }

    /// The standard basis vector e_i.
    pub fn unit(dim: usize, i: usize) -> Self {
        assert!(i < dim, "coordinate {i} out of range for dimension {dim}");
        Self::truncated(dim, 1u128 << i)
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::truncated(dim, rng.gen::<u128>())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn bits(&self) -> u128 {
        self.bits
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        i < self.dim && (self.bits >> i) & 1 == 1
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Lowest coordinate carrying a one.
    pub fn leading_coordinate(&self) -> Option<usize> {
        (self.bits != 0).then(|| self.bits.trailing_zeros() as usize)
    }

    /// Componentwise XOR, checking dimensions.
    pub fn try_add(&self, other: &BitVec) -> Result<BitVec> {
        crate::error::check_dim(self.dim, other.dim)?;
        Ok(Self {
            dim: self.dim,
            bits: self.bits ^ other.bits,
        })
    }

    /// Direct-product embedding: `(self, other)` in F₂^(m1+m2).
    pub fn concat(&self, other: &BitVec) -> Result<BitVec> {
        let dim = self.dim + other.dim;
        if dim > MAX_DIM {
            return Err(Error::Capacity {
                what: "bit vector dimension",
                requested: dim,
                limit: MAX_DIM,
            });
        }
        let hi = if self.dim >= 128 {
            0
        } else {
            other.bits << self.dim
        };
        Ok(Self {
            dim,
            bits: self.bits | hi,
        })
    }

    /// Splits into the first `m1` coordinates and the rest.
    pub fn split(&self, m1: usize) -> Result<(BitVec, BitVec)> {
        if m1 > self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m1,
            });
        }
        let lo = Self::truncated(m1, self.bits);
        let hi_bits = if m1 >= 128 { 0 } else { self.bits >> m1 };
        Ok((lo, Self::truncated(self.dim - m1, hi_bits)))
    }

    /// Coordinate string, coordinate 0 first, e.g. `0010` for e_2 in F₂⁴.
    pub fn to_bit_string(&self) -> String {
        (0..self.dim)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut bits = 0u128;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1u128 << i,
                _ => return Err(Error::Parse(format!("invalid bit character {c:?}"))),
            }
        }
        Self::new(s.chars().count(), bits)
    }

    /// Number of bytes in the hex encoding of a `dim`-bit vector.
    pub fn hex_len(dim: usize) -> usize {
        dim.div_ceil(8)
    }

    /// Hex byte string with byte 0 (coordinates 0..8) written first, the way
    /// FIPS-197 writes keys and words.
    pub fn to_hex(&self) -> String {
        let bytes = self.bits.to_le_bytes();
        bytes[..Self::hex_len(self.dim)]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn from_hex(dim: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("0x").unwrap_or(s);
        let want = 2 * Self::hex_len(dim);
        if s.len() != want {
            return Err(Error::Parse(format!(
                "expected {want} hex digits for a {dim}-bit value, found {}",
                s.len()
            )));
        }
        let mut bytes = [0u8; 16];
        for (k, chunk) in s.as_bytes().chunks(2).enumerate() {
            let pair = std::str::from_utf8(chunk).map_err(|e| Error::Parse(e.to_string()))?;
            bytes[k] = u8::from_str_radix(pair, 16)
                .map_err(|_| Error::Parse(format!("invalid hex byte {pair:?}")))?;
        }
        Self::new(dim, u128::from_le_bytes(bytes))
    }
}

impl Add for BitVec {
    type Output = BitVec;

    fn add(self, rhs: BitVec) -> BitVec {
        assert_eq!(self.dim, rhs.dim, "adding vectors of different dimension");
        BitVec {
            dim: self.dim,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl AddAssign for BitVec {
    fn add_assign(&mut self, rhs: BitVec) {
        *self = *self + rhs;
    }
}

#[derive(Serialize, Deserialize)]
struct BitVecRepr {
    dim: usize,
    hex: String,
}

impl From<BitVec> for BitVecRepr {
    fn from(v: BitVec) -> Self {
        Self {
            dim: v.dim,
            hex: v.to_hex(),
        }
    }
}

impl TryFrom<BitVecRepr> for BitVec {
    type Error = Error;

    fn try_from(r: BitVecRepr) -> Result<Self> {
        BitVec::from_hex(r.dim, &r.hex)
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_string_puts_coordinate_zero_first() {
        let v = BitVec::unit(4, 2);
        assert_eq!(v.to_bit_string(), "0010");
        assert_eq!(BitVec::from_bit_string("0010").unwrap(), v);
    }

    #[test]
    fn hex_is_byte_string_in_coordinate_order() {
        let v = BitVec::from_hex(32, "2b7e1516").unwrap();
        assert_eq!(v.bits() & 0xff, 0x2b);
        assert_eq!(v.to_hex(), "2b7e1516");
        assert!(BitVec::from_hex(32, "2b7e15").is_err());
        // bits beyond a non-byte-aligned dimension are refused
        assert!(BitVec::from_hex(4, "1f").is_err());
        assert_eq!(BitVec::from_hex(4, "0f").unwrap().weight(), 4);
    }

    #[test]
    fn concat_and_split_are_inverse() {
        let a = BitVec::new(5, 0b10110).unwrap();
        let b = BitVec::new(7, 0b1000001).unwrap();
        let ab = a.concat(&b).unwrap();
        assert_eq!(ab.dim(), 12);
        assert_eq!(ab.split(5).unwrap(), (a, b));
    }

    #[test]
    fn mismatched_add_is_an_error() {
        let a = BitVec::zero(3);
        let b = BitVec::zero(4);
        assert_eq!(
            a.try_add(&b),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 4
            })
        );
    }

    #[test]
    fn full_width_vectors() {
        let v = BitVec::new(128, u128::MAX).unwrap();
        assert_eq!(v.weight(), 128);
        assert!(BitVec::new(129, 0).is_err());
    }
}
