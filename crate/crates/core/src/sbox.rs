//! S-box properties: derivatives and the difference distribution table,
//! differential uniformity, δ-anti-invariance, and affine equivalence.
//!
//! Values are `u32` with bit `i` of a value being coordinate `i`, the same
//! convention as [`BitVec`](crate::gf2::BitVec).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{gaussian_binomial, subspaces_of_dim, AffineMap, Echelon, Subspace};

/// Largest S-box width accepted.
pub const MAX_WIDTH: usize = 16;
/// Largest width for which the full DDT is materialized.
pub const MAX_DDT_WIDTH: usize = 10;
/// Upper bound on the number of subspaces an anti-invariance scan may visit.
pub const ANTI_INVARIANCE_BUDGET: u128 = 10_000_000;

#[rustfmt::skip]
pub const AES_SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

/// Irreducible polynomials used for [`SBox::field_inversion`], indexed by width.
const FIELD_POLYS: [u32; 9] = [
    0, 0b11, 0b111, 0b1011, 0b10011, 0b100101, 0b1000011, 0b10000011, 0x11b,
];

/// A bijective lookup table on F₂^s.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct SBox {
    width: usize,
    table: Vec<u32>,
}

impl SBox {
    pub fn new(width: usize, table: Vec<u32>) -> Result<Self> {
        if width > MAX_WIDTH {
            return Err(Error::Capacity {
                what: "S-box width",
                requested: width,
                limit: MAX_WIDTH,
            });
        }
        let size = 1usize << width;
        if table.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: table.len(),
            });
        }
        let mut seen = vec![false; size];
        for &y in &table {
            let slot = seen.get_mut(y as usize).ok_or(Error::OutOfRange {
                what: "S-box output",
                value: i64::from(y),
            })?;
            if std::mem::replace(slot, true) {
                return Err(Error::NotBijective { value: y });
            }
        }
        Ok(Self { width, table })
    }

    pub fn aes() -> Self {
        Self {
            width: 8,
            table: AES_SBOX.iter().map(|&b| u32::from(b)).collect(),
        }
    }

    pub fn identity(width: usize) -> Self {
        Self {
            width,
            table: (0..1u32 << width).collect(),
        }
    }

    /// 0 ↦ 0, x ↦ x⁻¹ in GF(2^s) for `1 ≤ s ≤ 8`.
    pub fn field_inversion(width: usize) -> Result<Self> {
        let poly = *FIELD_POLYS
            .get(width)
            .filter(|&&p| p != 0)
            .ok_or(Error::OutOfRange {
                what: "field inversion width",
                value: width as i64,
            })?;
        let size = 1u32 << width;
        let mut table = vec![0u32; size as usize];
        for x in 1..size {
            // x^(2^s - 2) is the inverse
            let mut acc = 1u32;
            for _ in 0..size - 2 {
                acc = gf_mul(acc, x, poly, width);
            }
            table[x as usize] = acc;
        }
        Self::new(width, table)
    }

    /// Parses hex values separated by whitespace and/or commas; the width is
    /// inferred from the number of entries.
    pub fn from_text(text: &str) -> Result<Self> {
        let values = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|t| !t.is_empty())
            .map(|t| {
                let t = t.strip_prefix("0x").unwrap_or(t);
                u32::from_str_radix(t, 16)
                    .map_err(|_| Error::Parse(format!("invalid hex value {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = values.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Parse(format!(
                "table length {n} is not a power of two ≥ 2"
            )));
        }
        Self::new(n.trailing_zeros() as usize, values)
    }

    pub fn to_text(&self) -> String {
        let digits = self.width.div_ceil(4).max(2);
        let mut out = String::new();
        for (i, y) in self.table.iter().enumerate() {
            out.push_str(&format!("{y:0digits$x}"));
            out.push(if (i + 1) % 16 == 0 { '\n' } else { ' ' });
        }
        if !out.ends_with('\n') {
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.table[x as usize]
    }

    pub fn invert(&self) -> SBox {
        let mut inv = vec![0u32; self.table.len()];
        for (x, &y) in self.table.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        SBox {
            width: self.width,
            table: inv,
        }
    }

    /// x ↦ post(f(pre(x))).
    pub fn apply_affine_equiv(&self, pre: &AffineMap, post: &AffineMap) -> Result<SBox> {
        crate::error::check_dim(self.width, pre.dim())?;
        crate::error::check_dim(self.width, post.dim())?;
        let table = (0..1u128 << self.width)
            .map(|x| {
                let y = self.apply(pre.apply_bits(x) as u32);
                post.apply_bits(u128::from(y)) as u32
            })
            .collect();
        Ok(SBox {
            width: self.width,
            table,
        })
    }

    /// x ↦ f(x) + f(0), together with the removed constant f(0).
    pub fn normalize_zero(&self) -> (SBox, u32) {
        let c = self.table[0];
        let table = self.table.iter().map(|&y| y ^ c).collect();
        (
            SBox {
                width: self.width,
                table,
            },
            c,
        )
    }

    /// Derivative in direction `a`: x ↦ f(x) + f(x + a).
    pub fn derivative(&self, a: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.table.len() as u32).map(move |x| self.apply(x) ^ self.apply(x ^ a))
    }

    pub fn ddt(&self) -> Result<Ddt> {
        if self.width > MAX_DDT_WIDTH {
            return Err(Error::Capacity {
                what: "DDT width",
                requested: self.width,
                limit: MAX_DDT_WIDTH,
            });
        }
        let size = self.table.len();
        let mut counts = vec![0u32; size * size];
        for a in 0..size {
            let row = &mut counts[a * size..(a + 1) * size];
            for b in self.derivative(a as u32) {
                row[b as usize] += 1;
            }
        }
        Ok(Ddt {
            width: self.width,
            counts,
        })
    }

    /// δ = max over a ≠ 0 and all b of DDT(a, b), computed one row at a
    /// time so it also works above [`MAX_DDT_WIDTH`].
    pub fn differential_uniformity(&self) -> DifferentialProfile {
        let size = self.table.len();
        let mut scratch = vec![0u32; size];
        let mut delta = 0u32;
        let mut worst = (0u32, 0u32);
        let mut min_image = u32::MAX;
        for a in 1..size as u32 {
            scratch.fill(0);
            for b in self.derivative(a) {
                scratch[b as usize] += 1;
            }
            let mut image = 0u32;
            for (b, &c) in scratch.iter().enumerate() {
                if c > 0 {
                    image += 1;
                }
                if c > delta {
                    delta = c;
                    worst = (a, b as u32);
                }
            }
            min_image = min_image.min(image);
        }
        if size == 1 {
            min_image = 0;
        }
        // |Im ∂ₐf| ≥ 2^s/δ
        let image_bound_holds = u64::from(min_image) * u64::from(delta) >= size as u64;
        DifferentialProfile {
            delta,
            worst_direction: worst.0,
            worst_output: worst.1,
            min_image_size: min_image,
            image_bound_holds,
        }
    }

    /// Whether the image of `w` under the S-box is again a subspace,
    /// decided by comparing the span of the image with |w|.
    pub fn image_is_subspace(&self, w: &Subspace) -> Result<bool> {
        crate::error::check_dim(self.width, w.ambient_dim())?;
        let d = w.dim();
        let mut ech = Echelon::new();
        for x in w.elements() {
            ech.insert(u128::from(self.apply(x.bits() as u32)));
            if ech.rank() > d {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest k ≤ `max_delta` such that no subspace of dimension
    /// s−k..=s−1 is mapped onto a subspace. Requires f(0) = 0.
    pub fn anti_invariance_order(&self, max_delta: usize) -> Result<AntiInvariance> {
        if self.table[0] != 0 {
            return Err(Error::Precondition(format!(
                "anti-invariance is defined for maps with 0f = 0, but 0 ↦ {:#x}; normalize first",
                self.table[0]
            )));
        }
        let s = self.width;
        if max_delta >= s.max(1) && max_delta > 0 {
            return Err(Error::OutOfRange {
                what: "anti-invariance order (must be ≤ s−1)",
                value: max_delta as i64,
            });
        }
        let visits: u128 = (1..=max_delta).map(|k| gaussian_binomial(s, s - k)).sum();
        if visits > ANTI_INVARIANCE_BUDGET {
            return Err(Error::Capacity {
                what: "anti-invariance subspace scan",
                requested: visits.min(usize::MAX as u128) as usize,
                limit: ANTI_INVARIANCE_BUDGET as usize,
            });
        }
        let mut scanned = Vec::new();
        for k in 1..=max_delta {
            let dim = s - k;
            let candidates = subspaces_of_dim(s, dim);
            let mut count = 0usize;
            for w in &candidates {
                count += 1;
                if self.image_is_subspace(w)? {
                    scanned.push(DimensionScan {
                        dim,
                        subspaces: count,
                        closed_images: 1,
                    });
                    return Ok(AntiInvariance {
                        order: k - 1,
                        max_delta,
                        witness: Some(w.clone()),
                        scanned,
                    });
                }
            }
            scanned.push(DimensionScan {
                dim,
                subspaces: count,
                closed_images: 0,
            });
        }
        Ok(AntiInvariance {
            order: max_delta,
            max_delta,
            witness: None,
            scanned,
        })
    }

    /// Number of subspaces of dimension `dim` whose image is a subspace.
    pub fn closed_images_of_dim(&self, dim: usize) -> Result<usize> {
        if gaussian_binomial(self.width, dim) > ANTI_INVARIANCE_BUDGET {
            return Err(Error::Capacity {
                what: "subspace scan",
                requested: dim,
                limit: ANTI_INVARIANCE_BUDGET as usize,
            });
        }
        let mut n = 0;
        for w in subspaces_of_dim(self.width, dim) {
            if self.image_is_subspace(&w)? {
                n += 1;
            }
        }
        Ok(n)
    }
}

fn gf_mul(mut a: u32, mut b: u32, poly: u32, width: usize) -> u32 {
    let mut r = 0;
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        a <<= 1;
        if a >> width & 1 == 1 {
            a ^= poly;
        }
        b >>= 1;
    }
    r
}

/// Difference distribution table: entry (a, b) counts x with f(x)+f(x+a) = b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ddt {
    width: usize,
    counts: Vec<u32>,
}

impl Ddt {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn size(&self) -> usize {
        1 << self.width
    }

    pub fn get(&self, a: u32, b: u32) -> u32 {
        self.counts[a as usize * self.size() + b as usize]
    }

    pub fn row(&self, a: u32) -> &[u32] {
        let n = self.size();
        &self.counts[a as usize * n..(a as usize + 1) * n]
    }

    /// Max over a ≠ 0.
    pub fn max_nontrivial(&self) -> u32 {
        (1..self.size() as u32)
            .flat_map(|a| self.row(a).iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Histogram of entry values over rows a ≠ 0, as (value, count) pairs.
    pub fn histogram(&self) -> Vec<(u32, usize)> {
        let mut h = std::collections::BTreeMap::new();
        for a in 1..self.size() as u32 {
            for &c in self.row(a) {
                *h.entry(c).or_insert(0usize) += 1;
            }
        }
        h.into_iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialProfile {
    /// Differential uniformity δ.
    pub delta: u32,
    pub worst_direction: u32,
    pub worst_output: u32,
    /// min over a ≠ 0 of |Im ∂ₐf|.
    pub min_image_size: u32,
    /// Whether min |Im ∂ₐf| ≥ 2^s / δ.
    pub image_bound_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionScan {
    pub dim: usize,
    pub subspaces: usize,
    pub closed_images: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntiInvariance {
    pub order: usize,
    pub max_delta: usize,
    /// First subspace (of dimension s−order−1) whose image is a subspace;
    /// `None` when the scan reached `max_delta` without finding one.
    pub witness: Option<Subspace>,
    pub scanned: Vec<DimensionScan>,
}
