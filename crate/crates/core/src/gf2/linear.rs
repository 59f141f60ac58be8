use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bitvec::{mask, BitVec, MAX_DIM};
use super::subspace::{Echelon, Subspace};
use crate::error::{check_dim, Error, Result};

/// A linear map F₂^dim_in → F₂^dim_out acting on row vectors: `x ↦ xM`,
/// stored as the images of the standard basis vectors (the rows of M).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(into = "MatrixRepr", try_from = "MatrixRepr")]
pub struct LinearMap {
    dim_in: usize,
    dim_out: usize,
    rows: Vec<u128>,
}

impl LinearMap {
    pub fn from_rows(dim_in: usize, dim_out: usize, rows: Vec<u128>) -> Result<Self> {
        if dim_in > MAX_DIM || dim_out > MAX_DIM {
            return Err(Error::Capacity {
                what: "linear map dimension",
                requested: dim_in.max(dim_out),
                limit: MAX_DIM,
            });
        }
        check_dim(dim_in, rows.len())?;
        if rows.iter().any(|r| r & !mask(dim_out) != 0) {
            return Err(Error::Parse(format!(
                "matrix row has bits beyond output dimension {dim_out}"
            )));
        }
        Ok(Self {
            dim_in,
            dim_out,
            rows,
        })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            dim_in: m,
            dim_out: m,
            rows: (0..m).map(|i| 1u128 << i).collect(),
        }
    }

    pub fn zero(dim_in: usize, dim_out: usize) -> Self {
        Self {
            dim_in,
            dim_out,
            rows: vec![0; dim_in],
        }
    }

    /// Tabulates a function assumed linear by evaluating it on e_0..e_{m-1}.
    pub fn from_fn(dim_in: usize, dim_out: usize, f: impl Fn(u128) -> u128) -> Self {
        Self {
            dim_in,
            dim_out,
            rows: (0..dim_in).map(|i| f(1u128 << i) & mask(dim_out)).collect(),
        }
    }

    /// The unique map sending `basis[i] ↦ images[i]`; `basis` must be a basis
    /// of F₂^dim_in.
    pub fn from_basis_images(
        dim_in: usize,
        dim_out: usize,
        basis: &[u128],
        images: &[u128],
    ) -> Result<Self> {
        check_dim(dim_in, basis.len())?;
        check_dim(basis.len(), images.len())?;
        let b = Self::from_rows(dim_in, dim_in, basis.to_vec())?;
        let b_inv = b
            .inverse()
            .ok_or_else(|| Error::Precondition("vectors do not form a basis".into()))?;
        let img = Self::from_rows(dim_in, dim_out, images.to_vec())?;
        // e_j = (e_j B⁻¹) B, so e_j ↦ (e_j B⁻¹) · images
        b_inv.then(&img)
    }

    pub fn random_invertible<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        loop {
            let rows = (0..m).map(|_| rng.gen::<u128>() & mask(m)).collect();
            let map = Self {
                dim_in: m,
                dim_out: m,
                rows,
            };
            if map.is_invertible() {
                return map;
            }
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn rows(&self) -> &[u128] {
        &self.rows
    }

    #[inline]
    pub fn apply_bits(&self, x: u128) -> u128 {
        let mut x = x & mask(self.dim_in);
        let mut acc = 0u128;
        while x != 0 {
            let i = x.trailing_zeros() as usize;
            acc ^= self.rows[i];
            x &= x - 1;
        }
        acc
    }

    pub fn apply(&self, x: &BitVec) -> Result<BitVec> {
        check_dim(self.dim_in, x.dim())?;
        Ok(BitVec::truncated(self.dim_out, self.apply_bits(x.bits())))
    }

    /// `self` followed by `next`: x ↦ (xM)N.
    pub fn then(&self, next: &LinearMap) -> Result<LinearMap> {
        check_dim(self.dim_out, next.dim_in)?;
        Ok(Self {
            dim_in: self.dim_in,
            dim_out: next.dim_out,
            rows: self.rows.iter().map(|&r| next.apply_bits(r)).collect(),
        })
    }

    pub fn rank(&self) -> usize {
        let mut ech = Echelon::new();
        for &r in &self.rows {
            ech.insert(r);
        }
        ech.rank()
    }

    pub fn is_invertible(&self) -> bool {
        self.dim_in == self.dim_out && self.rank() == self.dim_in
    }

    pub fn inverse(&self) -> Option<LinearMap> {
        if self.dim_in != self.dim_out {
            return None;
        }
        let m = self.dim_in;
        // Gauss-Jordan on [M | I].
        let mut rows: Vec<(u128, u128)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, &r)| (r, 1u128 << i))
            .collect();
        for col in 0..m {
            let bit = 1u128 << col;
            let pivot = (col..m).find(|&r| rows[r].0 & bit != 0)?;
            rows.swap(col, pivot);
            let (pv, pt) = rows[col];
            for (r, row) in rows.iter_mut().enumerate() {
                if r != col && row.0 & bit != 0 {
                    row.0 ^= pv;
                    row.1 ^= pt;
                }
            }
        }
        // Now row i of M⁻¹-augmented holds e_i = (tag_i) M, so tag_i is e_i M⁻¹.
        Some(Self {
            dim_in: m,
            dim_out: m,
            rows: rows.into_iter().map(|(_, t)| t).collect(),
        })
    }

    pub fn pow(&self, e: u32) -> Result<LinearMap> {
        check_dim(self.dim_in, self.dim_out)?;
        let mut acc = Self::identity(self.dim_in);
        for _ in 0..e {
            acc = acc.then(self)?;
        }
        Ok(acc)
    }

    pub fn image(&self, s: &Subspace) -> Result<Subspace> {
        check_dim(self.dim_in, s.ambient_dim())?;
        Ok(Subspace::span_bits(
            self.dim_out,
            s.basis_bits().iter().map(|&b| self.apply_bits(b)),
        ))
    }

    /// Rows as hex strings, row i being the image of e_i.
    pub fn to_hex_rows(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|&r| BitVec::truncated(self.dim_out, r).to_hex())
            .collect()
    }
}

/// An affine permutation x ↦ xM + c.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct AffineMap {
    linear: LinearMap,
    #[serde(with = "hex_u128")]
    offset: u128,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim_in: usize,
    dim_out: usize,
    rows: Vec<String>,
}

impl From<LinearMap> for MatrixRepr {
    fn from(m: LinearMap) -> Self {
        Self {
            dim_in: m.dim_in,
            dim_out: m.dim_out,
            rows: m.to_hex_rows(),
        }
    }
}

impl TryFrom<MatrixRepr> for LinearMap {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let rows = r
            .rows
            .iter()
            .map(|h| BitVec::from_hex(r.dim_out, h).map(|v| v.bits()))
            .collect::<Result<Vec<_>>>()?;
        LinearMap::from_rows(r.dim_in, r.dim_out, rows)
    }
}

mod hex_u128 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        let s = String::deserialize(d)?;
        u128::from_str_radix(&s, 16).map_err(serde::de::Error::custom)
    }
}

impl AffineMap {
    pub fn new(linear: LinearMap, offset: BitVec) -> Result<Self> {
        check_dim(linear.dim_out(), offset.dim())?;
        if !linear.is_invertible() {
            return Err(Error::Precondition(
                "affine map needs an invertible matrix".into(),
            ));
        }
        Ok(Self {
            linear,
            offset: offset.bits(),
        })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            linear: LinearMap::identity(m),
            offset: 0,
        }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self {
            linear: LinearMap::random_invertible(m, rng),
            offset: rng.gen::<u128>() & mask(m),
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.dim_in()
    }

    pub fn linear(&self) -> &LinearMap {
        &self.linear
    }

    pub fn offset(&self) -> BitVec {
        BitVec::truncated(self.dim(), self.offset)
    }

    #[inline]
    pub fn apply_bits(&self, x: u128) -> u128 {
        self.linear.apply_bits(x) ^ self.offset
    }

    pub fn inverse(&self) -> AffineMap {
        let inv = self.linear.inverse().expect("affine map is invertible");
        let offset = inv.apply_bits(self.offset);
        AffineMap {
            linear: inv,
            offset,
        }
    }
}
