use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bitvec::{mask, BitVec, MAX_DIM};
use crate::error::{check_dim, Error, Result};

/// Incremental reduced row-echelon basis.
///
/// Rows are kept sorted by pivot (lowest set coordinate) and every pivot
/// column is zero in all other rows.
#[derive(Clone, Debug, Default)]
pub(crate) struct Echelon {
    rows: Vec<u128>,
    pivots: u128,
}

impl Echelon {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn rows(&self) -> &[u128] {
        &self.rows
    }

    #[inline]
    pub(crate) fn reduce(&self, mut v: u128) -> u128 {
        let mut hits = v & self.pivots;
        if hits == 0 {
            return v;
        }
        for &row in &self.rows {
            let p = row & row.wrapping_neg();
            if hits & p != 0 {
                v ^= row;
                hits &= !p;
                if hits == 0 {
                    break;
                }
            }
        }
        v
    }

    #[inline]
    pub(crate) fn contains(&self, v: u128) -> bool {
        self.reduce(v) == 0
    }

    /// Adds `v` to the span; returns whether the rank grew.
    pub(crate) fn insert(&mut self, v: u128) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let p = v & v.wrapping_neg();
        for row in &mut self.rows {
            if *row & p != 0 {
                *row ^= v;
            }
        }
        let at = self
            .rows
            .partition_point(|r| r.trailing_zeros() < v.trailing_zeros());
        self.rows.insert(at, v);
        self.pivots |= p;
        true
    }
}

/// A subspace of F₂^m stored as its unique RREF basis, so `==` is subspace
/// equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(into = "SubspaceRepr", try_from = "SubspaceRepr")]
pub struct Subspace {
    ambient: usize,
    basis: Vec<u128>,
}

impl Subspace {
    pub fn zero(m: usize) -> Self {
        assert!(m <= MAX_DIM);
        Self {
            ambient: m,
            basis: Vec::new(),
        }
    }

    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_DIM);
        Self {
            ambient: m,
            basis: (0..m).map(|i| 1u128 << i).collect(),
        }
    }

    /// Span of `vectors` in canonical form.
    pub fn canonicalize(m: usize, vectors: &[BitVec]) -> Result<Self> {
        if m > MAX_DIM {
            return Err(Error::Capacity {
                what: "ambient dimension",
                requested: m,
                limit: MAX_DIM,
            });
        }
        for v in vectors {
            check_dim(m, v.dim())?;
        }
        Ok(Self::span_bits(m, vectors.iter().map(BitVec::bits)))
    }

    pub(crate) fn span_bits<I: IntoIterator<Item = u128>>(m: usize, vectors: I) -> Self {
        let mut ech = Echelon::new();
        let full = m;
        for v in vectors {
            ech.insert(v & mask(m));
            if ech.rank() == full {
                break;
            }
        }
        Self::from_echelon(m, ech)
    }

    pub(crate) fn from_echelon(m: usize, ech: Echelon) -> Self {
        Self {
            ambient: m,
            basis: ech.rows,
        }
    }

    pub(crate) fn to_echelon(&self) -> Echelon {
        let pivots = self
            .basis
            .iter()
            .fold(0u128, |acc, r| acc | (r & r.wrapping_neg()));
        Echelon {
            rows: self.basis.clone(),
            pivots,
        }
    }

    /// Wraps rows that are already in RREF (used by enumeration).
    pub(crate) fn from_rref_unchecked(m: usize, basis: Vec<u128>) -> Self {
        debug_assert_eq!(Self::span_bits(m, basis.iter().copied()).basis, basis);
        Self { ambient: m, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient
    }

    /// Neither `{0}` nor the whole space.
    pub fn is_proper_nontrivial(&self) -> bool {
        !self.is_zero() && !self.is_full()
    }

    pub fn basis(&self) -> Vec<BitVec> {
        self.basis
            .iter()
            .map(|&b| BitVec::truncated(self.ambient, b))
            .collect()
    }

    pub(crate) fn basis_bits(&self) -> &[u128] {
        &self.basis
    }

    /// Pivot coordinates, strictly increasing.
    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.trailing_zeros() as usize)
            .collect()
    }

    pub fn contains(&self, v: &BitVec) -> Result<bool> {
        check_dim(self.ambient, v.dim())?;
        Ok(self.contains_bits(v.bits()))
    }

    #[inline]
    pub(crate) fn contains_bits(&self, mut v: u128) -> bool {
        for &row in &self.basis {
            if v & row & row.wrapping_neg() != 0 {
                v ^= row;
            }
        }
        v == 0
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        check_dim(self.ambient, other.ambient)?;
        Ok(self.basis.iter().all(|&b| other.contains_bits(b)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        check_dim(self.ambient, other.ambient)?;
        let mut ech = self.to_echelon();
        for &b in &other.basis {
            ech.insert(b);
        }
        Ok(Self::from_echelon(self.ambient, ech))
    }

    /// Intersection by the kernel method: each dependency among the stacked
    /// bases of both subspaces yields one intersection vector.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        check_dim(self.ambient, other.ambient)?;
        let m = self.ambient;
        // Rows carry (value, combination of self's basis vectors used).
        let mut rows: Vec<(u128, u128)> = Vec::new();
        let mut found = Echelon::new();
        let stacked = self
            .basis
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, 1u128 << i))
            .chain(other.basis.iter().map(|&b| (b, 0u128)));
        for (mut value, mut tag) in stacked {
            for &(rv, rt) in &rows {
                let p = rv & rv.wrapping_neg();
                if value & p != 0 {
                    value ^= rv;
                    tag ^= rt;
                }
            }
            if value == 0 {
                let x = self
                    .basis
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| (tag >> i) & 1 == 1)
                    .fold(0u128, |acc, (_, &b)| acc ^ b);
                found.insert(x);
            } else {
                // keep rows reduced on the new pivot so the single pass above works
                let p = value & value.wrapping_neg();
                for (rv, rt) in &mut rows {
                    if *rv & p != 0 {
                        *rv ^= value;
                        *rt ^= tag;
                    }
                }
                rows.push((value, tag));
            }
        }
        Ok(Self::from_echelon(m, found))
    }

    /// Vectors extending the basis to one of F₂^m, lowest standard vectors first.
    pub fn complete_basis(&self) -> Vec<BitVec> {
        let mut ech = self.to_echelon();
        (0..self.ambient)
            .filter(|&i| ech.insert(1u128 << i))
            .map(|i| BitVec::unit(self.ambient, i))
            .collect()
    }

    /// Every element, in Gray-code order. Only sensible for small dimensions.
    pub fn elements(&self) -> impl Iterator<Item = BitVec> + '_ {
        assert!(
            self.dim() < 64,
            "refusing to list 2^{} elements",
            self.dim()
        );
        let m = self.ambient;
        let n = 1u64 << self.dim();
        let mut acc = 0u128;
        (0..n).map(move |k| {
            if k > 0 {
                acc ^= self.basis[k.trailing_zeros() as usize];
            }
            BitVec::truncated(m, acc)
        })
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVec {
        BitVec::truncated(self.ambient, self.random_bits(rng))
    }

    #[inline]
    pub(crate) fn random_bits<R: Rng + ?Sized>(&self, rng: &mut R) -> u128 {
        let mut coeffs: u128 = rng.gen();
        let mut acc = 0u128;
        for &b in &self.basis {
            if coeffs & 1 == 1 {
                acc ^= b;
            }
            coeffs >>= 1;
        }
        acc
    }

    /// Canonical enumeration order: by dimension, then lexicographically by
    /// the RREF rows read as coordinate strings.
    pub fn canonical_cmp(&self, other: &Subspace) -> Ordering {
        self.ambient
            .cmp(&other.ambient)
            .then(self.dim().cmp(&other.dim()))
            .then_with(|| {
                for (&a, &b) in self.basis.iter().zip(&other.basis) {
                    let ord = cmp_coordinate_strings(a, b);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                Ordering::Equal
            })
    }

    /// Text form: `m=<int>` then one hex basis vector per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("m={}\n", self.ambient);
        for b in self.basis() {
            out.push_str(&b.to_hex());
            out.push('\n');
        }
        out
    }

    /// Parses the text form and re-canonicalizes. Blank lines and `#`
    /// comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty subspace file".into()))?;
        let m: usize = header
            .strip_prefix("m=")
            .ok_or_else(|| Error::Parse(format!("expected `m=<int>` header, found {header:?}")))?
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad dimension in header: {e}")))?;
        if m > MAX_DIM {
            return Err(Error::Capacity {
                what: "ambient dimension",
                requested: m,
                limit: MAX_DIM,
            });
        }
        let vectors = lines
            .map(|l| BitVec::from_hex(m, l))
            .collect::<Result<Vec<_>>>()?;
        Self::canonicalize(m, &vectors)
    }
}

/// Serialized form: ambient dimension and hex basis rows.
#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    m: usize,
    basis: Vec<String>,
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        Self {
            m: s.ambient,
            basis: s.basis().iter().map(BitVec::to_hex).collect(),
        }
    }
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;

    fn try_from(r: SubspaceRepr) -> Result<Self> {
        let vectors = r
            .basis
            .iter()
            .map(|h| BitVec::from_hex(r.m, h))
            .collect::<Result<Vec<_>>>()?;
        Subspace::canonicalize(r.m, &vectors)
    }
}

/// Orders two rows as strings with coordinate 0 first.
fn cmp_coordinate_strings(a: u128, b: u128) -> Ordering {
    let diff = a ^ b;
    if diff == 0 {
        return Ordering::Equal;
    }
    let p = diff & diff.wrapping_neg();
    if a & p == 0 {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{")?;
        for (k, b) in self.basis().iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}} ≤ F₂^{}", self.ambient)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> BitVec {
        BitVec::from_bit_string(s).unwrap()
    }

    #[test]
    fn canonicalize_empty_is_zero_subspace() {
        let s = Subspace::canonicalize(4, &[]).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(s, Subspace::zero(4));
    }

    #[test]
    fn canonicalize_drops_dependent_vector() {
        let s = Subspace::canonicalize(4, &[v("0001"), v("0010"), v("0011")]).unwrap();
        assert_eq!(s.basis(), vec![v("0010"), v("0001")]);
        assert_eq!(s.pivots(), vec![2, 3]);
    }

    #[test]
    fn canonicalize_rejects_mixed_dimensions() {
        let err = Subspace::canonicalize(4, &[v("0001"), v("001")]).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 4,
                found: 3
            }
        );
    }

    #[test]
    fn contains_examples() {
        let s = Subspace::canonicalize(4, &[v("0010"), v("0001")]).unwrap();
        assert!(s.contains(&BitVec::zero(4)).unwrap());
        assert!(s.contains(&v("0011")).unwrap());
        assert!(!s.contains(&v("0100")).unwrap());
        assert!(s.contains(&BitVec::zero(5)).is_err());
    }

    #[test]
    fn sum_and_intersect_of_independent_lines() {
        let a = Subspace::canonicalize(4, &[v("1000")]).unwrap();
        let b = Subspace::canonicalize(4, &[v("0100")]).unwrap();
        assert_eq!(a.sum(&b).unwrap().dim(), 2);
        assert_eq!(a.intersect(&b).unwrap().dim(), 0);
        assert_eq!(a.sum(&a).unwrap(), a);
        assert_eq!(a.intersect(&a).unwrap(), a);
    }

    #[test]
    fn intersect_finds_shared_line() {
        let a = Subspace::canonicalize(4, &[v("1100"), v("0011")]).unwrap();
        let b = Subspace::canonicalize(4, &[v("1111"), v("1000")]).unwrap();
        let i = a.intersect(&b).unwrap();
        assert_eq!(i.basis(), vec![v("1111")]);
    }

    #[test]
    fn complete_basis_examples() {
        assert_eq!(
            Subspace::zero(3).complete_basis(),
            vec![v("100"), v("010"), v("001")]
        );
        assert!(Subspace::full(3).complete_basis().is_empty());
        let s = Subspace::canonicalize(3, &[v("110")]).unwrap();
        let extra = s.complete_basis();
        assert_eq!(extra.len(), 2);
        let mut all = s.basis();
        all.extend(extra);
        assert_eq!(Subspace::canonicalize(3, &all).unwrap().dim(), 3);
    }

    #[test]
    fn text_round_trip_recanonicalizes() {
        let text = "m=12\n# comment\n0f0a\n0f0a\n3000\n";
        let s = Subspace::from_text(text).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(Subspace::from_text(&s.to_text()).unwrap(), s);
        assert!(Subspace::from_text("dim=3\n").is_err());
        assert!(Subspace::from_text("m=8\nzz\n").is_err());
    }

    #[test]
    fn elements_lists_every_vector_once() {
        let s = Subspace::canonicalize(5, &[v("11000"), v("00110"), v("10101")]).unwrap();
        let mut all: Vec<u128> = s.elements().map(|e| e.bits()).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|&e| s.contains_bits(e)));
    }
}
