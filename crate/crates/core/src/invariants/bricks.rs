//! Brick decompositions and the hypothesis certificate for S-box layers.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gf2::{LinearMap, Subspace};
use crate::sbox::SBox;

/// A direct sum of bricks. Bricks are numbered from 1; brick i covers
/// coordinates s(i−1) .. si.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrickSum {
    pub bricks: Vec<usize>,
    pub subspace: Subspace,
}

/// V_{i₁} ⊕ … ⊕ V_{i_k} for the given 1-based brick indices.
pub fn brick_subspace(s: usize, b: usize, bricks: &[usize]) -> Result<Subspace> {
    let n = s * b;
    let mut rows = Vec::new();
    for &i in bricks {
        if i == 0 || i > b {
            return Err(Error::OutOfRange {
                what: "brick index",
                value: i as i64,
            });
        }
        rows.extend((0..s).map(|k| 1u128 << (s * (i - 1) + k)));
    }
    Ok(Subspace::span_bits(n, rows))
}

/// All proper non-trivial brick sums W with W·L = W, in increasing order of
/// the subset bitmask.
pub fn brick_invariant_sums(l: &LinearMap, s: usize, b: usize) -> Result<Vec<BrickSum>> {
    check_dim(s * b, l.dim_in())?;
    check_dim(s * b, l.dim_out())?;
    if b > 16 {
        return Err(Error::Capacity {
            what: "brick count",
            requested: b,
            limit: 16,
        });
    }
    let mut out = Vec::new();
    for subset in 1u32..(1 << b) - 1 {
        let bricks: Vec<usize> = (0..b)
            .filter(|i| subset >> i & 1 == 1)
            .map(|i| i + 1)
            .collect();
        let w = brick_subspace(s, b, &bricks)?;
        if l.image(&w)? == w {
            out.push(BrickSum {
                bricks,
                subspace: w,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Differential uniformity, anti-invariance and brick clauses for the
/// layer x ↦ (x f₁, …, x f_b) L.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisCertificate {
    pub delta: usize,
    pub sbox_width: usize,
    pub bricks: usize,
    /// The translation applied so that 0f = 0.
    pub normalization: u32,
    pub differential_uniformity: u32,
    pub anti_invariance_order: usize,
    pub anti_invariance_witness: Option<Subspace>,
    pub invariant_brick_sums: Vec<Vec<usize>>,
    pub clauses: Vec<Clause>,
}

impl HypothesisCertificate {
    pub fn all_passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.clauses
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

pub const CLAUSE_DIFFERENTIAL: &str = "differential_uniformity";
pub const CLAUSE_ANTI_INVARIANCE: &str = "anti_invariance";
pub const CLAUSE_BRICKS: &str = "brick_sums";

/// Checks that f is 2^δ-differentially uniform and (δ−1)-anti-invariant
/// and that no proper non-trivial brick sum is L-invariant. f is
/// normalized to fix 0 first; δ-uniformity is unaffected by that.
pub fn present_hypotheses(f: &SBox, l: &LinearMap, delta: usize) -> Result<HypothesisCertificate> {
    let s = f.width();
    let n = l.dim_in();
    if s == 0 || !n.is_multiple_of(s) {
        return Err(Error::Precondition(format!(
            "layer width {n} is not a multiple of the S-box width {s}"
        )));
    }
    if delta == 0 || delta > s {
        return Err(Error::OutOfRange {
            what: "delta",
            value: delta as i64,
        });
    }
    let b = n / s;
    let (g, c) = f.normalize_zero();

    let du = g.differential_uniformity().delta;
    let bound = 1u64 << delta;
    let diff = Clause {
        name: CLAUSE_DIFFERENTIAL.into(),
        passed: u64::from(du) <= bound,
        detail: format!("differential uniformity {du}, bound 2^{delta} = {bound}"),
    };

    let want = delta - 1;
    let anti = g.anti_invariance_order(want)?;
    let anti_clause = Clause {
        name: CLAUSE_ANTI_INVARIANCE.into(),
        passed: anti.order >= want,
        detail: match &anti.witness {
            None => format!(
                "{want}-anti-invariant: no subspace of codimension 1..={want} has a subspace image"
            ),
            Some(w) => format!(
                "order {} < {want}: the image of a dimension-{} subspace is a subspace",
                anti.order,
                w.dim()
            ),
        },
    };

    let sums = brick_invariant_sums(l, s, b)?;
    let brick_clause = Clause {
        name: CLAUSE_BRICKS.into(),
        passed: sums.is_empty(),
        detail: match sums.first() {
            None => format!("no proper non-trivial sum of the {b} bricks is invariant"),
            Some(w) => format!(
                "{} invariant brick sum(s), first {}",
                sums.len(),
                w.bricks
                    .iter()
                    .map(|i| format!("V{i}"))
                    .collect::<Vec<_>>()
                    .join("⊕")
            ),
        },
    };

    Ok(HypothesisCertificate {
        delta,
        sbox_width: s,
        bricks: b,
        normalization: c,
        differential_uniformity: du,
        anti_invariance_order: anti.order,
        anti_invariance_witness: anti.witness,
        invariant_brick_sums: sums.into_iter().map(|w| w.bricks).collect(),
        clauses: vec![diff, anti_clause, brick_clause],
    })
}
