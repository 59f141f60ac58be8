//! Minimal blocks and exhaustive primitivity checks.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{is_linear_block, CheckMode, LinearBlockOutcome, PermutationOracle};
use crate::error::{check_dim, Error, Result};
use crate::gf2::{BitVec, Echelon, Subspace};

/// Largest point-space dimension for exhaustive minimal-block search.
pub const MAX_EXHAUSTIVE_POINTS_DIM: usize = 20;

/// A generator tabulated over all 2^m points.
enum Tab {
    Xor(u32),
    Table(Vec<u32>),
}

impl Tab {
    #[inline]
    fn at(&self, x: u32) -> u32 {
        match self {
            Tab::Xor(t) => x ^ t,
            Tab::Table(t) => t[x as usize],
        }
    }
}

fn tabulate(gens: &[PermutationOracle], m: usize) -> Result<Vec<Tab>> {
    if m > MAX_EXHAUSTIVE_POINTS_DIM {
        return Err(Error::Capacity {
            what: "minimal-block point space dimension",
            requested: m,
            limit: MAX_EXHAUSTIVE_POINTS_DIM,
        });
    }
    gens.iter()
        .map(|g| {
            check_dim(m, g.dim())?;
            Ok(match g.as_translation() {
                Some(t) => Tab::Xor(t as u32),
                None => Tab::Table(
                    (0..1u32 << m)
                        .map(|x| g.forward_bits(u128::from(x)) as u32)
                        .collect(),
                ),
            })
        })
        .collect()
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    components: usize,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            components: n,
        }
    }

    fn reset(&mut self) {
        for (i, p) in self.parent.iter_mut().enumerate() {
            *p = i as u32;
        }
        self.size.fill(1);
        self.components = self.parent.len();
    }

    #[inline]
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    #[inline]
    fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.components -= 1;
        true
    }
}

/// Result of a minimal-block computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinBlock {
    /// The block containing 0, when it is a subspace (always the case once
    /// all translations are among the generators).
    pub block: Option<Subspace>,
    pub block_size: u64,
    pub pairs_processed: u64,
    pub complete: bool,
}

/// Atkinson's minimal-block routine: merge 0 and v, then close the merged
/// pairs under every generator. The finest block system joining 0 and v
/// is the resulting partition.
fn min_block_uf(
    tabs: &[Tab],
    m: usize,
    v: u32,
    uf: &mut UnionFind,
    deadline: Option<Instant>,
) -> MinBlock {
    uf.reset();
    let mut queue = Vec::new();
    let mut pairs = 0u64;
    if uf.union(0, v) {
        queue.push((0u32, v));
    }
    let mut complete = true;
    'outer: while let Some((a, b)) = queue.pop() {
        pairs += 1;
        if pairs & 0xffff == 0 && deadline.is_some_and(|d| Instant::now() > d) {
            complete = false;
            break;
        }
        for t in tabs {
            let (x, y) = (t.at(a), t.at(b));
            if uf.union(x, y) {
                if uf.components == 1 {
                    break 'outer;
                }
                queue.push((x, y));
            }
        }
    }
    if !complete {
        return MinBlock {
            block: None,
            block_size: 0,
            pairs_processed: pairs,
            complete,
        };
    }
    let root = uf.find(0);
    let members: Vec<u32> = (0..1u32 << m).filter(|&x| uf.find(x) == root).collect();
    let size = members.len() as u64;
    let block = Subspace::span_bits(m, members.iter().map(|&x| u128::from(x)));
    let block = (1u64 << block.dim() == size).then_some(block);
    MinBlock {
        block,
        block_size: size,
        pairs_processed: pairs,
        complete,
    }
}

/// The block containing 0 in the finest block system of ⟨generators⟩ in
/// which 0 and v share a block.
pub fn min_block(generators: &[PermutationOracle], v: &BitVec) -> Result<MinBlock> {
    let m = v.dim();
    let tabs = tabulate(generators, m)?;
    let mut uf = UnionFind::new(1 << m);
    Ok(min_block_uf(&tabs, m, v.bits() as u32, &mut uf, None))
}

/// Smallest subspace W ∋ v whose cosets every generator permutes:
/// repeatedly adds f(x + w) + f(x) for basis vectors w of W. When
/// translations generate a transitive subgroup this equals [`min_block`].
pub fn min_block_linear(generators: &[PermutationOracle], v: &BitVec) -> Result<Subspace> {
    let m = v.dim();
    let tabs = tabulate(generators, m)?;
    Ok(min_block_linear_tabs(&tabs, m, v.bits() as u32))
}

fn min_block_linear_tabs(tabs: &[Tab], m: usize, v: u32) -> Subspace {
    let mut ech = Echelon::new();
    ech.insert(u128::from(v));
    let mut pending = vec![v];
    while let Some(w) = pending.pop() {
        for t in tabs {
            if let Tab::Table(table) = t {
                for x in 0..1u32 << m {
                    let d = table[(x ^ w) as usize] ^ table[x as usize];
                    if ech.insert(u128::from(d)) {
                        pending.push(d);
                        if ech.rank() == m {
                            return Subspace::full(m);
                        }
                    }
                }
            }
        }
    }
    Subspace::from_echelon(m, ech)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockMethod {
    UnionFind,
    LinearClosure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivityOptions {
    pub method: BlockMethod,
    pub budget_ms: Option<u64>,
    /// Try only this many random v instead of all of them. Such a run can
    /// prove imprimitivity but never primitivity.
    pub sampled: Option<u64>,
    /// Drives the choice of v in sampled runs; recorded either way.
    pub seed: Option<u64>,
}

impl Default for PrimitivityOptions {
    fn default() -> Self {
        Self {
            method: BlockMethod::UnionFind,
            budget_ms: None,
            sampled: None,
            seed: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockStatus {
    Primitive,
    Imprimitive,
    Inconclusive,
}

/// Outcome of [`primitivity_check`]. Imprimitive verdicts carry a
/// non-trivial proper subspace whose cosets every generator permutes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "VerdictRepr", try_from = "VerdictRepr")]
pub struct BlockVerdict {
    pub status: BlockStatus,
    pub m: usize,
    pub witness: Option<Subspace>,
    pub pairs_checked: u64,
    pub samples: u64,
    pub seed: Option<u64>,
    pub runtime_ms: u64,
    pub note: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct VerdictRepr {
    status: BlockStatus,
    m: usize,
    witness_basis: Option<Vec<String>>,
    pairs_checked: u64,
    samples: u64,
    seed: Option<u64>,
    runtime_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

impl From<BlockVerdict> for VerdictRepr {
    fn from(v: BlockVerdict) -> Self {
        Self {
            status: v.status,
            m: v.m,
            witness_basis: v
                .witness
                .map(|w| w.basis().iter().map(BitVec::to_hex).collect()),
            pairs_checked: v.pairs_checked,
            samples: v.samples,
            seed: v.seed,
            runtime_ms: v.runtime_ms,
            note: v.note,
        }
    }
}

impl TryFrom<VerdictRepr> for BlockVerdict {
    type Error = Error;

    fn try_from(r: VerdictRepr) -> Result<Self> {
        let witness = r
            .witness_basis
            .map(|rows| {
                let vs = rows
                    .iter()
                    .map(|h| BitVec::from_hex(r.m, h))
                    .collect::<Result<Vec<_>>>()?;
                Subspace::canonicalize(r.m, &vs)
            })
            .transpose()?;
        if r.status == BlockStatus::Imprimitive && witness.is_none() {
            return Err(Error::Parse("imprimitive verdict without witness".into()));
        }
        Ok(Self {
            status: r.status,
            m: r.m,
            witness,
            pairs_checked: r.pairs_checked,
            samples: r.samples,
            seed: r.seed,
            runtime_ms: r.runtime_ms,
            note: r.note,
        })
    }
}

impl BlockVerdict {
    /// Re-checks an Imprimitive witness against every generator with the
    /// exhaustive linear-block test. Other verdicts are vacuously fine.
    pub fn witness_verified(&self, generators: &[PermutationOracle]) -> Result<bool> {
        let Some(w) = &self.witness else {
            return Ok(self.status != BlockStatus::Imprimitive);
        };
        if !w.is_proper_nontrivial() {
            return Ok(false);
        }
        for g in generators {
            let r = is_linear_block(g, w, CheckMode::Exhaustive)?;
            if r.outcome != LinearBlockOutcome::Verified {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Primitivity of the group generated by `generators` on F₂^m.
///
/// Transitivity is not checked here; include the basis translations. Every
/// nonzero v is tried in increasing order until a proper block turns up.
pub fn primitivity_check(
    generators: &[PermutationOracle],
    m: usize,
    opts: &PrimitivityOptions,
) -> Result<BlockVerdict> {
    let start = Instant::now();
    let deadline = opts.budget_ms.map(|ms| start + Duration::from_millis(ms));
    let mut verdict = BlockVerdict {
        status: BlockStatus::Inconclusive,
        m,
        witness: None,
        pairs_checked: 0,
        samples: 0,
        seed: opts.seed,
        runtime_ms: 0,
        note: None,
    };
    if m > MAX_EXHAUSTIVE_POINTS_DIM {
        verdict.note = Some(format!(
            "exhaustive search needs m ≤ {MAX_EXHAUSTIVE_POINTS_DIM}, got {m}; no verdict"
        ));
        return Ok(verdict);
    }
    if m == 0 {
        verdict.status = BlockStatus::Primitive;
        return Ok(verdict);
    }
    let tabs = tabulate(generators, m)?;
    let mut uf = UnionFind::new(1 << m);
    let candidates: Box<dyn Iterator<Item = u32>> = match opts.sampled {
        None => Box::new(1u32..1 << m),
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.unwrap_or(0));
            Box::new((0..k).map(move |_| rng.gen_range(1u32..1 << m)))
        }
    };
    let total = opts.sampled.unwrap_or((1u64 << m) - 1);
    for v in candidates {
        if deadline.is_some_and(|d| Instant::now() > d) {
            verdict.note = Some(format!(
                "budget exhausted after {} of {total} pairs",
                verdict.pairs_checked
            ));
            verdict.runtime_ms = start.elapsed().as_millis() as u64;
            return Ok(verdict);
        }
        let block = match opts.method {
            BlockMethod::UnionFind => {
                let r = min_block_uf(&tabs, m, v, &mut uf, deadline);
                verdict.samples += r.pairs_processed;
                if !r.complete {
                    verdict.note = Some("budget exhausted inside a minimal-block run".into());
                    verdict.runtime_ms = start.elapsed().as_millis() as u64;
                    return Ok(verdict);
                }
                match r.block {
                    Some(b) => b,
                    None => {
                        verdict.note = Some(format!(
                            "block of size {} through 0 is not a subspace; are the translations among the generators?",
                            r.block_size
                        ));
                        verdict.runtime_ms = start.elapsed().as_millis() as u64;
                        return Ok(verdict);
                    }
                }
            }
            BlockMethod::LinearClosure => min_block_linear_tabs(&tabs, m, v),
        };
        verdict.pairs_checked += 1;
        if !block.is_full() {
            verdict.status = BlockStatus::Imprimitive;
            verdict.witness = Some(block);
            verdict.runtime_ms = start.elapsed().as_millis() as u64;
            return Ok(verdict);
        }
    }
    if opts.sampled.is_some() {
        verdict.note = Some(format!(
            "no proper block among {} sampled pairs; sampling cannot prove primitivity",
            verdict.pairs_checked
        ));
    } else {
        verdict.status = BlockStatus::Primitive;
    }
    verdict.runtime_ms = start.elapsed().as_millis() as u64;
    Ok(verdict)
}
