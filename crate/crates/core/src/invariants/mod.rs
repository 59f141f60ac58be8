//! Invariant linear structure of permutations of F₂^m.
//!
//! Everything here works against a [`PermutationOracle`]: a bijection of
//! F₂^m given by forward and backward evaluation. Exhaustive routines are
//! capped at 2^20 points; past that only sampled checks run, and their
//! verdicts say so.

mod blocks;
mod bricks;
mod closure;
mod lp;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gf2::{mask, AffineMap, BitVec, Subspace};
use crate::keyschedule::{ks_apply, ks_inverse, KsState, RhoSpec};

pub use blocks::{
    min_block, min_block_linear, primitivity_check, BlockMethod, BlockStatus, BlockVerdict,
    MinBlock, PrimitivityOptions, MAX_EXHAUSTIVE_POINTS_DIM,
};
pub use bricks::{
    brick_invariant_sums, brick_subspace, present_hypotheses, BrickSum, Clause,
    HypothesisCertificate,
};
pub use closure::{closure_search, ClosureConfig, ClosureReport};
pub use lp::{
    lp_subspace, resolve_lp_convention, verify_lp_subspace, ByteConvention, ConventionClosure,
    ConventionResult, LpReport,
};

type EvalFn = Arc<dyn Fn(u128) -> u128 + Send + Sync>;

/// A bijection of F₂^m with its inverse.
#[derive(Clone)]
pub struct PermutationOracle {
    m: usize,
    forward: EvalFn,
    backward: EvalFn,
    translation: Option<u128>,
    descriptor: String,
}

impl fmt::Debug for PermutationOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermutationOracle")
            .field("m", &self.m)
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl PermutationOracle {
    /// Wraps arbitrary evaluation closures. The caller promises that
    /// `backward` inverts `forward`; [`PermutationOracle::check_inverse`]
    /// samples that promise.
    pub fn from_fns(
        m: usize,
        forward: impl Fn(u128) -> u128 + Send + Sync + 'static,
        backward: impl Fn(u128) -> u128 + Send + Sync + 'static,
        descriptor: impl Into<String>,
    ) -> Self {
        Self {
            m,
            forward: Arc::new(forward),
            backward: Arc::new(backward),
            translation: None,
            descriptor: descriptor.into(),
        }
    }

    pub fn translation(t: &BitVec) -> Self {
        let m = t.dim();
        let t = t.bits();
        Self {
            m,
            forward: Arc::new(move |x| x ^ t),
            backward: Arc::new(move |x| x ^ t),
            translation: Some(t),
            descriptor: format!("translation by {}", BitVec::truncated(m, t).to_hex()),
        }
    }

    /// Translations by e_0, …, e_{m−1}; together they generate T_m.
    pub fn basis_translations(m: usize) -> Vec<Self> {
        (0..m)
            .map(|i| Self::translation(&BitVec::unit(m, i)))
            .collect()
    }

    /// A permutation of {0, …, 2^m − 1} given as a table.
    pub fn table(m: usize, table: Vec<u32>) -> Result<Self> {
        if m > 24 {
            return Err(Error::Capacity {
                what: "tabulated permutation width",
                requested: m,
                limit: 24,
            });
        }
        check_dim(1 << m, table.len())?;
        let mut inverse = vec![u32::MAX; table.len()];
        for (x, &y) in table.iter().enumerate() {
            let slot = inverse
                .get_mut(y as usize)
                .ok_or(Error::NotBijective { value: y })?;
            if *slot != u32::MAX {
                return Err(Error::NotBijective { value: y });
            }
            *slot = x as u32;
        }
        let fwd = Arc::new(table);
        let bwd = Arc::new(inverse);
        let mm = mask(m);
        Ok(Self::from_fns(
            m,
            move |x| u128::from(fwd[(x & mm) as usize]),
            move |y| u128::from(bwd[(y & mm) as usize]),
            format!("table(m={m})"),
        ))
    }

    pub fn affine(map: &AffineMap) -> Self {
        let fwd = map.clone();
        let bwd = map.inverse();
        Self::from_fns(
            map.dim(),
            move |x| fwd.apply_bits(x),
            move |y| bwd.apply_bits(y),
            format!("affine(m={})", map.dim()),
        )
    }

    /// ρ itself, acting on F₂ⁿ.
    pub fn rho(rho: &RhoSpec) -> Self {
        let f = rho.clone();
        let b = rho.clone();
        Self::from_fns(
            rho.n(),
            move |x| u128::from(f.eval(x as u32)),
            move |y| u128::from(b.eval_inv(y as u32)),
            rho.label().to_string(),
        )
    }

    /// The key-schedule operator ρ̄ raised to `power` (negative powers use
    /// the inverse), on the word-major flattening of V⁴.
    pub fn ks_power(rho: &RhoSpec, power: i64) -> Self {
        let n = rho.n();
        let f = rho.clone();
        let b = rho.clone();
        let steps = power.unsigned_abs();
        let (fwd_dir, bwd_dir) = (power >= 0, power < 0);
        let run = move |r: &RhoSpec, x: u128, forward: bool| {
            let mut st = KsState::from_bits(n, x);
            for _ in 0..steps {
                st = if forward {
                    ks_apply(r, &st)
                } else {
                    ks_inverse(r, &st)
                }
                .expect("state width matches rho");
            }
            st.flatten_bits()
        };
        let run_b = run;
        Self::from_fns(
            4 * n,
            move |x| run(&f, x, fwd_dir),
            move |y| run_b(&b, y, bwd_dir),
            format!("ks operator over {}, power {power}", rho.label()),
        )
    }

    /// Rounds of the operator each followed by translation by (c, c, c, c),
    /// one constant per round: the round-key transformations themselves.
    pub fn ks_rounds(rho: &RhoSpec, constants: &[u32]) -> Self {
        let n = rho.n();
        let widen = |c: u32| {
            let c = u128::from(c) & mask(n);
            (0..4).fold(0u128, |acc, j| acc | c << (j * n))
        };
        let cs: Arc<Vec<u128>> = Arc::new(constants.iter().map(|&c| widen(c)).collect());
        let (f, b) = (rho.clone(), rho.clone());
        let (cf, cb) = (cs.clone(), cs);
        Self::from_fns(
            4 * n,
            move |x| {
                cf.iter().fold(x, |acc, &c| {
                    let st = ks_apply(&f, &KsState::from_bits(n, acc)).expect("width");
                    st.flatten_bits() ^ c
                })
            },
            move |y| {
                cb.iter().rev().fold(y, |acc, &c| {
                    let st = ks_inverse(&b, &KsState::from_bits(n, acc ^ c)).expect("width");
                    st.flatten_bits()
                })
            },
            format!(
                "{} ks rounds over {} with constants",
                constants.len(),
                rho.label()
            ),
        )
    }

    /// x ↦ f(x) + f(0): the same permutation composed with a translation so
    /// that 0 is fixed.
    pub fn normalized(&self) -> Self {
        let c = self.forward_bits(0);
        if c == 0 {
            return self.clone();
        }
        let (f, b) = (self.forward.clone(), self.backward.clone());
        Self::from_fns(
            self.m,
            move |x| f(x) ^ c,
            move |y| b(y ^ c),
            format!("{} (normalized)", self.descriptor),
        )
    }

    pub fn with_descriptor(mut self, d: impl Into<String>) -> Self {
        self.descriptor = d.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// `Some(t)` when this oracle is the translation by t.
    pub fn as_translation(&self) -> Option<u128> {
        self.translation
    }

    #[inline]
    pub fn forward_bits(&self, x: u128) -> u128 {
        (self.forward)(x & mask(self.m))
    }

    #[inline]
    pub fn backward_bits(&self, y: u128) -> u128 {
        (self.backward)(y & mask(self.m))
    }

    pub fn forward(&self, x: &BitVec) -> Result<BitVec> {
        check_dim(self.m, x.dim())?;
        Ok(BitVec::truncated(self.m, self.forward_bits(x.bits())))
    }

    pub fn backward(&self, y: &BitVec) -> Result<BitVec> {
        check_dim(self.m, y.dim())?;
        Ok(BitVec::truncated(self.m, self.backward_bits(y.bits())))
    }

    /// Samples `backward(forward(x)) = x`; returns the first failure.
    pub fn check_inverse<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Option<BitVec> {
        (0..samples)
            .map(|_| rng.gen::<u128>() & mask(self.m))
            .find(|&x| self.backward_bits(self.forward_bits(x)) != x)
            .map(|x| BitVec::truncated(self.m, x))
    }
}

/// Largest dimension for the exhaustive affinity check.
pub const MAX_EXHAUSTIVE_AFFINE_DIM: usize = 24;

/// Exact affinity test of a map on F₂^m: f(x) + f(0) must agree with the
/// linear map fixed by the images of the unit vectors. Walks a Gray code so
/// each point costs one evaluation.
pub fn is_affine_fn(m: usize, f: impl Fn(u128) -> u128) -> bool {
    find_affine_violation(m, f).is_none()
}

fn find_affine_violation(m: usize, f: impl Fn(u128) -> u128) -> Option<u128> {
    let c = f(0);
    let cols: Vec<u128> = (0..m).map(|i| f(1u128 << i) ^ c).collect();
    let mut lin = 0u128;
    for k in 1u128..(1u128 << m) {
        let flip = k.trailing_zeros() as usize;
        lin ^= cols[flip];
        let x = k ^ (k >> 1);
        if f(x) ^ c != lin {
            return Some(x);
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineCheck {
    pub is_affine: bool,
    /// True when the verdict covers every point; sampled passes are not
    /// proofs.
    pub exact: bool,
    pub checked: u64,
    /// A triple (x, y, z) with f(x+y+z) ≠ f(x)+f(y)+f(z), or for the
    /// exhaustive check a point x (with y = z = 0) where f leaves the
    /// affine map fixed by the unit vectors.
    pub counterexample: Option<[String; 3]>,
}

/// Affinity of f: exhaustive for m ≤ 24, otherwise on random triples via
/// f(x+y+z) = f(x) + f(y) + f(z).
pub fn is_affine(f: &PermutationOracle, mode: CheckMode) -> Result<AffineCheck> {
    let m = f.dim();
    let hex = |x: u128| BitVec::truncated(m, x).to_hex();
    match mode {
        CheckMode::Exhaustive => {
            if m > MAX_EXHAUSTIVE_AFFINE_DIM {
                return Err(Error::Capacity {
                    what: "exhaustive affinity check dimension",
                    requested: m,
                    limit: MAX_EXHAUSTIVE_AFFINE_DIM,
                });
            }
            let bad = find_affine_violation(m, |x| f.forward_bits(x));
            Ok(AffineCheck {
                is_affine: bad.is_none(),
                exact: true,
                checked: 1u64 << m,
                counterexample: bad.map(|x| [hex(x), hex(0), hex(0)]),
            })
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mm = mask(m);
            for i in 0..samples {
                let (x, y, z) = (
                    rng.gen::<u128>() & mm,
                    rng.gen::<u128>() & mm,
                    rng.gen::<u128>() & mm,
                );
                let lhs = f.forward_bits(x ^ y ^ z);
                let rhs = f.forward_bits(x) ^ f.forward_bits(y) ^ f.forward_bits(z);
                if lhs != rhs {
                    return Ok(AffineCheck {
                        is_affine: false,
                        exact: true,
                        checked: i + 1,
                        counterexample: Some([hex(x), hex(y), hex(z)]),
                    });
                }
            }
            Ok(AffineCheck {
                is_affine: true,
                exact: false,
                checked: samples,
                counterexample: None,
            })
        }
    }
}

/// Largest ambient dimension for the exhaustive linear-block check.
pub const MAX_EXHAUSTIVE_BLOCK_DIM: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearBlockOutcome {
    /// Every coset checked.
    Verified,
    /// No violation among the sampled pairs; not a proof.
    SampledPass,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearBlockReport {
    pub outcome: LinearBlockOutcome,
    pub checked: u64,
    /// (v, u) with f(u + v) + f(v) ∉ U.
    pub counterexample: Option<(BitVec, BitVec)>,
    pub note: Option<String>,
}

impl LinearBlockReport {
    /// `Some(true)` only for an exhaustive pass, `Some(false)` on any
    /// violation, `None` otherwise.
    pub fn proven(&self) -> Option<bool> {
        match self.outcome {
            LinearBlockOutcome::Verified => Some(true),
            LinearBlockOutcome::Violated => Some(false),
            _ => None,
        }
    }
}

/// Whether the cosets of U are permuted by f, i.e. (U + v)f = U + vf.
///
/// Exhaustively this checks f(v + u) + f(v) ∈ U for every v and every basis
/// vector u of U, which covers every coset: differences along a basis chain
/// add up to any u ∈ U.
pub fn is_linear_block(
    f: &PermutationOracle,
    u: &Subspace,
    mode: CheckMode,
) -> Result<LinearBlockReport> {
    let m = f.dim();
    check_dim(m, u.ambient_dim())?;
    if u.is_zero() || u.is_full() {
        return Ok(LinearBlockReport {
            outcome: LinearBlockOutcome::Verified,
            checked: 0,
            counterexample: None,
            note: Some("trivial subspace".into()),
        });
    }
    if f.as_translation().is_some() {
        return Ok(LinearBlockReport {
            outcome: LinearBlockOutcome::Verified,
            checked: 0,
            counterexample: None,
            note: Some("translations permute the cosets of every subspace".into()),
        });
    }
    let fail = |v: u128, w: u128, checked: u64| LinearBlockReport {
        outcome: LinearBlockOutcome::Violated,
        checked,
        counterexample: Some((BitVec::truncated(m, v), BitVec::truncated(m, w))),
        note: None,
    };
    match mode {
        CheckMode::Exhaustive => {
            if m > MAX_EXHAUSTIVE_BLOCK_DIM {
                return Ok(LinearBlockReport {
                    outcome: LinearBlockOutcome::Inconclusive,
                    checked: 0,
                    counterexample: None,
                    note: Some(format!(
                        "exhaustive check needs m ≤ {MAX_EXHAUSTIVE_BLOCK_DIM}, got {m}"
                    )),
                });
            }
            let ech = u.to_echelon();
            let mut checked = 0u64;
            for v in 0u128..(1u128 << m) {
                let fv = f.forward_bits(v);
                for &w in u.basis_bits() {
                    checked += 1;
                    if !ech.contains(f.forward_bits(v ^ w) ^ fv) {
                        return Ok(fail(v, w, checked));
                    }
                }
            }
            Ok(LinearBlockReport {
                outcome: LinearBlockOutcome::Verified,
                checked,
                counterexample: None,
                note: None,
            })
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ech = u.to_echelon();
            for i in 0..samples {
                let v = rng.gen::<u128>() & mask(m);
                let w = u.random_bits(&mut rng);
                if !ech.contains(f.forward_bits(v ^ w) ^ f.forward_bits(v)) {
                    return Ok(fail(v, w, i + 1));
                }
            }
            Ok(LinearBlockReport {
                outcome: LinearBlockOutcome::SampledPass,
                checked: samples,
                counterexample: None,
                note: Some("sampled pairs only".into()),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::enumerate_subspaces;
    use crate::sbox::SBox;

    #[test]
    fn affinity_of_small_maps() {
        let inv = SBox::field_inversion(3).unwrap();
        let rho = RhoSpec::table(3, inv.table().to_vec()).unwrap();
        let f = PermutationOracle::rho(&rho);
        let r = is_affine(&f, CheckMode::Exhaustive).unwrap();
        assert!(!r.is_affine && r.exact && r.counterexample.is_some());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = PermutationOracle::translation(&BitVec::random(10, &mut rng));
        assert!(is_affine(&t, CheckMode::Exhaustive).unwrap().is_affine);
        let a = PermutationOracle::affine(&AffineMap::random(9, &mut rng));
        assert!(is_affine(&a, CheckMode::Exhaustive).unwrap().is_affine);
        assert!(
            is_affine(
                &a,
                CheckMode::Sampled {
                    samples: 100,
                    seed: 3
                }
            )
            .unwrap()
            .is_affine
        );
    }

    #[test]
    fn every_permutation_of_f2_squared_is_affine() {
        // all 24 permutations of 4 points
        let mut perms = vec![vec![0u32, 1, 2, 3]];
        for k in 1..4 {
            perms = perms
                .into_iter()
                .flat_map(|p| {
                    (0..=k).map(move |i| {
                        let mut q = p.clone();
                        q.swap(i, k);
                        q
                    })
                })
                .collect();
        }
        perms.sort();
        perms.dedup();
        assert_eq!(perms.len(), 24);
        for p in perms {
            assert!(is_affine_fn(2, |x| u128::from(p[x as usize])));
        }
    }

    #[test]
    fn ks_oracle_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = RhoSpec::aes();
        for p in [-3, 1, 4] {
            let f = PermutationOracle::ks_power(&rho, p);
            assert_eq!(f.check_inverse(200, &mut rng), None);
        }
        let g = PermutationOracle::ks_rounds(&rho, &[1, 2, 4]);
        assert_eq!(g.check_inverse(200, &mut rng), None);
        assert_eq!(g.normalized().forward_bits(0), 0);
    }

    #[test]
    fn translations_preserve_every_block() {
        let t = PermutationOracle::translation(&BitVec::new(4, 0b1011).unwrap());
        let plain = PermutationOracle::table(4, (0..16).map(|x| x ^ 0b1011).collect()).unwrap();
        for u in enumerate_subspaces(4, None).unwrap() {
            assert_eq!(
                is_linear_block(&t, &u, CheckMode::Exhaustive)
                    .unwrap()
                    .proven(),
                Some(true)
            );
            assert_eq!(
                is_linear_block(&plain, &u, CheckMode::Exhaustive)
                    .unwrap()
                    .proven(),
                Some(true)
            );
        }
    }

    #[test]
    fn table_rejects_repeats() {
        assert!(matches!(
            PermutationOracle::table(2, vec![0, 1, 1, 3]),
            Err(Error::NotBijective { value: 1 })
        ));
    }
}
