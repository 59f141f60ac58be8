//! The 32-dimensional subspace U = {(a,b,c,d, 0,b,0,d, a,0,0,d, 0,0,0,d)}
//! of the AES-128 key state and its invariance under four operator rounds.

use std::fmt;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{closure_search, ClosureConfig, PermutationOracle};
use crate::error::Result;
use crate::gf2::{BitVec, Subspace};
use crate::keyschedule::RhoSpec;

/// Byte pattern of U; 0 marks a zero byte, 1..=4 the free bytes a..d.
const PATTERN: [u8; 16] = [1, 2, 3, 4, 0, 2, 0, 4, 1, 0, 0, 4, 0, 0, 0, 4];

/// How the 16 pattern bytes are placed into the four 32-bit words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ByteConvention {
    /// Byte p is byte p mod 4 of word ⌊p/4⌋ (the key-byte order).
    WordMajor,
    /// As above with the bytes of each word reversed.
    WordMajorReversed,
    /// Byte p is byte ⌊p/4⌋ of word p mod 4.
    Transposed,
    TransposedReversed,
}

impl ByteConvention {
    pub const ALL: [ByteConvention; 4] = [
        Self::WordMajor,
        Self::WordMajorReversed,
        Self::Transposed,
        Self::TransposedReversed,
    ];

    fn bit_offset(self, p: usize) -> usize {
        let (word, byte) = match self {
            Self::WordMajor => (p / 4, p % 4),
            Self::WordMajorReversed => (p / 4, 3 - p % 4),
            Self::Transposed => (p % 4, p / 4),
            Self::TransposedReversed => (p % 4, 3 - p / 4),
        };
        32 * word + 8 * byte
    }
}

impl fmt::Display for ByteConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::WordMajor => "word-major",
            Self::WordMajorReversed => "word-major, bytes reversed",
            Self::Transposed => "transposed",
            Self::TransposedReversed => "transposed, bytes reversed",
        };
        f.write_str(s)
    }
}

/// U under the given byte placement, as a subspace of F₂¹²⁸.
pub fn lp_subspace(convention: ByteConvention) -> Subspace {
    let rows = (1..=4u8).flat_map(|sym| {
        (0..8).map(move |k| {
            PATTERN
                .iter()
                .enumerate()
                .filter(|&(_, &s)| s == sym)
                .fold(0u128, |acc, (p, _)| {
                    acc | 1u128 << (convention.bit_offset(p) + k)
                })
        })
    });
    Subspace::span_bits(128, rows)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionResult {
    pub convention: ByteConvention,
    pub samples: u64,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub dim: usize,
    pub power: i64,
    pub samples: u64,
    pub seed: u64,
    /// Direct membership u·f ∈ U for f the fourth power of the operator
    /// over the 0-fixing ρ, under the word-major placement.
    pub failures: u64,
    pub pass_rate: f64,
    /// Coset form for the raw ρ: u·f + 0·f ∈ U.
    pub raw_coset_failures: u64,
    /// Convention under which every sample passed, if any.
    pub convention: Option<ByteConvention>,
    /// Filled only when the word-major placement fails.
    pub alternatives: Vec<ConventionResult>,
    pub first_failure: Option<String>,
}

fn count_failures(
    f: &PermutationOracle,
    u: &Subspace,
    samples: u64,
    seed: u64,
) -> (u64, Option<u128>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ech = u.to_echelon();
    let mut failures = 0;
    let mut first = None;
    for _ in 0..samples {
        let x = u.random_bits(&mut rng);
        if !ech.contains(f.forward_bits(x)) {
            failures += 1;
            first.get_or_insert(x);
        }
    }
    (failures, first)
}

/// Samples members of U and checks that four operator rounds, without
/// round constants, keep them in U.
pub fn verify_lp_subspace(samples: u64, seed: u64) -> LpReport {
    let power = 4;
    let rho = RhoSpec::aes();
    let f = PermutationOracle::ks_power(&rho.normalized(), power);
    let u = lp_subspace(ByteConvention::WordMajor);
    let (failures, first) = count_failures(&f, &u, samples, seed);

    let raw = PermutationOracle::ks_power(&rho, power);
    let shifted = raw.forward_bits(0);
    let raw_shifted = PermutationOracle::from_fns(
        128,
        move |x| raw.forward_bits(x) ^ shifted,
        |y| y,
        "raw, shifted",
    );
    let (raw_coset_failures, _) = count_failures(&raw_shifted, &u, samples, seed ^ 1);

    let mut alternatives = Vec::new();
    let mut convention = (failures == 0).then_some(ByteConvention::WordMajor);
    if failures > 0 {
        for c in ByteConvention::ALL.into_iter().skip(1) {
            let (fails, _) = count_failures(&f, &lp_subspace(c), samples, seed);
            alternatives.push(ConventionResult {
                convention: c,
                samples,
                failures: fails,
            });
            if fails == 0 && convention.is_none() {
                convention = Some(c);
            }
        }
    }
    LpReport {
        dim: u.dim(),
        power,
        samples,
        seed,
        failures,
        pass_rate: if samples == 0 {
            1.0
        } else {
            (samples - failures) as f64 / samples as f64
        },
        raw_coset_failures,
        convention,
        alternatives,
        first_failure: first.map(|x| BitVec::truncated(128, x).to_hex()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionClosure {
    pub convention: ByteConvention,
    pub closure_dim: usize,
    pub inside_u: bool,
}

/// Resolves the byte placement by closure search: seeded with a random
/// member of U, the closure under four rounds stays inside U only for the
/// right placement.
pub fn resolve_lp_convention(config: &ClosureConfig, seed: u64) -> Result<Vec<ConventionClosure>> {
    let f = PermutationOracle::ks_power(&RhoSpec::aes().normalized(), 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ByteConvention::ALL
        .iter()
        .map(|&c| {
            let u = lp_subspace(c);
            let start = u.random_element(&mut rng);
            let r = closure_search(&f, &[start], config, seed)?;
            Ok(ConventionClosure {
                convention: c,
                closure_dim: r.subspace.dim(),
                inside_u: r.subspace.is_subspace_of(&u)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_dimension() {
        for c in ByteConvention::ALL {
            assert_eq!(lp_subspace(c).dim(), 32);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let f = PermutationOracle::ks_power(&RhoSpec::aes().normalized(), 4);
        assert_eq!(f.forward_bits(0), 0);
    }

    #[test]
    fn word_major_placement_is_invariant() {
        let r = verify_lp_subspace(300, 9);
        assert_eq!(r.failures, 0);
        assert_eq!(r.raw_coset_failures, 0);
        assert_eq!(r.convention, Some(ByteConvention::WordMajor));
    }
}
