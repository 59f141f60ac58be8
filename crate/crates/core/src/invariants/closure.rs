//! Monte-Carlo invariant-subspace closure.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PermutationOracle;
use crate::error::{check_dim, Error, Result};
use crate::gf2::{BitVec, Echelon, Subspace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureConfig {
    /// Consecutive non-growing rounds before stopping.
    pub stable_rounds: usize,
    pub samples_per_round: usize,
    /// Fresh samples checked once the span has stabilised.
    pub verification_samples: usize,
    /// Hard cap on rounds.
    pub max_rounds: usize,
    /// Also insert f⁻¹(u).
    pub use_inverse: bool,
    /// Wall-clock cap; hitting it leaves `stabilised` false.
    #[serde(default)]
    pub budget_ms: Option<u64>,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            stable_rounds: 64,
            samples_per_round: 256,
            verification_samples: 1000,
            max_rounds: 100_000,
            use_inverse: true,
            budget_ms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub subspace: Subspace,
    pub reached_full: bool,
    pub rounds: usize,
    pub evaluations: u64,
    pub verification_samples: usize,
    /// False when `max_rounds` or the time budget ran out first.
    pub stabilised: bool,
    pub seed: u64,
}

fn random_member<R: Rng + ?Sized>(ech: &Echelon, rng: &mut R) -> u128 {
    let mut acc = 0u128;
    let mut coeffs: u128 = rng.gen();
    for &r in ech.rows() {
        if coeffs & 1 == 1 {
            acc ^= r;
        }
        coeffs >>= 1;
    }
    acc
}

/// Grows span(seeds) under f until it stops growing.
///
/// Each round draws random members u of the current span S and adds f(u)
/// (and f⁻¹(u)). After `stable_rounds` rounds without growth, fresh samples
/// are checked; a miss is added and the search resumes, so the returned
/// span always passed its final verification batch.
pub fn closure_search(
    f: &PermutationOracle,
    seeds: &[BitVec],
    config: &ClosureConfig,
    seed: u64,
) -> Result<ClosureReport> {
    let m = f.dim();
    if f.forward_bits(0) != 0 {
        return Err(Error::Precondition(
            "closure search needs f(0) = 0; normalize the permutation first".into(),
        ));
    }
    let mut ech = Echelon::new();
    for s in seeds {
        check_dim(m, s.dim())?;
        ech.insert(s.bits());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rounds = 0usize;
    let mut evaluations = 0u64;
    let mut stable = 0usize;
    let mut stabilised = false;
    let deadline = config
        .budget_ms
        .map(|ms| Instant::now() + Duration::from_millis(ms));
    while ech.rank() < m && rounds < config.max_rounds {
        if deadline.is_some_and(|d| Instant::now() > d) {
            break;
        }
        rounds += 1;
        let before = ech.rank();
        for _ in 0..config.samples_per_round {
            let u = random_member(&ech, &mut rng);
            ech.insert(f.forward_bits(u));
            evaluations += 1;
            if config.use_inverse {
                ech.insert(f.backward_bits(u));
                evaluations += 1;
            }
            if ech.rank() == m {
                break;
            }
        }
        if ech.rank() > before {
            stable = 0;
            continue;
        }
        stable += 1;
        if stable >= config.stable_rounds {
            let mut grew = false;
            for _ in 0..config.verification_samples {
                let u = random_member(&ech, &mut rng);
                evaluations += 1;
                if ech.insert(f.forward_bits(u)) {
                    grew = true;
                }
            }
            if !grew {
                stabilised = true;
                break;
            }
            stable = 0;
        }
    }
    let full = ech.rank() == m;
    Ok(ClosureReport {
        subspace: Subspace::from_echelon(m, ech),
        reached_full: full,
        rounds,
        evaluations,
        verification_samples: config.verification_samples,
        stabilised: stabilised || full,
        seed,
    })
}
