//! The 4-branch AES-like key-schedule operator.
//!
//! Given a permutation ρ of V = F₂ⁿ, the induced operator acts on V⁴ as
//!
//! ```text
//! (v1, v2, v3, v4) ↦ (v1 + v4ρ, v1 + v2 + v4ρ, v1 + v2 + v3 + v4ρ, v1 + v2 + v3 + v4 + v4ρ)
//! ```
//!
//! with inverse `(v1 + (v3 + v4)ρ, v1 + v2, v2 + v3, v3 + v4)`. With
//! ρ = RotWord followed by four AES S-boxes, and a translation by the round
//! constant in every word, one application is one AES-128 key-schedule round.
//!
//! Words are `u32` values of width n ≤ 32; a state flattens word-major into
//! a [`BitVec`] of width 4n. Byte k of a word is bits 8k..8k+8, byte 0 being
//! the first byte of the FIPS-197 word.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gf2::{mask, AffineMap, BitVec, LinearMap};
use crate::sbox::SBox;

/// Largest word width supported.
pub const MAX_WORD_BITS: usize = 32;
/// Largest width for which ρ may be given as a lookup table.
pub const MAX_TABLE_BITS: usize = 16;
/// Number of AES-128 rounds.
pub const AES128_ROUNDS: usize = 10;

#[inline]
fn word_mask(n: usize) -> u32 {
    mask(n) as u32
}

/// RotWord: bytes (b0, b1, b2, b3) ↦ (b1, b2, b3, b0).
#[inline]
pub fn rot_word(x: u32) -> u32 {
    x.rotate_right(8)
}

/// RotWord as a linear map of F₂³².
pub fn rot_word_map() -> LinearMap {
    LinearMap::from_fn(32, 32, |x| u128::from(rot_word(x as u32)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum RhoForm {
    Table {
        table: Vec<u32>,
        inverse: Vec<u32>,
    },
    /// The linear layer first, then the S-box on every brick.
    Spn {
        sbox: SBox,
        inv_sbox: SBox,
        bricks: usize,
        linear: LinearMap,
        linear_inv: LinearMap,
    },
    Affine {
        map: AffineMap,
        inverse: AffineMap,
    },
}

/// A permutation ρ of F₂ⁿ, optionally followed by a constant translation
/// (used to normalize 0ρ = 0).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhoSpec {
    n: usize,
    form: RhoForm,
    offset: u32,
    label: String,
}

impl RhoSpec {
    /// ρ_AES: RotWord followed by the AES S-box on each byte.
    pub fn aes() -> Self {
        Self::spn(SBox::aes(), 4, rot_word_map())
            .expect("AES parameters are consistent")
            .with_label("rho_aes")
    }

    pub fn table(n: usize, table: Vec<u32>) -> Result<Self> {
        if n > MAX_TABLE_BITS {
            return Err(Error::Capacity {
                what: "tabulated rho width",
                requested: n,
                limit: MAX_TABLE_BITS,
            });
        }
        let sbox = SBox::new(n, table)?;
        let inverse = sbox.invert().table().to_vec();
        Ok(Self {
            n,
            form: RhoForm::Table {
                table: sbox.table().to_vec(),
                inverse,
            },
            offset: 0,
            label: format!("table(n={n})"),
        })
    }

    /// ρ = `linear` followed by `sbox` on each of `bricks` bricks.
    pub fn spn(sbox: SBox, bricks: usize, linear: LinearMap) -> Result<Self> {
        let n = sbox.width() * bricks;
        if n > MAX_WORD_BITS {
            return Err(Error::Capacity {
                what: "word width",
                requested: n,
                limit: MAX_WORD_BITS,
            });
        }
        check_dim(n, linear.dim_in())?;
        let linear_inv = linear
            .inverse()
            .ok_or_else(|| Error::Precondition("linear layer is not invertible".into()))?;
        Ok(Self {
            n,
            form: RhoForm::Spn {
                inv_sbox: sbox.invert(),
                sbox,
                bricks,
                linear,
                linear_inv,
            },
            offset: 0,
            label: format!("spn(n={n}, bricks={bricks})"),
        })
    }

    pub fn affine(map: AffineMap) -> Result<Self> {
        let n = map.dim();
        if n > MAX_WORD_BITS {
            return Err(Error::Capacity {
                what: "word width",
                requested: n,
                limit: MAX_WORD_BITS,
            });
        }
        Ok(Self {
            n,
            form: RhoForm::Affine {
                inverse: map.inverse(),
                map,
            },
            offset: 0,
            label: format!("affine(n={n})"),
        })
    }

    pub fn random_table<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n > MAX_TABLE_BITS {
            return Err(Error::Capacity {
                what: "tabulated rho width",
                requested: n,
                limit: MAX_TABLE_BITS,
            });
        }
        let mut t: Vec<u32> = (0..1u32 << n).collect();
        t.shuffle(rng);
        Ok(Self::table(n, t)?.with_label(format!("random_table(n={n})")))
    }

    /// A uniformly random non-affine permutation, by rejection. Every
    /// permutation of F₂ⁿ is affine for n ≤ 2, so those widths are refused.
    pub fn random_non_affine<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n <= 2 {
            return Err(Error::Precondition(format!(
                "every permutation of F₂^{n} is affine; non-affine rho needs n ≥ 3"
            )));
        }
        loop {
            let rho = Self::random_table(n, rng)?;
            if !crate::invariants::is_affine_fn(n, |x| u128::from(rho.eval(x as u32))) {
                return Ok(rho.with_label(format!("random_non_affine(n={n})")));
            }
        }
    }

    pub fn random_affine<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        Ok(Self::affine(AffineMap::random(n, rng))?.with_label(format!("random_affine(n={n})")))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether the form is affine by construction.
    pub fn is_affine_form(&self) -> bool {
        matches!(self.form, RhoForm::Affine { .. })
    }

    /// The same permutation followed by translation by 0ρ, so that 0 is fixed.
    pub fn normalized(&self) -> Self {
        let c = self.eval(0);
        let mut out = self.clone();
        out.offset ^= c;
        if c != 0 {
            out.label = format!("{}+const", self.label);
        }
        out
    }

    /// The constant added after the base permutation.
    pub fn offset(&self) -> u32 {
        self.offset
    }

    #[inline]
    pub fn eval(&self, x: u32) -> u32 {
        let x = x & word_mask(self.n);
        let y = match &self.form {
            RhoForm::Table { table, .. } => table[x as usize],
            RhoForm::Spn {
                sbox,
                bricks,
                linear,
                ..
            } => {
                let s = sbox.width();
                let t = linear.apply_bits(u128::from(x)) as u32;
                let bm = word_mask(s);
                (0..*bricks).fold(0u32, |acc, i| {
                    acc | sbox.apply((t >> (s * i)) & bm) << (s * i)
                })
            }
            RhoForm::Affine { map, .. } => map.apply_bits(u128::from(x)) as u32,
        };
        y ^ self.offset
    }

    #[inline]
    pub fn eval_inv(&self, y: u32) -> u32 {
        let y = (y ^ self.offset) & word_mask(self.n);
        match &self.form {
            RhoForm::Table { inverse, .. } => inverse[y as usize],
            RhoForm::Spn {
                inv_sbox,
                bricks,
                linear_inv,
                ..
            } => {
                let s = inv_sbox.width();
                let bm = word_mask(s);
                let t = (0..*bricks).fold(0u32, |acc, i| {
                    acc | inv_sbox.apply((y >> (s * i)) & bm) << (s * i)
                });
                linear_inv.apply_bits(u128::from(t)) as u32
            }
            RhoForm::Affine { inverse, .. } => inverse.apply_bits(u128::from(y)) as u32,
        }
    }
}

/// ρ_AES on a single 32-bit word.
pub fn rho_aes(v: &BitVec) -> Result<BitVec> {
    check_dim(32, v.dim())?;
    let x = v.bits() as u32;
    let r = rot_word(x);
    let y = r.to_le_bytes().map(|b| crate::sbox::AES_SBOX[b as usize]);
    Ok(BitVec::truncated(32, u128::from(u32::from_le_bytes(y))))
}

/// A state (v1, v2, v3, v4) ∈ V⁴.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct KsState {
    n: usize,
    words: [u32; 4],
}

impl KsState {
    pub fn new(n: usize, words: [u32; 4]) -> Result<Self> {
        if n > MAX_WORD_BITS {
            return Err(Error::Capacity {
                what: "word width",
                requested: n,
                limit: MAX_WORD_BITS,
            });
        }
        if words.iter().any(|w| w & !word_mask(n) != 0) {
            return Err(Error::Parse(format!("word has bits beyond width {n}")));
        }
        Ok(Self { n, words })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, words: [0; 4] }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let m = word_mask(n);
        Self {
            n,
            words: [
                rng.gen::<u32>() & m,
                rng.gen::<u32>() & m,
                rng.gen::<u32>() & m,
                rng.gen::<u32>() & m,
            ],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words(&self) -> [u32; 4] {
        self.words
    }

    pub fn word(&self, i: usize) -> u32 {
        self.words[i]
    }

    /// Word-major flattening into F₂^(4n).
    pub fn flatten(&self) -> BitVec {
        BitVec::truncated(4 * self.n, self.flatten_bits())
    }

    #[inline]
    pub(crate) fn flatten_bits(&self) -> u128 {
        self.words
            .iter()
            .enumerate()
            .fold(0u128, |acc, (j, &w)| acc | u128::from(w) << (j * self.n))
    }

    pub fn unflatten(n: usize, v: &BitVec) -> Result<Self> {
        check_dim(4 * n, v.dim())?;
        Ok(Self::from_bits(n, v.bits()))
    }

    #[inline]
    pub(crate) fn from_bits(n: usize, bits: u128) -> Self {
        let m = mask(n);
        let w = |j: usize| ((bits >> (j * n)) & m) as u32;
        Self {
            n,
            words: [w(0), w(1), w(2), w(3)],
        }
    }

    /// Hex byte string of the flattened state (32 hex digits at n = 32).
    pub fn to_hex(&self) -> String {
        self.flatten().to_hex()
    }

    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        Self::unflatten(n, &BitVec::from_hex(4 * n, s)?)
    }

    /// Each word as a hex byte string.
    pub fn word_hex(&self) -> [String; 4] {
        self.words
            .map(|w| BitVec::truncated(self.n, u128::from(w)).to_hex())
    }
}

impl fmt::Display for KsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.word_hex();
        write!(f, "({a}, {b}, {c}, {d})")
    }
}

/// One application of the operator induced by ρ.
pub fn ks_apply(rho: &RhoSpec, st: &KsState) -> Result<KsState> {
    check_dim(rho.n(), st.n)?;
    let [v1, v2, v3, v4] = st.words;
    let r = rho.eval(v4);
    let w1 = v1 ^ r;
    let w2 = w1 ^ v2;
    let w3 = w2 ^ v3;
    let w4 = w3 ^ v4;
    Ok(KsState {
        n: st.n,
        words: [w1, w2, w3, w4],
    })
}

/// The inverse operator: (v1 + (v3 + v4)ρ, v1 + v2, v2 + v3, v3 + v4).
pub fn ks_inverse(rho: &RhoSpec, st: &KsState) -> Result<KsState> {
    check_dim(rho.n(), st.n)?;
    let [v1, v2, v3, v4] = st.words;
    Ok(KsState {
        n: st.n,
        words: [v1 ^ rho.eval(v3 ^ v4), v1 ^ v2, v2 ^ v3, v3 ^ v4],
    })
}

/// The i-fold composition; negative powers compose the inverse.
pub fn ks_power(rho: &RhoSpec, st: &KsState, i: i64) -> Result<KsState> {
    check_dim(rho.n(), st.n)?;
    let mut cur = *st;
    for _ in 0..i.unsigned_abs() {
        cur = if i > 0 {
            ks_apply(rho, &cur)?
        } else {
            ks_inverse(rho, &cur)?
        };
    }
    Ok(cur)
}

/// Translation σ_t: componentwise XOR.
pub fn translate(st: &KsState, t: &KsState) -> Result<KsState> {
    check_dim(st.n, t.n)?;
    let mut words = st.words;
    for (w, x) in words.iter_mut().zip(t.words) {
        *w ^= x;
    }
    Ok(KsState { n: st.n, words })
}

/// Entry of the formal 4×4 operator matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormalEntry {
    Zero,
    One,
    Rho,
    OnePlusRho,
}

/// The operator as a formal matrix acting on row vectors: output j is the
/// sum over i of `v_i` transformed by entry (i, j).
pub const OPERATOR_MATRIX: [[FormalEntry; 4]; 4] = {
    use FormalEntry::*;
    [
        [One, One, One, One],
        [Zero, One, One, One],
        [Zero, Zero, One, One],
        [Rho, Rho, Rho, OnePlusRho],
    ]
};

/// Evaluates [`OPERATOR_MATRIX`] entry by entry; an independent route to
/// [`ks_apply`].
pub fn ks_apply_matrix(rho: &RhoSpec, st: &KsState) -> Result<KsState> {
    check_dim(rho.n(), st.n)?;
    let mut out = [0u32; 4];
    for (j, o) in out.iter_mut().enumerate() {
        for (i, &v) in st.words.iter().enumerate() {
            *o ^= match OPERATOR_MATRIX[i][j] {
                FormalEntry::Zero => 0,
                FormalEntry::One => v,
                FormalEntry::Rho => rho.eval(v),
                FormalEntry::OnePlusRho => v ^ rho.eval(v),
            };
        }
    }
    Ok(KsState {
        n: st.n,
        words: out,
    })
}

/// A round constant rc_i = x^(i−1) in GF(2⁸), and its widening (rc, 0, 0, 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundConstant {
    pub round: usize,
    pub rc: u8,
    pub widened: u32,
}

impl RoundConstant {
    pub fn aes(round: usize) -> Result<Self> {
        if !(1..=AES128_ROUNDS).contains(&round) {
            return Err(Error::OutOfRange {
                what: "AES-128 round index",
                value: round as i64,
            });
        }
        let mut rc = 1u8;
        for _ in 1..round {
            rc = xtime(rc);
        }
        Ok(Self {
            round,
            rc,
            widened: u32::from(rc),
        })
    }

    /// The translation (rc̄, rc̄, rc̄, rc̄) of V⁴.
    pub fn translation(&self) -> KsState {
        KsState {
            n: 32,
            words: [self.widened; 4],
        }
    }
}

/// Multiplication by x modulo x⁸ + x⁴ + x³ + x + 1.
fn xtime(a: u8) -> u8 {
    let hi = a & 0x80;
    let r = a << 1;
    if hi != 0 {
        r ^ 0x1b
    } else {
        r
    }
}

/// One AES-128 key-schedule round: the operator over ρ_AES, then
/// translation by the widened round constant in every word.
pub fn aes128_round_key_step(st: &KsState, round: usize) -> Result<KsState> {
    check_dim(32, st.n)?;
    let rc = RoundConstant::aes(round)?;
    aes128_step_with_constant(st, rc.widened)
}

/// Same as [`aes128_round_key_step`] with an arbitrary widened constant.
pub fn aes128_step_with_constant(st: &KsState, widened_rc: u32) -> Result<KsState> {
    thread_local! {
        static RHO: RhoSpec = RhoSpec::aes();
    }
    let next = RHO.with(|rho| ks_apply(rho, st))?;
    translate(
        &next,
        &KsState {
            n: 32,
            words: [widened_rc; 4],
        },
    )
}

/// The eleven AES-128 round keys, round key 0 being the master key.
pub fn aes128_expand_key(master: &BitVec) -> Result<Vec<KsState>> {
    let mut keys = Vec::with_capacity(AES128_ROUNDS + 1);
    keys.push(KsState::unflatten(32, master)?);
    for round in 1..=AES128_ROUNDS {
        let next = aes128_round_key_step(&keys[round - 1], round)?;
        keys.push(next);
    }
    Ok(keys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn inversion_rho() -> RhoSpec {
        RhoSpec::table(3, SBox::field_inversion(3).unwrap().table().to_vec()).unwrap()
    }

    #[test]
    fn rho_aes_rotates_then_substitutes() {
        let s = |b: u8| crate::sbox::AES_SBOX[b as usize];
        assert_eq!(rho_aes(&BitVec::zero(32)).unwrap().to_hex(), "63636363");
        let v = BitVec::from_hex(32, "01020304").unwrap();
        let expected = [s(2), s(3), s(4), s(1)];
        assert_eq!(
            rho_aes(&v).unwrap().bits() as u32,
            u32::from_le_bytes(expected)
        );
        let rho = RhoSpec::aes();
        assert_eq!(rho.eval(v.bits() as u32), u32::from_le_bytes(expected));
        assert!(rho_aes(&BitVec::zero(8)).is_err());
    }

    #[test]
    fn rho_aes_inverse_round_trip() {
        let rho = RhoSpec::aes();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let x: u32 = rng.gen();
            assert_eq!(rho.eval_inv(rho.eval(x)), x);
            assert_eq!(rho.eval(rho.eval_inv(x)), x);
        }
    }

    #[test]
    fn apply_on_first_word_only() {
        let rho = inversion_rho();
        for v in 0..8 {
            let st = KsState::new(3, [v, 0, 0, 0]).unwrap();
            assert_eq!(ks_apply(&rho, &st).unwrap().words(), [v; 4]);
            assert_eq!(
                ks_inverse(&rho, &KsState::new(3, [v; 4]).unwrap()).unwrap(),
                st
            );
        }
    }

    #[test]
    fn last_word_identities() {
        let rho = inversion_rho();
        for d in 0..8 {
            let dr = rho.eval(d);
            let st = KsState::new(3, [0, 0, 0, d]).unwrap();
            assert_eq!(ks_apply(&rho, &st).unwrap().words(), [dr, dr, dr, d ^ dr]);
            assert_eq!(ks_inverse(&rho, &st).unwrap().words(), [dr, 0, 0, d]);
            assert_eq!(ks_power(&rho, &st, -3).unwrap().words(), [dr, dr, dr, d]);
        }
    }

    #[test]
    fn power_zero_is_identity_and_width_checked() {
        let rho = RhoSpec::aes();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let st = KsState::random(32, &mut rng);
        assert_eq!(ks_power(&rho, &st, 0).unwrap(), st);
        assert!(ks_apply(&rho, &KsState::zero(3)).is_err());
        assert!(translate(&st, &KsState::zero(3)).is_err());
    }

    #[test]
    fn translate_is_an_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let st = KsState::random(32, &mut rng);
        let t = KsState::random(32, &mut rng);
        assert_eq!(translate(&st, &KsState::zero(32)).unwrap(), st);
        assert_eq!(translate(&st, &st).unwrap(), KsState::zero(32));
        assert_eq!(translate(&translate(&st, &t).unwrap(), &t).unwrap(), st);
        assert_eq!(
            translate(&st, &t).unwrap().flatten().bits(),
            st.flatten().bits() ^ t.flatten().bits()
        );
    }

    #[test]
    fn round_constants() {
        let rcs: Vec<u8> = (1..=10)
            .map(|i| RoundConstant::aes(i).unwrap().rc)
            .collect();
        assert_eq!(
            rcs,
            [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36]
        );
        assert!(RoundConstant::aes(0).is_err());
        assert!(RoundConstant::aes(11).is_err());
        assert_eq!(
            RoundConstant::aes(9).unwrap().translation().word_hex()[0],
            "1b000000"
        );
    }

    #[test]
    fn zero_constant_step_is_the_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = RhoSpec::aes();
        let st = KsState::random(32, &mut rng);
        assert_eq!(
            aes128_step_with_constant(&st, 0).unwrap(),
            ks_apply(&rho, &st).unwrap()
        );
        assert!(aes128_round_key_step(&st, 11).is_err());
    }

    #[test]
    fn zero_master_key_first_round() {
        let keys = aes128_expand_key(&BitVec::zero(128)).unwrap();
        assert_eq!(keys.len(), 11);
        // every word is S(0)^4 plus rc1 in byte 0
        let w = u32::from_le_bytes([0x63 ^ 0x01, 0x63, 0x63, 0x63]);
        assert_eq!(keys[1].words(), [w; 4]);
        assert_eq!(keys, aes128_expand_key(&BitVec::zero(128)).unwrap());
    }

    #[test]
    fn hex_state_layout() {
        let st = KsState::from_hex(32, "2b7e151628aed2a6abf7158809cf4f3c").unwrap();
        assert_eq!(st.word_hex()[0], "2b7e1516");
        assert_eq!(st.word_hex()[3], "09cf4f3c");
        assert_eq!(st.to_hex(), "2b7e151628aed2a6abf7158809cf4f3c");
        assert!(KsState::from_hex(32, "2b7e").is_err());
    }

    #[test]
    fn normalization_fixes_zero() {
        let rho = RhoSpec::aes().normalized();
        assert_eq!(rho.eval(0), 0);
        assert_eq!(rho.offset(), 0x63636363);
        for x in [0u32, 1, 0xdeadbeef] {
            assert_eq!(rho.eval_inv(rho.eval(x)), x);
        }
    }

    #[test]
    fn non_affine_rho_needs_three_bits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            RhoSpec::random_non_affine(2, &mut rng),
            Err(Error::Precondition(_))
        ));
        let rho = RhoSpec::random_non_affine(3, &mut rng).unwrap();
        assert!(!crate::invariants::is_affine_fn(3, |x| u128::from(
            rho.eval(x as u32)
        )));
    }
}
