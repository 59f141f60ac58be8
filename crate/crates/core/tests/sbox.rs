mod common;

use ksprim::gf2::AffineMap;
use ksprim::sbox::{SBox, AES_SBOX};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_sbox(width: usize, seed: u64) -> SBox {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t: Vec<u32> = (0..1u32 << width).collect();
    t.shuffle(&mut rng);
    SBox::new(width, t).unwrap()
}

#[test]
fn aes_uniformity_against_oracle() {
    let s = SBox::aes();
    let table: Vec<u32> = AES_SBOX.iter().map(|&b| u32::from(b)).collect();
    assert_eq!(common::ddt_max(&table), 4);
    assert_eq!(s.differential_uniformity().delta, 4);
    assert!(s.differential_uniformity().image_bound_holds);
}

#[test]
fn small_examples() {
    assert_eq!(SBox::identity(4).differential_uniformity().delta, 16);
    assert_eq!(SBox::identity(4).anti_invariance_order(1).unwrap().order, 0);
    let inv = SBox::field_inversion(3).unwrap();
    assert_eq!(inv.differential_uniformity().delta, 2);
    assert_eq!(common::ddt_max(inv.table()), 2);
}

#[test]
fn anti_invariance_requires_fixed_zero() {
    assert!(SBox::aes().anti_invariance_order(1).is_err());
    let (n, c) = SBox::aes().normalize_zero();
    assert_eq!(c, 0x63);
    let r = n.anti_invariance_order(1).unwrap();
    assert_eq!(r.order, 1);
    assert_eq!(r.scanned[0].subspaces, 255);
    assert_eq!(r.scanned[0].closed_images, 0);
}

#[test]
fn text_format() {
    let inv = SBox::field_inversion(3).unwrap();
    assert_eq!(SBox::from_text(&inv.to_text()).unwrap(), inv);
    assert!(SBox::from_text("0 1 1 3").is_err());
    assert!(SBox::from_text("0 1 2").is_err());
    assert!(SBox::from_text("0 1 zz 3").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ddt_rows_sum_and_match_oracle(seed in any::<u64>(), w in 1usize..=6) {
        let s = random_sbox(w, seed);
        let ddt = s.ddt().unwrap();
        for a in 0..1u32 << w {
            prop_assert_eq!(ddt.row(a).iter().sum::<u32>(), 1 << w);
            prop_assert_eq!(ddt.row(a).iter().all(|c| c % 2 == 0), true);
        }
        let oracle = if w == 0 { 0 } else { common::ddt_max(s.table()) };
        prop_assert_eq!(s.differential_uniformity().delta, oracle);
    }

    #[test]
    fn uniformity_is_affine_invariant(seed in any::<u64>(), w in 2usize..=6) {
        let s = random_sbox(w, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let t = s.apply_affine_equiv(&AffineMap::random(w, &mut rng), &AffineMap::random(w, &mut rng)).unwrap();
        prop_assert_eq!(t.differential_uniformity().delta, s.differential_uniformity().delta);
        let inv = s.invert();
        for x in 0..1u32 << w {
            prop_assert_eq!(inv.apply(s.apply(x)), x);
        }
    }
}
