use ksprim::gf2::{AffineMap, BitVec, LinearMap};
use ksprim::keyschedule::*;
use ksprim::sbox::SBox;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rho_strategy() -> impl Strategy<Value = RhoSpec> {
    (any::<u64>(), 0usize..3).prop_map(|(seed, kind)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match kind {
            0 => RhoSpec::aes(),
            1 => RhoSpec::random_non_affine(4, &mut rng).unwrap(),
            _ => RhoSpec::random_affine(8, &mut rng).unwrap(),
        }
    })
}

proptest! {
    #[test]
    fn powers_add(rho in rho_strategy(), seed in any::<u64>(), i in -6i64..6, j in -6i64..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = KsState::random(rho.n(), &mut rng);
        let lhs = ks_power(&rho, &ks_power(&rho, &st, i).unwrap(), j).unwrap();
        prop_assert_eq!(lhs, ks_power(&rho, &st, i + j).unwrap());
    }

    #[test]
    fn formal_matrix_agrees(rho in rho_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = KsState::random(rho.n(), &mut rng);
        prop_assert_eq!(ks_apply_matrix(&rho, &st).unwrap(), ks_apply(&rho, &st).unwrap());
        prop_assert_eq!(ks_inverse(&rho, &ks_apply(&rho, &st).unwrap()).unwrap(), st);
    }

    #[test]
    fn linear_rho_gives_linear_operator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = AffineMap::new(LinearMap::random_invertible(6, &mut rng), BitVec::zero(6)).unwrap();
        let rho = RhoSpec::affine(a).unwrap();
        let x = KsState::random(6, &mut rng);
        let y = KsState::random(6, &mut rng);
        let sum = translate(&x, &y).unwrap();
        let lhs = ks_apply(&rho, &sum).unwrap();
        let rhs = translate(&ks_apply(&rho, &x).unwrap(), &ks_apply(&rho, &y).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn flatten_round_trip(seed in any::<u64>(), n in 1usize..=32) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = KsState::random(n, &mut rng);
        prop_assert_eq!(KsState::unflatten(n, &st.flatten()).unwrap(), st);
        prop_assert_eq!(KsState::from_hex(n, &st.to_hex()).unwrap(), st);
    }

    #[test]
    fn rho_inverse(seed in any::<u64>(), x in any::<u32>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for rho in [RhoSpec::aes(), RhoSpec::aes().normalized(), RhoSpec::random_table(5, &mut rng).unwrap()] {
            let x = x & ((1u64 << rho.n()) - 1) as u32;
            prop_assert_eq!(rho.eval_inv(rho.eval(x)), x);
        }
    }
}

#[test]
fn aes_rho_is_rotword_then_sbox() {
    let s = SBox::aes();
    let rho = RhoSpec::aes();
    for x in [0u32, 1, 0x01020304, 0xdeadbeef, 0xffffffff] {
        let r = rot_word(x);
        let want = (0..4).fold(0u32, |acc, k| {
            acc | s.apply((r >> (8 * k)) & 0xff) << (8 * k)
        });
        assert_eq!(rho.eval(x), want);
    }
    // byte order (b0, b1, b2, b3) -> (b1, b2, b3, b0)
    assert_eq!(
        rot_word(u32::from_le_bytes([1, 2, 3, 4])),
        u32::from_le_bytes([2, 3, 4, 1])
    );
    let v = BitVec::new(32, 0).unwrap();
    assert_eq!(rho_aes(&v).unwrap().to_hex(), "63636363");
}

#[test]
fn round_constants() {
    let rcs: Vec<u32> = (1..=10)
        .map(|i| u32::from(RoundConstant::aes(i).unwrap().rc))
        .collect();
    assert_eq!(
        rcs,
        vec![0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36]
    );
    assert!(RoundConstant::aes(0).is_err());
    assert!(RoundConstant::aes(11).is_err());
    let t = RoundConstant::aes(3).unwrap().translation();
    assert_eq!(t.words(), [4; 4]);
}

#[test]
fn mismatched_widths_are_rejected() {
    assert!(ks_apply(&RhoSpec::aes(), &KsState::zero(8)).is_err());
    assert!(KsState::new(4, [16, 0, 0, 0]).is_err());
    assert!(KsState::new(33, [0; 4]).is_err());
}
