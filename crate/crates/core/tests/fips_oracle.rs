mod common;

use common::*;
use ksprim::gf2::BitVec;
use ksprim::keyschedule::{aes128_expand_key, aes128_round_key_step, KsState};
use ksprim::sbox::AES_SBOX;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_matches_fips_appendix() {
    let rks = fips_round_keys(&parse_key(FIPS_KEY));
    assert_eq!(rks[0], FIPS_KEY);
    assert_eq!(&rks[1][..8], FIPS_W4);
    assert_eq!(rks[10], FIPS_LAST_ROUND_KEY);
}

#[test]
fn oracle_sbox_matches_table() {
    let s = aes_sbox();
    assert_eq!(s[0], 0x63);
    assert_eq!(s[0x53], 0xed);
    assert_eq!(s, AES_SBOX);
}

#[test]
fn expansion_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut keys = vec![parse_key(FIPS_KEY), [0u8; 16], [0xff; 16]];
    keys.extend((0..200).map(|_| rng.gen::<[u8; 16]>()));
    for key in keys {
        let hex: String = key.iter().map(|b| format!("{b:02x}")).collect();
        let ours = aes128_expand_key(&BitVec::from_hex(128, &hex).unwrap()).unwrap();
        let want = fips_round_keys(&key);
        let got: Vec<String> = ours.iter().map(KsState::to_hex).collect();
        assert_eq!(got, want, "key {hex}");
    }
}

#[test]
fn single_round_step() {
    let rks = fips_round_keys(&parse_key(FIPS_KEY));
    for i in 1..=10 {
        let prev = KsState::from_hex(32, &rks[i - 1]).unwrap();
        let next = aes128_round_key_step(&prev, i).unwrap();
        assert_eq!(next.to_hex(), rks[i]);
    }
    assert!(aes128_round_key_step(&KsState::zero(32), 11).is_err());
}
