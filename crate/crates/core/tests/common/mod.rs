//! Reference implementations used as test oracles. Nothing here calls into
//! the crate's key-schedule or S-box code.
#![allow(dead_code)]

/// Multiplication in GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.
pub fn gmul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 == 1 {
            p ^= a;
        }
        let hi = a & 0x80;
        a <<= 1;
        if hi != 0 {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    p
}

fn ginv(a: u8) -> u8 {
    if a == 0 {
        return 0;
    }
    // a^254
    let mut r = 1u8;
    let mut base = a;
    let mut e = 254u32;
    while e > 0 {
        if e & 1 == 1 {
            r = gmul(r, base);
        }
        base = gmul(base, base);
        e >>= 1;
    }
    r
}

/// The AES S-box built from field inversion and the affine map.
pub fn aes_sbox() -> [u8; 256] {
    let mut s = [0u8; 256];
    for (x, out) in s.iter_mut().enumerate() {
        let b = ginv(x as u8);
        *out = b ^ b.rotate_left(1) ^ b.rotate_left(2) ^ b.rotate_left(3) ^ b.rotate_left(4) ^ 0x63;
    }
    s
}

/// FIPS-197 KeyExpansion for a 16-byte key: 44 words of 4 bytes each.
pub fn fips_expand(key: &[u8; 16]) -> Vec<[u8; 4]> {
    let sbox = aes_sbox();
    let mut w: Vec<[u8; 4]> = key.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect();
    let mut rcon = 1u8;
    for i in 4..44 {
        let mut t = w[i - 1];
        if i % 4 == 0 {
            t = [t[1], t[2], t[3], t[0]];
            for b in &mut t {
                *b = sbox[*b as usize];
            }
            t[0] ^= rcon;
            rcon = gmul(rcon, 2);
        }
        let prev = w[i - 4];
        w.push([
            prev[0] ^ t[0],
            prev[1] ^ t[1],
            prev[2] ^ t[2],
            prev[3] ^ t[3],
        ]);
    }
    w
}

/// Round keys as 32-digit hex strings, round 0 first.
pub fn fips_round_keys(key: &[u8; 16]) -> Vec<String> {
    fips_expand(key)
        .chunks(4)
        .map(|rk| rk.iter().flatten().map(|b| format!("{b:02x}")).collect())
        .collect()
}

pub fn parse_key(hex: &str) -> [u8; 16] {
    let mut k = [0u8; 16];
    for (i, b) in k.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).unwrap();
    }
    k
}

pub const FIPS_KEY: &str = "2b7e151628aed2a6abf7158809cf4f3c";
pub const FIPS_W4: &str = "a0fafe17";
pub const FIPS_LAST_ROUND_KEY: &str = "d014f9a8c9ee2589e13f0cc8b6630ca6";

/// Exhaustive DDT maximum over nonzero input differences.
pub fn ddt_max(table: &[u32]) -> u32 {
    let n = table.len();
    let mut best = 0;
    for a in 1..n {
        let mut counts = vec![0u32; n];
        for x in 0..n {
            counts[(table[x] ^ table[x ^ a]) as usize] += 1;
        }
        best = best.max(*counts.iter().max().unwrap());
    }
    best
}

/// Number of subspaces of F₂^m, by counting echelon forms directly.
pub fn count_subspaces(m: usize) -> u64 {
    use std::collections::HashSet;
    // every subspace as the sorted set of its members
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut frontier: Vec<Vec<u32>> = vec![vec![0]];
    seen.insert(vec![0]);
    while let Some(s) = frontier.pop() {
        for v in 0..1u32 << m {
            if s.binary_search(&v).is_ok() {
                continue;
            }
            let mut t: Vec<u32> = s.iter().flat_map(|&x| [x, x ^ v]).collect();
            t.sort_unstable();
            t.dedup();
            if seen.insert(t.clone()) {
                frontier.push(t);
            }
        }
    }
    seen.len() as u64
}
