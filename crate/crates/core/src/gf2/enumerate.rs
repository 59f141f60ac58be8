use super::subspace::Subspace;
use crate::error::{Error, Result};

/// Largest ambient dimension [`enumerate_subspaces`] accepts.
pub const MAX_ENUMERATION_DIM: usize = 8;

/// Number of k-dimensional subspaces of F₂^m (the Gaussian binomial [m k]₂).
pub fn gaussian_binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (1u128 << (m - i)) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    num / den
}

/// Total number of subspaces of F₂^m.
pub fn galois_number(m: usize) -> u128 {
    (0..=m).map(|k| gaussian_binomial(m, k)).sum()
}

/// All subspaces of F₂^m, each once, ordered by dimension and then by RREF
/// rows. `dims` restricts the dimensions produced.
pub fn enumerate_subspaces(
    m: usize,
    dims: Option<&[usize]>,
) -> Result<impl Iterator<Item = Subspace>> {
    if m > MAX_ENUMERATION_DIM {
        return Err(Error::Capacity {
            what: "subspace enumeration dimension",
            requested: m,
            limit: MAX_ENUMERATION_DIM,
        });
    }
    let wanted: Vec<usize> = match dims {
        Some(d) => {
            let mut d = d.to_vec();
            d.sort_unstable();
            d.dedup();
            d.retain(|&k| k <= m);
            d
        }
        None => (0..=m).collect(),
    };
    Ok(wanted.into_iter().flat_map(move |k| subspaces_of_dim(m, k)))
}

/// All k-dimensional subspaces of F₂^m in canonical order, without the
/// enumeration cap. Callers are responsible for the count being reasonable.
pub(crate) fn subspaces_of_dim(m: usize, k: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut pivots: Vec<usize> = (0..k).collect();
    loop {
        push_with_pivots(m, &pivots, &mut out);
        if !next_combination(&mut pivots, m) {
            break;
        }
    }
    out.sort_by(Subspace::canonical_cmp);
    out
}

fn push_with_pivots(m: usize, pivots: &[usize], out: &mut Vec<Subspace>) {
    let pivot_mask: u128 = pivots.iter().fold(0, |acc, &p| acc | (1u128 << p));
    // free coordinates per row: after the pivot and not a pivot column
    let free: Vec<Vec<usize>> = pivots
        .iter()
        .map(|&p| ((p + 1)..m).filter(|&j| pivot_mask >> j & 1 == 0).collect())
        .collect();
    let total: usize = free.iter().map(Vec::len).sum();
    for fill in 0u64..(1u64 << total) {
        let mut bit = 0;
        let rows = pivots
            .iter()
            .zip(&free)
            .map(|(&p, cols)| {
                let mut row = 1u128 << p;
                for &c in cols {
                    if fill >> bit & 1 == 1 {
                        row |= 1u128 << c;
                    }
                    bit += 1;
                }
                row
            })
            .collect();
        out.push(Subspace::from_rref_unchecked(m, rows));
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_binomials() {
        assert_eq!(gaussian_binomial(4, 2), 35);
        assert_eq!(gaussian_binomial(4, 3), 15);
        assert_eq!(gaussian_binomial(8, 7), 255);
        assert_eq!(gaussian_binomial(8, 6), 10795);
        assert_eq!(galois_number(4), 67);
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_subspaces(1, None).unwrap().count(), 2);
        assert_eq!(enumerate_subspaces(4, None).unwrap().count(), 67);
        assert_eq!(enumerate_subspaces(4, Some(&[3])).unwrap().count(), 15);
    }

    #[test]
    fn refuses_large_ambient_dimension() {
        assert!(matches!(
            enumerate_subspaces(9, None),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn order_is_by_dimension_then_rows() {
        let all: Vec<_> = enumerate_subspaces(4, None).unwrap().collect();
        for w in all.windows(2) {
            assert_eq!(w[0].canonical_cmp(&w[1]), std::cmp::Ordering::Less);
        }
        assert!(all[0].is_zero());
        assert!(all[66].is_full());
    }
}
