//! Goursat decomposition of subspaces of a direct product F₂^m1 × F₂^m2.
//!
//! A subspace U is described by A (projection to the first factor),
//! B = {a : (a, 0) ∈ U}, C (projection to the second factor),
//! D = {c : (0, c) ∈ U} and a homomorphism φ: A → C inducing the quotient
//! isomorphism A/B → C/D, so that U = {(a, aφ + d) | a ∈ A, d ∈ D}.
//! The quotient isomorphism itself is never materialized; φ stands in for it.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gf2::{mask, BitVec, LinearMap, Subspace};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoursatData {
    pub m1: usize,
    pub m2: usize,
    pub a: Subspace,
    pub b: Subspace,
    pub c: Subspace,
    pub d: Subspace,
    /// m1 × m2 matrix; row i is the image of e_i. Zero on the completion of
    /// A's basis.
    pub phi: LinearMap,
}

fn embed_second(m1: usize, c: u128) -> u128 {
    if m1 >= 128 {
        0
    } else {
        c << m1
    }
}

fn project_second(m1: usize, u: u128) -> u128 {
    if m1 >= 128 {
        0
    } else {
        u >> m1
    }
}

/// Decomposes U ≤ F₂^(m1+m2).
///
/// φ is fixed on A's RREF basis by the U-member whose first component is
/// that basis vector, and is zero on the completed basis.
pub fn decompose(u: &Subspace, m1: usize, m2: usize) -> Result<GoursatData> {
    check_dim(m1 + m2, u.ambient_dim())?;
    let first = mask(m1);
    let rows = u.basis_bits();
    // RREF rows with pivot < m1 project onto A's RREF basis; the remaining
    // rows vanish on the first factor and span {0} × D.
    let (head, tail): (Vec<u128>, Vec<u128>) = rows.iter().partition(|&&r| r & first != 0);

    let a_rows: Vec<u128> = head.iter().map(|&r| r & first).collect();
    let phi_images: Vec<u128> = head.iter().map(|&r| project_second(m1, r)).collect();
    let a = Subspace::span_bits(m1, a_rows.iter().copied());
    debug_assert_eq!(a.basis_bits(), &a_rows[..]);

    let d = Subspace::span_bits(m2, tail.iter().map(|&r| project_second(m1, r)));
    let c = Subspace::span_bits(m2, rows.iter().map(|&r| project_second(m1, r)));

    let first_factor = Subspace::span_bits(m1 + m2, (0..m1).map(|i| 1u128 << i));
    let b_slice = u.intersect(&first_factor)?;
    let b = Subspace::span_bits(m1, b_slice.basis_bits().iter().map(|&r| r & first));

    let completion = a.complete_basis();
    let mut basis = a_rows;
    basis.extend(completion.iter().map(BitVec::bits));
    let mut images = phi_images;
    images.resize(m1, 0);
    let phi = LinearMap::from_basis_images(m1, m2, &basis, &images)?;

    Ok(GoursatData {
        m1,
        m2,
        a,
        b,
        c,
        d,
        phi,
    })
}

impl GoursatData {
    /// Checks the structural conditions, naming the first that fails.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidGoursat(msg));
        for (name, s, m) in [
            ("A", &self.a, self.m1),
            ("B", &self.b, self.m1),
            ("C", &self.c, self.m2),
            ("D", &self.d, self.m2),
        ] {
            if s.ambient_dim() != m {
                return fail(format!(
                    "{name} lives in dimension {}, expected {m}",
                    s.ambient_dim()
                ));
            }
        }
        if self.phi.dim_in() != self.m1 || self.phi.dim_out() != self.m2 {
            return fail(format!(
                "phi is {}×{}, expected {}×{}",
                self.phi.dim_in(),
                self.phi.dim_out(),
                self.m1,
                self.m2
            ));
        }
        if !self.b.is_subspace_of(&self.a)? {
            return fail("B is not contained in A".into());
        }
        if !self.d.is_subspace_of(&self.c)? {
            return fail("D is not contained in C".into());
        }
        if !self.phi.image(&self.a)?.is_subspace_of(&self.c)? {
            return fail("A·phi is not contained in C".into());
        }
        if !self.phi.image(&self.b)?.is_subspace_of(&self.d)? {
            return fail("B·phi is not contained in D".into());
        }
        if self.a.dim() - self.b.dim() != self.c.dim() - self.d.dim() {
            return fail(format!(
                "quotient dimensions differ: dim A/B = {}, dim C/D = {}",
                self.a.dim() - self.b.dim(),
                self.c.dim() - self.d.dim()
            ));
        }
        Ok(())
    }

    /// The induced map on A's basis, reduced modulo D: a canonical
    /// representative of the quotient isomorphism's class.
    pub fn phi_modulo_d(&self) -> Vec<BitVec> {
        let d_ech = self.d.to_echelon();
        self.a
            .basis_bits()
            .iter()
            .map(|&a| BitVec::truncated(self.m2, d_ech.reduce(self.phi.apply_bits(a))))
            .collect()
    }

    pub fn summary(&self) -> GoursatSummary {
        GoursatSummary {
            m1: self.m1,
            m2: self.m2,
            dim_a: self.a.dim(),
            dim_b: self.b.dim(),
            dim_c: self.c.dim(),
            dim_d: self.d.dim(),
            phi_rows: self.phi.to_hex_rows(),
        }
    }
}

/// U_φ = span{(a, aφ) : a ∈ basis A} + span{(0, d) : d ∈ basis D}.
pub fn reconstruct(g: &GoursatData) -> Result<Subspace> {
    g.validate()?;
    let graph =
        g.a.basis_bits()
            .iter()
            .map(|&a| a | embed_second(g.m1, g.phi.apply_bits(a)));
    let fiber = g.d.basis_bits().iter().map(|&d| embed_second(g.m1, d));
    Ok(Subspace::span_bits(g.m1 + g.m2, graph.chain(fiber)))
}

/// Goursat applied to U ≤ V² × V² and again to A, D ≤ V × V.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoursatTower {
    /// Word width n of V.
    pub n: usize,
    pub top: GoursatData,
    /// A = {(a', a'φ_A + d')}: A′, B′, C′, D′.
    pub a_tower: GoursatData,
    /// D = {(a'', a''φ_D + d'')}: A″, B″, C″, D″.
    pub d_tower: GoursatData,
}

pub fn tower_decompose(u: &Subspace) -> Result<GoursatTower> {
    let m = u.ambient_dim();
    if !m.is_multiple_of(4) {
        return Err(Error::Precondition(format!(
            "tower decomposition needs an ambient dimension divisible by 4, got {m}"
        )));
    }
    let n = m / 4;
    let top = decompose(u, 2 * n, 2 * n)?;
    let a_tower = decompose(&top.a, n, n)?;
    let d_tower = decompose(&top.d, n, n)?;
    Ok(GoursatTower {
        n,
        top,
        a_tower,
        d_tower,
    })
}

impl GoursatTower {
    /// Whether every level reconstructs its source subspace.
    pub fn round_trips(&self, u: &Subspace) -> Result<bool> {
        Ok(reconstruct(&self.top)? == *u
            && reconstruct(&self.a_tower)? == self.top.a
            && reconstruct(&self.d_tower)? == self.top.d)
    }

    pub fn report(&self, u: &Subspace) -> Result<TowerReport> {
        Ok(TowerReport {
            n: self.n,
            dim_u: u.dim(),
            top: self.top.summary(),
            a_tower: self.a_tower.summary(),
            d_tower: self.d_tower.summary(),
            round_trip: self.round_trips(u)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoursatSummary {
    pub m1: usize,
    pub m2: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub dim_c: usize,
    pub dim_d: usize,
    pub phi_rows: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerReport {
    pub n: usize,
    pub dim_u: usize,
    pub top: GoursatSummary,
    /// A′, B′, C′, D′ and φ_A.
    pub a_tower: GoursatSummary,
    /// A″, B″, C″, D″ and φ_D.
    pub d_tower: GoursatSummary,
    pub round_trip: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::enumerate_subspaces;

    fn product(m1: usize, m2: usize, first: &Subspace, second: &Subspace) -> Subspace {
        let rows = first
            .basis_bits()
            .iter()
            .copied()
            .chain(second.basis_bits().iter().map(|&c| c << m1));
        Subspace::span_bits(m1 + m2, rows)
    }

    #[test]
    fn first_factor_times_zero() {
        let u = product(3, 2, &Subspace::full(3), &Subspace::zero(2));
        let g = decompose(&u, 3, 2).unwrap();
        assert!(g.a.is_full() && g.b.is_full());
        assert!(g.c.is_zero() && g.d.is_zero());
        assert!(g.phi.image(&g.a).unwrap().is_zero());
        assert_eq!(reconstruct(&g).unwrap(), u);
    }

    #[test]
    fn diagonal() {
        let m = 3;
        let u = Subspace::span_bits(2 * m, (0..m).map(|i| (1u128 << i) | (1u128 << (i + m))));
        let g = decompose(&u, m, m).unwrap();
        assert!(g.a.is_full() && g.c.is_full());
        assert!(g.b.is_zero() && g.d.is_zero());
        assert_eq!(g.phi, LinearMap::identity(m));
    }

    #[test]
    fn full_space() {
        let g = decompose(&Subspace::full(6), 2, 4).unwrap();
        assert!(g.a.is_full() && g.b.is_full() && g.c.is_full() && g.d.is_full());
    }

    #[test]
    fn reconstruct_trivial_inputs() {
        let zero = GoursatData {
            m1: 2,
            m2: 3,
            a: Subspace::zero(2),
            b: Subspace::zero(2),
            c: Subspace::zero(3),
            d: Subspace::zero(3),
            phi: LinearMap::zero(2, 3),
        };
        assert_eq!(reconstruct(&zero).unwrap(), Subspace::zero(5));
        let full = GoursatData {
            a: Subspace::full(2),
            b: Subspace::full(2),
            c: Subspace::full(3),
            d: Subspace::full(3),
            ..zero
        };
        assert_eq!(reconstruct(&full).unwrap(), Subspace::full(5));
    }

    #[test]
    fn invalid_data_names_the_condition() {
        let g = GoursatData {
            m1: 2,
            m2: 2,
            a: Subspace::zero(2),
            b: Subspace::full(2),
            c: Subspace::zero(2),
            d: Subspace::zero(2),
            phi: LinearMap::zero(2, 2),
        };
        let err = reconstruct(&g).unwrap_err();
        assert_eq!(err, Error::InvalidGoursat("B is not contained in A".into()));

        let g = GoursatData {
            a: Subspace::full(2),
            b: Subspace::zero(2),
            ..g
        };
        assert!(matches!(reconstruct(&g), Err(Error::InvalidGoursat(m)) if m.contains("quotient")));
        assert!(decompose(&Subspace::full(5), 2, 2).is_err());
    }

    #[test]
    fn round_trip_all_subspaces_of_f2_4() {
        for u in enumerate_subspaces(4, None).unwrap() {
            let g = decompose(&u, 2, 2).unwrap();
            g.validate().unwrap();
            assert_eq!(reconstruct(&g).unwrap(), u);
        }
    }

    #[test]
    fn tower_of_zero_and_diagonal() {
        let t = tower_decompose(&Subspace::zero(8)).unwrap();
        for g in [&t.top, &t.a_tower, &t.d_tower] {
            assert!(g.a.is_zero() && g.b.is_zero() && g.c.is_zero() && g.d.is_zero());
        }
        // diagonal of V² × V² with n = 2
        let diag = Subspace::span_bits(8, (0..4).map(|i| (1u128 << i) | (1u128 << (i + 4))));
        let t = tower_decompose(&diag).unwrap();
        assert!(t.top.d.is_zero());
        assert!(t.d_tower.a.is_zero() && t.d_tower.d.is_zero());
        assert!(t.a_tower.a.is_full());
        assert!(t.round_trips(&diag).unwrap());
        assert!(tower_decompose(&Subspace::zero(6)).is_err());
    }
}
