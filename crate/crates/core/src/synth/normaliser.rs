//! Random elements of the normaliser group `N(A) = {G unitary : G A G† = A}`.
//!
//! In a decomposition frame every such `G` is a product of an inner unitary
//! (one Haar block per `Dᵢ`), a commutant unitary (one per `Eᵢ`) and a
//! relabelling of blocks with equal `(dim_D, dim_E)`.

use std::collections::BTreeMap;

use crate::algebra::{MatrixAlgebra, OperatorSpace};
use crate::blocks::decompose;
use crate::error::Result;
use crate::kernel::linalg::{conjugate_by, CMatrix};
use crate::kernel::random::{haar_unitary, random_permutation, SeededRng};

use super::wall::block_sum;

pub fn normaliser_sample(alg: &MatrixAlgebra, rng: &mut SeededRng) -> Result<CMatrix> {
    let bs = decompose(alg, rng)?;
    let blocks = bs.blocks();

    let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, b) in blocks.iter().enumerate() {
        classes.entry((b.dim_d, b.dim_e)).or_default().push(i);
    }
    let mut perm: Vec<usize> = (0..blocks.len()).collect();
    for members in classes.values() {
        let shuffle = random_permutation(members.len(), rng);
        for (k, &i) in members.iter().enumerate() {
            perm[i] = members[shuffle[k]];
        }
    }

    let inner: Vec<CMatrix> = blocks.iter().map(|b| haar_unitary(b.dim_d, rng)).collect();
    let outer: Vec<CMatrix> = blocks.iter().map(|b| haar_unitary(b.dim_e, rng)).collect();
    let frame = block_sum(&bs, 1, 1, &perm, &inner, &outer)?;
    Ok(bs.from_frame(&frame))
}

/// Largest relative distance of `G b G†` from `space`, over the basis `b`.
pub fn span_preservation_residual(g: &CMatrix, space: &OperatorSpace) -> f64 {
    space
        .basis()
        .iter()
        .map(|b| space.residual(&conjugate_by(g, b)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::close_algebra;
    use crate::kernel::linalg::{matmul, unitarity_residual, DEFAULT_RANK_TOL};
    use crate::kernel::pauli::parse_pauli;

    fn nonabelian() -> MatrixAlgebra {
        let g = [parse_pauli("XI").unwrap(), parse_pauli("ZX").unwrap()];
        close_algebra(vec![2, 2], &g, DEFAULT_RANK_TOL).unwrap()
    }

    #[test]
    fn diagonal_normaliser_is_monomial() {
        let alg = MatrixAlgebra::diagonal(vec![4]);
        for s in 0..10 {
            let g = normaliser_sample(&alg, &mut SeededRng::new(s, 0)).unwrap();
            assert!(unitarity_residual(&g) < 1e-10);
            for r in 0..4 {
                let nz = (0..4).filter(|&c| g[(r, c)].norm() > 1e-10).count();
                assert_eq!(nz, 1);
                let nzc = (0..4).filter(|&c| g[(c, r)].norm() > 1e-10).count();
                assert_eq!(nzc, 1);
            }
            assert!(span_preservation_residual(&g, alg.space()) < 1e-9);
        }
    }

    #[test]
    fn trivial_and_full_algebras_accept_any_unitary() {
        for alg in [MatrixAlgebra::identity_algebra(vec![3]), MatrixAlgebra::full(vec![3])] {
            let g = normaliser_sample(&alg, &mut SeededRng::new(1, 0)).unwrap();
            assert!(unitarity_residual(&g) < 1e-10);
            assert!(span_preservation_residual(&g, alg.space()) < 1e-9);
            // generic: far from the identity
            assert!(g.iter().filter(|z| z.norm() > 1e-6).count() > 3);
        }
    }

    #[test]
    fn products_of_samples_preserve_algebra_and_commutant() {
        let alg = nonabelian();
        let comm = alg.commutant();
        let mut rng = SeededRng::new(7, 0);
        let g1 = normaliser_sample(&alg, &mut rng).unwrap();
        let g2 = normaliser_sample(&alg, &mut rng).unwrap();
        let g = matmul(&g1, &g2);
        assert!(span_preservation_residual(&g, alg.space()) < 1e-9);
        assert!(span_preservation_residual(&g1, comm.space()) < 1e-9);
        assert!(span_preservation_residual(&g, comm.space()) < 1e-9);
    }

    #[test]
    fn equal_blocks_get_permuted() {
        let alg = MatrixAlgebra::diagonal(vec![2]);
        let moved = (0..20)
            .filter(|&s| {
                let g = normaliser_sample(&alg, &mut SeededRng::new(s, 0)).unwrap();
                g[(0, 0)].norm() < 1e-10
            })
            .count();
        assert!(moved > 0 && moved < 20);
    }
}
