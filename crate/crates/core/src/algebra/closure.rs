//! Unital *-algebras of matrices: closure, commutant, center.

use crate::error::{Result, WallError};
use crate::kernel::linalg::{
    c64, cluster_sorted, frob, hermitian_eigen, hs_inner, identity, matmul, nullspace_with_scale, CMatrix,
    DEFAULT_RANK_TOL, ZERO,
};
use crate::kernel::random::SeededRng;

use super::space::OperatorSpace;

/// Fixed seed for the random element used internally by `commutant`.
const COMMUTANT_SEED: u64 = 0x00c0_33a7;
/// Relative gap below which eigenvalues are treated as degenerate.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Constraint matrices with more entries than this are solved through their
/// Gram matrix.
const GRAM_ENTRIES: usize = 1 << 22;
/// Gram eigenvalue cutoff, i.e. singular values below `1e-6`.
const GRAM_TOL: f64 = 1e-12;

/// A unital, adjoint-closed, product-closed operator space.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra {
    space: OperatorSpace,
    generators: Option<Vec<CMatrix>>,
}

impl MatrixAlgebra {
    /// Wraps a space already known to be a unital *-algebra.
    pub fn from_closed_space(space: OperatorSpace) -> Self {
        Self { space, generators: None }
    }

    pub fn identity_algebra(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let e = identity(d).unscale((d as f64).sqrt());
        Self {
            space: OperatorSpace::from_orthonormal(dims, vec![e]),
            generators: Some(Vec::new()),
        }
    }

    pub fn full(dims: Vec<usize>) -> Self {
        Self {
            space: OperatorSpace::full(dims),
            generators: None,
        }
    }

    /// Diagonal matrices in the computational basis.
    pub fn diagonal(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let basis = (0..d)
            .map(|a| {
                let mut p = CMatrix::zeros(d, d);
                p[(a, a)] = c64(1.0, 0.0);
                p
            })
            .collect();
        Self {
            space: OperatorSpace::from_orthonormal(dims, basis),
            generators: None,
        }
    }

    /// Attaches a generating set; the caller vouches that it generates the space.
    pub fn with_generators(mut self, generators: Vec<CMatrix>) -> Self {
        self.generators = Some(generators);
        self
    }

    pub fn space(&self) -> &OperatorSpace {
        &self.space
    }

    pub fn into_space(self) -> OperatorSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn basis(&self) -> &[CMatrix] {
        self.space.basis()
    }

    pub fn site_dims(&self) -> &[usize] {
        self.space.site_dims()
    }

    pub fn hilbert_dim(&self) -> usize {
        self.space.hilbert_dim()
    }

    /// Retained generators, if the algebra was built from some.
    pub fn generators(&self) -> Option<&[CMatrix]> {
        self.generators.as_deref()
    }

    /// Operators whose *-algebra is this algebra: retained generators when
    /// available, otherwise the basis.
    pub fn generating_set(&self) -> Vec<CMatrix> {
        match &self.generators {
            Some(g) => {
                let mut out = g.clone();
                out.extend(g.iter().map(|m| m.adjoint()));
                out
            }
            None => self.basis().to_vec(),
        }
    }

    pub fn contains(&self, o: &CMatrix, tol: f64) -> bool {
        self.space.contains(o, tol)
    }

    pub fn equals(&self, other: &MatrixAlgebra, tol: f64) -> bool {
        self.space.equals(&other.space, tol)
    }

    pub fn is_abelian(&self) -> bool {
        let b = self.basis();
        for i in 0..b.len() {
            for j in i + 1..b.len() {
                let c = matmul(&b[i], &b[j]) - matmul(&b[j], &b[i]);
                if frob(&c) >= 1e-10 {
                    return false;
                }
            }
        }
        true
    }

    /// Largest membership residual of pairwise products and adjoints of basis
    /// elements; zero for an exactly closed algebra.
    pub fn closure_residual(&self) -> f64 {
        let b = self.basis();
        let mut worst: f64 = 0.0;
        for x in b {
            worst = worst.max(self.space.residual(&x.adjoint()));
            for y in b {
                worst = worst.max(self.space.residual(&matmul(x, y)));
            }
        }
        worst
    }

    /// A random Hermitian element `Σ rₖ (bₖ + bₖ†)` with Gaussian weights.
    pub fn random_hermitian_element(&self, rng: &mut SeededRng) -> CMatrix {
        let d = self.hilbert_dim();
        let mut h = CMatrix::zeros(d, d);
        for b in self.basis() {
            let w = c64(rng.normal(), rng.normal());
            h += b * w;
        }
        (&h + h.adjoint()).scale(0.5)
    }

    /// Commutant `{x : [x, g] = 0 for all generators g}`.
    ///
    /// A random Hermitian element `h` is diagonalized first; the commutant lies
    /// inside `Comm(h)`, whose basis `wᵢ wⱼ†` over degenerate eigenvector pairs
    /// is small. The remaining generators are then imposed as a joint
    /// nullspace over that reduced basis.
    pub fn commutant(&self) -> MatrixAlgebra {
        self.commutant_with_limit(GRAM_ENTRIES)
    }

    fn commutant_with_limit(&self, gram_entries: usize) -> MatrixAlgebra {
        let d = self.hilbert_dim();
        let dims = self.site_dims().to_vec();
        let mut rng = SeededRng::new(COMMUTANT_SEED, 0);
        let h = self.random_hermitian_element(&mut rng);
        let (vals, w) = hermitian_eigen(&h);
        let clusters = cluster_sorted(&vals, CLUSTER_TOL);

        // reduced basis labels (i, j) with i, j in the same cluster
        let pairs: Vec<(usize, usize)> = clusters
            .iter()
            .flat_map(|c| c.clone().flat_map(move |i| c.clone().map(move |j| (i, j))))
            .collect();

        let gens: Vec<CMatrix> = self
            .generating_set()
            .iter()
            .map(|g| matmul(&matmul(&w.adjoint(), g), &w))
            .filter(|g| frob(g) > 0.0)
            .collect();

        let coeffs = if gens.is_empty() {
            identity(pairs.len())
        } else if gens.len() * d * d * pairs.len() > gram_entries {
            // accumulate M†M one generator at a time instead of storing M
            let mut gram = CMatrix::zeros(pairs.len(), pairs.len());
            for g in &gens {
                let m = constraint_rows(g, d, &pairs);
                gram += matmul(&m.adjoint(), &m);
            }
            let (vals, vecs) = hermitian_eigen(&gram);
            let keep = vals.iter().take_while(|&&v| v <= GRAM_TOL).count();
            vecs.columns(0, keep).into_owned()
        } else {
            let mut m = CMatrix::zeros(gens.len() * d * d, pairs.len());
            for (gi, g) in gens.iter().enumerate() {
                m.view_mut((gi * d * d, 0), (d * d, pairs.len()))
                    .copy_from(&constraint_rows(g, d, &pairs));
            }
            // generators are normalized, so unit scale floors the cutoff
            nullspace_with_scale(&m, DEFAULT_RANK_TOL, 1.0)
        };

        let mut basis = Vec::with_capacity(coeffs.ncols());
        for col in coeffs.column_iter() {
            let mut x = CMatrix::zeros(d, d);
            for (&(i, j), &cf) in pairs.iter().zip(col.iter()) {
                if cf != ZERO {
                    x[(i, j)] += cf;
                }
            }
            basis.push(matmul(&matmul(&w, &x), &w.adjoint()));
        }
        MatrixAlgebra {
            space: OperatorSpace::from_orthonormal(dims, basis),
            generators: None,
        }
    }

    /// `Z(A) = A ∩ Comm(A)`.
    pub fn center(&self) -> Result<MatrixAlgebra> {
        let comm = self.commutant();
        Ok(MatrixAlgebra {
            space: self.space.intersect(&comm.space)?,
            generators: None,
        })
    }

    /// Joint spectral projectors of an Abelian algebra: a basis of mutually
    /// orthogonal projectors summing to the identity.
    pub fn abelian_projectors(&self, rng: &mut SeededRng) -> Result<Vec<CMatrix>> {
        if !self.is_abelian() {
            return Err(WallError::Decomposition("algebra is not Abelian".into()));
        }
        for _ in 0..5 {
            let h = self.random_hermitian_element(rng);
            let (vals, w) = hermitian_eigen(&h);
            let clusters = cluster_sorted(&vals, CLUSTER_TOL);
            if clusters.len() == self.dim() {
                return Ok(clusters
                    .into_iter()
                    .map(|c| {
                        let block = w.columns(c.start, c.len()).into_owned();
                        matmul(&block, &block.adjoint())
                    })
                    .collect());
            }
        }
        Err(WallError::Decomposition(
            "random element failed to separate the spectral projectors".into(),
        ))
    }
}

/// Rows of `x ↦ [x, g/‖g‖]` over the reduced basis `E_ij`:
/// `([E_ij, g])_{ab} = δ_ai g_jb − g_ai δ_jb`.
fn constraint_rows(g: &CMatrix, d: usize, pairs: &[(usize, usize)]) -> CMatrix {
    let mut m = CMatrix::zeros(d * d, pairs.len());
    let scale = 1.0 / frob(g);
    for (col, &(i, j)) in pairs.iter().enumerate() {
        for b in 0..d {
            m[(i * d + b, col)] += g[(j, b)] * scale;
        }
        for a in 0..d {
            m[(a * d + j, col)] -= g[(a, i)] * scale;
        }
    }
    m
}

/// Smallest unital *-algebra containing `generators`.
///
/// Words in the generators and their adjoints are enumerated breadth-first,
/// each new basis element being multiplied by every generator; new directions
/// are orthonormalized by twice-iterated Gram–Schmidt with relative cutoff `tol`.
pub fn close_algebra(dims: Vec<usize>, generators: &[CMatrix], tol: f64) -> Result<MatrixAlgebra> {
    let d: usize = dims.iter().product();
    if let Some(bad) = generators.iter().find(|g| g.shape() != (d, d)) {
        return Err(WallError::Dimension(format!(
            "generator of shape {:?} for dimension {d}",
            bad.shape()
        )));
    }
    // generators below `tol` of the largest one are rounding noise
    let scale = generators.iter().map(frob).fold(0.0, f64::max);
    let mut gens: Vec<CMatrix> = Vec::new();
    for g in generators {
        let n = frob(g);
        if n == 0.0 || n <= tol * scale {
            continue;
        }
        let g = g.unscale(n);
        if frob(&(&g - g.adjoint())) > tol {
            gens.push(g.adjoint());
        }
        gens.push(g);
    }

    let mut basis = vec![identity(d).unscale((d as f64).sqrt())];
    let mut frontier = basis.clone();
    for g in &gens {
        if let Some(b) = orthogonal_remainder(&basis, g, 1.0, tol) {
            basis.push(b.clone());
            frontier.push(b);
        }
    }

    let mut rounds = 0;
    while !frontier.is_empty() {
        rounds += 1;
        if rounds > d * d + 1 {
            return Err(WallError::ClosureDiverged(d * d));
        }
        let mut next = Vec::new();
        for b in &frontier {
            for g in &gens {
                // ‖g b‖ ≤ ‖g‖‖b‖ = 1 sets the scale for the significance test
                let p = matmul(g, b);
                if let Some(n) = orthogonal_remainder(&basis, &p, 1.0, tol) {
                    basis.push(n.clone());
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    Ok(MatrixAlgebra {
        space: OperatorSpace::from_orthonormal(dims, basis),
        generators: Some(generators.to_vec()),
    })
}

/// Normalized component of `x` orthogonal to `basis`, if its norm exceeds
/// `tol · scale`.
fn orthogonal_remainder(basis: &[CMatrix], x: &CMatrix, scale: f64, tol: f64) -> Option<CMatrix> {
    if frob(x) <= tol * scale {
        return None;
    }
    let mut v = x.clone();
    for _ in 0..2 {
        for b in basis {
            let c = hs_inner(b, &v);
            v -= b * c;
        }
    }
    let n = frob(&v);
    (n > tol * scale).then(|| v.unscale(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::linalg::kron;
    use crate::kernel::pauli::{id2, parse_pauli, x, z};

    fn span(dims: Vec<usize>, mats: &[CMatrix]) -> OperatorSpace {
        OperatorSpace::span(dims, mats, DEFAULT_RANK_TOL).unwrap()
    }

    fn nonabelian() -> MatrixAlgebra {
        let g = [parse_pauli("XI").unwrap(), parse_pauli("ZX").unwrap()];
        close_algebra(vec![2, 2], &g, DEFAULT_RANK_TOL).unwrap()
    }

    #[test]
    fn gram_route_matches_direct_commutant() {
        let mut rng = SeededRng::new(12, 0);
        let g = [parse_pauli("XII").unwrap(), parse_pauli("ZXI").unwrap()];
        let a = close_algebra(vec![2, 2, 2], &g, DEFAULT_RANK_TOL).unwrap();
        let u = crate::kernel::random::haar_unitary(8, &mut rng);
        let rotated: Vec<CMatrix> = a.basis().iter().map(|b| crate::kernel::linalg::conjugate_by(&u, b)).collect();
        let a = MatrixAlgebra::from_closed_space(OperatorSpace::from_orthonormal(vec![2, 2, 2], rotated));
        let direct = a.commutant_with_limit(usize::MAX);
        let gram = a.commutant_with_limit(0);
        assert_eq!(direct.dim(), 16);
        assert!(direct.equals(&gram, 1e-8));
    }

    #[test]
    fn closing_z_gives_diagonal_qubit_algebra() {
        let a = close_algebra(vec![2], &[z()], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(a.dim(), 2);
        assert!(a.space().equals(&span(vec![2], &[id2(), z()]), 1e-10));
    }

    #[test]
    fn empty_generators_give_identity() {
        let a = close_algebra(vec![3], &[], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(a.dim(), 1);
    }

    #[test]
    fn matrix_units_close_to_full_algebra() {
        let d = 3;
        let units: Vec<CMatrix> = (0..d * d)
            .map(|k| {
                let mut e = CMatrix::zeros(d, d);
                e[(k / d, k % d)] = c64(1.0, 0.0);
                e
            })
            .collect();
        assert_eq!(close_algebra(vec![d], &units, DEFAULT_RANK_TOL).unwrap().dim(), 9);
        // a single off-diagonal unit already generates everything on a qubit
        let mut e01 = CMatrix::zeros(2, 2);
        e01[(0, 1)] = c64(1.0, 0.0);
        assert_eq!(close_algebra(vec![2], &[e01], DEFAULT_RANK_TOL).unwrap().dim(), 4);
    }

    #[test]
    fn nonabelian_pair_closes_to_four_paulis() {
        let a = nonabelian();
        assert_eq!(a.dim(), 4);
        let expect: Vec<CMatrix> = ["II", "XI", "YX", "ZX"].iter().map(|s| parse_pauli(s).unwrap()).collect();
        assert!(a.space().equals(&span(vec![2, 2], &expect), 1e-10));
        assert!(!a.is_abelian());
        assert!(a.closure_residual() < 1e-10);
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(MatrixAlgebra::full(vec![3]).commutant().dim(), 1);
        let comm = nonabelian().commutant();
        let expect: Vec<CMatrix> = ["II", "IX", "XZ", "XY"].iter().map(|s| parse_pauli(s).unwrap()).collect();
        assert!(comm.space().equals(&span(vec![2, 2], &expect), 1e-9));
        let diag = MatrixAlgebra::diagonal(vec![4]);
        assert!(diag.commutant().equals(&diag, 1e-9));
        assert_eq!(MatrixAlgebra::identity_algebra(vec![2, 2]).commutant().dim(), 16);
    }

    #[test]
    fn double_commutant_of_nonabelian_pair() {
        let a = nonabelian();
        assert!(a.commutant().commutant().equals(&a, 1e-9));
    }

    #[test]
    fn center_examples() {
        assert_eq!(MatrixAlgebra::full(vec![2]).center().unwrap().dim(), 1);
        assert_eq!(nonabelian().center().unwrap().dim(), 1);
        let diag = MatrixAlgebra::diagonal(vec![4]);
        assert!(diag.center().unwrap().equals(&diag, 1e-9));
    }

    #[test]
    fn abelian_checks() {
        assert!(MatrixAlgebra::diagonal(vec![3]).is_abelian());
        assert!(MatrixAlgebra::identity_algebra(vec![2]).is_abelian());
        assert!(!MatrixAlgebra::full(vec![2]).is_abelian());
    }

    #[test]
    fn abelian_projectors_are_orthogonal() {
        let a = close_algebra(vec![2, 2], &[kron(&z(), &z()), kron(&x(), &x())], DEFAULT_RANK_TOL).unwrap();
        assert!(a.is_abelian());
        let ps = a.abelian_projectors(&mut SeededRng::new(1, 0)).unwrap();
        assert_eq!(ps.len(), a.dim());
        for (i, p) in ps.iter().enumerate() {
            assert!(a.contains(p, 1e-9));
            for (j, q) in ps.iter().enumerate() {
                let expect = if i == j { p.clone() } else { CMatrix::zeros(4, 4) };
                assert!(frob(&(matmul(p, q) - expect)) < 1e-9);
            }
        }
    }
}
