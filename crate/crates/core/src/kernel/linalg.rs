//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` column-major containers; the *index* convention for
//! tensor products is row-major with site 0 most significant, which is what
//! `kron` produces. Vectorization of operators (`vec_rm`) is row-major as well.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative singular-value cutoff used for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Absolute zero test on unit-norm data.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Builds a matrix from row-major real entries.
pub fn from_real_rows(n: usize, m: usize, rows: &[f64]) -> CMatrix {
    CMatrix::from_fn(n, m, |i, j| c64(rows[i * m + j], 0.0))
}

/// Kronecker product with the first factor most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| kron(&acc, f))
}

/// Matrix product; large products go through a blocked complex GEMM.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "matmul shape mismatch");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    if m * k * n <= 32 * 32 * 32 {
        return a * b;
    }
    let mut out = zeros(m, n);
    // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2]; all three
    // buffers are column-major with the strides given and sized m*k, k*n, m*n.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            1,
            m as isize,
            b.as_ptr() as *const [f64; 2],
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            1,
            m as isize,
        );
    }
    out
}

pub fn dagger(a: &CMatrix) -> CMatrix {
    a.adjoint()
}

/// `u x u†`.
pub fn conjugate_by(u: &CMatrix, x: &CMatrix) -> CMatrix {
    matmul(&matmul(u, x), &u.adjoint())
}

/// Hilbert–Schmidt inner product `tr(a† b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn frob(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().iter().sum()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    matmul(a, b) - matmul(b, a)
}

/// `‖U†U − 𝟙‖_F`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    frob(&(matmul(&u.adjoint(), u) - identity(u.nrows())))
}

pub fn hermiticity_residual(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    frob(&(h - h.adjoint()))
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    unitarity_residual(u) < tol
}

pub fn matrix_power(u: &CMatrix, t: usize) -> CMatrix {
    let mut out = identity(u.nrows());
    let mut base = u.clone();
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            out = matmul(&out, &base);
        }
        e >>= 1;
        if e > 0 {
            base = matmul(&base, &base);
        }
    }
    out
}

/// Row-major vectorization: `vec(X)[i*cols + j] = X[i, j]`.
pub fn vec_rm(a: &CMatrix) -> CVector {
    let (r, c) = a.shape();
    CVector::from_fn(r * c, |k, _| a[(k / c, k % c)])
}

pub fn unvec_rm(v: &[C64], rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin singular value decomposition `M = U diag(s) V†`, `s` non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(m: &CMatrix) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: zeros(r, 0),
            s: Vec::new(),
            v: zeros(c, 0),
        };
    }
    let dec = to_faer(m).thin_svd().expect("SVD did not converge");
    let s = (0..r.min(c)).map(|k| dec.S()[k].re).collect();
    Svd {
        u: from_faer(dec.U()),
        s,
        v: from_faer(dec.V()),
    }
}

/// Householder QR of a square matrix, returning `(Q, R)`.
pub fn qr(m: &CMatrix) -> (CMatrix, CMatrix) {
    let dec = to_faer(m).qr();
    (from_faer(dec.compute_Q().as_ref()), from_faer(dec.R()))
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD did not converge")
}

/// Numerical rank with singular values compared against `tol · σ_max`.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > tol * top).count(),
        _ => 0,
    }
}

/// Orthonormal basis (as columns) of the kernel of `m`.
///
/// A right singular vector is kept when its singular value is at most
/// `tol · σ_max`; an all-zero matrix has the whole domain as kernel.
pub fn nullspace(m: &CMatrix, tol: f64) -> CMatrix {
    nullspace_with_scale(m, tol, 0.0)
}

/// As [`nullspace`], with the cutoff `tol · max(σ_max, scale)`; a positive
/// `scale` keeps rounding-level matrices from having a spurious kernel.
pub fn nullspace_with_scale(m: &CMatrix, tol: f64, scale: f64) -> CMatrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return zeros(0, 0);
    }
    if rows == 0 {
        return identity(cols);
    }
    let work = if rows < cols {
        let mut padded = zeros(cols, cols);
        padded.rows_mut(0, rows).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let dec = svd(&work);
    let top = dec.s.first().copied().unwrap_or(0.0).max(scale);
    let keep: Vec<usize> = (0..dec.s.len())
        .filter(|&k| top == 0.0 || dec.s[k] <= tol * top)
        .collect();
    let mut out = zeros(cols, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        out.set_column(col, &dec.v.column(k));
    }
    out
}

/// Hilbert–Schmidt orthonormal basis of the span of `mats`.
///
/// Rank is decided by singular values above `tol` times the largest one.
pub fn orthonormal_basis(mats: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    let Some(first) = mats.first() else {
        return Vec::new();
    };
    let (r, c) = first.shape();
    assert!(
        mats.iter().all(|m| m.shape() == (r, c)),
        "orthonormal_basis: shape mismatch"
    );
    let n = r * c;
    let mut stacked = zeros(n, mats.len());
    for (k, m) in mats.iter().enumerate() {
        stacked.set_column(k, &vec_rm(m));
    }
    let dec = svd(&stacked);
    let top = dec.s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Vec::new();
    }
    (0..dec.s.len())
        .filter(|&k| dec.s[k] > tol * top)
        .map(|k| unvec_rm(dec.u.column(k).as_slice(), r, c))
        .collect()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let dec = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition did not converge");
    let vals = (0..n).map(|k| dec.S()[k].re).collect();
    (vals, from_faer(dec.U()))
}

/// Groups ascending eigenvalues whose consecutive gaps are at most
/// `rel_tol` times the spectral scale.
pub fn cluster_sorted(vals: &[f64], rel_tol: f64) -> Vec<Range<usize>> {
    if vals.is_empty() {
        return Vec::new();
    }
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..vals.len() {
        if vals[k] - vals[k - 1] > rel_tol * scale {
            out.push(start..k);
            start = k;
        }
    }
    out.push(start..vals.len());
    out
}

/// Projector onto the span of the given columns of `vecs`.
pub fn column_projector(vecs: &CMatrix, cols: Range<usize>) -> CMatrix {
    let block = vecs.columns(cols.start, cols.len()).into_owned();
    matmul(&block, &block.adjoint())
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::pauli::{x, y, z};

    #[test]
    fn kron_identity_and_diagonal() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let zz = kron(&z(), &z());
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![ONE, -ONE, -ONE, ONE]));
        assert_eq!(zz, expect);
    }

    #[test]
    fn xx_squares_to_identity() {
        let xx = kron(&x(), &x());
        assert!(frob(&(matmul(&xx, &xx) - identity(4))) < 1e-15);
    }

    #[test]
    fn zgemm_path_matches_naive_product() {
        let a = CMatrix::from_fn(40, 37, |i, j| c64((i * 3 + j) as f64 * 0.01, (i as f64 - j as f64) * 0.02));
        let b = CMatrix::from_fn(37, 45, |i, j| c64((i + 2 * j) as f64 * 0.03, 0.5 - j as f64 * 0.01));
        let fast = matmul(&a, &b);
        let slow = &a * &b;
        assert!(frob(&(fast - slow)) < 1e-10);
    }

    #[test]
    fn nullspace_edge_cases() {
        assert_eq!(nullspace(&zeros(3, 3), 1e-9).ncols(), 3);
        assert_eq!(nullspace(&identity(3), 1e-9).ncols(), 0);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let m = from_real_rows(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&m, 1e-9);
        assert_eq!(ns.ncols(), 2);
        assert!(frob(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn commutator_superoperator_of_x_and_z_has_identity_kernel() {
        // [X_, g] as a map on row-major vec: (1 ⊗ gᵀ − g ⊗ 1)
        let sup = |g: &CMatrix| kron(&identity(2), &g.transpose()) - kron(g, &identity(2));
        let mut stacked = zeros(8, 4);
        stacked.rows_mut(0, 4).copy_from(&sup(&x()));
        stacked.rows_mut(4, 4).copy_from(&sup(&z()));
        let ns = nullspace(&stacked, 1e-9);
        assert_eq!(ns.ncols(), 1);
        let op = unvec_rm(ns.column(0).as_slice(), 2, 2);
        let phase = op[(0, 0)];
        assert!(frob(&(op.unscale(phase.norm()) * (phase.conj() / phase.norm()) - identity(2))) < 1e-10);
    }

    #[test]
    fn orthonormal_basis_examples() {
        let b = orthonormal_basis(&[z(), z() * c64(2.0, 0.0)], 1e-9);
        assert_eq!(b.len(), 1);
        assert!((frob(&b[0]) - 1.0).abs() < 1e-12);
        let h = 1.0 / 2f64.sqrt();
        let paulis: Vec<CMatrix> = [identity(2), x(), y(), z()].iter().map(|p| p * c64(h, 0.0)).collect();
        assert_eq!(orthonormal_basis(&paulis, 1e-9).len(), 4);
        let pm = orthonormal_basis(&[identity(2) + x(), identity(2) - x()], 1e-9);
        assert_eq!(pm.len(), 2);
        assert!(orthonormal_basis(&[zeros(2, 2)], 1e-9).is_empty());
    }

    #[test]
    fn clustering_groups_degenerate_values() {
        let groups = cluster_sorted(&[-1.0, -1.0 + 1e-12, 0.5, 2.0, 2.0], 1e-7);
        assert_eq!(groups, vec![0..2, 2..3, 3..5]);
    }

    #[test]
    fn svd_of_rank_one_kronecker_realignment() {
        // realigned T ⊗ R is rank one with singular value ‖T‖‖R‖
        let t = kron(&x(), &z()) + identity(4) * I;
        let r = kron(&y(), &x()) * c64(0.5, 0.25);
        let m = CMatrix::from_fn(16, 16, |i, j| t[(i / 4, i % 4)] * r[(j / 4, j % 4)]);
        let dec = svd(&m);
        assert!((dec.s[0] - frob(&t) * frob(&r)).abs() < 1e-12);
        assert!(dec.s[1] < 1e-12);
        let rebuilt = (&dec.u.column(0) * dec.v.column(0).adjoint()).scale(dec.s[0]);
        assert!(frob(&(rebuilt - m)) < 1e-12);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let h = kron(&x(), &y()) + kron(&z(), &identity(2)) * c64(0.3, 0.0);
        let (vals, v) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(4, vals.iter().map(|&x| c64(x, 0.0))));
        assert!(frob(&(&v * d * v.adjoint() - h)) < 1e-12);
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let u = kron(&x(), &z()) * c64(0.0, 1.0);
        let p5 = matrix_power(&u, 5);
        let mut naive = identity(4);
        for _ in 0..5 {
            naive = &naive * &u;
        }
        assert!(frob(&(p5 - naive)) < 1e-13);
    }
}
