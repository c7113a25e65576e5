//! Conditional unitaries and a few standard two-qubit gates.

use crate::error::{Result, WallError};
use crate::kernel::linalg::{c64, kron, matmul, unitarity_residual, CMatrix, ONE, ZERO};

/// Which tensor factor of a two-party gate carries the control basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControlSide {
    /// `Σᵢ |i⟩⟨i| ⊗ ξᵢ`.
    First,
    /// `Σᵢ ξᵢ ⊗ |i⟩⟨i|`.
    Second,
}

/// Bi-partite conditional unitary `Σᵢ ξᵢ ⊗ |eᵢ⟩⟨eᵢ|` where `eᵢ` are the
/// columns of `eigenbasis` (placed on the side given by `control`).
pub fn conditional_unitary(eigenbasis: &CMatrix, branches: &[CMatrix], control: ControlSide) -> Result<CMatrix> {
    let q = eigenbasis.nrows();
    if eigenbasis.ncols() != q || branches.len() != q {
        return Err(WallError::Dimension(format!(
            "{} branches for a control of dimension {q}",
            branches.len()
        )));
    }
    let r = unitarity_residual(eigenbasis);
    if r > 1e-10 {
        return Err(WallError::NotUnitary { residual: r });
    }
    let dt = branches[0].nrows();
    let mut out = CMatrix::zeros(q * dt, q * dt);
    for (i, xi) in branches.iter().enumerate() {
        if xi.shape() != (dt, dt) {
            return Err(WallError::Dimension("branches differ in dimension".into()));
        }
        let r = unitarity_residual(xi);
        if r > 1e-10 {
            return Err(WallError::NotUnitary { residual: r });
        }
        let e = eigenbasis.column(i);
        let p = &e * e.adjoint();
        out += match control {
            ControlSide::First => kron(&p, xi),
            ControlSide::Second => kron(xi, &p),
        };
    }
    Ok(out)
}

/// Conditional unitary controlled in the computational basis.
pub fn controlled_by_basis(branches: &[CMatrix], control: ControlSide) -> Result<CMatrix> {
    conditional_unitary(&CMatrix::identity(branches.len(), branches.len()), branches, control)
}

fn perm_matrix(map: &[usize]) -> CMatrix {
    let n = map.len();
    let mut m = CMatrix::zeros(n, n);
    for (src, &dst) in map.iter().enumerate() {
        m[(dst, src)] = ONE;
    }
    m
}

/// CNOT with site 0 as control.
pub fn cnot() -> CMatrix {
    perm_matrix(&[0, 1, 3, 2])
}

/// CNOT with site 1 as control.
pub fn cnot_reversed() -> CMatrix {
    perm_matrix(&[0, 3, 2, 1])
}

pub fn cz() -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![ONE, ONE, ONE, -ONE]))
}

pub fn swap() -> CMatrix {
    perm_matrix(&[0, 2, 1, 3])
}

/// Fermionic swap `SWAP · CZ`.
pub fn fswap() -> CMatrix {
    matmul(&swap(), &cz())
}

/// `exp(-iθ Z⊗Z)`.
pub fn zz_phase(theta: f64) -> CMatrix {
    let p = c64(theta.cos(), -theta.sin());
    let m = c64(theta.cos(), theta.sin());
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![p, m, m, p]))
}

/// Permutation matrix sending basis vector `i` to `map[i]`.
pub fn permutation_matrix(map: &[usize]) -> CMatrix {
    perm_matrix(map)
}

pub fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| *z == ZERO)
}
