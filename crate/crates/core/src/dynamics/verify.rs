//! Exact wall verification by closure stabilization.
//!
//! For the left side the growing algebra `W_k = close(W_{k-1} ∪ Ad_U(W_{k-1}))`
//! starting from `𝓜_L ⊗ 𝟙` is tracked through its central factor: as long as
//! every image stays in `𝓜_LC ⊗ 𝟙_R`, `W_k = 𝓜_L ⊗ A_k ⊗ 𝟙_R` with
//! `A_k ⊆ 𝓜_C`, so only `A_k` needs storing. `A_{k+1}` is generated by `A_k`
//! and the L-blocks `(⟨i| ⊗ 𝟙) X (|j⟩ ⊗ 𝟙)` of each image `X`.

use serde::Serialize;

use crate::algebra::{close_algebra, MatrixAlgebra, OperatorSpace};
use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{
    c64, conjugate_by, frob, identity, kron, unitarity_residual, CMatrix, DEFAULT_RANK_TOL,
};
use crate::kernel::pauli::matrix_unit;
use crate::kernel::tensor::{embed, head_block, split_leading_identity, split_trailing_identity, tail_block};

use super::evolve::SUPPORT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Outcome of growing the invariant algebra from one flank.
#[derive(Debug, Clone)]
pub struct SideReport {
    pub side: Side,
    pub passed: bool,
    /// Number of conjugation rounds after which the algebra stopped growing;
    /// on failure, the round in which an image left its allowed region.
    pub stabilization_time: usize,
    /// `dim W_k` for each completed round, starting with `W_0`.
    pub dims: Vec<usize>,
    /// Central factor (`A_C` for the left side, `B_C` for the right).
    pub central: Option<MatrixAlgebra>,
    /// Largest relative weight of an image outside the allowed region.
    pub leak: f64,
}

#[derive(Debug, Clone)]
pub struct WallReport {
    pub layout: SystemLayout,
    pub left: bool,
    pub right: bool,
    pub stabilization_time: usize,
    pub left_side: SideReport,
    pub right_side: SideReport,
}

impl WallReport {
    pub fn is_wall(&self) -> bool {
        self.left && self.right
    }

    pub fn a_c(&self) -> Option<&MatrixAlgebra> {
        self.left_side.central.as_ref()
    }

    pub fn b_c(&self) -> Option<&MatrixAlgebra> {
        self.right_side.central.as_ref()
    }

    /// `𝓜_L ⊗ A_C ⊗ 𝟙_R` on the full system.
    pub fn lbar(&self) -> Option<MatrixAlgebra> {
        self.a_c().map(|a| lift_left(&self.layout, a))
    }

    /// `𝟙_L ⊗ B_C ⊗ 𝓜_R` on the full system.
    pub fn rbar(&self) -> Option<MatrixAlgebra> {
        self.b_c().map(|b| lift_right(&self.layout, b))
    }
}

/// `𝓜_L ⊗ A ⊗ 𝟙_R` with an orthonormal product basis.
pub fn lift_left(layout: &SystemLayout, a: &MatrixAlgebra) -> MatrixAlgebra {
    let (dl, dr) = (layout.dim_left(), layout.dim_right());
    let one_r = identity(dr).unscale((dr as f64).sqrt());
    let mut basis = Vec::with_capacity(dl * dl * a.dim());
    for i in 0..dl {
        for j in 0..dl {
            let e = matrix_unit(dl, i, j);
            for b in a.basis() {
                basis.push(kron(&kron(&e, b), &one_r));
            }
        }
    }
    MatrixAlgebra::from_closed_space(OperatorSpace::from_orthonormal(layout.site_dims().to_vec(), basis))
}

/// `𝟙_L ⊗ B ⊗ 𝓜_R` with an orthonormal product basis.
pub fn lift_right(layout: &SystemLayout, b: &MatrixAlgebra) -> MatrixAlgebra {
    let (dl, dr) = (layout.dim_left(), layout.dim_right());
    let one_l = identity(dl).unscale((dl as f64).sqrt());
    let mut basis = Vec::with_capacity(dr * dr * b.dim());
    for x in b.basis() {
        let lx = kron(&one_l, x);
        for i in 0..dr {
            for j in 0..dr {
                basis.push(kron(&lx, &matrix_unit(dr, i, j)));
            }
        }
    }
    MatrixAlgebra::from_closed_space(OperatorSpace::from_orthonormal(layout.site_dims().to_vec(), basis))
}

/// `𝟙_L ⊗ c ⊗ 𝟙_R`.
pub fn lift_center(layout: &SystemLayout, c: &CMatrix) -> CMatrix {
    kron(&kron(&identity(layout.dim_left()), c), &identity(layout.dim_right()))
}

/// Shift and clock on one site; together they generate its full matrix algebra.
pub fn site_generators(q: usize) -> [CMatrix; 2] {
    let shift = CMatrix::from_fn(q, q, |a, b| if a == (b + 1) % q { c64(1.0, 0.0) } else { c64(0.0, 0.0) });
    let clock = CMatrix::from_fn(q, q, |a, b| {
        if a == b {
            let phi = 2.0 * std::f64::consts::PI * a as f64 / q as f64;
            c64(phi.cos(), phi.sin())
        } else {
            c64(0.0, 0.0)
        }
    });
    [shift, clock]
}

fn grow_side(u: &CMatrix, layout: &SystemLayout, side: Side, tol: f64) -> Result<SideReport> {
    let dims = layout.site_dims();
    let center_dims = layout.center_dims().to_vec();
    let dc = layout.dim_center();
    let (d_out, d_far, outer_sites) = match side {
        Side::Left => (layout.dim_left(), layout.dim_right(), layout.left_sites()),
        Side::Right => (layout.dim_right(), layout.dim_left(), layout.right_sites()),
    };

    let mut pending = Vec::new();
    for s in outer_sites {
        for g in site_generators(dims[s]) {
            pending.push(embed(&g, &[s], dims)?);
        }
    }

    let mut alg = MatrixAlgebra::identity_algebra(center_dims.clone());
    let mut gens: Vec<CMatrix> = Vec::new();
    let mut report = SideReport {
        side,
        passed: false,
        stabilization_time: 0,
        dims: vec![d_out * d_out],
        central: None,
        leak: 0.0,
    };

    let mut round = 0;
    loop {
        if round > dc * dc + 1 {
            return Err(WallError::ClosureDiverged(dc * dc));
        }
        for op in &pending {
            let x = conjugate_by(u, op);
            let (near, leak) = match side {
                Side::Left => split_trailing_identity(&x, d_far),
                Side::Right => split_leading_identity(&x, d_far),
            };
            report.leak = report.leak.max(leak);
            if leak >= tol {
                report.stabilization_time = round;
                return Ok(report);
            }
            let scale = frob(&near);
            for i in 0..d_out {
                for j in 0..d_out {
                    let blk = match side {
                        Side::Left => head_block(&near, d_out, i, j),
                        Side::Right => tail_block(&near, d_out, i, j),
                    };
                    if frob(&blk) > DEFAULT_RANK_TOL * scale {
                        gens.push(blk);
                    }
                }
            }
        }
        let mut seeds: Vec<CMatrix> = alg.basis().to_vec();
        seeds.append(&mut gens);
        let next = close_algebra(center_dims.clone(), &seeds, DEFAULT_RANK_TOL)?;
        if next.dim() == alg.dim() {
            break;
        }
        // images of the new directions are what the next round still needs
        let fresh = fresh_directions(alg.space(), next.space());
        pending = fresh.iter().map(|c| lift_center(layout, c)).collect();
        alg = MatrixAlgebra::from_closed_space(next.into_space());
        round += 1;
        report.dims.push(d_out * d_out * alg.dim());
    }
    report.passed = true;
    report.stabilization_time = round;
    report.central = Some(alg);
    Ok(report)
}

/// Orthonormal basis of `new ⊖ old`.
fn fresh_directions(old: &OperatorSpace, new: &OperatorSpace) -> Vec<CMatrix> {
    let rest: Vec<CMatrix> = new.basis().iter().map(|b| b - old.project(b)).collect();
    crate::kernel::linalg::orthonormal_basis(&rest, 1e-8)
}

/// Wall check from a single flank (input assumed unitary).
pub fn verify_side(u: &CMatrix, layout: &SystemLayout, side: Side, tol: f64) -> Result<SideReport> {
    grow_side(u, layout, side, tol)
}

/// Checks the wall property from both flanks.
pub fn verify_wall(u: &CMatrix, layout: &SystemLayout) -> Result<WallReport> {
    verify_wall_with_tol(u, layout, SUPPORT_TOL)
}

pub fn verify_wall_with_tol(u: &CMatrix, layout: &SystemLayout, tol: f64) -> Result<WallReport> {
    if u.nrows() != layout.dim() || !u.is_square() {
        return Err(WallError::Dimension(format!(
            "U is {:?}, layout dimension {}",
            u.shape(),
            layout.dim()
        )));
    }
    let r = unitarity_residual(u);
    if r > 1e-8 {
        return Err(WallError::NotUnitary { residual: r });
    }
    let left_side = grow_side(u, layout, Side::Left, tol)?;
    let right_side = grow_side(u, layout, Side::Right, tol)?;
    Ok(WallReport {
        layout: layout.clone(),
        left: left_side.passed,
        right: right_side.passed,
        stabilization_time: left_side.stabilization_time.max(right_side.stabilization_time),
        left_side,
        right_side,
    })
}

/// Reference implementation on the full operator space: closes
/// `W_{k+1} = close(W_k ∪ U W_k U†)` from `𝓜_L ⊗ 𝟙` (resp. `𝟙 ⊗ 𝓜_R`) and
/// tests containment in `𝓜_LC ⊗ 𝟙_R` (resp. `𝟙_L ⊗ 𝓜_CR`). Cost grows as
/// `d⁶`; intended for cross-checks on small systems.
pub fn verify_wall_full(u: &CMatrix, layout: &SystemLayout, tol: f64) -> Result<(bool, bool)> {
    let side = |outer: std::ops::Range<usize>, far: usize, leading: bool| -> Result<bool> {
        let dims = layout.site_dims().to_vec();
        let mut gens = Vec::new();
        for s in outer {
            for g in site_generators(dims[s]) {
                gens.push(embed(&g, &[s], &dims)?);
            }
        }
        let mut w = close_algebra(dims.clone(), &gens, DEFAULT_RANK_TOL)?;
        loop {
            let mut seeds: Vec<CMatrix> = w.basis().to_vec();
            seeds.extend(w.basis().iter().map(|b| conjugate_by(u, b)));
            let next = close_algebra(dims.clone(), &seeds, DEFAULT_RANK_TOL)?;
            let grown = next.dim() > w.dim();
            w = next;
            if !grown {
                break;
            }
        }
        Ok(w.basis().iter().all(|b| {
            let (_, leak) = if leading {
                split_leading_identity(b, far)
            } else {
                split_trailing_identity(b, far)
            };
            leak < tol
        }))
    };
    let left = side(layout.left_sites(), layout.dim_right(), false)?;
    let right = side(layout.right_sites(), layout.dim_left(), true)?;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::random::{haar_unitary, SeededRng};

    #[test]
    fn identity_is_a_trivial_wall() {
        let layout = SystemLayout::tripartite(2, 2, 2);
        let rep = verify_wall(&identity(8), &layout).unwrap();
        assert!(rep.is_wall());
        assert_eq!(rep.a_c().unwrap().dim(), 1);
        assert_eq!(rep.stabilization_time, 0);
    }

    #[test]
    fn haar_three_qubit_unitary_is_not_a_wall() {
        let layout = SystemLayout::tripartite(2, 2, 2);
        let u = haar_unitary(8, &mut SeededRng::new(3, 0));
        let rep = verify_wall(&u, &layout).unwrap();
        assert!(!rep.left && !rep.right);
        assert_eq!(verify_wall_full(&u, &layout, SUPPORT_TOL).unwrap(), (false, false));
    }

    #[test]
    fn product_across_left_cut_is_a_wall_with_improper_algebra() {
        let layout = SystemLayout::tripartite(2, 2, 2);
        let mut rng = SeededRng::new(4, 0);
        let u = kron(&haar_unitary(2, &mut rng), &haar_unitary(4, &mut rng));
        let rep = verify_wall(&u, &layout).unwrap();
        assert!(rep.is_wall());
        assert_eq!(rep.a_c().unwrap().dim(), 1);
        assert_eq!(rep.b_c().unwrap().dim(), 4);
        assert_eq!(verify_wall_full(&u, &layout, SUPPORT_TOL).unwrap(), (true, true));
    }

    #[test]
    fn non_unitary_input_is_rejected() {
        let layout = SystemLayout::tripartite(2, 2, 2);
        assert!(matches!(
            verify_wall(&(identity(8) * c64(2.0, 0.0)), &layout),
            Err(WallError::NotUnitary { .. })
        ));
    }

    #[test]
    fn lifted_algebras_commute() {
        let layout = SystemLayout::tripartite(2, 2, 2);
        let diag = MatrixAlgebra::diagonal(vec![2]);
        let l = lift_left(&layout, &diag);
        let r = lift_right(&layout, &diag);
        assert_eq!(l.dim(), 8);
        assert!(l.space().orthonormality_residual() < 1e-12);
        for a in l.basis() {
            for b in r.basis() {
                assert!(frob(&(a * b - b * a)) < 1e-12);
            }
        }
    }
}
