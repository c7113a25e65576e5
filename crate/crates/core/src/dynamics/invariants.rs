//! Invariant algebras of a verified wall and what they imply: conserved
//! charges, C-local operators commuting with `U`, and the fragmentation of
//! operator space into invariant sectors.

use serde::Serialize;

use crate::algebra::{close_algebra, MatrixAlgebra, OperatorSpace};
use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{
    commutator, frob, kron, matmul, nullspace_with_scale, orthonormal_basis, CMatrix, DEFAULT_RANK_TOL,
};
use crate::kernel::pauli::matrix_unit;
use crate::kernel::random::SeededRng;
use crate::kernel::tensor::{embed, operator_schmidt, split_leading_identity, split_trailing_identity};
use crate::synth::WallUnitary;

use super::verify::{lift_center, lift_left, lift_right, site_generators, verify_wall, WallReport};

/// Systems up to this total dimension also get the full-space route in
/// [`conserved_algebra`].
pub const FULL_ROUTE_MAX_DIM: usize = 32;
/// Span tolerance for route agreement.
pub const ROUTE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct InvariantAlgebras {
    pub layout: SystemLayout,
    /// `𝓜_L ⊗ A_C ⊗ 𝟙_R`
    pub lbar: MatrixAlgebra,
    /// `𝟙_L ⊗ B_C ⊗ 𝓜_R`
    pub rbar: MatrixAlgebra,
    pub a_c: MatrixAlgebra,
    pub b_c: MatrixAlgebra,
    pub stabilization_time: usize,
}

impl InvariantAlgebras {
    /// Largest `‖[a, b]‖` over basis pairs of `A_C` and `B_C`.
    pub fn central_commutator(&self) -> f64 {
        max_commutator(self.a_c.basis(), self.b_c.basis())
    }

    /// Largest `‖[l, r]‖` over basis pairs of `Lbar` and `Rbar`.
    pub fn lifted_commutator(&self) -> f64 {
        max_commutator(self.lbar.basis(), self.rbar.basis())
    }
}

fn max_commutator(a: &[CMatrix], b: &[CMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in a {
        for y in b {
            worst = worst.max(frob(&commutator(x, y)));
        }
    }
    worst
}

/// Generators of `𝓜_L ⊗ 𝟙` or `𝟙 ⊗ 𝓜_R`: shift and clock on every outer site.
fn outer_generators(layout: &SystemLayout, sites: std::ops::Range<usize>) -> Result<Vec<CMatrix>> {
    let dims = layout.site_dims();
    let mut out = Vec::new();
    for s in sites {
        for g in site_generators(dims[s]) {
            out.push(embed(&g, &[s], dims)?);
        }
    }
    Ok(out)
}

pub fn invariant_algebras(u: &CMatrix, layout: &SystemLayout) -> Result<InvariantAlgebras> {
    from_report(&verify_wall(u, layout)?)
}

/// Invariant algebras from a finished wall check.
pub fn from_report(rep: &WallReport) -> Result<InvariantAlgebras> {
    let (a_c, b_c) = match (rep.a_c(), rep.b_c()) {
        (Some(a), Some(b)) if rep.is_wall() => (a.clone(), b.clone()),
        _ => {
            return Err(WallError::WallViolated(format!(
                "left {} right {} (leak {:.2e} / {:.2e})",
                rep.left, rep.right, rep.left_side.leak, rep.right_side.leak
            )))
        }
    };
    let layout = rep.layout.clone();
    let mut lg = outer_generators(&layout, layout.left_sites())?;
    lg.extend(a_c.basis().iter().map(|a| lift_center(&layout, a)));
    let mut rg = outer_generators(&layout, layout.right_sites())?;
    rg.extend(b_c.basis().iter().map(|b| lift_center(&layout, b)));
    let inv = InvariantAlgebras {
        lbar: lift_left(&layout, &a_c).with_generators(lg),
        rbar: lift_right(&layout, &b_c).with_generators(rg),
        a_c,
        b_c,
        stabilization_time: rep.stabilization_time,
        layout,
    };
    let c = inv.central_commutator();
    if c > 1e-9 {
        return Err(WallError::WallViolated(format!("A_C and B_C fail to commute ({c:.2e})")));
    }
    Ok(inv)
}

/// `Comm_C(A_C) ∩ Comm_C(B_C)` computed on `C` alone.
pub fn conserved_algebra_local(inv: &InvariantAlgebras) -> Result<MatrixAlgebra> {
    let space = inv.a_c.commutant().space().intersect(inv.b_c.commutant().space())?;
    Ok(MatrixAlgebra::from_closed_space(space))
}

/// `Comm(Lbar) ∩ Comm(Rbar)` on the full space, compressed to `C` after
/// checking each element has the form `𝟙_L ⊗ c ⊗ 𝟙_R`.
pub fn conserved_algebra_full(inv: &InvariantAlgebras) -> Result<MatrixAlgebra> {
    let layout = &inv.layout;
    let full = inv.lbar.commutant().space().intersect(inv.rbar.commutant().space())?;
    let mut compressed = Vec::with_capacity(full.dim());
    for x in full.basis() {
        let (cr, leak_l) = split_leading_identity(x, layout.dim_left());
        let (c, leak_r) = split_trailing_identity(&cr, layout.dim_right());
        if leak_l.max(leak_r) > ROUTE_TOL {
            return Err(WallError::Numerical(format!(
                "conserved element supported outside C (residual {:.2e})",
                leak_l.max(leak_r)
            )));
        }
        compressed.push(c);
    }
    let space = OperatorSpace::span(layout.center_dims().to_vec(), &compressed, DEFAULT_RANK_TOL)?;
    Ok(MatrixAlgebra::from_closed_space(space))
}

/// Algebra of C-local conserved charges. Small systems are computed on the
/// full space and cross-checked against the C-local route.
pub fn conserved_algebra(inv: &InvariantAlgebras) -> Result<MatrixAlgebra> {
    let local = conserved_algebra_local(inv)?;
    if inv.layout.dim() > FULL_ROUTE_MAX_DIM {
        return Ok(local);
    }
    let full = conserved_algebra_full(inv)?;
    if !full.equals(&local, ROUTE_TOL) {
        return Err(WallError::Numerical(format!(
            "conserved algebra routes disagree: dim {} on the full space, {} on C",
            full.dim(),
            local.dim()
        )));
    }
    Ok(full)
}

/// C-local operators commuting with `U`, with the block-wise cross-check.
#[derive(Debug, Clone)]
pub struct CommutingOps {
    pub algebra: MatrixAlgebra,
    /// `⊕ᵢ Comm(𝓣_{Dᵢ}) ⊗ Comm(𝓡_{Eᵢ})`; absent when the wall permutes blocks.
    pub schmidt_route: Option<MatrixAlgebra>,
    /// Mutual containment residual between the two routes.
    pub residual: Option<f64>,
}

impl CommutingOps {
    pub fn agrees(&self, tol: f64) -> bool {
        self.residual.is_none_or(|r| r < tol)
    }
}

/// Nullspace of `c ↦ [𝟙 ⊗ c ⊗ 𝟙, U]` over `𝓜_C`.
pub fn commuting_ops_direct(u: &CMatrix, layout: &SystemLayout) -> Result<MatrixAlgebra> {
    let dc = layout.dim_center();
    let d = layout.dim();
    let mut m = CMatrix::zeros(d * d, dc * dc);
    for a in 0..dc {
        for b in 0..dc {
            let x = lift_center(layout, &matrix_unit(dc, a, b));
            let c = commutator(&x, u);
            for (k, z) in c.iter().enumerate() {
                m[(k, a * dc + b)] = *z;
            }
        }
    }
    let null = nullspace_with_scale(&m, DEFAULT_RANK_TOL, 1.0);
    let basis = null
        .column_iter()
        .map(|col| CMatrix::from_fn(dc, dc, |a, b| col[a * dc + b]))
        .collect();
    Ok(MatrixAlgebra::from_closed_space(OperatorSpace::from_orthonormal(
        layout.center_dims().to_vec(),
        basis,
    )))
}

/// Commutants of the algebras generated by the Schmidt vectors of each block
/// unitary, assembled in the decomposition frame of the wall.
pub fn commuting_ops_schmidt(wall: &WallUnitary) -> Result<Option<MatrixAlgebra>> {
    if wall.has_permutation() {
        return Ok(None);
    }
    let layout = &wall.layout;
    let d_l = layout.dim_left();
    let bs = &wall.blocks;
    let dc = bs.hilbert_dim();
    let mut basis = Vec::new();
    for ((b, off), (t, r)) in bs
        .blocks()
        .iter()
        .zip(bs.offsets())
        .zip(wall.t_blocks.iter().zip(&wall.r_blocks))
    {
        let (_, _, on_d) = operator_schmidt(t, d_l, DEFAULT_RANK_TOL);
        let (_, on_e, _) = operator_schmidt(r, b.dim_e, DEFAULT_RANK_TOL);
        let comm_t = close_algebra(vec![b.dim_d], &on_d, DEFAULT_RANK_TOL)?.commutant();
        let comm_r = close_algebra(vec![b.dim_e], &on_e, DEFAULT_RANK_TOL)?.commutant();
        for x in comm_t.basis() {
            for y in comm_r.basis() {
                let mut frame = CMatrix::zeros(dc, dc);
                frame.view_mut((off, off), (b.size(), b.size())).copy_from(&kron(x, y));
                basis.push(bs.from_frame(&frame));
            }
        }
    }
    let space = OperatorSpace::span(layout.center_dims().to_vec(), &basis, DEFAULT_RANK_TOL)?;
    Ok(Some(MatrixAlgebra::from_closed_space(space)))
}

/// C-local operators commuting with a wall `U`, computed directly and
/// cross-checked through the Schmidt vectors of its block unitaries.
pub fn commuting_ops(u: &CMatrix, layout: &SystemLayout, rng: &mut SeededRng) -> Result<CommutingOps> {
    let algebra = commuting_ops_direct(u, layout)?;
    let inv = invariant_algebras(u, layout)?;
    let wall = WallUnitary::from_unitary(u.clone(), layout.clone(), inv.a_c, rng)?;
    let schmidt_route = commuting_ops_schmidt(&wall)?;
    let residual = schmidt_route
        .as_ref()
        .map(|s| s.space().containment_residual(algebra.space()).max(algebra.space().containment_residual(s.space())));
    Ok(CommutingOps {
        algebra,
        schmidt_route,
        residual,
    })
}

/// Dimensions of the invariant sectors of operator space.
#[derive(Debug, Clone, Serialize)]
pub struct FragmentDecomposition {
    /// `Lbar ⊖ 𝓘`
    pub dim_left: usize,
    /// `Rbar ⊖ 𝓘`
    pub dim_right: usize,
    /// products `𝓛·𝓡` not already in either sector
    pub dim_product: usize,
    /// `𝓘 = Lbar ∩ Rbar`
    pub dim_intersection: usize,
    /// `𝓕⊥`, the rest of `𝓜_LCR`
    pub dim_remainder: usize,
    /// Basis of `A_C ∩ B_C` on `C`.
    #[serde(skip)]
    pub intersection: Vec<CMatrix>,
}

impl FragmentDecomposition {
    /// Dimension of the fragmented part `𝓕 = 𝓛 ⊕ 𝓡 ⊕ 𝓛×𝓡 ⊕ 𝓘`.
    pub fn dim_fragmented(&self) -> usize {
        self.dim_left + self.dim_right + self.dim_product + self.dim_intersection
    }
}

pub fn fragment_decomposition(inv: &InvariantAlgebras) -> Result<FragmentDecomposition> {
    let layout = &inv.layout;
    let (dl2, dr2) = (layout.dim_left().pow(2), layout.dim_right().pow(2));
    let d2 = layout.dim().pow(2);
    let inter = inv.a_c.space().intersect(inv.b_c.space())?;
    let mut products = Vec::with_capacity(inv.a_c.dim() * inv.b_c.dim());
    for a in inv.a_c.basis() {
        for b in inv.b_c.basis() {
            products.push(matmul(a, b));
        }
    }
    let dim_ab = orthonormal_basis(&products, DEFAULT_RANK_TOL).len();
    let dim_i = inter.dim();
    let dim_l = dl2 * inv.a_c.dim() - dim_i;
    let dim_r = dr2 * inv.b_c.dim() - dim_i;
    let dim_f = dl2 * dr2 * dim_ab;
    Ok(FragmentDecomposition {
        dim_left: dim_l,
        dim_right: dim_r,
        dim_product: dim_f - dim_l - dim_r - dim_i,
        dim_intersection: dim_i,
        dim_remainder: d2 - dim_f,
        intersection: inter.into_basis(),
    })
}
