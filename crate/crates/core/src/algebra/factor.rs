//! Recovering `A` from a space of the form `𝓜_outer ⊗ A` (or `A ⊗ 𝓜_outer`).

use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{identity, kron, DEFAULT_RANK_TOL};
use crate::kernel::pauli::matrix_unit;
use crate::kernel::tensor::{head_block, tail_block};

use super::closure::{close_algebra, MatrixAlgebra};
use super::space::OperatorSpace;

/// Which tensor factor carries the full matrix algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorSide {
    /// `𝓜_outer ⊗ A`: the outer factor is most significant (L in L⊗C).
    Head,
    /// `A ⊗ 𝓜_outer`: the outer factor is least significant (R in C⊗R).
    Tail,
}

/// Given `space = 𝓜_outer ⊗ A` on the side indicated, returns `A` acting on
/// `inner_dims`. Fails with `NotProductForm` when `space` does not contain
/// `𝓜_outer ⊗ 𝟙` or when `dim space ≠ d_outer² · dim A`.
pub fn extract_factor(
    space: &OperatorSpace,
    d_outer: usize,
    inner_dims: &[usize],
    side: FactorSide,
    tol: f64,
) -> Result<MatrixAlgebra> {
    let d_inner: usize = inner_dims.iter().product();
    if space.hilbert_dim() != d_outer * d_inner {
        return Err(WallError::Dimension(format!(
            "space over dimension {} cannot split as {d_outer} x {d_inner}",
            space.hilbert_dim()
        )));
    }
    let one = identity(d_inner);
    for i in 0..d_outer {
        for j in 0..d_outer {
            let unit = matrix_unit(d_outer, i, j);
            let lifted = match side {
                FactorSide::Head => kron(&unit, &one),
                FactorSide::Tail => kron(&one, &unit),
            };
            let r = space.residual(&lifted);
            if r >= tol {
                return Err(WallError::NotProductForm(format!(
                    "outer matrix unit ({i},{j}) missing from the space (residual {r:.2e})"
                )));
            }
        }
    }
    let mut blocks = Vec::with_capacity(space.dim() * d_outer * d_outer);
    for x in space.basis() {
        for i in 0..d_outer {
            for j in 0..d_outer {
                blocks.push(match side {
                    FactorSide::Head => head_block(x, d_outer, i, j),
                    FactorSide::Tail => tail_block(x, d_outer, i, j),
                });
            }
        }
    }
    let alg = close_algebra(inner_dims.to_vec(), &blocks, DEFAULT_RANK_TOL)?;
    let alg = MatrixAlgebra::from_closed_space(alg.into_space());
    if alg.dim() * d_outer * d_outer != space.dim() {
        return Err(WallError::NotProductForm(format!(
            "dim space = {} but d_outer² · dim A = {} · {}",
            space.dim(),
            d_outer * d_outer,
            alg.dim()
        )));
    }
    Ok(alg)
}

/// `A_C` from a space on `L ∪ C` of the form `𝓜_L ⊗ A_C`.
pub fn extract_central_factor(space: &OperatorSpace, layout: &SystemLayout) -> Result<MatrixAlgebra> {
    extract_factor(space, layout.dim_left(), layout.center_dims(), FactorSide::Head, 1e-9)
}
