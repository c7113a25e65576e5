//! Gauged wall sequences `Ũ_τ = G_τ⁻¹ U G_{τ−1}`.
//!
//! The invariant algebra is no longer static: `Ad_{Ũ_τ}` carries `𝓛_{τ−1}` to
//! `𝓛_τ = G_τ⁻¹ Lbar G_τ`. Each `𝓛_τ` is tracked by evolving a basis and a
//! generating set, and decomposed on its own to read off its signature.

use crate::algebra::{MatrixAlgebra, OperatorSpace};
use crate::blocks::decompose;
use crate::error::{Result, WallError};
use crate::kernel::linalg::{conjugate_by, identity, kron_all, matmul, unitarity_residual, CMatrix};
use crate::kernel::random::{haar_unitary, SeededRng};
use crate::synth::{normaliser_sample, span_preservation_residual, WallUnitary};

use super::verify::{lift_center, lift_left, site_generators};

/// Preservation tolerance for the initial gauge.
pub const GAUGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct GaugedSequence {
    /// `𝓛_0, 𝓛_1, …, 𝓛_τmax`
    pub algebras: Vec<MatrixAlgebra>,
    pub signatures: Vec<Vec<(usize, usize)>>,
    /// `Ũ_1, …, Ũ_τmax`
    pub unitaries: Vec<CMatrix>,
}

impl GaugedSequence {
    pub fn signatures_constant(&self) -> bool {
        self.signatures.windows(2).all(|w| w[0] == w[1])
    }

    /// `Ũ_to ⋯ Ũ_{from+1}`, which carries `𝓛_from` to `𝓛_to`.
    pub fn composite(&self, from: usize, to: usize) -> CMatrix {
        let d = self.algebras[0].hilbert_dim();
        (from..to).fold(identity(d), |acc, k| matmul(&self.unitaries[k], &acc))
    }
}

/// `Lbar = 𝓜_L ⊗ A_C ⊗ 𝟙_R` of a wall, with a small generating set.
pub fn left_invariant(wall: &WallUnitary) -> MatrixAlgebra {
    let layout = &wall.layout;
    let dl = layout.dim_left();
    let rest = identity(layout.dim_center() * layout.dim_right());
    let mut gens: Vec<CMatrix> = site_generators(dl).iter().map(|g| kron_all([g, &rest])).collect();
    gens.extend(wall.a_c.basis().iter().map(|a| lift_center(layout, a)));
    lift_left(layout, &wall.a_c).with_generators(gens)
}

/// Gauges `G_0, …, G_n`: `G_0 = h_L ⊗ g_C ⊗ h_R` with `g_C` in the
/// normaliser of `A_C` (so it preserves `Lbar`), the rest Haar on the whole system.
pub fn haar_gauges(wall: &WallUnitary, n: usize, rng: &mut SeededRng) -> Result<Vec<CMatrix>> {
    let layout = &wall.layout;
    let g0 = kron_all([
        &haar_unitary(layout.dim_left(), rng),
        &normaliser_sample(&wall.a_c, rng)?,
        &haar_unitary(layout.dim_right(), rng),
    ]);
    let mut out = vec![g0];
    out.extend((0..n).map(|_| haar_unitary(layout.dim(), rng)));
    Ok(out)
}

fn conjugated(alg: &MatrixAlgebra, u: &CMatrix) -> MatrixAlgebra {
    let basis = alg.basis().iter().map(|b| conjugate_by(u, b)).collect();
    let out = MatrixAlgebra::from_closed_space(OperatorSpace::from_orthonormal(alg.site_dims().to_vec(), basis));
    match alg.generators() {
        Some(g) => out.with_generators(g.iter().map(|x| conjugate_by(u, x)).collect()),
        None => out,
    }
}

/// Evolves `Lbar` of `base` through the gauged sequence defined by `gauges`
/// (`G_0, …, G_τmax`) and reports the isomorphism signature at every step.
pub fn gauged_sequence(base: &WallUnitary, gauges: &[CMatrix], rng: &mut SeededRng) -> Result<GaugedSequence> {
    let d = base.layout.dim();
    for g in gauges {
        if g.shape() != (d, d) {
            return Err(WallError::Dimension(format!("gauge of shape {:?} for dimension {d}", g.shape())));
        }
        let r = unitarity_residual(g);
        if r > 1e-10 {
            return Err(WallError::NotUnitary { residual: r });
        }
    }
    let lbar = left_invariant(base);
    if let Some(g0) = gauges.first() {
        let r = span_preservation_residual(g0, lbar.space());
        if r >= GAUGE_TOL {
            return Err(WallError::GaugeRejected { residual: r });
        }
    }
    let mut algebras = vec![lbar];
    let mut signatures = vec![decompose(&algebras[0], rng)?.signature()];
    let mut unitaries = Vec::with_capacity(gauges.len().saturating_sub(1));
    for w in gauges.windows(2) {
        let ut = matmul(&matmul(&w[1].adjoint(), &base.u), &w[0]);
        let next = conjugated(algebras.last().expect("non-empty"), &ut);
        signatures.push(decompose(&next, rng)?.signature());
        algebras.push(next);
        unitaries.push(ut);
    }
    Ok(GaugedSequence {
        algebras,
        signatures,
        unitaries,
    })
}
