//! Linear subspaces of operators with a Hilbert–Schmidt orthonormal basis.

use crate::kernel::linalg::{
    c64, frob, hs_inner, orthonormal_basis, svd, unvec_rm, vec_rm, CMatrix, DEFAULT_RANK_TOL,
};
use crate::error::{Result, WallError};

/// Absolute cutoff on principal-angle sines when intersecting subspaces.
pub const INTERSECT_TOL: f64 = 1e-7;

/// Span of a set of square operators, stored as an HS-orthonormal basis.
#[derive(Debug, Clone)]
pub struct OperatorSpace {
    dims: Vec<usize>,
    basis: Vec<CMatrix>,
}

impl OperatorSpace {
    /// Orthonormalizes `mats` with relative rank tolerance `tol`.
    pub fn span(dims: Vec<usize>, mats: &[CMatrix], tol: f64) -> Result<Self> {
        let d: usize = dims.iter().product();
        if let Some(bad) = mats.iter().find(|m| m.shape() != (d, d)) {
            return Err(WallError::Dimension(format!(
                "operator of shape {:?} in a space over dimension {d}",
                bad.shape()
            )));
        }
        Ok(Self {
            basis: orthonormal_basis(mats, tol),
            dims,
        })
    }

    /// Wraps a basis already known to be orthonormal.
    pub fn from_orthonormal(dims: Vec<usize>, basis: Vec<CMatrix>) -> Self {
        Self { dims, basis }
    }

    pub fn zero(dims: Vec<usize>) -> Self {
        Self { dims, basis: Vec::new() }
    }

    /// The full operator space spanned by matrix units.
    pub fn full(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let basis = (0..d * d)
            .map(|k| {
                let mut e = CMatrix::zeros(d, d);
                e[(k / d, k % d)] = c64(1.0, 0.0);
                e
            })
            .collect();
        Self { dims, basis }
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.dims
    }

    /// Hilbert-space dimension the operators act on.
    pub fn hilbert_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<CMatrix> {
        self.basis
    }

    /// Orthogonal projection of `o` onto the span.
    pub fn project(&self, o: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(o.nrows(), o.ncols());
        for b in &self.basis {
            out += b * hs_inner(b, o);
        }
        out
    }

    /// `‖O − P(O)‖ / ‖O‖`, zero for the zero operator.
    pub fn residual(&self, o: &CMatrix) -> f64 {
        let n = frob(o);
        if n == 0.0 {
            return 0.0;
        }
        let mut coeff_sq = 0.0;
        for b in &self.basis {
            coeff_sq += hs_inner(b, o).norm_sqr();
        }
        // Pythagoras is cheaper than forming the projection, but loses accuracy
        // close to zero; fall back to the explicit difference there.
        let rel = (1.0 - coeff_sq / (n * n)).max(0.0);
        if rel > 1e-6 {
            rel.sqrt()
        } else {
            frob(&(o - self.project(o))) / n
        }
    }

    pub fn contains(&self, o: &CMatrix, tol: f64) -> bool {
        self.residual(o) < tol
    }

    /// Largest residual of `other`'s basis against this space.
    pub fn containment_residual(&self, other: &OperatorSpace) -> f64 {
        other
            .basis
            .iter()
            .map(|b| self.residual(b))
            .fold(0.0, f64::max)
    }

    pub fn contains_space(&self, other: &OperatorSpace, tol: f64) -> bool {
        self.containment_residual(other) < tol
    }

    /// Mutual containment.
    pub fn equals(&self, other: &OperatorSpace, tol: f64) -> bool {
        self.dims == other.dims
            && self.dim() == other.dim()
            && self.contains_space(other, tol)
            && other.contains_space(self, tol)
    }

    /// Frobenius distance between the orthogonal projectors (as superoperators)
    /// onto the two spans.
    ///
    /// Uses `‖P − Q‖² = Σₐ ‖a − Qa‖² + Σ_b ‖b − Pb‖²` over the orthonormal
    /// bases, which keeps full precision when the spans nearly coincide.
    pub fn projector_distance(&self, other: &OperatorSpace) -> f64 {
        let miss = |from: &OperatorSpace, onto: &OperatorSpace| -> f64 {
            from.basis.iter().map(|a| frob(&(a - onto.project(a))).powi(2)).sum()
        };
        (miss(self, other) + miss(other, self)).sqrt()
    }

    /// Basis vectors as columns, row-major vectorized.
    pub fn column_matrix(&self) -> CMatrix {
        let d = self.hilbert_dim();
        let mut q = CMatrix::zeros(d * d, self.dim());
        for (k, b) in self.basis.iter().enumerate() {
            q.set_column(k, &vec_rm(b));
        }
        q
    }

    /// `a ∩ b`: vectors `Q_a y` annihilated by `(𝟙 − P_b)`.
    pub fn intersect(&self, other: &OperatorSpace) -> Result<OperatorSpace> {
        self.intersect_with_tol(other, INTERSECT_TOL)
    }

    pub fn intersect_with_tol(&self, other: &OperatorSpace, tol: f64) -> Result<OperatorSpace> {
        if self.dims != other.dims {
            return Err(WallError::Dimension(format!(
                "intersecting spaces over {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Self::zero(self.dims.clone()));
        }
        let qa = self.column_matrix();
        let qb = other.column_matrix();
        let residual = &qa - &qb * (qb.adjoint() * &qa);
        // Singular values of the residual are the sines of the principal angles,
        // so an absolute cutoff is meaningful here.
        let dec = svd(&residual);
        let d = self.hilbert_dim();
        let mut basis = Vec::new();
        for (k, &s) in dec.s.iter().enumerate() {
            if s <= tol {
                let v = &qa * dec.v.column(k);
                basis.push(unvec_rm(v.as_slice(), d, d));
            }
        }
        OperatorSpace::span(self.dims.clone(), &basis, DEFAULT_RANK_TOL)
    }

    /// Span of the union.
    pub fn sum(&self, other: &OperatorSpace) -> Result<OperatorSpace> {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        OperatorSpace::span(self.dims.clone(), &all, DEFAULT_RANK_TOL)
    }

    /// Maximum deviation of the Gram matrix from the identity.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(a, b) - c64(expect, 0.0)).norm());
            }
        }
        worst
    }
}
