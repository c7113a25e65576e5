//! Block (Wedderburn) decomposition of finite-dimensional *-algebras.
//!
//! An algebra `A` on `ℂ^d` is unitarily equivalent to `⊕ᵢ 𝓜_{Dᵢ} ⊗ 𝟙_{Eᵢ}`.
//! `BlockStructure::v` has as columns the product basis `|k⟩_D ⊗ |j⟩_E` of each
//! block in turn, so `V† a V` is block diagonal with blocks of the form `m ⊗ 𝟙`.

use serde::Serialize;

use crate::algebra::{MatrixAlgebra, OperatorSpace};
use crate::algebra::closure::CLUSTER_TOL;
use crate::error::{Result, WallError};
use crate::kernel::linalg::{
    c64, cluster_sorted, frob, hermitian_eigen, identity, kron, matmul, orthonormal_basis,
    unitarity_residual, CMatrix, DEFAULT_RANK_TOL,
};
use crate::kernel::pauli::matrix_unit;
use crate::kernel::random::SeededRng;

const MAX_ATTEMPTS: usize = 5;
const VERIFY_TOL: f64 = 1e-8;

/// Dimensions of one irreducible block: `𝓜_{dim_d} ⊗ 𝟙_{dim_e}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Block {
    pub dim_d: usize,
    pub dim_e: usize,
}

impl Block {
    pub fn new(dim_d: usize, dim_e: usize) -> Self {
        Self { dim_d, dim_e }
    }

    pub fn size(&self) -> usize {
        self.dim_d * self.dim_e
    }

    pub fn mirrored(&self) -> Self {
        Self::new(self.dim_e, self.dim_d)
    }
}

#[derive(Debug, Clone)]
pub struct BlockStructure {
    dims: Vec<usize>,
    blocks: Vec<Block>,
    v: CMatrix,
    projectors: Vec<CMatrix>,
}

impl BlockStructure {
    /// Assembles a structure from parts; `v` must be unitary with block columns
    /// ordered as described in the module docs.
    pub fn from_parts(dims: Vec<usize>, blocks: Vec<Block>, v: CMatrix) -> Result<Self> {
        let d: usize = dims.iter().product();
        let total: usize = blocks.iter().map(Block::size).sum();
        if total != d || v.shape() != (d, d) {
            return Err(WallError::Dimension(format!(
                "blocks cover {total} of {d} dimensions (V is {:?})",
                v.shape()
            )));
        }
        let r = unitarity_residual(&v);
        if r > 1e-9 {
            return Err(WallError::NotUnitary { residual: r });
        }
        let mut projectors = Vec::with_capacity(blocks.len());
        let mut off = 0;
        for b in &blocks {
            let cols = v.columns(off, b.size()).into_owned();
            projectors.push(matmul(&cols, &cols.adjoint()));
            off += b.size();
        }
        Ok(Self { dims, blocks, v, projectors })
    }

    /// Computational-basis structure: `V = 𝟙`, blocks given in order.
    pub fn standard(dims: Vec<usize>, blocks: Vec<Block>) -> Result<Self> {
        let d: usize = dims.iter().product();
        Self::from_parts(dims, blocks, identity(d))
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn hilbert_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn v(&self) -> &CMatrix {
        &self.v
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// Column offset of each block inside `V`.
    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.size();
                Some(o)
            })
            .collect()
    }

    /// Dimension of the decomposed algebra, `Σ dim_D²`.
    pub fn algebra_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim_d * b.dim_d).sum()
    }

    /// Sorted multiset of block dimensions; invariant under unitary isomorphism.
    pub fn signature(&self) -> Vec<(usize, usize)> {
        let mut s: Vec<(usize, usize)> = self.blocks.iter().map(|b| (b.dim_d, b.dim_e)).collect();
        s.sort_unstable();
        s
    }

    /// The algebra `V (⊕ 𝓜_{Dᵢ} ⊗ 𝟙_{Eᵢ}) V†`.
    pub fn reconstruct(&self) -> MatrixAlgebra {
        let d = self.hilbert_dim();
        let mut basis = Vec::with_capacity(self.algebra_dim());
        for (b, off) in self.blocks.iter().zip(self.offsets()) {
            let scale = 1.0 / (b.dim_e as f64).sqrt();
            for k in 0..b.dim_d {
                for l in 0..b.dim_d {
                    let local = kron(&matrix_unit(b.dim_d, k, l), &identity(b.dim_e));
                    let mut frame = CMatrix::zeros(d, d);
                    frame.view_mut((off, off), (b.size(), b.size())).copy_from(&local);
                    let x = matmul(&matmul(&self.v, &frame), &self.v.adjoint());
                    basis.push(x.scale(scale));
                }
            }
        }
        MatrixAlgebra::from_closed_space(OperatorSpace::from_orthonormal(self.dims.clone(), basis))
    }

    /// Largest deviation of `V† a V` from `⊕ mᵢ ⊗ 𝟙_{Eᵢ}` over the algebra basis,
    /// relative to each element's norm.
    pub fn block_residual(&self, alg: &MatrixAlgebra) -> f64 {
        alg.basis()
            .iter()
            .map(|a| {
                let n = frob(a);
                if n == 0.0 {
                    0.0
                } else {
                    block_form_residual(&self.to_frame(a), &self.blocks) / n
                }
            })
            .fold(0.0, f64::max)
    }

    /// `V† x V`.
    pub fn to_frame(&self, x: &CMatrix) -> CMatrix {
        matmul(&matmul(&self.v.adjoint(), x), &self.v)
    }

    /// `V x V†`.
    pub fn from_frame(&self, x: &CMatrix) -> CMatrix {
        matmul(&matmul(&self.v, x), &self.v.adjoint())
    }
}

/// Distance of a frame-basis matrix from block-diagonal `⊕ mᵢ ⊗ 𝟙_{Eᵢ}` form.
fn block_form_residual(x: &CMatrix, blocks: &[Block]) -> f64 {
    let d = x.nrows();
    let mut target = CMatrix::zeros(d, d);
    let mut off = 0;
    for b in blocks {
        let sub = x.view((off, off), (b.size(), b.size()));
        // m = tr_E(sub) / dim_e
        let m = CMatrix::from_fn(b.dim_d, b.dim_d, |k, l| {
            (0..b.dim_e)
                .map(|j| sub[(k * b.dim_e + j, l * b.dim_e + j)])
                .sum::<num_complex::Complex64>()
                / c64(b.dim_e as f64, 0.0)
        });
        target
            .view_mut((off, off), (b.size(), b.size()))
            .copy_from(&kron(&m, &identity(b.dim_e)));
        off += b.size();
    }
    frob(&(x - target))
}

/// Decomposes `alg` into irreducible blocks.
///
/// Central projectors come from the spectrum of a random Hermitian central
/// element; within each block a random Hermitian element of the compressed
/// algebra has `dim_D` eigenvalues of multiplicity `dim_E`. One eigenspace
/// seeds the `E` factor and is transported to the others by compressed algebra
/// elements, giving the product basis.
pub fn decompose(alg: &MatrixAlgebra, rng: &mut SeededRng) -> Result<BlockStructure> {
    let d = alg.hilbert_dim();
    let center = alg.center()?;
    let zdim = center.dim();
    if zdim == 0 {
        return Err(WallError::Decomposition("algebra has an empty center; not unital".into()));
    }

    let ranges = central_ranges(&center, rng)?;

    let mut parts: Vec<(Block, CMatrix, usize)> = Vec::with_capacity(ranges.len());
    for w in ranges {
        let (block, cols) = decompose_factor(alg, &w, rng)?;
        let first = first_significant_index(&w);
        parts.push((block, cols, first));
    }
    parts.sort_by_key(|p| p.2);

    let mut v = CMatrix::zeros(d, d);
    let mut blocks = Vec::with_capacity(parts.len());
    let mut off = 0;
    for (block, cols, _) in parts {
        v.columns_mut(off, block.size()).copy_from(&cols);
        off += block.size();
        blocks.push(block);
    }
    let bs = BlockStructure::from_parts(alg.site_dims().to_vec(), blocks, v)?;
    let residual = bs.block_residual(alg);
    if residual > VERIFY_TOL {
        return Err(WallError::Decomposition(format!(
            "decomposition inconsistent: block-form residual {residual:.2e}"
        )));
    }
    Ok(bs)
}

/// Orthonormal bases (as column blocks) of the minimal central projectors.
fn central_ranges(center: &MatrixAlgebra, rng: &mut SeededRng) -> Result<Vec<CMatrix>> {
    let d = center.hilbert_dim();
    if center.dim() == 1 {
        return Ok(vec![identity(d)]);
    }
    for _ in 0..MAX_ATTEMPTS {
        let h = center.random_hermitian_element(rng);
        let (vals, w) = hermitian_eigen(&h);
        let clusters = cluster_sorted(&vals, CLUSTER_TOL);
        if clusters.len() == center.dim() {
            return Ok(clusters
                .into_iter()
                .map(|c| w.columns(c.start, c.len()).into_owned())
                .collect());
        }
    }
    Err(WallError::Decomposition(format!(
        "random central element failed to separate {} blocks after {MAX_ATTEMPTS} attempts",
        center.dim()
    )))
}

/// Splits the block living on the range of `w` (columns orthonormal) as
/// `𝓜_D ⊗ 𝟙_E`, returning the product-basis columns in the ambient space.
fn decompose_factor(alg: &MatrixAlgebra, w: &CMatrix, rng: &mut SeededRng) -> Result<(Block, CMatrix)> {
    let r = w.ncols();
    let compressed: Vec<CMatrix> = alg
        .basis()
        .iter()
        .map(|a| matmul(&matmul(&w.adjoint(), a), w))
        .collect();
    let comp_basis = orthonormal_basis(&compressed, DEFAULT_RANK_TOL);
    let m = comp_basis.len();
    let dim_d = (m as f64).sqrt().round() as usize;
    if dim_d == 0 || dim_d * dim_d != m || r % dim_d != 0 {
        return Err(WallError::Decomposition(format!(
            "compressed block of rank {r} has algebra dimension {m}, not a full matrix factor"
        )));
    }
    let dim_e = r / dim_d;
    let block = Block::new(dim_d, dim_e);
    if dim_d == 1 {
        return Ok((block, w.clone()));
    }

    let random_element = |rng: &mut SeededRng| {
        let mut x = CMatrix::zeros(r, r);
        for b in &comp_basis {
            x += b * c64(rng.normal(), rng.normal());
        }
        x
    };

    for _ in 0..MAX_ATTEMPTS {
        let x = random_element(rng);
        let h = (&x + x.adjoint()).scale(0.5);
        let (vals, eig) = hermitian_eigen(&h);
        let clusters = cluster_sorted(&vals, CLUSTER_TOL);
        if clusters.len() != dim_d || clusters.iter().any(|c| c.len() != dim_e) {
            continue;
        }
        let spaces: Vec<CMatrix> = clusters
            .iter()
            .map(|c| eig.columns(c.start, c.len()).into_owned())
            .collect();
        let seed = &spaces[0];
        let transport = random_element(rng);
        let mut local = CMatrix::zeros(r, r);
        let mut ok = true;
        for (k, q) in spaces.iter().enumerate() {
            let y = if k == 0 {
                seed.clone()
            } else {
                // Q_k x Q_0 restricted to the seed space, rescaled to an isometry
                let y = matmul(&matmul(&matmul(q, &q.adjoint()), &transport), seed);
                let s = (frob(&y).powi(2) / dim_e as f64).sqrt();
                if s < 1e-8 {
                    ok = false;
                    break;
                }
                y.unscale(s)
            };
            for j in 0..dim_e {
                local.set_column(k * dim_e + j, &y.column(j));
            }
        }
        if !ok || unitarity_residual(&local) > 1e-8 {
            continue;
        }
        return Ok((block, matmul(w, &local)));
    }
    Err(WallError::Decomposition(format!(
        "random element failed to resolve a ({dim_d}, {dim_e}) block after {MAX_ATTEMPTS} attempts"
    )))
}

/// Smallest computational index on which the column space has weight.
fn first_significant_index(w: &CMatrix) -> usize {
    (0..w.nrows())
        .find(|&a| w.row(a).iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-8)
        .unwrap_or(w.nrows())
}
