//! Wall unitaries assembled from a block structure of the central algebra.
//!
//! In the frame `𝟙_L ⊗ V ⊗ 𝟙_R` a wall is `⊕ᵢ Tⁱ_{L Dᵢ} ⊗ Rⁱ_{Eᵢ R}`, possibly
//! followed by a permutation of equivalent blocks.

use crate::algebra::{close_algebra, MatrixAlgebra};
use crate::blocks::{decompose, Block, BlockStructure};
use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{
    frob, identity, kron, matmul, svd, unitarity_residual, CMatrix, DEFAULT_RANK_TOL, ZERO,
};
use crate::kernel::pauli::parse_pauli;
use crate::kernel::random::{haar_unitary, SeededRng};

/// The algebra `A_C` a wall is built around.
#[derive(Debug, Clone)]
pub enum CentralAlgebra {
    /// Diagonal matrices on C.
    Diag,
    /// All of `𝓜_C`.
    Full,
    /// Algebra generated by Pauli strings over the central qubits.
    Pauli(Vec<String>),
    /// Algebra generated by explicit matrices on C.
    Matrices(Vec<CMatrix>),
}

impl CentralAlgebra {
    pub fn build(&self, center_dims: &[usize]) -> Result<MatrixAlgebra> {
        let dims = center_dims.to_vec();
        let d: usize = dims.iter().product();
        match self {
            CentralAlgebra::Diag => Ok(MatrixAlgebra::diagonal(dims)),
            CentralAlgebra::Full => Ok(MatrixAlgebra::full(dims)),
            CentralAlgebra::Pauli(strings) => {
                if dims.iter().any(|&q| q != 2) {
                    return Err(WallError::Dimension(
                        "Pauli generators need a center made of qubits".into(),
                    ));
                }
                let gens = strings
                    .iter()
                    .map(|s| {
                        let g = parse_pauli(s)?;
                        if g.nrows() != d {
                            return Err(WallError::Dimension(format!(
                                "Pauli string \"{s}\" has {} sites, center has {}",
                                s.trim().len(),
                                dims.len()
                            )));
                        }
                        Ok(g)
                    })
                    .collect::<Result<Vec<_>>>()?;
                close_algebra(dims, &gens, DEFAULT_RANK_TOL)
            }
            CentralAlgebra::Matrices(gens) => close_algebra(dims, gens, DEFAULT_RANK_TOL),
        }
    }
}

#[derive(Debug, Clone)]
pub enum BlockMode {
    /// `Tⁱ ~ Haar(d_L·dim Dᵢ)`, `Rⁱ ~ Haar(dim Eᵢ·d_R)`.
    Haar,
    /// Caller-supplied block unitaries.
    Given {
        t_blocks: Vec<CMatrix>,
        r_blocks: Vec<CMatrix>,
    },
}

#[derive(Debug, Clone)]
pub struct WallSpec {
    pub layout: SystemLayout,
    pub algebra: CentralAlgebra,
    pub block_mode: BlockMode,
    /// Source block `i` is sent to block `permutation[i]`.
    pub permutation: Option<Vec<usize>>,
    pub seed: u64,
}

impl WallSpec {
    pub fn haar(layout: SystemLayout, algebra: CentralAlgebra, seed: u64) -> Self {
        Self {
            layout,
            algebra,
            block_mode: BlockMode::Haar,
            permutation: None,
            seed,
        }
    }

    pub fn rng(&self) -> SeededRng {
        SeededRng::new(self.seed, 0)
    }
}

/// A wall together with the data it was built from.
#[derive(Debug, Clone)]
pub struct WallUnitary {
    pub u: CMatrix,
    pub layout: SystemLayout,
    pub a_c: MatrixAlgebra,
    pub blocks: BlockStructure,
    /// `Tⁱ` on `L ⊗ Dᵢ`, indexed by source block.
    pub t_blocks: Vec<CMatrix>,
    /// `Rⁱ` on `Eᵢ ⊗ R`, indexed by source block.
    pub r_blocks: Vec<CMatrix>,
    pub permutation: Vec<usize>,
}

impl WallUnitary {
    /// Wraps a unitary already known to be a wall around `a_c`; the block
    /// unitaries and permutation are read off in a decomposition frame.
    pub fn from_unitary(u: CMatrix, layout: SystemLayout, a_c: MatrixAlgebra, rng: &mut SeededRng) -> Result<Self> {
        let r = unitarity_residual(&u);
        if r > 1e-9 {
            return Err(WallError::NotUnitary { residual: r });
        }
        let blocks = decompose(&a_c, rng)?;
        let (t_blocks, r_blocks, permutation) = extract_wall_blocks(&u, &layout, &blocks)?;
        Ok(Self {
            u,
            layout,
            a_c,
            blocks,
            t_blocks,
            r_blocks,
            permutation,
        })
    }

    /// `A_C` is `⟨𝟙⟩` or all of `𝓜_C`: the wall is a bipartite product.
    pub fn is_trivial(&self) -> bool {
        let dc = self.layout.dim_center();
        self.a_c.dim() == 1 || self.a_c.dim() == dc * dc
    }

    pub fn has_permutation(&self) -> bool {
        self.permutation.iter().enumerate().any(|(i, &p)| i != p)
    }
}

pub fn identity_permutation(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Checks `perm` is a bijection mapping only between equal blocks.
pub fn validate_permutation(blocks: &[Block], perm: &[usize]) -> Result<()> {
    let n = blocks.len();
    if perm.len() != n {
        return Err(WallError::NotAutomorphism(format!(
            "permutation has {} entries for {n} blocks",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for (i, &p) in perm.iter().enumerate() {
        if p >= n || seen[p] {
            return Err(WallError::NotAutomorphism(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
        if blocks[i] != blocks[p] {
            return Err(WallError::NotAutomorphism(format!(
                "block {i} {:?} cannot be sent to block {p} {:?}",
                blocks[i], blocks[p]
            )));
        }
    }
    Ok(())
}

/// Frame-basis operator `Σᵢ (block π(i) ← block i) ∘ (Lᵢ ⊗ Rᵢ)` on
/// `ℂ^{d_l} ⊗ ℂ^{d_C} ⊗ ℂ^{d_r}`, with `Lᵢ` on `ℂ^{d_l} ⊗ Dᵢ` and `Rᵢ` on `Eᵢ ⊗ ℂ^{d_r}`.
pub fn block_sum(
    bs: &BlockStructure,
    d_l: usize,
    d_r: usize,
    perm: &[usize],
    lefts: &[CMatrix],
    rights: &[CMatrix],
) -> Result<CMatrix> {
    let blocks = bs.blocks();
    validate_permutation(blocks, perm)?;
    if lefts.len() != blocks.len() || rights.len() != blocks.len() {
        return Err(WallError::Dimension(format!(
            "{} left and {} right unitaries for {} blocks",
            lefts.len(),
            rights.len(),
            blocks.len()
        )));
    }
    let dc = bs.hilbert_dim();
    let d = d_l * dc * d_r;
    let offsets = bs.offsets();
    let mut f = CMatrix::zeros(d, d);
    for (i, b) in blocks.iter().enumerate() {
        let (dd, de) = (b.dim_d, b.dim_e);
        let t = &lefts[i];
        let r = &rights[i];
        if t.shape() != (d_l * dd, d_l * dd) || r.shape() != (de * d_r, de * d_r) {
            return Err(WallError::Dimension(format!(
                "block {i}: expected {}x{} and {}x{} unitaries",
                d_l * dd,
                d_l * dd,
                de * d_r,
                de * d_r
            )));
        }
        let (src, dst) = (offsets[i], offsets[perm[i]]);
        for l in 0..d_l {
            for k in 0..dd {
                for l2 in 0..d_l {
                    for k2 in 0..dd {
                        let tv = t[(l2 * dd + k2, l * dd + k)];
                        if tv == ZERO {
                            continue;
                        }
                        for e in 0..de {
                            for rr in 0..d_r {
                                let col = (l * dc + src + k * de + e) * d_r + rr;
                                for e2 in 0..de {
                                    for r2 in 0..d_r {
                                        let rv = r[(e2 * d_r + r2, e * d_r + rr)];
                                        if rv == ZERO {
                                            continue;
                                        }
                                        let row = (l2 * dc + dst + k2 * de + e2) * d_r + r2;
                                        f[(row, col)] += tv * rv;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(f)
}

/// `(𝟙 ⊗ V ⊗ 𝟙) F (𝟙 ⊗ V† ⊗ 𝟙)`.
pub fn lift_from_frame(bs: &BlockStructure, d_l: usize, d_r: usize, frame: &CMatrix) -> CMatrix {
    let big = kron(&kron(&identity(d_l), bs.v()), &identity(d_r));
    matmul(&matmul(&big, frame), &big.adjoint())
}

/// `(𝟙 ⊗ V† ⊗ 𝟙) U (𝟙 ⊗ V ⊗ 𝟙)`.
pub fn to_frame(bs: &BlockStructure, d_l: usize, d_r: usize, u: &CMatrix) -> CMatrix {
    let big = kron(&kron(&identity(d_l), bs.v()), &identity(d_r));
    matmul(&matmul(&big.adjoint(), u), &big)
}

fn haar_blocks(bs: &BlockStructure, d_l: usize, d_r: usize, rng: &mut SeededRng) -> (Vec<CMatrix>, Vec<CMatrix>) {
    let mut ts = Vec::with_capacity(bs.blocks().len());
    let mut rs = Vec::with_capacity(bs.blocks().len());
    for b in bs.blocks() {
        ts.push(haar_unitary(d_l * b.dim_d, rng));
        rs.push(haar_unitary(b.dim_e * d_r, rng));
    }
    (ts, rs)
}

/// Random (or given) wall around the spec's central algebra.
pub fn synth_wall(spec: &WallSpec, rng: &mut SeededRng) -> Result<WallUnitary> {
    let layout = &spec.layout;
    let (d_l, d_r) = (layout.dim_left(), layout.dim_right());
    let a_c = spec.algebra.build(layout.center_dims())?;
    let bs = decompose(&a_c, rng)?;
    let n = bs.blocks().len();
    let perm = spec.permutation.clone().unwrap_or_else(|| identity_permutation(n));
    validate_permutation(bs.blocks(), &perm)?;
    let (ts, rs) = match &spec.block_mode {
        BlockMode::Haar => haar_blocks(&bs, d_l, d_r, rng),
        BlockMode::Given { t_blocks, r_blocks } => {
            for m in t_blocks.iter().chain(r_blocks) {
                let r = unitarity_residual(m);
                if r > 1e-10 {
                    return Err(WallError::NotUnitary { residual: r });
                }
            }
            (t_blocks.clone(), r_blocks.clone())
        }
    };
    let frame = block_sum(&bs, d_l, d_r, &perm, &ts, &rs)?;
    let u = lift_from_frame(&bs, d_l, d_r, &frame);
    Ok(WallUnitary {
        u,
        layout: layout.clone(),
        a_c,
        blocks: bs,
        t_blocks: ts,
        r_blocks: rs,
        permutation: perm,
    })
}

/// Two-gate factorization `U = W_CR · V_LC` of a random wall.
#[derive(Debug, Clone)]
pub struct Brickwork {
    /// Gate on `L ⊗ C`.
    pub v_lc: CMatrix,
    /// Gate on `C ⊗ R`.
    pub w_cr: CMatrix,
    pub wall: WallUnitary,
}

impl Brickwork {
    /// `W_CR` and `V_LC` embedded on the full system.
    pub fn embedded_gates(&self) -> (CMatrix, CMatrix) {
        let d_l = self.wall.layout.dim_left();
        let d_r = self.wall.layout.dim_right();
        (
            kron(&identity(d_l), &self.w_cr),
            kron(&self.v_lc, &identity(d_r)),
        )
    }
}

/// `V_LC = ⊕ T̃ⁱ ⊗ rⁱ` and `W_CR = ⊕ tⁱ ⊗ R̃ⁱ` in the decomposition frame, with
/// independent block permutations on the two gates.
pub fn brickwork_split_with(
    spec: &WallSpec,
    perm_v: Option<Vec<usize>>,
    perm_w: Option<Vec<usize>>,
    rng: &mut SeededRng,
) -> Result<Brickwork> {
    let layout = &spec.layout;
    let (d_l, d_r) = (layout.dim_left(), layout.dim_right());
    let a_c = spec.algebra.build(layout.center_dims())?;
    let bs = decompose(&a_c, rng)?;
    let n = bs.blocks().len();
    let pv = perm_v.unwrap_or_else(|| identity_permutation(n));
    let pw = perm_w.unwrap_or_else(|| identity_permutation(n));
    validate_permutation(bs.blocks(), &pv)?;
    validate_permutation(bs.blocks(), &pw)?;

    let mut t_tilde = Vec::with_capacity(n);
    let mut r_small = Vec::with_capacity(n);
    let mut t_small = Vec::with_capacity(n);
    let mut r_tilde = Vec::with_capacity(n);
    for b in bs.blocks() {
        t_tilde.push(haar_unitary(d_l * b.dim_d, rng));
        r_small.push(haar_unitary(b.dim_e, rng));
        t_small.push(haar_unitary(b.dim_d, rng));
        r_tilde.push(haar_unitary(b.dim_e * d_r, rng));
    }
    let v_lc = lift_from_frame(&bs, d_l, 1, &block_sum(&bs, d_l, 1, &pv, &t_tilde, &r_small)?);
    let w_cr = lift_from_frame(&bs, 1, d_r, &block_sum(&bs, 1, d_r, &pw, &t_small, &r_tilde)?);
    let u = matmul(&kron(&identity(d_l), &w_cr), &kron(&v_lc, &identity(d_r)));

    let mut t_blocks = Vec::with_capacity(n);
    let mut r_blocks = Vec::with_capacity(n);
    for i in 0..n {
        let j = pv[i];
        t_blocks.push(matmul(&kron(&identity(d_l), &t_small[j]), &t_tilde[i]));
        r_blocks.push(matmul(&r_tilde[j], &kron(&r_small[i], &identity(d_r))));
    }
    let permutation = (0..n).map(|i| pw[pv[i]]).collect();
    Ok(Brickwork {
        v_lc,
        w_cr,
        wall: WallUnitary {
            u,
            layout: layout.clone(),
            a_c,
            blocks: bs,
            t_blocks,
            r_blocks,
            permutation,
        },
    })
}

/// [`brickwork_split_with`] using the spec's permutation on `V_LC`.
pub fn brickwork_split(spec: &WallSpec, rng: &mut SeededRng) -> Result<Brickwork> {
    brickwork_split_with(spec, spec.permutation.clone(), None, rng)
}

/// Reads off `Tⁱ`, `Rⁱ` and the block permutation of a wall in the frame of
/// `bs`. Each frame block of `U` must factor as `T ⊗ R` across `L Dᵢ | Eᵢ R`.
pub fn extract_wall_blocks(
    u: &CMatrix,
    layout: &SystemLayout,
    bs: &BlockStructure,
) -> Result<(Vec<CMatrix>, Vec<CMatrix>, Vec<usize>)> {
    let (d_l, d_r) = (layout.dim_left(), layout.dim_right());
    let dc = bs.hilbert_dim();
    let f = to_frame(bs, d_l, d_r, u);
    let blocks = bs.blocks();
    let offsets = bs.offsets();
    let n = blocks.len();

    // sub-block of F from block i into block j, as (rows, cols) index lists
    let indices = |b: &Block, off: usize| -> Vec<usize> {
        let mut idx = Vec::with_capacity(d_l * b.size() * d_r);
        for l in 0..d_l {
            for k in 0..b.dim_d {
                for e in 0..b.dim_e {
                    for r in 0..d_r {
                        idx.push((l * dc + off + k * b.dim_e + e) * d_r + r);
                    }
                }
            }
        }
        idx
    };

    let mut ts = Vec::with_capacity(n);
    let mut rs = Vec::with_capacity(n);
    let mut perm = Vec::with_capacity(n);
    for i in 0..n {
        let cols = indices(&blocks[i], offsets[i]);
        let mut best = (0, 0.0);
        for j in 0..n {
            if blocks[j] != blocks[i] {
                continue;
            }
            let rows = indices(&blocks[j], offsets[j]);
            let w: f64 = rows
                .iter()
                .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
                .map(|(r, c)| f[(r, c)].norm_sqr())
                .sum();
            if w > best.1 {
                best = (j, w);
            }
        }
        let j = best.0;
        let rows = indices(&blocks[j], offsets[j]);
        let sub = CMatrix::from_fn(rows.len(), cols.len(), |a, b| f[(rows[a], cols[b])]);
        let leak = (cols.len() as f64 - best.1).abs();
        if leak > 1e-8 * cols.len() as f64 {
            return Err(WallError::WallViolated(format!(
                "block {i} is not mapped onto a single equivalent block (weight {:.3e} of {})",
                best.1,
                cols.len()
            )));
        }
        let (t, r) = factor_block(&sub, d_l * blocks[i].dim_d, blocks[i].dim_e * d_r)?;
        ts.push(t);
        rs.push(r);
        perm.push(j);
    }
    validate_permutation(blocks, &perm)?;
    Ok((ts, rs, perm))
}

/// Splits a unitary on `ℂ^a ⊗ ℂ^b` of operator Schmidt rank one into unitary
/// factors `T ⊗ R`.
pub fn factor_block(s: &CMatrix, a: usize, b: usize) -> Result<(CMatrix, CMatrix)> {
    // realignment: M[(i'a + i), (j'b + j)] = S[(i'b + j'), (i b + j)]
    let mut m = CMatrix::zeros(a * a, b * b);
    for i2 in 0..a {
        for j2 in 0..b {
            for i in 0..a {
                for j in 0..b {
                    m[(i2 * a + i, j2 * b + j)] = s[(i2 * b + j2, i * b + j)];
                }
            }
        }
    }
    let dec = svd(&m);
    let top = dec.s[0];
    let rest: f64 = dec.s.iter().map(|x| x * x).sum::<f64>() - top * top;
    if rest.max(0.0).sqrt() > 1e-8 * top {
        return Err(WallError::WallViolated(format!(
            "block has operator Schmidt rank > 1 (tail weight {:.3e})",
            rest.max(0.0).sqrt() / top
        )));
    }
    let t = CMatrix::from_fn(a, a, |i2, i| dec.u[(i2 * a + i, 0)]);
    let r = CMatrix::from_fn(b, b, |j2, j| dec.v[(j2 * b + j, 0)].conj());
    // T†T = α𝟙 with ‖T‖² = 1 here, so α = 1/a; rescale both to unitaries
    let t = t.scale((a as f64).sqrt());
    let r = r.scale(top / (a as f64).sqrt());
    if frob(&(kron(&t, &r) - s)) > 1e-8 * frob(s) {
        return Err(WallError::Numerical("block factorization does not reproduce the block".into()));
    }
    Ok((t, r))
}
