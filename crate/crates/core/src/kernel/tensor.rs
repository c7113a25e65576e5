//! Operators on multi-site systems: embedding, local application, partial
//! trace and support detection. Site 0 is the most significant index.

use super::linalg::{frob, CMatrix, C64, ZERO};
use crate::error::{Result, WallError};

/// Index bookkeeping for splitting a full index into (selected sites, rest).
#[derive(Debug, Clone)]
pub struct SiteSplit {
    pub sub_dim: usize,
    pub rest_dim: usize,
    /// `full[s * rest_dim + r]` is the full index with sub-index `s`, rest-index `r`.
    full: Vec<usize>,
}

impl SiteSplit {
    /// `sites` may be given in any order; the sub-index follows that order.
    pub fn new(sites: &[usize], dims: &[usize]) -> Result<Self> {
        let n = dims.len();
        let mut seen = vec![false; n];
        for &s in sites {
            if s >= n {
                return Err(WallError::Layout(format!("site {s} out of range for {n} sites")));
            }
            if seen[s] {
                return Err(WallError::Layout(format!("site {s} listed twice")));
            }
            seen[s] = true;
        }
        let rest: Vec<usize> = (0..n).filter(|&k| !seen[k]).collect();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let sub_dim: usize = sites.iter().map(|&s| dims[s]).product();
        let rest_dim: usize = rest.iter().map(|&s| dims[s]).product();
        let offsets = |group: &[usize]| -> Vec<usize> {
            let total: usize = group.iter().map(|&s| dims[s]).product();
            (0..total)
                .map(|mut idx| {
                    let mut off = 0;
                    for &s in group.iter().rev() {
                        off += (idx % dims[s]) * strides[s];
                        idx /= dims[s];
                    }
                    off
                })
                .collect()
        };
        let sub_off = offsets(sites);
        let rest_off = offsets(&rest);
        let mut full = Vec::with_capacity(sub_dim * rest_dim);
        for so in &sub_off {
            for ro in &rest_off {
                full.push(so + ro);
            }
        }
        Ok(Self { sub_dim, rest_dim, full })
    }

    #[inline]
    pub fn full(&self, s: usize, r: usize) -> usize {
        self.full[s * self.rest_dim + r]
    }
}

fn check_local(op: &CMatrix, split: &SiteSplit) -> Result<()> {
    if op.nrows() != split.sub_dim || op.ncols() != split.sub_dim {
        return Err(WallError::Dimension(format!(
            "local operator is {}x{} but the selected sites have dimension {}",
            op.nrows(),
            op.ncols(),
            split.sub_dim
        )));
    }
    Ok(())
}

/// `op` acting on `sites`, identity elsewhere.
pub fn embed(op: &CMatrix, sites: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let split = SiteSplit::new(sites, dims)?;
    check_local(op, &split)?;
    let d = split.sub_dim * split.rest_dim;
    let mut out = CMatrix::zeros(d, d);
    for r in 0..split.rest_dim {
        for a in 0..split.sub_dim {
            for b in 0..split.sub_dim {
                let v = op[(a, b)];
                if v != ZERO {
                    out[(split.full(a, r), split.full(b, r))] = v;
                }
            }
        }
    }
    Ok(out)
}

/// `embed(op) · x` without forming the embedded operator.
pub fn apply_left(op: &CMatrix, split: &SiteSplit, x: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    let q = split.sub_dim;
    for col in 0..x.ncols() {
        let src = x.column(col);
        let mut dst = out.column_mut(col);
        for r in 0..split.rest_dim {
            for a in 0..q {
                let mut acc = ZERO;
                for b in 0..q {
                    acc += op[(a, b)] * src[split.full(b, r)];
                }
                dst[split.full(a, r)] = acc;
            }
        }
    }
    out
}

/// `x · embed(op)` without forming the embedded operator.
pub fn apply_right(x: &CMatrix, op: &CMatrix, split: &SiteSplit) -> CMatrix {
    let mut out = CMatrix::zeros(x.nrows(), x.ncols());
    let q = split.sub_dim;
    for r in 0..split.rest_dim {
        for b in 0..q {
            let dst_col = split.full(b, r);
            for a in 0..q {
                let w = op[(a, b)];
                if w == ZERO {
                    continue;
                }
                let src_col = split.full(a, r);
                for row in 0..x.nrows() {
                    let v = x[(row, src_col)] * w;
                    out[(row, dst_col)] += v;
                }
            }
        }
    }
    out
}

/// `embed(op) · x · embed(op)†`.
pub fn conjugate_local(op: &CMatrix, split: &SiteSplit, x: &CMatrix) -> CMatrix {
    apply_right(&apply_left(op, split, x), &op.adjoint(), split)
}

/// Traces out `sites_out`; the result acts on the remaining sites in order.
/// When nothing remains the result is the 1×1 matrix `[tr O]`.
pub fn partial_trace(o: &CMatrix, sites_out: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let d: usize = dims.iter().product();
    if o.nrows() != d || o.ncols() != d {
        return Err(WallError::Dimension(format!(
            "operator is {}x{}, layout dimension {d}",
            o.nrows(),
            o.ncols()
        )));
    }
    let mut keep: Vec<usize> = (0..dims.len()).filter(|s| !sites_out.contains(s)).collect();
    keep.sort_unstable();
    let split = SiteSplit::new(&keep, dims)?;
    let mut out = CMatrix::zeros(split.sub_dim, split.sub_dim);
    for a in 0..split.sub_dim {
        for b in 0..split.sub_dim {
            let mut acc = ZERO;
            for r in 0..split.rest_dim {
                acc += o[(split.full(a, r), split.full(b, r))];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Relative distance of `o` from operators acting trivially on `site`:
/// `‖O − 𝟙_s ⊗ tr_s(O)/d_s‖ / ‖O‖`.
pub fn trivial_residual(o: &CMatrix, site: usize, dims: &[usize]) -> Result<f64> {
    let norm = frob(o);
    if norm == 0.0 {
        return Ok(0.0);
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|&s| s != site).collect();
    let mut order = vec![site];
    order.extend(rest.iter().copied());
    let split = SiteSplit::new(&order, dims)?;
    let ds = dims[site];
    let rest_dim = split.sub_dim / ds;
    // full index of (site digit a, rest digits ρ) is split.full(a * rest_dim + ρ, 0)
    let idx = |a: usize, rho: usize| split.full(a * rest_dim + rho, 0);
    let mut err = 0.0;
    for rho in 0..rest_dim {
        for sigma in 0..rest_dim {
            let mut tr = ZERO;
            for a in 0..ds {
                tr += o[(idx(a, rho), idx(a, sigma))];
            }
            let avg = tr / ds as f64;
            for a in 0..ds {
                for b in 0..ds {
                    let expect = if a == b { avg } else { ZERO };
                    err += (o[(idx(a, rho), idx(b, sigma))] - expect).norm_sqr();
                }
            }
        }
    }
    Ok(err.sqrt() / norm)
}

/// Sites on which `o` acts non-trivially at relative tolerance `tol`,
/// together with the per-site residuals.
pub fn support_with_residuals(o: &CMatrix, dims: &[usize], tol: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    if frob(o) == 0.0 {
        return Ok((Vec::new(), vec![0.0; dims.len()]));
    }
    let mut sites = Vec::new();
    let mut residuals = Vec::with_capacity(dims.len());
    for s in 0..dims.len() {
        let r = trivial_residual(o, s, dims)?;
        if r >= tol {
            sites.push(s);
        }
        residuals.push(r);
    }
    Ok((sites, residuals))
}

pub fn support(o: &CMatrix, dims: &[usize], tol: f64) -> Result<Vec<usize>> {
    Ok(support_with_residuals(o, dims, tol)?.0)
}

/// Extracts the block `(⟨i| ⊗ 𝟙) X (|j⟩ ⊗ 𝟙)` where the bra/ket act on the
/// leading factor of dimension `d_head`.
pub fn head_block(x: &CMatrix, d_head: usize, i: usize, j: usize) -> CMatrix {
    let tail = x.nrows() / d_head;
    x.view((i * tail, j * tail), (tail, tail)).into_owned()
}

/// Extracts `(𝟙 ⊗ ⟨i|) X (𝟙 ⊗ |j⟩)` for a trailing factor of dimension `d_tail`.
pub fn tail_block(x: &CMatrix, d_tail: usize, i: usize, j: usize) -> CMatrix {
    let head = x.nrows() / d_tail;
    CMatrix::from_fn(head, head, |a, b| x[(a * d_tail + i, b * d_tail + j)])
}

/// Splits `X` on `ℂ^h ⊗ ℂ^{d_tail}` as `Y ⊗ 𝟙 + rest` with `Y = tr_tail(X)/d_tail`,
/// returning `Y` and `‖rest‖ / ‖X‖`.
pub fn split_trailing_identity(x: &CMatrix, d_tail: usize) -> (CMatrix, f64) {
    let head = x.nrows() / d_tail;
    let y = CMatrix::from_fn(head, head, |a, b| {
        (0..d_tail).map(|r| x[(a * d_tail + r, b * d_tail + r)]).sum::<C64>() / d_tail as f64
    });
    let mut err = 0.0;
    for a in 0..head {
        for b in 0..head {
            for r in 0..d_tail {
                for s in 0..d_tail {
                    let expect = if r == s { y[(a, b)] } else { ZERO };
                    err += (x[(a * d_tail + r, b * d_tail + s)] - expect).norm_sqr();
                }
            }
        }
    }
    let n = frob(x);
    (y, if n == 0.0 { 0.0 } else { err.sqrt() / n })
}

/// Splits `X` on `ℂ^{d_head} ⊗ ℂ^t` as `𝟙 ⊗ Y + rest`, returning `Y` and the
/// relative norm of the remainder.
pub fn split_leading_identity(x: &CMatrix, d_head: usize) -> (CMatrix, f64) {
    let tail = x.nrows() / d_head;
    let mut y = CMatrix::zeros(tail, tail);
    for l in 0..d_head {
        y += x.view((l * tail, l * tail), (tail, tail));
    }
    y /= C64::new(d_head as f64, 0.0);
    let mut err = 0.0;
    for l in 0..d_head {
        for m in 0..d_head {
            let blk = x.view((l * tail, m * tail), (tail, tail));
            err += if l == m {
                (blk - &y).iter().map(|z| z.norm_sqr()).sum::<f64>()
            } else {
                blk.iter().map(|z| z.norm_sqr()).sum::<f64>()
            };
        }
    }
    let n = frob(x);
    (y, if n == 0.0 { 0.0 } else { err.sqrt() / n })
}

/// Realigns `X` on `ℂ^a ⊗ ℂ^b` so that its rank is the operator Schmidt rank
/// across the `a|b` cut: row `(i, j)` of the head, column `(k, l)` of the tail.
pub fn realign(x: &CMatrix, a: usize) -> CMatrix {
    let b = x.nrows() / a;
    CMatrix::from_fn(a * a, b * b, |ij, kl| {
        let (i, j) = (ij / a, ij % a);
        let (k, l) = (kl / b, kl % b);
        x[(i * b + k, j * b + l)]
    })
}

/// Number of operator Schmidt values of `X` above `tol·‖X‖` across `a|b`.
pub fn operator_schmidt_rank(x: &CMatrix, a: usize, tol: f64) -> usize {
    let s = super::linalg::singular_values(&realign(x, a));
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > tol * top.max(f64::MIN_POSITIVE)).count()
}

/// Operator Schmidt decomposition `X = Σₛ σₛ Aₛ ⊗ Bₛ` across `a|b`, keeping
/// terms with `σₛ > tol·σ_max`; returns `(σ, A, B)` with `A`, `B` HS-orthonormal.
pub fn operator_schmidt(x: &CMatrix, a: usize, tol: f64) -> (Vec<f64>, Vec<CMatrix>, Vec<CMatrix>) {
    let b = x.nrows() / a;
    let dec = super::linalg::svd(&realign(x, a));
    let top = dec.s.first().copied().unwrap_or(0.0);
    let mut out = (Vec::new(), Vec::new(), Vec::new());
    for (k, &sv) in dec.s.iter().enumerate() {
        if top == 0.0 || sv <= tol * top {
            break;
        }
        out.0.push(sv);
        out.1.push(CMatrix::from_fn(a, a, |i, j| dec.u[(i * a + j, k)]));
        out.2.push(CMatrix::from_fn(b, b, |i, j| dec.v[(i * b + j, k)].conj()));
    }
    out
}
