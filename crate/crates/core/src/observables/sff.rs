//! Spectral form factor `K(t) = 𝔼|tr Uᵗ|²` of Haar and wall ensembles.
//!
//! Wall samples are drawn block by block: with no block permutation,
//! `tr Uᵗ = Σᵢ tr((Tⁱ)ᵗ) · tr((Rⁱ)ᵗ)`, so only the small block unitaries are
//! ever formed. Each sample draws from its own stream of the run seed, so
//! results do not depend on how samples are spread over threads.

use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{decompose, Block, BlockStructure};
use crate::error::{Result, WallError};
use crate::kernel::linalg::{identity, matmul, trace, CMatrix, C64};
use crate::kernel::random::{haar_unitary, SeededRng};
use crate::synth::wall::{block_sum, validate_permutation};
use crate::synth::WallSpec;

#[derive(Debug, Clone)]
pub enum SffEnsemble {
    Haar {
        dim: usize,
    },
    Wall {
        blocks: Vec<Block>,
        d_l: usize,
        d_r: usize,
        /// Block permutation applied to every sample. The analytic formula
        /// assumes none; this exists to measure the effect.
        permutation: Option<Vec<usize>>,
    },
}

impl SffEnsemble {
    /// Permutation-free wall ensemble for the spec's central algebra.
    pub fn from_spec(spec: &WallSpec, rng: &mut SeededRng) -> Result<Self> {
        let a_c = spec.algebra.build(spec.layout.center_dims())?;
        let bs = decompose(&a_c, rng)?;
        Ok(SffEnsemble::Wall {
            blocks: bs.blocks().to_vec(),
            d_l: spec.layout.dim_left(),
            d_r: spec.layout.dim_right(),
            permutation: None,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            SffEnsemble::Haar { dim } => *dim,
            SffEnsemble::Wall { blocks, d_l, d_r, .. } => d_l * d_r * blocks.iter().map(Block::size).sum::<usize>(),
        }
    }

    pub fn analytic(&self, t: usize) -> f64 {
        match self {
            SffEnsemble::Haar { dim } => sff_haar_analytic(*dim, t),
            SffEnsemble::Wall { blocks, d_l, d_r, .. } => sff_analytic(blocks, *d_l, *d_r, t),
        }
    }

    /// `tr Uᵗ` for `t = 0..=t_max` of one draw.
    fn sample_traces(&self, t_max: usize, rng: &mut SeededRng) -> Result<Vec<C64>> {
        match self {
            SffEnsemble::Haar { dim } => Ok(power_traces(&haar_unitary(*dim, rng), t_max)),
            SffEnsemble::Wall {
                blocks,
                d_l,
                d_r,
                permutation: None,
            } => {
                let mut out = vec![C64::new(0.0, 0.0); t_max + 1];
                for b in blocks {
                    let tt = power_traces(&haar_unitary(d_l * b.dim_d, rng), t_max);
                    let rt = power_traces(&haar_unitary(b.dim_e * d_r, rng), t_max);
                    for t in 0..=t_max {
                        out[t] += tt[t] * rt[t];
                    }
                }
                Ok(out)
            }
            SffEnsemble::Wall {
                blocks,
                d_l,
                d_r,
                permutation: Some(perm),
            } => {
                let dc = blocks.iter().map(Block::size).sum();
                let bs = BlockStructure::standard(vec![dc], blocks.clone())?;
                let mut ts = Vec::with_capacity(blocks.len());
                let mut rs = Vec::with_capacity(blocks.len());
                for b in blocks {
                    ts.push(haar_unitary(d_l * b.dim_d, rng));
                    rs.push(haar_unitary(b.dim_e * d_r, rng));
                }
                let frame = block_sum(&bs, *d_l, *d_r, perm, &ts, &rs)?;
                Ok(power_traces(&frame, t_max))
            }
        }
    }
}

/// `tr Uᵗ` for `t = 0..=t_max`.
fn power_traces(u: &CMatrix, t_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(t_max + 1);
    let mut p = identity(u.nrows());
    for t in 0..=t_max {
        if t > 0 {
            p = matmul(&p, u);
        }
        out.push(trace(&p));
    }
    out
}

/// `Σᵢ min(t, d_L·dim Dᵢ) · min(t, dim Eᵢ·d_R)` for `t ≥ 1`; `t = 0` gives `d²`.
pub fn sff_analytic(blocks: &[Block], d_l: usize, d_r: usize, t: usize) -> f64 {
    if t == 0 {
        let d = d_l * d_r * blocks.iter().map(Block::size).sum::<usize>();
        return (d * d) as f64;
    }
    blocks
        .iter()
        .map(|b| (t.min(d_l * b.dim_d) * t.min(b.dim_e * d_r)) as f64)
        .sum()
}

/// `min(t, d)` for `t ≥ 1`; `t = 0` gives `d²`.
pub fn sff_haar_analytic(d: usize, t: usize) -> f64 {
    if t == 0 {
        (d * d) as f64
    } else {
        t.min(d) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SffResult {
    pub times: Vec<usize>,
    pub k_mc: Vec<f64>,
    /// Sample standard deviation over `√samples`.
    pub stderr: Vec<f64>,
    pub k_analytic: Vec<f64>,
    pub samples: usize,
}

impl SffResult {
    /// Times where `|K_mc − K_analytic| > z·stderr` (with `stderr = 0`
    /// requiring agreement to rounding).
    pub fn deviations(&self, z: f64) -> Vec<usize> {
        self.times
            .iter()
            .zip(self.k_mc.iter().zip(&self.k_analytic).zip(&self.stderr))
            .filter(|(_, ((m, a), s))| (*m - *a).abs() > (z * *s).max(1e-9 * a.abs().max(1.0)))
            .map(|(t, _)| *t)
            .collect()
    }
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64).sqrt() / (self.n as f64).sqrt()
    }
}

/// Monte-Carlo estimate of `K(t)` for `t = 0..=t_max`. Sample `s` draws from
/// stream `s` of `seed`.
pub fn sff_mc(ensemble: &SffEnsemble, t_max: usize, samples: usize, seed: u64) -> Result<SffResult> {
    if samples < 2 {
        return Err(WallError::Dimension(format!("need at least 2 samples, got {samples}")));
    }
    if let SffEnsemble::Wall {
        blocks,
        permutation: Some(p),
        ..
    } = ensemble
    {
        validate_permutation(blocks, p)?;
    }
    let draws = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = SeededRng::new(seed, s as u64);
            ensemble
                .sample_traces(t_max, &mut rng)
                .map(|tr| tr.iter().map(|z| z.norm_sqr()).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut moments = vec![Moments::default(); t_max + 1];
    for d in &draws {
        for (m, &x) in moments.iter_mut().zip(d) {
            m.push(x);
        }
    }
    Ok(SffResult {
        times: (0..=t_max).collect(),
        k_mc: moments.iter().map(|m| m.mean).collect(),
        stderr: moments.iter().map(Moments::stderr).collect(),
        k_analytic: (0..=t_max).map(|t| ensemble.analytic(t)).collect(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_ensemble(d_c: usize, d_l: usize, d_r: usize) -> SffEnsemble {
        SffEnsemble::Wall {
            blocks: vec![Block::new(1, 1); d_c],
            d_l,
            d_r,
            permutation: None,
        }
    }

    #[test]
    fn analytic_values() {
        let diag = vec![Block::new(1, 1); 2];
        assert_eq!(sff_analytic(&diag, 2, 2, 1), 2.0);
        assert_eq!(sff_analytic(&diag, 2, 2, 2), 8.0);
        assert_eq!(sff_analytic(&diag, 2, 2, 9), 8.0);
        assert_eq!(sff_analytic(&diag, 2, 2, 0), 64.0);
        let single = [Block::new(2, 2)];
        assert_eq!(sff_analytic(&single, 2, 2, 1), 1.0);
        assert_eq!(sff_analytic(&single, 2, 2, 4), 16.0);
        assert_eq!(sff_analytic(&single, 2, 2, 11), 16.0);
        assert_eq!(sff_haar_analytic(4, 0), 16.0);
        assert_eq!(sff_haar_analytic(4, 3), 3.0);
    }

    #[test]
    fn time_zero_is_exact() {
        let r = sff_mc(&diag_ensemble(2, 2, 2), 3, 50, 1).unwrap();
        assert_eq!(r.k_mc[0], 64.0);
        assert_eq!(r.stderr[0], 0.0);
    }

    #[test]
    fn haar_ramp() {
        let r = sff_mc(&SffEnsemble::Haar { dim: 4 }, 12, 4000, 2).unwrap();
        assert!(r.deviations(4.0).is_empty(), "{:?} vs {:?}", r.k_mc, r.k_analytic);
    }

    #[test]
    fn diag_wall_ramp_and_plateau() {
        let r = sff_mc(&diag_ensemble(2, 2, 2), 6, 4000, 3).unwrap();
        assert!(r.deviations(4.0).is_empty(), "{:?}", r.k_mc);
    }

    #[test]
    fn deterministic_given_seed() {
        let a = sff_mc(&diag_ensemble(2, 2, 2), 4, 64, 9).unwrap();
        let b = sff_mc(&diag_ensemble(2, 2, 2), 4, 64, 9).unwrap();
        assert_eq!(a.k_mc, b.k_mc);
        assert_eq!(a.stderr, b.stderr);
    }

    #[test]
    fn independent_blocks_have_no_cross_term() {
        // E[tr Aᵗ · conj(tr Bᵗ)] for independent Haar A (dim 2), B (dim 3)
        let n = 4000;
        for t in 1..=4 {
            let mut re = Moments::default();
            let mut im = Moments::default();
            for s in 0..n {
                let mut rng = SeededRng::new(77, s);
                let a = power_traces(&haar_unitary(2, &mut rng), t)[t];
                let b = power_traces(&haar_unitary(3, &mut rng), t)[t];
                let z = a * b.conj();
                re.push(z.re);
                im.push(z.im);
            }
            assert!(re.mean.abs() < 4.0 * re.stderr() && im.mean.abs() < 4.0 * im.stderr(), "t={t}");
        }
        let sum = SffEnsemble::Wall {
            blocks: vec![Block::new(1, 2), Block::new(1, 3)],
            d_l: 1,
            d_r: 1,
            permutation: None,
        };
        let r = sff_mc(&sum, 6, 4000, 5).unwrap();
        assert!(r.deviations(4.0).is_empty());
    }

    #[test]
    fn bad_permutation_is_rejected() {
        let ens = SffEnsemble::Wall {
            blocks: vec![Block::new(1, 1), Block::new(1, 2)],
            d_l: 2,
            d_r: 2,
            permutation: Some(vec![1, 0]),
        };
        assert!(matches!(sff_mc(&ens, 2, 4, 0), Err(WallError::NotAutomorphism(_))));
    }

    #[test]
    fn cyclic_permutation_runs() {
        let ens = SffEnsemble::Wall {
            blocks: vec![Block::new(1, 1); 2],
            d_l: 2,
            d_r: 2,
            permutation: Some(vec![1, 0]),
        };
        let r = sff_mc(&ens, 4, 200, 0).unwrap();
        assert_eq!(r.k_mc[0], 64.0);
        // odd powers of a block swap are traceless
        assert!(r.k_mc[1] < 1e-20 && r.k_mc[3] < 1e-20);
    }
}
