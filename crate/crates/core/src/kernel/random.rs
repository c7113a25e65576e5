//! Seeded random streams and Haar sampling.

use nalgebra::DVector;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{c64, matmul, qr, CMatrix, CVector, C64};

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh independent stream sharing this seed.
    pub fn fork(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }

    /// A child stream derived from this one's current state; advances `self`.
    pub fn split(&mut self) -> Self {
        let seed = self.inner.next_u64();
        Self::new(seed, self.stream_id)
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Standard complex Gaussian with `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c64(self.normal() * s, self.normal() * s)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| rng.complex_normal())
}

/// Haar-distributed unitary: complex Ginibre followed by QR with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut SeededRng) -> CMatrix {
    assert!(dim >= 1, "haar_unitary needs dim >= 1");
    let (q, r) = qr(&ginibre(dim, dim, rng));
    let phases = CMatrix::from_diagonal(&DVector::from_fn(dim, |k, _| {
        let rk = r[(k, k)];
        if rk.norm() > 0.0 {
            rk / rk.norm()
        } else {
            c64(1.0, 0.0)
        }
    }));
    matmul(&q, &phases)
}

/// Haar-random pure state.
pub fn haar_state(dim: usize, rng: &mut SeededRng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| rng.complex_normal());
    let n = v.norm();
    v / c64(n, 0.0)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, rng: &mut SeededRng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}
