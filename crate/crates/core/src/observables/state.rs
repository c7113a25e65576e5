//! Pure states, Schmidt data and the area-law bound for walls.

use serde::Serialize;

use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{c64, kron_all, svd, CMatrix, CVector};
use crate::kernel::random::{haar_state, SeededRng};
use crate::synth::WallUnitary;

/// Singular values below this count as zero when reporting Schmidt ranks.
pub const SCHMIDT_RANK_TOL: f64 = 1e-8;
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: CVector,
    layout: SystemLayout,
}

impl PureState {
    pub fn new(amplitudes: CVector, layout: SystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(WallError::Dimension(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let n = amplitudes.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(WallError::Numerical(format!("state norm {n} is not 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Normalizes `v` first; fails on the zero vector.
    pub fn normalized(v: CVector, layout: SystemLayout) -> Result<Self> {
        let n = v.norm();
        if n == 0.0 {
            return Err(WallError::Numerical("cannot normalize the zero vector".into()));
        }
        Self::new(v.unscale(n), layout)
    }

    /// Tensor product of per-site vectors (site 0 first).
    pub fn product(factors: &[CVector], layout: SystemLayout) -> Result<Self> {
        let cols: Vec<CMatrix> = factors
            .iter()
            .map(|f| CMatrix::from_column_slice(f.len(), 1, f.as_slice()))
            .collect();
        let v = kron_all(cols.iter());
        Self::normalized(CVector::from_column_slice(v.as_slice()), layout)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(index: usize, layout: SystemLayout) -> Result<Self> {
        let mut v = CVector::zeros(layout.dim());
        if index >= v.len() {
            return Err(WallError::Dimension(format!("basis index {index} out of range")));
        }
        v[index] = c64(1.0, 0.0);
        Self::new(v, layout)
    }

    /// Haar-random state on each site independently.
    pub fn random_product(layout: SystemLayout, rng: &mut SeededRng) -> Result<Self> {
        let factors: Vec<CVector> = layout.site_dims().iter().map(|&q| haar_state(q, rng)).collect();
        Self::product(&factors, layout)
    }

    /// `|α⟩_L ⊗ |β⟩_CR` with both factors Haar-random (entangled within CR).
    pub fn random_left_product(layout: SystemLayout, rng: &mut SeededRng) -> Result<Self> {
        let a = haar_state(layout.dim_left(), rng);
        let b = haar_state(layout.dim_center() * layout.dim_right(), rng);
        Self::product(&[a, b], layout)
    }

    pub fn haar(layout: SystemLayout, rng: &mut SeededRng) -> Result<Self> {
        let v = haar_state(layout.dim(), rng);
        Self::normalized(v, layout)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `|⟨self|other⟩|²`
    pub fn fidelity(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm_sqr()
    }

    /// Applies `U` without renormalizing.
    pub fn apply(&self, u: &CMatrix) -> Result<PureState> {
        if u.shape() != (self.amplitudes.len(), self.amplitudes.len()) {
            return Err(WallError::Dimension(format!("operator {:?} on state of dimension {}", u.shape(), self.amplitudes.len())));
        }
        Ok(PureState {
            amplitudes: u * &self.amplitudes,
            layout: self.layout.clone(),
        })
    }

    /// Applies an operator on the contiguous center region.
    pub fn apply_center(&self, op: &CMatrix) -> Result<CVector> {
        let (dl, dc, dr) = (self.layout.dim_left(), self.layout.dim_center(), self.layout.dim_right());
        if op.shape() != (dc, dc) {
            return Err(WallError::Dimension(format!("central operator {:?} for d_C = {dc}", op.shape())));
        }
        let psi = &self.amplitudes;
        let mut out = CVector::zeros(psi.len());
        for l in 0..dl {
            for c in 0..dc {
                for c2 in 0..dc {
                    let m = op[(c, c2)];
                    if m == c64(0.0, 0.0) {
                        continue;
                    }
                    for r in 0..dr {
                        out[(l * dc + c) * dr + r] += m * psi[(l * dc + c2) * dr + r];
                    }
                }
            }
        }
        Ok(out)
    }
}

/// `Uᵗ |ψ⟩`
pub fn evolve_state(u: &CMatrix, psi: &PureState, t: usize) -> Result<PureState> {
    let mut out = psi.clone();
    for _ in 0..t {
        out = out.apply(u)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct SchmidtData {
    /// Number of leading sites on the first side of the cut.
    pub cut: usize,
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

impl SchmidtData {
    /// Base-2 von Neumann entropy of the squared Schmidt values.
    pub fn entropy_bits(&self) -> f64 {
        self.singular_values
            .iter()
            .map(|s| s * s)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum()
    }
}

/// Schmidt decomposition across the cut after the first `cut` sites.
pub fn schmidt(psi: &PureState, cut: usize) -> Result<SchmidtData> {
    schmidt_with_tol(psi, cut, SCHMIDT_RANK_TOL)
}

pub fn schmidt_with_tol(psi: &PureState, cut: usize, rank_tol: f64) -> Result<SchmidtData> {
    let dims = psi.layout.site_dims();
    if cut > dims.len() {
        return Err(WallError::Layout(format!("cut {cut} beyond {} sites", dims.len())));
    }
    let da: usize = dims[..cut].iter().product();
    let db: usize = dims[cut..].iter().product();
    let m = CMatrix::from_fn(da, db, |a, b| psi.amplitudes[a * db + b]);
    let s = svd(&m).s;
    let rank = s.iter().filter(|&&v| v > rank_tol).count();
    Ok(SchmidtData {
        cut,
        singular_values: s,
        rank,
    })
}

/// Schmidt data across `L | CR`.
pub fn schmidt_left(psi: &PureState) -> Result<SchmidtData> {
    schmidt(psi, psi.layout.left_sites().len())
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockAreaLaw {
    pub block: usize,
    pub bound: usize,
    pub max_rank: usize,
    /// `(t, rank)` pairs exceeding the bound.
    pub violations: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AreaLawReport {
    pub bound: usize,
    /// Schmidt rank across `L | CR` for `t = 0..=t_max`.
    pub ranks: Vec<usize>,
    pub violations: Vec<(usize, usize)>,
    /// Same check for the initial state projected onto each block's `CR` support.
    pub blocks: Vec<BlockAreaLaw>,
}

impl AreaLawReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.blocks.iter().all(|b| b.violations.is_empty())
    }
}

fn rank_trajectory(u: &CMatrix, psi: &PureState, t_max: usize) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(t_max + 1);
    let mut cur = psi.clone();
    for t in 0..=t_max {
        if t > 0 {
            cur = cur.apply(u)?;
        }
        out.push(schmidt_left(&cur)?.rank);
    }
    Ok(out)
}

/// Checks `Sr(Uᵗ ψ0) ≤ dim A_C` across `L | CR` for `t ≤ t_max`, and the
/// block refinement `≤ dim_Dᵢ²` for `ψ0` projected onto block `i`.
pub fn verify_area_law(wall: &WallUnitary, psi0: &PureState, t_max: usize) -> Result<AreaLawReport> {
    if schmidt_left(psi0)?.rank != 1 {
        return Err(WallError::Dimension("initial state is not a product across L|CR".into()));
    }
    let bound = wall.a_c.dim();
    let ranks = rank_trajectory(&wall.u, psi0, t_max)?;
    let violations = ranks.iter().enumerate().filter(|(_, &r)| r > bound).map(|(t, &r)| (t, r)).collect();

    let mut blocks = Vec::new();
    for (i, (b, p)) in wall.blocks.blocks().iter().zip(wall.blocks.projectors()).enumerate() {
        let v = psi0.apply_center(p)?;
        if v.norm() < 1e-12 {
            continue;
        }
        let projected = PureState::normalized(v, psi0.layout.clone())?;
        let r = rank_trajectory(&wall.u, &projected, t_max)?;
        let bound_i = b.dim_d * b.dim_d;
        blocks.push(BlockAreaLaw {
            block: i,
            bound: bound_i,
            max_rank: r.iter().copied().max().unwrap_or(0),
            violations: r.iter().enumerate().filter(|(_, &x)| x > bound_i).map(|(t, &x)| (t, x)).collect(),
        });
    }
    Ok(AreaLawReport {
        bound,
        ranks,
        violations,
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::linalg::{identity, kron};
    use crate::kernel::random::haar_unitary;
    use crate::synth::presets::preset_wall;

    fn qubits(n: usize) -> SystemLayout {
        SystemLayout::new(vec![2; n], 1, n.saturating_sub(2).max(1)).unwrap()
    }

    #[test]
    fn bell_pair_has_two_equal_values() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![c64(h, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(h, 0.0)]);
        let psi = PureState::new(v, SystemLayout::tripartite(2, 1, 2)).unwrap();
        let s = schmidt(&psi, 1).unwrap();
        assert_eq!(s.rank, 2);
        assert!((s.singular_values[0] - h).abs() < 1e-12 && (s.singular_values[1] - h).abs() < 1e-12);
        assert!((s.entropy_bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_rank_one() {
        let psi = PureState::random_product(qubits(4), &mut SeededRng::new(1, 0)).unwrap();
        for cut in 0..=4 {
            assert_eq!(schmidt(&psi, cut).unwrap().rank, 1);
        }
    }

    #[test]
    fn haar_state_has_full_rank() {
        let psi = PureState::haar(qubits(4), &mut SeededRng::new(2, 0)).unwrap();
        let s = schmidt(&psi, 2).unwrap();
        assert_eq!(s.rank, 4);
        let total: f64 = s.singular_values.iter().map(|x| x * x).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evolution_is_norm_preserving() {
        let mut rng = SeededRng::new(3, 0);
        let w = preset_wall("abelian-pair", &mut rng).unwrap();
        let psi = PureState::random_product(w.layout.clone(), &mut rng).unwrap();
        assert!(evolve_state(&w.u, &psi, 0).unwrap().fidelity(&psi) > 1.0 - 1e-12);
        assert!(evolve_state(&identity(8), &psi, 5).unwrap().fidelity(&psi) > 1.0 - 1e-12);
        assert!((evolve_state(&w.u, &psi, 200).unwrap().norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn diag_wall_obeys_the_bound() {
        let mut rng = SeededRng::new(4, 0);
        let w = preset_wall("abelian-pair", &mut rng).unwrap();
        let psi = PureState::random_left_product(w.layout.clone(), &mut rng).unwrap();
        let rep = verify_area_law(&w, &psi, 100).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.bound, 2);
        assert_eq!(*rep.ranks.iter().max().unwrap(), 2);
        assert_eq!(rep.blocks.len(), 2);
        assert!(rep.blocks.iter().all(|b| b.max_rank == 1));
    }

    #[test]
    fn nonabelian_wall_saturates_four() {
        let mut rng = SeededRng::new(5, 0);
        // a qubit L would cap the rank at 2
        let w = crate::synth::presets::preset_wall_with("nonabelian-cnot", 4, 4, &mut rng).unwrap();
        let psi = PureState::random_product(w.layout.clone(), &mut rng).unwrap();
        let rep = verify_area_law(&w, &psi, 30).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.bound, 4);
        assert_eq!(rep.ranks[10], 4);
    }

    #[test]
    fn product_unitary_keeps_rank_one() {
        let mut rng = SeededRng::new(6, 0);
        let layout = SystemLayout::tripartite(2, 2, 2);
        let u = kron(&haar_unitary(2, &mut rng), &haar_unitary(4, &mut rng));
        let psi = PureState::random_left_product(layout.clone(), &mut rng).unwrap();
        for t in [1, 5, 20] {
            assert_eq!(schmidt_left(&evolve_state(&u, &psi, t).unwrap()).unwrap().rank, 1);
        }
    }

    #[test]
    fn entangled_initial_state_is_rejected() {
        let mut rng = SeededRng::new(7, 0);
        let w = preset_wall("abelian-pair", &mut rng).unwrap();
        let psi = PureState::haar(w.layout.clone(), &mut rng).unwrap();
        assert!(verify_area_law(&w, &psi, 3).is_err());
    }
}
