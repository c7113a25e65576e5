//! Heisenberg evolution, operator support and light cones.

use serde::Serialize;

use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{conjugate_by, CMatrix};
use crate::kernel::tensor::support_with_residuals;

/// Relative threshold below which an operator counts as acting trivially on a site.
pub const SUPPORT_TOL: f64 = 1e-10;

/// `Uᵗ O U⁻ᵗ` by repeated conjugation.
pub fn evolve_op(u: &CMatrix, o: &CMatrix, t: usize) -> Result<CMatrix> {
    if u.shape() != o.shape() || !u.is_square() {
        return Err(WallError::Dimension(format!(
            "U is {:?}, O is {:?}",
            u.shape(),
            o.shape()
        )));
    }
    let mut x = o.clone();
    for _ in 0..t {
        x = conjugate_by(u, &x);
    }
    Ok(x)
}

/// Sites on which `o` acts non-trivially.
pub fn support(o: &CMatrix, layout: &SystemLayout, tol: f64) -> Result<Vec<usize>> {
    Ok(support_with_residuals(o, layout.site_dims(), tol)?.0)
}

/// Support of `Uᵗ O U⁻ᵗ` for `t = 0..=t_max`.
#[derive(Debug, Clone, Serialize)]
pub struct LightConeProfile {
    pub times: Vec<usize>,
    pub support_sets: Vec<Vec<usize>>,
    /// `residuals[t][s]`: relative distance from acting trivially on site `s`.
    pub residuals: Vec<Vec<f64>>,
}

impl LightConeProfile {
    /// Union of supports over all recorded times.
    pub fn envelope(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.support_sets.iter().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

pub fn lightcone(u: &CMatrix, seed: &CMatrix, layout: &SystemLayout, t_max: usize, tol: f64) -> Result<LightConeProfile> {
    if u.nrows() != layout.dim() {
        return Err(WallError::Dimension(format!(
            "U has dimension {}, layout {}",
            u.nrows(),
            layout.dim()
        )));
    }
    let mut x = evolve_op(u, seed, 0)?;
    let mut profile = LightConeProfile {
        times: Vec::with_capacity(t_max + 1),
        support_sets: Vec::with_capacity(t_max + 1),
        residuals: Vec::with_capacity(t_max + 1),
    };
    for t in 0..=t_max {
        if t > 0 {
            x = conjugate_by(u, &x);
        }
        let (sites, res) = support_with_residuals(&x, layout.site_dims(), tol)?;
        profile.times.push(t);
        profile.support_sets.push(sites);
        profile.residuals.push(res);
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::linalg::{frob, identity, kron};
    use crate::kernel::pauli::{id2, z};
    use crate::kernel::random::{haar_unitary, SeededRng};
    use crate::kernel::tensor::embed;

    #[test]
    fn evolution_trivial_cases() {
        let o = kron(&z(), &id2());
        assert_eq!(evolve_op(&identity(4), &o, 0).unwrap(), o);
        assert_eq!(evolve_op(&identity(4), &o, 7).unwrap(), o);
    }

    #[test]
    fn evolution_preserves_norm() {
        let mut rng = SeededRng::new(5, 0);
        let u = haar_unitary(8, &mut rng);
        let o = embed(&z(), &[0], &[2, 2, 2]).unwrap();
        let x = evolve_op(&u, &o, 25).unwrap();
        assert!((frob(&x) - frob(&o)).abs() < 1e-10);
    }

    #[test]
    fn haar_unitary_spreads_immediately() {
        let layout = SystemLayout::tripartite(2, 2, 2);
        let u = haar_unitary(8, &mut SeededRng::new(6, 0));
        let seed = embed(&z(), &[0], layout.site_dims()).unwrap();
        let p = lightcone(&u, &seed, &layout, 2, SUPPORT_TOL).unwrap();
        assert_eq!(p.support_sets[0], vec![0]);
        assert_eq!(p.support_sets[1], vec![0, 1, 2]);
    }

    #[test]
    fn identity_keeps_support() {
        let layout = SystemLayout::tripartite(2, 2, 2);
        let seed = embed(&z(), &[1], layout.site_dims()).unwrap();
        let p = lightcone(&identity(8), &seed, &layout, 5, SUPPORT_TOL).unwrap();
        assert!(p.support_sets.iter().all(|s| s == &vec![1]));
    }
}
