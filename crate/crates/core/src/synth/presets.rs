//! Catalogue of qubit-based walls.
//!
//! Conditional gates use Haar branch unitaries on the flanks; flank dimensions
//! default to 2 and may be raised for the Abelian presets. Each preset records
//! the central algebra it is built around.

use crate::algebra::{close_algebra, MatrixAlgebra};
use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{identity, kron, kron_all, matmul, CMatrix, DEFAULT_RANK_TOL};
use crate::kernel::pauli::{parse_pauli, x};
use crate::kernel::random::{haar_unitary, SeededRng};
use crate::kernel::tensor::embed;

use super::gates::{cnot, cnot_reversed, controlled_by_basis, cz, fswap, swap, zz_phase, ControlSide};
use super::wall::{synth_wall, CentralAlgebra, WallSpec, WallUnitary};

pub const PRESET_NAMES: [&str; 7] = [
    "abelian-pair",
    "reducible-composite",
    "soliton-x",
    "uncoupled-center",
    "swap-zz",
    "fswap",
    "nonabelian-cnot",
];

/// Fixed coupling angle of the `swap-zz` central gate.
pub const SWAP_ZZ_ANGLE: f64 = 0.3;

/// Preset with two-dimensional flanks.
pub fn preset_wall(name: &str, rng: &mut SeededRng) -> Result<WallUnitary> {
    preset_wall_with(name, 2, 2, rng)
}

/// Central site dimensions of a preset.
pub fn preset_center_dims(name: &str) -> Result<Vec<usize>> {
    Ok(match name {
        "abelian-pair" | "soliton-x" => vec![2],
        "reducible-composite" | "swap-zz" | "fswap" | "nonabelian-cnot" => vec![2, 2],
        "uncoupled-center" => vec![2, 2, 2],
        other => return Err(WallError::UnknownPreset(other.to_string())),
    })
}

/// The central algebra a preset is built around.
pub fn preset_central_algebra(name: &str) -> Result<MatrixAlgebra> {
    let dims = preset_center_dims(name)?;
    let pauli = |s: &[&str]| -> Result<MatrixAlgebra> {
        let gens = s.iter().map(|p| parse_pauli(p)).collect::<Result<Vec<_>>>()?;
        close_algebra(dims.clone(), &gens, DEFAULT_RANK_TOL)
    };
    match name {
        "abelian-pair" | "soliton-x" | "swap-zz" => Ok(MatrixAlgebra::diagonal(dims)),
        "reducible-composite" => pauli(&["ZI"]),
        "uncoupled-center" => pauli(&["ZII"]),
        "fswap" | "nonabelian-cnot" => pauli(&["XI", "ZX"]),
        other => Err(WallError::UnknownPreset(other.to_string())),
    }
}

pub fn preset_layout(name: &str, d_l: usize, d_r: usize) -> Result<SystemLayout> {
    SystemLayout::from_regions(&[d_l], &preset_center_dims(name)?, &[d_r])
}

fn branches(n: usize, dim: usize, rng: &mut SeededRng) -> Vec<CMatrix> {
    (0..n).map(|_| haar_unitary(dim, rng)).collect()
}

/// `Σₐ ξₐ ⊗ |a⟩⟨a|` on `L ⊗ qubit`.
fn left_conditional(d_l: usize, rng: &mut SeededRng) -> Result<CMatrix> {
    controlled_by_basis(&branches(2, d_l, rng), ControlSide::Second)
}

/// `Σ_b |b⟩⟨b| ⊗ ζ_b` on `qubit ⊗ R`.
fn right_conditional(d_r: usize, rng: &mut SeededRng) -> Result<CMatrix> {
    controlled_by_basis(&branches(2, d_r, rng), ControlSide::First)
}

/// Builds a named preset with flank dimensions `d_l`, `d_r`.
pub fn preset_wall_with(name: &str, d_l: usize, d_r: usize, rng: &mut SeededRng) -> Result<WallUnitary> {
    let layout = preset_layout(name, d_l, d_r)?;
    let a_c = preset_central_algebra(name)?;
    let dims = layout.site_dims().to_vec();
    let (il, ir) = (identity(d_l), identity(d_r));
    let u = match name {
        "abelian-pair" => {
            let v = left_conditional(d_l, rng)?;
            let w = right_conditional(d_r, rng)?;
            matmul(&kron(&il, &w), &kron(&v, &ir))
        }
        "soliton-x" => {
            // the block permutation sits between the two conditional gates
            let v = left_conditional(d_l, rng)?;
            let w = right_conditional(d_r, rng)?;
            let pi = kron_all([&il, &x(), &ir]);
            matmul(&matmul(&kron(&il, &w), &pi), &kron(&v, &ir))
        }
        "reducible-composite" => {
            let v = embed(&left_conditional(d_l, rng)?, &[0, 1], &dims)?;
            let w = embed(&right_conditional(d_r, rng)?, &[2, 3], &dims)?;
            matmul(&w, &v)
        }
        "uncoupled-center" => {
            let v = embed(&left_conditional(d_l, rng)?, &[0, 1], &dims)?;
            let c = embed(&cz(), &[1, 3], &dims)?;
            let w = embed(&right_conditional(d_r, rng)?, &[3, 4], &dims)?;
            matmul(&matmul(&w, &c), &v)
        }
        "swap-zz" => {
            let v = embed(&left_conditional(d_l, rng)?, &[0, 1], &dims)?;
            let c = embed(&matmul(&zz_phase(SWAP_ZZ_ANGLE), &swap()), &[1, 2], &dims)?;
            let w = embed(&right_conditional(d_r, rng)?, &[2, 3], &dims)?;
            matmul(&matmul(&w, &c), &v)
        }
        "fswap" => {
            if d_l != 2 || d_r != 2 {
                return Err(WallError::Dimension("fswap preset needs qubit flanks".into()));
            }
            let v = embed(&cnot(), &[0, 1], &dims)?;
            let c = embed(&fswap(), &[1, 2], &dims)?;
            let w = embed(&cnot_reversed(), &[2, 3], &dims)?;
            matmul(&matmul(&w, &c), &v)
        }
        "nonabelian-cnot" => {
            let spec = WallSpec::haar(
                layout.clone(),
                CentralAlgebra::Pauli(vec!["XI".into(), "ZX".into()]),
                rng.seed(),
            );
            return synth_wall(&spec, rng);
        }
        other => return Err(WallError::UnknownPreset(other.to_string())),
    };
    WallUnitary::from_unitary(u, layout, a_c, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::verify::verify_wall;
    use crate::kernel::linalg::frob;
    use crate::kernel::pauli::z;

    #[test]
    fn every_preset_is_a_wall_around_its_algebra() {
        for name in PRESET_NAMES {
            let w = preset_wall(name, &mut SeededRng::new(21, 0)).unwrap();
            let rep = verify_wall(&w.u, &w.layout).unwrap();
            assert!(rep.left && rep.right, "{name}");
            assert!(rep.a_c().unwrap().equals(&w.a_c, 1e-8), "{name}: A_C mismatch");
        }
    }

    #[test]
    fn soliton_flips_central_z() {
        let w = preset_wall("soliton-x", &mut SeededRng::new(2, 0)).unwrap();
        let zc = embed(&z(), &[1], w.layout.site_dims()).unwrap();
        let img = matmul(&matmul(&w.u, &zc), &w.u.adjoint());
        assert!(frob(&(img + &zc)) < 1e-12);
        assert!(w.has_permutation());
    }

    #[test]
    fn unknown_preset_is_rejected() {
        assert!(matches!(
            preset_wall("nope", &mut SeededRng::new(0, 0)),
            Err(WallError::UnknownPreset(_))
        ));
    }

    #[test]
    fn abelian_presets_accept_wider_flanks() {
        let w = preset_wall_with("abelian-pair", 4, 4, &mut SeededRng::new(3, 0)).unwrap();
        assert_eq!(w.u.nrows(), 32);
        assert!(verify_wall(&w.u, &w.layout).unwrap().is_wall());
    }
}
