//! Locating walls in a Floquet brickwork chain.
//!
//! Every contiguous central window of width up to `max_width` with non-empty
//! flanks is checked. A window that contains a wall also certifies every
//! wider window around it, so only minimal windows are reported as walls.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WallError};
use crate::kernel::layout::SystemLayout;
use crate::kernel::linalg::{identity, matmul, CMatrix};
use crate::kernel::random::{haar_unitary, SeededRng};
use crate::kernel::tensor::embed;
use crate::synth::gates::{controlled_by_basis, ControlSide};

use super::evolve::SUPPORT_TOL;
use super::verify::{verify_side, Side};

/// Qubit chains larger than this are refused (dense `2ⁿ × 2ⁿ` matrices).
pub const MAX_CHAIN_SITES: usize = 10;

/// Two brickwork layers of nearest-neighbour gates on a chain of qubits.
/// Layer A acts on bonds `(0,1), (2,3), …`, layer B on `(1,2), (3,4), …`.
#[derive(Debug, Clone)]
pub struct BrickworkChain {
    pub sites: usize,
    pub layer_a: Vec<CMatrix>,
    pub layer_b: Vec<CMatrix>,
}

impl BrickworkChain {
    fn check(sites: usize) -> Result<()> {
        if !(3..=MAX_CHAIN_SITES).contains(&sites) {
            return Err(WallError::Layout(format!(
                "chain needs 3..={MAX_CHAIN_SITES} sites, got {sites}"
            )));
        }
        Ok(())
    }

    pub fn haar(sites: usize, rng: &mut SeededRng) -> Result<Self> {
        Self::check(sites)?;
        Ok(Self {
            sites,
            layer_a: (0..sites / 2).map(|_| haar_unitary(4, rng)).collect(),
            layer_b: (0..(sites - 1) / 2).map(|_| haar_unitary(4, rng)).collect(),
        })
    }

    pub fn identity(sites: usize) -> Result<Self> {
        Self::check(sites)?;
        Ok(Self {
            sites,
            layer_a: vec![identity(4); sites / 2],
            layer_b: vec![identity(4); (sites - 1) / 2],
        })
    }

    /// Haar chain with a conditional-gate wall centred on `site`: the bond
    /// `(site−1, site)` carries `Σₐ ξₐ ⊗ |a⟩⟨a|` and `(site, site+1)` carries
    /// `Σ_b |b⟩⟨b| ⊗ ζ_b`.
    pub fn with_wall(sites: usize, site: usize, rng: &mut SeededRng) -> Result<Self> {
        let mut chain = Self::haar(sites, rng)?;
        if site == 0 || site + 1 >= sites {
            return Err(WallError::Layout(format!("wall site {site} needs neighbours on both sides")));
        }
        let left = controlled_by_basis(&[haar_unitary(2, rng), haar_unitary(2, rng)], ControlSide::Second)?;
        let right = controlled_by_basis(&[haar_unitary(2, rng), haar_unitary(2, rng)], ControlSide::First)?;
        *chain.gate_mut(site - 1) = left;
        *chain.gate_mut(site) = right;
        Ok(chain)
    }

    /// Gate on bond `(b, b+1)`.
    pub fn gate_mut(&mut self, b: usize) -> &mut CMatrix {
        if b % 2 == 0 {
            &mut self.layer_a[b / 2]
        } else {
            &mut self.layer_b[b / 2]
        }
    }

    /// `U = B · A`.
    pub fn floquet(&self) -> Result<CMatrix> {
        let dims = vec![2; self.sites];
        let layer = |gates: &[CMatrix], first: usize| -> Result<CMatrix> {
            let mut u = identity(1 << self.sites);
            for (k, g) in gates.iter().enumerate() {
                let b = first + 2 * k;
                u = matmul(&embed(g, &[b, b + 1], &dims)?, &u);
            }
            Ok(u)
        };
        Ok(matmul(&layer(&self.layer_b, 1)?, &layer(&self.layer_a, 0)?))
    }
}

/// Central window `[start, start + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Window {
    pub start: usize,
    pub width: usize,
}

impl Window {
    pub fn contains(&self, other: &Window) -> bool {
        self.start <= other.start && other.start + other.width <= self.start + self.width
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowResult {
    pub window: Window,
    pub left: bool,
    pub right: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub checked: Vec<WindowResult>,
    /// Windows passing both checks.
    pub passing: Vec<Window>,
    /// Passing windows containing no smaller passing window.
    pub walls: Vec<Window>,
}

/// Candidate windows of width `1..=max_width` leaving both flanks non-empty.
pub fn candidate_windows(sites: usize, max_width: usize) -> Vec<Window> {
    let mut out = Vec::new();
    for width in 1..=max_width {
        for start in 1..sites {
            if start + width < sites {
                out.push(Window { start, width });
            }
        }
    }
    out
}

/// Scans a Floquet unitary on `site_dims` for walls. The right flank is only
/// checked when the left one passes.
pub fn scan_unitary(u: &CMatrix, site_dims: &[usize], max_width: usize) -> Result<ScanReport> {
    let windows = candidate_windows(site_dims.len(), max_width);
    let mut checked = windows
        .par_iter()
        .map(|&w| -> Result<WindowResult> {
            let layout = SystemLayout::new(site_dims.to_vec(), w.start, w.width)?;
            let left = verify_side(u, &layout, Side::Left, SUPPORT_TOL)?.passed;
            let right = left && verify_side(u, &layout, Side::Right, SUPPORT_TOL)?.passed;
            Ok(WindowResult { window: w, left, right })
        })
        .collect::<Result<Vec<_>>>()?;
    checked.sort_by_key(|r| r.window);
    let passing: Vec<Window> = checked.iter().filter(|r| r.left && r.right).map(|r| r.window).collect();
    let walls = passing
        .iter()
        .filter(|w| !passing.iter().any(|o| o != *w && w.contains(o)))
        .copied()
        .collect();
    Ok(ScanReport { checked, passing, walls })
}

pub fn scan_chain(chain: &BrickworkChain, max_width: usize) -> Result<ScanReport> {
    scan_unitary(&chain.floquet()?, &vec![2; chain.sites], max_width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::linalg::unitarity_residual;

    #[test]
    fn windows_leave_flanks() {
        let w = candidate_windows(5, 2);
        assert_eq!(w.len(), 3 + 2);
        assert!(w.iter().all(|w| w.start >= 1 && w.start + w.width <= 4));
    }

    #[test]
    fn embedded_wall_is_found_alone() {
        let mut rng = SeededRng::new(11, 0);
        for site in [2, 3] {
            let chain = BrickworkChain::with_wall(6, site, &mut rng).unwrap();
            assert!(unitarity_residual(&chain.floquet().unwrap()) < 1e-10);
            let rep = scan_chain(&chain, 2).unwrap();
            assert_eq!(rep.walls, vec![Window { start: site, width: 1 }], "{:?}", rep.passing);
            assert!(rep.checked.iter().all(|r| r.left == r.right));
        }
    }

    #[test]
    fn haar_chain_has_no_walls() {
        let chain = BrickworkChain::haar(6, &mut SeededRng::new(12, 0)).unwrap();
        let rep = scan_chain(&chain, 2).unwrap();
        assert!(rep.passing.is_empty());
    }

    #[test]
    fn identity_chain_passes_everywhere() {
        let chain = BrickworkChain::identity(5).unwrap();
        let rep = scan_chain(&chain, 2).unwrap();
        assert_eq!(rep.passing.len(), rep.checked.len());
        assert_eq!(rep.walls.len(), 3);
    }
}
