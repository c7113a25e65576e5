//! Heisenberg dynamics of walls: evolution, verification, invariant algebras.

pub mod evolve;
pub mod gauge;
pub mod invariants;
pub mod scan;
pub mod verify;

pub use evolve::{evolve_op, lightcone, support, LightConeProfile, SUPPORT_TOL};
pub use verify::{verify_wall, WallReport};
pub use invariants::{
    commuting_ops, conserved_algebra, fragment_decomposition, invariant_algebras, CommutingOps, FragmentDecomposition,
    InvariantAlgebras,
};
pub use gauge::{gauged_sequence, haar_gauges, GaugedSequence};
pub use scan::{scan_chain, BrickworkChain, ScanReport, Window};
