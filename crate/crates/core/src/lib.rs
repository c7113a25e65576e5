//! Numerics for tri-partite "wall" unitaries: operator algebras, their block
//! decompositions, wall synthesis and verification, and state-level probes.

pub mod algebra;
pub mod blocks;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod observables;
pub mod synth;

pub use error::{Result, WallError};
pub use kernel::{CMatrix, CVector, SeededRng, SystemLayout, C64};
