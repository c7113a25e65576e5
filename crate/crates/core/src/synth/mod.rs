//! Construction of wall unitaries.

pub mod gates;
pub mod normaliser;
pub mod presets;
pub mod wall;

pub use wall::{brickwork_split, synth_wall, BlockMode, CentralAlgebra, WallSpec, WallUnitary};
pub use normaliser::{normaliser_sample, span_preservation_residual};
