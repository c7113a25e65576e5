//! Finite-dimensional operator algebras.

pub mod closure;
pub mod factor;
pub mod space;

pub use closure::{close_algebra, MatrixAlgebra};
pub use factor::{extract_central_factor, extract_factor, FactorSide};
pub use space::OperatorSpace;
