//! Numerical substrate: dense complex matrices, tensor layouts, sampling.

pub mod layout;
pub mod linalg;
pub mod pauli;
pub mod random;
pub mod tensor;

pub use layout::SystemLayout;
pub use linalg::{CMatrix, CVector, C64};
pub use random::SeededRng;
