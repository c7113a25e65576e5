use thiserror::Error;

/// Errors raised by wallkit operations.
#[derive(Debug, Error)]
pub enum WallError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid layout: {0}")]
    Layout(String),

    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("operator is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("not of product form: {0}")]
    NotProductForm(String),

    #[error("closure did not converge within {0} rounds")]
    ClosureDiverged(usize),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("not an automorphism: {0}")]
    NotAutomorphism(String),

    #[error("wall violated: {0}")]
    WallViolated(String),

    #[error("gauge does not preserve the invariant algebra (residual {residual:.3e})")]
    GaugeRejected { residual: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T, E = WallError> = std::result::Result<T, E>;
