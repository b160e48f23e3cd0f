use thiserror::Error;

/// Contract violations and I/O failures surfaced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary: ‖M†M − I‖_F = {residual:.3e} exceeds {tol:.1e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("state is not normalized: |‖ψ‖₂ − 1| = {deviation:.3e}")]
    NotNormalized { deviation: f64 },

    #[error("invalid target qubits: {0}")]
    InvalidTargets(String),

    #[error("measurement basis is not orthonormal and complete: {0}")]
    InvalidBasis(String),

    #[error("bell label components must be bits, got ({x}, {y})")]
    InvalidBellLabel { x: u8, y: u8 },

    #[error("correction algebra violation: {0}")]
    CorrectionAlgebra(String),

    #[error("substitution index {at} out of range for {trials} trials")]
    SubstitutionOutOfRange { at: u64, trials: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("record parse error: {0}")]
    RecordParse(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
