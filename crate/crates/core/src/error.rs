use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Hilbert space of {particles} bosons on {sites} sites overflows a 64-bit index")]
    CapacityOverflow { sites: usize, particles: usize },
    #[error("matrix dimension {dim} exceeds the 32-bit column index range")]
    MatrixTooLarge { dim: u64 },
    #[error("invalid Fock state: {0}")]
    InvalidState(String),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: u64, dim: u64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least {needed} levels, found {found}")]
    TooFewLevels { needed: usize, found: usize },
    #[error("intensities sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("spectral width {width} is degenerate")]
    DegenerateWidth { width: f64 },
    #[error("selection is empty")]
    EmptySelection,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
