use thiserror::Error;

/// Errors produced while building lattices, operators and models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("group order must be at least 1")]
    EmptyGroup,
    #[error("not a homomorphism: n={multiplier} does not satisfy {codomain} | n*{domain}")]
    NotAHomomorphism {
        domain: usize,
        codomain: usize,
        multiplier: usize,
    },
    #[error("degenerate lattice: {rows}x{cols} (both dimensions must be at least 2)")]
    DegenerateLattice { rows: usize, cols: usize },
    #[error("invalid {kind} id {id} (lattice has {count})")]
    InvalidId {
        kind: &'static str,
        id: usize,
        count: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operators live on different site layouts")]
    LayoutMismatch,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("Hilbert space dimension {dimension} exceeds the cap {cap}")]
    DimensionCap { dimension: u128, cap: usize },
    #[error("reference state outside ground sector")]
    OutsideGroundSector,
    #[error("internal consistency: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
