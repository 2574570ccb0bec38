use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("variable count mismatch: expected {expected}, found {found}")]
    VarMismatch { expected: usize, found: usize },

    #[error("variable index {index} out of range for {n_vars} variables")]
    IndexOutOfRange { index: usize, n_vars: usize },

    #[error("d∘d is nonzero at degree {degree}")]
    NotAComplex { degree: i64 },

    #[error("window overflow: {0}")]
    WindowOverflow(String),

    #[error("tower too shallow: need level {need}, have {have}")]
    TowerTooShallow { need: usize, have: usize },

    #[error("block {block} is not good: {reason}")]
    NotGood { block: usize, reason: String },

    #[error("ramified local type at {point}: {reason}")]
    Ramified { point: String, reason: String },

    #[error("no unramifying index dividing {bound}")]
    NoRamificationIndex { bound: u32 },

    #[error("lattice is not locally free on the window: {0}")]
    NotLocallyFree(String),

    #[error("no stabilization within iteration cap {cap}")]
    NoStabilization { cap: usize },

    #[error("p0 not found below cap {cap}")]
    P0NotFound { cap: usize },

    #[error("cyclic action incompatible with the lattice: {0}")]
    IncompatibleAction(String),

    #[error("band dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}
