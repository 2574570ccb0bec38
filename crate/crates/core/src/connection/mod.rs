//! Elementary models, formal and global connections, local formal types and Kummer descent.

pub mod curve;
pub mod factor;
pub mod formal;
pub mod kummer;
pub mod regular;

pub use curve::{
    local_formal_type, local_formal_type_of, ramification_index, CurveConnection, LocalFormalType, PolarPart,
    PuiseuxBlock, RankOneForm,
};
pub use factor::{ExponentialFactor, Term};
pub use formal::{
    dm_lattice, presented_by, BlockVector, ConnectionAction, ElementaryModel, FormalConnection, LatticeSeed,
};
pub use kummer::{kummer_invariants, KummerData, KummerLattice};
pub use regular::{zero_matrix, DenseMatrix, RegularBlock};
