//! Exact arithmetic, windowed Laurent polynomials, sparse linear algebra and finite complexes.

pub mod complex;
pub mod poly;
pub mod rational;
pub mod series;
pub mod sparse;
pub mod window;

pub use complex::{complex_cohomology, is_acyclic, is_chain_map, mapping_cone, FiniteComplex, MonomialLabel};
pub use poly::Poly;
pub use rational::{q, Rational};
pub use series::{log_derivation, series_mul, TruncatedLaurentSeries};
pub use sparse::{nullspace, rank_of_vectors, rank_q, Echelon, SparseMatrixQ};
pub use window::{box_points, WeightWindow};
