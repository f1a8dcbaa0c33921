//! Finite spectral triples on one-dimensional lattices and Connes' distance
//! function `d(p, q) = sup { |f(p) − f(q)| : ‖[D, f̂]‖ ≤ 1 }`.
//!
//! - [`numerics`]: dense complex matrices, hermitian eigenvalues, spectral norm.
//! - [`triple`]: lattice Dirac operators, representations, grading, validation.
//! - [`distance`]: closed forms, the numeric maximizer and a brute-force oracle.
//! - [`graph`]: the discrete `‖df‖` norm on weighted digraphs and its distance.
//! - [`study`]: finite-N behaviour of the symmetric difference distance.
//! - [`verify`]: closed-form and identity self-checks.
//! - [`cli`]: the `connes` command-line front end.

pub mod cli;
pub mod distance;
pub mod error;
pub mod graph;
pub mod numerics;
pub mod par;
pub mod study;
pub mod triple;
pub mod verify;

pub use distance::{
    distance_exact_closed, distance_exact_open, distance_matrix, distance_numeric, distance_oracle, real_reduce,
    Distance, DistanceMatrix, DistanceQuery, DistanceResult, Method, OracleOptions, SolverOptions,
};
pub use error::{Error, Result};
pub use graph::{df_norm, graph_distance, shortest_path_oracle, WeightedDigraph};
pub use numerics::{commutator, hermitian_eigenvalues, spectral_norm, ComplexMatrix, ComplexVector, C64};
pub use par::Execution;
pub use triple::{
    build_triple, commutator_norm, validate_triple, DiracKind, LatticeFunction, LatticeSpec, SpectralTriple, Topology,
};
