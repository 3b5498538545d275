//! Exact small-ring numerics for the statement that local Hamiltonian dynamics cannot
//! quickly implement the lattice shift.
//!
//! Modules, bottom up:
//! - [`lattice`]: the ring, distances and named regions;
//! - [`linalg`]: dense operators on site subsets, norms, partial traces, Haar sampling,
//!   plus sparse/Krylov tools for 12-site rings;
//! - [`pauli`]: Pauli strings and the normalized operator inner product;
//! - [`hamiltonian`]: random two-site Hamiltonians and their far/cut decompositions;
//! - [`evolution`]: propagators, the region projector, light-cone scans, circuitization;
//! - [`shift`]: the shift unitary, hard states and the distance certificates;
//! - [`super2`]: operator-space (superoperator) versions and the two-copy constructions;
//! - [`bounds`]: closed-form bounds, time thresholds and front fitting;
//! - [`cli`]: configuration, experiments and output files behind the `shiftlab` binary.

pub mod error;
pub mod lattice;
pub mod linalg;
pub mod hamiltonian;
pub mod pauli;
pub mod evolution;
pub mod bounds;
pub mod shift;
pub mod super2;
pub mod cli;

pub use error::{Error, Result};
