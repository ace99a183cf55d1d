//! Parent Hamiltonians of matrix product states, and what happens to their
//! spectral gap under weak local perturbations.
//!
//! The crate is organized bottom-up:
//!
//! * [`numerics`]: dense complex matrices, eigen/SVD backends, Schatten
//!   norms, partial traces. Everything downstream speaks this dialect.
//! * [`lanczos`]: matrix-free Hermitian eigensolvers with deflation, plus
//!   a CSR sparse type.
//! * [`localop`]: lattice operators as sums of windowed pieces; the bridge
//!   between few-site matrices and d^N-dimensional applications.
//! * [`mps`]: translation-invariant MPS, spanning checks, canonical form,
//!   state expansion.
//! * [`channels`]: the associated CP maps; transfer matrices, Choi
//!   operators, Stinespring dilations and their alignment.
//! * [`renorm`]: blocking of sites, the isometry that relocates a block's
//!   ground structure onto explicit coordinates, and the comparison
//!   Hamiltonian this produces.
//! * [`parent_ham`]: local ground projectors, assembled ring Hamiltonians,
//!   gaps and degeneracies.
//! * [`stability`]: the decomposition of the blocked Hamiltonian into
//!   bounded and relatively bounded pieces, and perturbation sweeps.
//!
//! All functions are deterministic: randomized algorithms take explicit
//! seeds, and repeated calls with equal inputs return identical bytes.

pub mod channels;
pub mod lanczos;
pub mod localop;
pub mod mps;
pub mod numerics;
pub mod parent_ham;
pub mod renorm;
pub mod stability;

pub use numerics::{CMat, Error, Result, C64, RANK_TOL};
