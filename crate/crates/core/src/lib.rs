//! Allocation-only building blocks for studying the chaotic phase of the
//! tilted Bose-Hubbard chain.
//!
//! Everything here is a pure function of its inputs: the Fock basis and its
//! combinatorial ranking, the sparse Hamiltonian and its matrix-vector
//! product, level-spacing-ratio statistics, generalized fractal dimensions,
//! Gaussian-orthogonal-ensemble references, energy binning and chaotic-window
//! extraction. Eigensolvers, parallel sweeps, files and the command line live
//! in the `tbh` companion crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod basis;
mod error;
pub mod hamiltonian;
pub mod matrix;
pub mod spectrum;
pub mod statistics;
pub mod sweep;

pub use basis::{dimension, BasisTable, FockState};
pub use error::{Error, Result};
pub use hamiltonian::{ModelParams, ModelWarning};
pub use matrix::{DenseSymmetric, SparseSymmetric, SymmetricOperator};
pub use spectrum::{EigenVectors, Spectrum, SpectrumKind, SpectrumNote};
