//! Eigensolvers, parallel parameter sweeps, file formats and the command line
//! for chaos diagnostics of the tilted Bose-Hubbard chain. The physics and
//! statistics live in [`tbh_core`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigensolve;
mod error;
pub mod io;
pub mod report;
pub mod sweep;

pub use error::{exit, Error, Result};
pub use tbh_core as core;
