//! Deciding and simulating measurement-and-feedback preparation of
//! translation-invariant matrix product states.

pub mod basis;
pub mod builders;
pub mod classify;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod mps;
pub mod protocol;
pub mod push;
pub mod report;

pub use basis::{clock_shift_basis, pauli_basis, ErrorBasis};
pub use builders::{build_example, Example};
pub use config::{Config, Tolerances};
pub use error::{GlueError, Result};
pub use mps::{MpsTensor, SchmidtSpectrum, TransferMatrix};
