//! Complex Wishart ("Laguerre") matrix processes, end to end.
//!
//! The crate has three layers:
//!
//! * symmetric-function and special-function machinery
//!   ([`symfun`], [`scalarfn`], [`mathyp`]),
//! * simulation of the matrix process and its eigenvalues ([`process`]),
//! * the closed-form laws of the process ([`laws`]) together with a
//!   Monte Carlo verification harness ([`verify`], [`stats`]).
//!
//! A narrative guide with runnable versions of the doc examples lives in the
//! `book/` directory of the repository.

pub mod error;
pub mod herm;
pub mod laws;
pub mod mathyp;
pub mod process;
pub mod quad;
pub mod scalarfn;
pub mod stats;
pub mod symfun;
pub mod verify;

pub use error::{Error, Result};
pub use herm::HermitianMatrix;
