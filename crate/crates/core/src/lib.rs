//! Lower bounds on the concurrence of bipartite states.
//!
//! The crate computes concurrence estimates from three sources:
//!
//! - entanglement witnesses, rescaled by their optimal constant
//!   ([`lambda`]) so that `-Tr(rho W)` bounds the concurrence ([`bounds::breuer_bound`]),
//! - trace norms of the partial transpose and of the realigned matrix
//!   ([`bounds::caf_bound`]),
//! - the SO(m)-generator bound and, for two qubits, the exact Wootters formula.
//!
//! State and witness families live in [`states`] and [`witnesses`];
//! [`sweep`] evaluates bounds along a parameter grid and [`acceptance`]
//! holds the end-to-end reproduction checks run by `conbound selftest`.

pub mod acceptance;
pub mod bounds;
pub mod catalog;
pub mod error;
pub mod exec;
pub mod io;
pub mod lambda;
pub mod linalg;
pub mod states;
pub mod sweep;
pub mod witnesses;

pub use error::{Error, Result};
