//! Synthesis and operator-Schmidt analysis of bipartite qudit gates.
//!
//! Two compilers target the gate set of generalized controlled-X (GCX) gates
//! plus single-partite y/z rotation-types:
//!
//! * [`controlled`] handles controlled-unitaries `Σ_i |i><i| ⊗ U_i` on
//!   `C^2 ⊗ C^N`, emitting `2(N−1)` GCX gates.
//! * [`diagonal`] handles gates locally equivalent to a diagonal unitary on
//!   `C^M ⊗ C^N`, emitting `2M(N−1)` GCX gates.
//!
//! Every emitted [`circuit::Circuit`] can be evaluated back to a matrix and
//! compared with the target up to global phase. [`schmidt`] computes operator
//! Schmidt ranks by realignment and the closed-form product expansions of the
//! canonical diagonal cores.

pub mod circuit;
#[cfg(feature = "cli")]
pub mod cli;
pub mod controlled;
pub mod diagonal;
pub mod error;
pub mod formats;
pub mod gates;
pub mod kak;
pub mod linalg;
pub mod random;
pub mod schmidt;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
