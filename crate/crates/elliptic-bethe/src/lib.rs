//! Numerical toolkit for the algebraic Bethe ansatz of the elliptic quantum
//! group associated with sl2.
//!
//! The crate is organised bottom-up:
//!
//! * [`theta`] — the odd Jacobi theta function, derivatives, characteristics;
//! * [`tensor`] — weight bookkeeping on tensor powers of C^2 and embedding of
//!   local operators with dynamical shifts;
//! * [`rmatrix`] — the dynamical R-matrix, its coefficient functions, the
//!   dynamical Yang-Baxter equation and face (Boltzmann) weights;
//! * [`chain`] — fundamental spin chains: L-operator, operator entries
//!   a, b, c, d as difference operators, transfer matrix;
//! * [`bethe`] — Bethe ansatz equations, Newton solver, eigenvalue and
//!   eigenvector formulas;
//! * [`qlame`] — the scalar q-deformed Lame operator, its Bethe spectrum,
//!   continuation in the Bloch exponent and the classical limit;
//! * [`lattice`] — interaction-round-a-face transfer matrices on path states
//!   and the eight-vertex model with its intertwining vectors;
//! * [`verify`] — randomised residual suites used by the command line and the
//!   acceptance tests;
//! * [`cli`] — configuration, JSON reports and the subcommand entry points.
//!
//! Start with `examples/` for runnable walkthroughs of each layer.

pub mod bethe;
pub mod chain;
pub mod cli;
pub mod error;
pub mod lattice;
pub mod qlame;
pub mod rmatrix;
pub mod tensor;
pub mod theta;
pub mod verify;

pub use error::{Error, Result};
pub use theta::ModularParams;
