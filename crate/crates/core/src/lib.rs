//! Nonlocality distillation for correlated classical and quantum nonlocal
//! boxes.
//!
//! The crate evaluates the rotated-Pauli measurement protocol ("protocol P")
//! on `n` copies of a correlated quantum box and the classical parity
//! protocol on correlated classical boxes, builds the `n`-copy Gram-matrix
//! semidefinite program together with its dual, and checks explicit dual
//! certificates proving that protocol P is optimal for one, two and three
//! copies. A small first-order SDP solver is included as an independent
//! cross-check.
//!
//! Modules, bottom up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, Jacobi
//!   eigensolver, PSD tests.
//! - [`boxes`]: correlated NLBs and qNLBs and the box value functional.
//! - [`protocols`]: protocol P and the parity protocol, closed form and
//!   brute force.
//! - [`sdp`]: the Gram-matrix program, its weights and XOR constraints.
//! - [`certificates`]: dual certificates for n = 1, 2, 3.
//! - [`solver`]: projection-based primal solver.

pub mod boxes;
pub mod certificates;
pub mod linalg;
pub mod protocols;
pub mod sdp;
pub mod solver;

pub use boxes::BoxParam;
pub use linalg::ComplexMatrix;
