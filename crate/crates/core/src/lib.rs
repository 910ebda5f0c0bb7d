//! Truncated multi-mode bosonic Fock-space toolkit for qudits encoded in the
//! n-pump-photon subspaces of three-wave-mixing (χ⁽²⁾) interactions.
//!
//! The crate is organised bottom-up:
//!
//! * [`fock`]: mode sets, Fock states and ordered subspace bases.
//! * [`operators`]: second-quantized expressions and their dense restrictions.
//! * [`liealg`]: real Lie-algebra closure under `i[A, B]` and the qutrit generator set.
//! * [`gates`]: unitary evolution, optical primitives, circuits and the controlled-Z builds.
//! * [`injection`]: coherent photon injection/subtraction with ancilla modes.
//! * [`trotter`]: bulk/boundary rotations on `H_{n+1}` and first-order Trotter products.
//! * [`synthesis`]: numerical compilation of targets into pulse sequences.
//! * [`report`]: machine-readable check reports.

pub mod error;
pub mod fock;
pub mod gates;
pub mod injection;
pub mod liealg;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod synthesis;
pub mod trotter;

pub use error::{Error, Result};
pub use fock::{FockState, ModeSet, ModeSpec, SubspaceBasis};
pub use gates::{Circuit, Gate, PhaseConvention};
pub use liealg::{AlgebraBasis, ClosureReport};
pub use linalg::{CMatrix, CVector, C64};
pub use operators::{BoundaryPauli, OperatorExpr, OperatorMatrix, PauliAxis};
pub use synthesis::{PulseSequence, SynthesisProblem};
