//! Kirkwood-Dirac quasiprobability work statistics for qubit circuits.
//!
//! The crate is organised bottom-up: [`linalg`] holds the dense complex
//! kernel, [`system`] the Hamiltonian and states, [`gates`] circuits and the
//! text format, [`kdq`] the quasiprobability tables, [`thermo`] work
//! functionals and [`decomposition`] the deep-circuit identities.

pub mod decomposition;
pub mod figures;
pub mod gates;
pub mod kdq;
pub mod linalg;
pub mod par;
pub mod random;
pub mod sweep;
pub mod system;
pub mod thermo;
pub mod verify;

pub use gates::{Circuit, Gate};
pub use kdq::{kdq_table, KdqTable};
pub use linalg::{CMatrix, C64};
pub use system::{build_hamiltonian, DensityMatrix, Hamiltonian, QubitStateParams};
