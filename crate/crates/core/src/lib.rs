//! Variational quantum state diagonalization (VQSD) on a dense simulator.
//!
//! A parameterized unitary `U` is trained so that `U ρ U†` becomes diagonal in
//! the computational basis. The diagonal then holds the inferred eigenvalues of
//! `ρ` and the columns of `U†` the inferred eigenvectors.
//!
//! Conventions used throughout the crate:
//!
//! - Qubits are indexed from 0. Qubit 0 is the most significant bit of a
//!   basis-state index, so the bitstring `z₀z₁…z_{n-1}` prints with `z₀` leftmost.
//! - Density matrices and unitaries are dense [`nalgebra::DMatrix`] values over
//!   [`num_complex::Complex64`].
//!
//! The crate is organized bottom-up: [`state`] holds the linear algebra on
//! states, [`circuits`] the purity test circuits, [`ansatz`] the trainable
//! unitaries, [`cost`] the cost functions and error bounds, [`optimize`] the
//! classical minimizers, [`readout`] eigenvalue/eigenvector extraction,
//! [`models`] the physics workloads and [`qpca`] the comparison baseline.

pub mod ansatz;
pub mod circuits;
pub mod cost;
pub mod error;
pub mod gates;
pub mod io;
pub mod models;
pub mod optimize;
pub mod qpca;
pub mod random;
pub mod readout;
pub mod state;

pub use error::{Result, VqsdError};
pub use num_complex::Complex64 as C64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Default absolute tolerance for validity checks on states and unitaries.
pub const DEFAULT_TOL: f64 = 1e-10;
