//! Fermionic Gaussian (quasifree) states in Araki's self-dual formalism.
//!
//! A state on `n_alice + n_bob` fermion modes is described by its covariance
//! matrix `S` acting on the one-particle space `K = C^n ⊕ C^n ⊕ C^m ⊕ C^m`,
//! ordered as `(A+, A−, B+, B−)`. A field vector `f` defines the field
//! operator `B(f) = Σ f⁺_j c_j + f⁻_j c_j†`, and the covariance reproduces all
//! two-point functions through `tr(ρ B(f) B(g)) = ⟨Γf, S g⟩`.
//!
//! The crate provides:
//!
//! - [`selfdual`]: shapes, the conjugation `Γ`, covariance validation,
//!   reductions and Bogolubov transformations;
//! - [`wick`]: two-point functions and the signed pairing expansion;
//! - [`cert`]: certification of maximally entangled pure states and the
//!   local normal form;
//! - [`dynamics`]: the entangling one-particle Hamiltonian and its flow;
//! - [`jordan_wigner`]: the spin-chain pair state at covariance level;
//! - [`fock`]: a dense Fock-space oracle used to check all of the above;
//! - [`sample`]: random Bogolubov transformations, fields and states;
//! - [`io`] and [`cli`]: the JSON formats and the command-line front end.

pub mod cert;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod io;
pub mod jordan_wigner;
pub mod linalg;
pub mod sample;
pub mod selfdual;
pub mod wick;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Dense complex matrix used for every one-particle and Fock-space operator.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<Complex64>;

/// Default absolute tolerance for invariant checks (max-entry deviations).
pub const DEFAULT_EPS: f64 = 1e-9;
