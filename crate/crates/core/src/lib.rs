//! Numerical laboratory for the mean-field limit of bosonic many-body systems.
//!
//! The crate works on a finite mode basis: a `d`-dimensional one-particle
//! space carrying a Hermitian one-body matrix and a position-diagonal pair
//! kernel. On top of that it provides
//!
//! * [`fock`]: occupation-number bases, ladder operators, second
//!   quantization, Weyl displacements and Hamiltonian assembly;
//! * [`combinatorics`]: Laguerre polynomials, the `d_{n,m}` normalization,
//!   the displaced-θ coefficients `A_k` and the Krasikov envelope;
//! * [`states`]: product, coherent and partially factorized initial states
//!   and their normalized superpositions;
//! * [`hartree`]: the mean-field equation with conservation monitoring;
//! * [`dynamics`]: exact propagation `e^{-itH}` and the fluctuation
//!   propagator;
//! * [`rdm`]: one-particle reduced density matrices and norms;
//! * [`harness`]: convergence sweeps, invariant suites and rate fits.
//!
//! Units: `ħ = 1`, all energies and times dimensionless.

pub mod combinatorics;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod harness;
pub mod hartree;
pub mod linalg;
pub mod rdm;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
