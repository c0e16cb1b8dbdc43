//! Quantum-optimal estimation limits for far-field thermal (blackbody) light.
//!
//! The crate is organised bottom-up:
//!
//! - [`gaussian`]: zero-mean bosonic Gaussian states in the ladder ordering
//!   `(a1, a1†, a2, a2†, …)`, passive mode unitaries and symplectic spectra.
//! - [`observable`] and [`fock`]: quadratic observables, their commutator
//!   algebra, Gaussian expectation values and truncated Fock-space matrices.
//! - [`fisher`]: the Gao–Lee quantum Fisher information and SLDs, classical
//!   Fisher information and the Cramér–Rao cost functionals.
//! - [`blackbody`]: Planck statistics, spectral QFI, the temperature variance
//!   bound and optimal observation frequencies.
//! - [`spatial`]: two-spatial-mode coherence parameters `(⟨n⟩, |γ|, φ)`, their
//!   SLDs and estimator observables, and the weighted measurement scheme.
//! - [`counting`]: exact photon-count distributions and count-based Fisher
//!   information, with a brute-force Fock oracle.
//! - [`schemes`]: Fourier-transform and random-phase scheme benchmarks.
//! - [`povm`]: six-element POVM search on the `{|0,0⟩, |0,1⟩, |1,0⟩}` truncation.
//! - [`oracle`]: independent brute-force checks used by tests and `verify`.
//! - [`cli`]: the `thermoptic` command-line front end.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod blackbody;
pub mod cli;
pub mod counting;
pub mod error;
pub mod fisher;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod observable;
pub mod optimize;
pub mod oracle;
pub mod povm;
pub mod schemes;
pub mod spatial;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
