//! Excitation spectra of a Rydberg impurity immersed in a Bose gas.
//!
//! The crate walks the full chain from the Rydberg electron wavefunction to
//! observable lineshapes:
//!
//! - [`wavefunction`]: quantum-defect radial wavefunctions (Numerov).
//! - [`pseudopotential`]: the contact-interaction molecular potential V(r).
//! - [`bound_states`]: single-atom levels and condensate-mode overlaps in a
//!   finite spherical box.
//! - [`spectra_models`]: exact binomial/multinomial occupation spectra and
//!   their Gaussian limit.
//! - [`fda`]: many-body absorption spectra from the time-domain overlap of
//!   free and interacting evolutions at fixed density.
//! - [`mean_field`]: density-proportional line shift and the local-density
//!   lineshape for a trapped sample.
//! - [`trap`]: trap density profiles, shell decomposition, and trap-averaged
//!   spectra.
//!
//! Lengths and energies are handled in Hartree atomic units inside the
//! electron-scale modules, densities in SI, spectra in Hz; [`units`] is the
//! conversion boundary.

pub mod bound_states;
pub mod constants;
pub mod eigen;
pub mod error;
pub mod fda;
pub mod grid;
pub mod mean_field;
pub mod physics;
pub mod pipeline;
pub mod pseudopotential;
pub mod spectra_models;
pub mod spectrum;
pub mod trap;
pub mod units;
pub mod wavefunction;

pub use error::{Error, Result};
