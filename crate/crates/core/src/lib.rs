//! Numerical model of a periodically poled silica fiber (PPSF) photon-pair source.
//!
//! The crate is split along the physical pipeline:
//!
//! - [`dispersion`]: Sellmeier material model, weakly guiding LP01 solver for a
//!   step-index fiber, and frequency derivatives of the modal wavenumber.
//! - [`qpm`]: phase mismatch, birefringence calibration, SHG and SPDC spectra,
//!   pump tuning curves and bandwidth extraction.
//! - [`hom`]: Hong-Ou-Mandel coincidence scans, dip fitting and the dip width to
//!   bandwidth relation.
//! - [`tomography`]: polarization analyzers with dispersive waveplates, count
//!   simulation, linear-inversion and maximum-likelihood reconstruction, and
//!   entanglement metrics.
//!
//! All operations are pure functions of their inputs; randomness only enters
//! through explicit seeds.

pub mod constants;
pub mod dispersion;
mod error;
pub mod hom;
pub mod numeric;
pub mod presets;
pub mod qpm;
pub mod special;
pub mod tomography;

pub use error::{Error, Result};
