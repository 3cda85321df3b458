//! A desk-scale numerical laboratory for lattice density functional theory.
//!
//! The crate builds many-body Hamiltonians for spinless fermions on small
//! one-dimensional lattices, diagonalizes them exactly, and uses the full
//! spectra to compute objects that are usually only defined through limits:
//! constrained-search density functionals via their concave dual, static
//! density response kernels (including the degenerate-ensemble case and its
//! equal-weights cancellation), regularized spectral inverses of those
//! kernels, and density-to-potential (Kohn-Sham) inversion with
//! representability diagnostics.
//!
//! Conventions used throughout:
//! - integrals are `spacing * sum` over sites; densities are site
//!   occupations divided by `spacing`,
//! - potentials are identified up to additive constants and compared in the
//!   zero-mean gauge,
//! - degenerate ground states are represented by the equal-weights
//!   (canonical) ensemble unless explicit weights are requested.

pub mod ensembles;
pub mod error;
pub mod inversion;
pub mod lattice;
pub mod lieb;
pub mod operators;
pub mod presets;
pub mod response;
pub mod spectral;

pub use error::{LabError, Result};
