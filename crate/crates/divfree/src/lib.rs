//! Numerical toolkit for incompressible 2D flow on the unit torus.
//!
//! The crate provides the deterministic building blocks for working with
//! divergence-free velocity fields at spectral accuracy:
//!
//! * [`spectral`] — periodic grids, FFT-based calculus (derivatives,
//!   divergence, curls), 2/3 dealiasing, and L² inner products.
//! * [`hodge`] — the Helmholtz–Hodge decomposition and the spectral Leray
//!   projection onto divergence-free, zero-mean fields.
//! * [`noise`] — Gaussian random fields and divergence-free Gaussian noise
//!   built by pushing stream functions through the perpendicular gradient.
//! * [`solver`] — a pseudo-spectral vorticity–streamfunction Navier–Stokes
//!   solver for generating ground-truth trajectories.
//! * [`flowmatch`] — flow-matching probability paths restricted to the
//!   divergence-free subspace: interpolants, conditional and marginal
//!   velocities, the projected regression loss, and ODE sampling.
//! * [`diagnostics`] — divergence error, pressure recovery, enstrophy and
//!   energy spectra with slope fits, and staged rollout reports.
//! * [`io`] — the FLO1 trajectory file format and JSON run manifests.
//!
//! The companion guide under `book/` walks through the concepts; its code
//! snippets compile and run as doc-tests of this crate.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod flowmatch;
pub mod grid;
pub mod hodge;
pub mod io;
pub mod noise;
pub mod rng;
pub mod solver;
pub mod spectral;

mod fft;

pub use error::{Error, Result};
pub use field::{ScalarField, VectorField2};
pub use grid::{Grid, WavenumberTable};
pub use spectral::SpectralField;

#[cfg(doctest)]
mod book_doctests;
