//! Spectral analysis and approximate-controllability toolkit for the
//! linearized Boussinesq system in a periodic channel `T x (0, L)`, with the
//! control acting on the temperature through the upper wall.
//!
//! - [`spectra`]: both branches of the adjoint spectrum per Fourier mode.
//! - [`adjoint`]: boundary matrix of the sixth-order adjoint ODE, its
//!   factored determinant, eigenfunctions and the boundary observation.
//! - [`fattorini`]: multiplier matrix, the function `F`, scans in the
//!   diffusivity and per-eigenvalue unique-continuation verdicts.
//! - [`galerkin`]: per-mode semidiscrete simulation, input-to-state maps and
//!   least-squares control synthesis.

pub mod adjoint;
pub mod config;
pub mod error;
pub mod export;
pub mod fattorini;
pub mod galerkin;
pub mod params;
pub mod roots;
pub mod scaled;
pub mod spectra;

pub use error::{ConfigError, ParamError};
pub use params::{ChannelParams, ModeIndex, TolerancePolicy};
