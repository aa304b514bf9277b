//! Sixth-order adjoint problem per Fourier mode.
//!
//! The temperature component `xi` of an adjoint eigenfunction solves
//! `(d^2 - k^2)(d^2 - mu1^2)(d^2 - mu2^2) xi = 0` with
//! `xi = xi'' = xi''' - mu2^2 xi' = 0` at both walls. The observation used by
//! the unique-continuation test is `xi'(L)`.

mod detcheck;
mod eigen;
mod matrix;

use thiserror::Error;

pub use detcheck::{compare_determinants, random_detcheck, DetComparison, DetcheckReport, DET_FLOOR_FRACTION};
pub use eigen::{
    sin_resonance_check, solve_eigenfunction, stokes_profiles, AdjointDiagnostic, AdjointEigenfunction,
    EigenResiduals, ExpCombination, Profiles, ResonanceCheck, DEFAULT_SAMPLES,
};
pub use matrix::{
    build_m, build_m_unchecked, characteristic_roots, check_root_separation, det_factored, stokes_factors,
    BoundaryMatrix, Matrix6c,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdjointError {
    #[error("degenerate root separation: {first} and {second} differ by {gap:e}")]
    DegenerateRoots {
        first: &'static str,
        second: &'static str,
        gap: f64,
    },
    #[error("lambda = {lambda} is not an eigenvalue at this tolerance (null ratio {null_ratio:e} >= {threshold:e})")]
    NotAnEigenvalue { lambda: f64, null_ratio: f64, threshold: f64 },
    #[error("sample grid needs at least 3 points, got {0}")]
    InvalidGrid(usize),
}
