//! Unique-continuation test for the adjoint eigenfunctions.
//!
//! A Stokes-branch eigenfunction with `xi'(L) = 0` must vanish whenever the
//! 3x3 multiplier matrix `R` is invertible. For `alpha < nu` its determinant
//! is the real function `F`; the diffusivities where `F` vanishes on some
//! eigenvalue form the exceptional set, located here by scanning `alpha`.

mod ibp;
mod multiplier;
mod scan;
mod verdict;

use thiserror::Error;

use crate::adjoint::AdjointError;

pub use ibp::{ibp_boundary_identity, ibp_check_with, sinh_multiplier, IbpCheck, QUADRATURE_POINTS};
pub use multiplier::{build_r, build_r_unchecked, f_leading_factor, f_value, MultiplierMatrix};
pub use scan::{
    f_of_alpha, merge_exceptional_set, mu2_tilde_of_alpha, scan_alpha, zeros_csv, AlphaScanReport, AlphaZero,
    ExceptionalAlpha, NearZeroCandidate,
};
pub use verdict::{
    two_control_verdict, uc_verdict, Regime, TwoControlVerdict, UcVerdict, Verdict, DEFAULT_DET_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FattoriniError {
    #[error("lambda = {lambda} is not a Stokes eigenvalue (requires lambda < {bound})")]
    NotStokes { lambda: f64, bound: f64 },
    #[error("alpha interval ({lo}, {hi}) must lie strictly inside (0, nu = {nu})")]
    InvalidInterval { lo: f64, hi: f64, nu: f64 },
    #[error("grid step must be positive and finite, got {0}")]
    InvalidGridStep(f64),
    #[error("multiplier matrix overflows for k = {k}, L = {l}")]
    Overflow { k: i32, l: f64 },
    #[error("det R route says observable (normalized det {det_r_normalized:e}) but |xi'(L)| = {obs_abs:e} for k = {k}, j = {j}")]
    Inconsistency {
        k: i32,
        j: usize,
        det_r_normalized: f64,
        obs_abs: f64,
    },
    #[error(transparent)]
    Adjoint(#[from] AdjointError),
}
