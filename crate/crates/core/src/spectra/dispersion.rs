//! Dispersion relation of the clamped per-mode Stokes problem.
//!
//! With `mu_1 = i * mu_tilde`, the Stokes eigenvalues of mode `k` are
//! `lambda = -nu (k^2 + mu_tilde^2)` where `mu_tilde > 0` solves
//!
//! ```text
//! D(mu) = -sinh(kL) sin(mu L) mu^2 + 2k (1 - cosh(kL) cos(mu L)) mu + k^2 sinh(kL) sin(mu L) = 0.
//! ```
//!
//! `D` does not depend on `nu`. It is odd in `mu` and in `k`.

use serde::Serialize;

use crate::params::ModeIndex;

/// Full value of the dispersion function. Overflows to ±inf once
/// `|k| L` exceeds ~710; use [`dispersion_scaled`] for sign decisions.
pub fn dispersion_value(k: ModeIndex, mu_tilde: f64, l: f64) -> f64 {
    dispersion_scaled(k, mu_tilde, l) * (k.as_f64() * l).cosh()
}

/// `D(mu) / cosh(kL)`, finite for every finite input.
pub fn dispersion_scaled(k: ModeIndex, mu_tilde: f64, l: f64) -> f64 {
    let k = k.as_f64();
    let kl = k * l;
    let th = kl.tanh();
    // 1/cosh without overflow
    let sech = if kl.abs() > 700.0 { 0.0 } else { kl.cosh().recip() };
    let (s, c) = (mu_tilde * l).sin_cos();
    -th * s * mu_tilde * mu_tilde + 2.0 * k * (sech - c) * mu_tilde + k * k * th * s
}

/// One evaluation of the (scaled) dispersion function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSample {
    pub k: ModeIndex,
    pub mu_tilde: f64,
    /// `D(mu_tilde) / cosh(kL)`.
    pub value: f64,
}

/// Samples the scaled dispersion function on `[0, mu_max]` with `n + 1` points.
pub fn sample_dispersion(k: ModeIndex, l: f64, mu_max: f64, n: usize) -> Vec<DispersionSample> {
    (0..=n)
        .map(|i| {
            let mu_tilde = mu_max * i as f64 / n as f64;
            DispersionSample {
                k,
                mu_tilde,
                value: dispersion_scaled(k, mu_tilde, l),
            }
        })
        .collect()
}
