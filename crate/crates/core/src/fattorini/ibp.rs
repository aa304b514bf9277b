//! Integration-by-parts identity behind the multiplier argument.
//!
//! For `P u = -u^(6) + a u^(4) - b u'' + c u` and smooth `xi`, `f`:
//!
//! ```text
//! int_0^L (P xi) f - xi (P f) = [-W3 + a W2 - b W1]_0^L,
//! W_m = sum_{i < 2m} (-1)^i xi^(2m-1-i) f^(i).
//! ```
//!
//! With the boundary conditions on `xi` and an odd `f`, the bracket reduces to
//! `-xi^(5)(L) f(L) + xi^(4)(L) f'(L) - xi^(4)(0) f'(0)` plus terms carrying
//! `xi'(L)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::adjoint::{AdjointEigenfunction, ExpCombination};
use crate::params::ChannelParams;

/// Quadrature points of the composite Boole rule.
pub const QUADRATURE_POINTS: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IbpCheck {
    /// Reduced boundary expression, observation terms included.
    pub reduced: Complex64,
    /// The full bracket `[-W3 + a W2 - b W1]_0^L`.
    pub bracket: Complex64,
    /// Boole quadrature of `int (P xi) f - xi (P f)`.
    pub quadrature: Complex64,
    /// Magnitude used to make the defect relative.
    pub scale: f64,
    /// `|reduced - quadrature| / scale`.
    pub defect: f64,
}

#[derive(Debug, Clone, Copy)]
struct OdeCoefficients {
    a: f64,
    b: f64,
    c: f64,
    m2: f64,
}

fn coefficients(lambda: f64, k: f64, params: &ChannelParams) -> OdeCoefficients {
    let kk = k * k;
    let (ln, la) = (lambda / params.nu(), lambda / params.alpha());
    OdeCoefficients {
        a: la + ln + 3.0 * kk,
        b: (ln + 2.0 * kk) * (la + kk) + kk * (ln + kk),
        c: kk * (ln + kk) * (la + kk),
        m2: la + kk,
    }
}

/// Derivatives `0..=6` of `f = A sinh(kx) + B sinh(mu1 x) + C sinh(mu2 x)`.
pub fn sinh_multiplier(roots: [Complex64; 3], abc: [Complex64; 3]) -> impl Fn(f64) -> [Complex64; 7] {
    move |x| {
        let mut d = [Complex64::new(0.0, 0.0); 7];
        for (r, w) in roots.iter().zip(&abc) {
            let (s, c) = ((r * x).sinh(), (r * x).cosh());
            let mut p = *w;
            for (n, slot) in d.iter_mut().enumerate() {
                *slot += p * if n % 2 == 0 { s } else { c };
                p *= r;
            }
        }
        d
    }
}

fn w_bracket(m: usize, xi: &[Complex64], f: &[Complex64]) -> Complex64 {
    (0..2 * m)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * xi[2 * m - 1 - i] * f[i]
        })
        .sum()
}

fn apply_p(d: &[Complex64], co: &OdeCoefficients) -> (Complex64, f64) {
    let terms = [-d[6], co.a * d[4], -co.b * d[2], co.c * d[0]];
    (terms.iter().sum(), terms.iter().map(|t| t.norm()).sum())
}

fn boole_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 5 && (n - 1).is_multiple_of(4), "Boole rule needs 4m + 1 points");
    let mut w = vec![0.0; n];
    for start in (0..n - 1).step_by(4) {
        for (o, c) in [7.0, 32.0, 12.0, 32.0, 7.0].iter().enumerate() {
            w[start + o] += c * 2.0 * h / 45.0;
        }
    }
    w
}

/// Compares the boundary form against quadrature for an arbitrary multiplier.
pub fn ibp_check_with<F: Fn(f64) -> [Complex64; 7]>(
    basis: &ExpCombination,
    lambda: f64,
    k: f64,
    params: &ChannelParams,
    f: F,
) -> IbpCheck {
    let co = coefficients(lambda, k, params);
    let l = params.l();
    let xi = |x: f64| basis.derivatives(6, x);
    let (x0, xl) = (xi(0.0), xi(l));
    let (f0, fl) = (f(0.0), f(l));

    let bracket_at = |x: &[Complex64], g: &[Complex64]| -w_bracket(3, x, g) + co.a * w_bracket(2, x, g) - co.b * w_bracket(1, x, g);
    let bracket = bracket_at(&xl, &fl) - bracket_at(&x0, &f0);

    let obs = xl[1];
    let reduced_terms = [
        -xl[5] * fl[0],
        xl[4] * fl[1],
        -x0[4] * f0[1],
        -obs * (co.m2 * fl[2] + fl[4]),
        obs * (co.a * (co.m2 * fl[0] + fl[2]) - co.b * fl[0]),
    ];
    let reduced: Complex64 = reduced_terms.iter().sum();

    let n = QUADRATURE_POINTS;
    let h = l / (n - 1) as f64;
    let weights = boole_weights(n, h);
    let mut quadrature = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let x = if i + 1 == n { l } else { i as f64 * h };
        let (dx, df) = (xi(x), f(x));
        let (pxi, pxi_mag) = apply_p(&dx, &co);
        let (pf, pf_mag) = apply_p(&df, &co);
        quadrature += *w * (pxi * df[0] - dx[0] * pf);
        magnitude += w * (pxi_mag * df[0].norm() + dx[0].norm() * pf_mag);
    }
    let scale = reduced_terms.iter().map(|t| t.norm()).sum::<f64>() + magnitude;
    let defect = if scale > 0.0 {
        (reduced - quadrature).norm() / scale
    } else {
        0.0
    };
    IbpCheck {
        reduced,
        bracket,
        quadrature,
        scale,
        defect,
    }
}

/// The identity for `f = A sinh(kx) + B sinh(mu1 x) + C sinh(mu2 x)`.
pub fn ibp_boundary_identity(xi: &AdjointEigenfunction, abc: [Complex64; 3], params: &ChannelParams) -> IbpCheck {
    let p = &xi.point;
    let k = p.k.as_f64();
    let roots = [Complex64::new(k, 0.0), p.mu1, p.mu2];
    ibp_check_with(&xi.basis, p.lambda, k, params, sinh_multiplier(roots, abc))
}
