//! Browser bindings for three views: the dispersion curve with its roots,
//! `F(alpha)` with its zeros, and adjoint eigenfunction profiles.
//!
//! Every export returns a JSON string; the plain functions below are usable
//! from Rust as well.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use boussinesq_core::adjoint::solve_eigenfunction;
use boussinesq_core::fattorini::{f_of_alpha, scan_alpha, AlphaZero};
use boussinesq_core::spectra::{
    default_search_ceiling, dirichlet_eigenvalues, sample_dispersion, stokes_search, SpectralDiagnostic,
};
use boussinesq_core::{ChannelParams, ModeIndex, TolerancePolicy};

const MAX_SAMPLES: usize = 20_000;
/// Finer grids would freeze the page.
const MIN_SCAN_STEP: f64 = 1e-6;

#[derive(Debug, Serialize)]
pub struct DispersionView {
    pub mu_tilde: Vec<f64>,
    pub value: Vec<f64>,
    pub roots: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub diagnostics: Vec<SpectralDiagnostic>,
}

#[derive(Debug, Serialize)]
pub struct ScanView {
    pub lambda: f64,
    pub alpha: Vec<f64>,
    pub f: Vec<f64>,
    pub zeros: Vec<AlphaZero>,
}

#[derive(Debug, Serialize)]
pub struct ProfileView {
    pub lambda: f64,
    pub obs_re: f64,
    pub obs_im: f64,
    pub max_residual: f64,
    pub x: Vec<f64>,
    pub xi_re: Vec<f64>,
    pub xi_im: Vec<f64>,
    pub psi2_re: Vec<f64>,
    pub psi2_im: Vec<f64>,
}

fn mode(k: i32) -> Result<ModeIndex, String> {
    ModeIndex::new(k).map_err(|e| e.to_string())
}

fn samples(n: usize) -> Result<usize, String> {
    if (2..=MAX_SAMPLES).contains(&n) {
        Ok(n)
    } else {
        Err(format!("sample count must lie in 2..={MAX_SAMPLES}, got {n}"))
    }
}

/// Scaled dispersion function on `[0, ceiling]` and its first `count` roots.
pub fn dispersion(k: i32, nu: f64, alpha: f64, l: f64, count: usize, n: usize) -> Result<DispersionView, String> {
    let p = ChannelParams::new(nu, alpha, l).map_err(|e| e.to_string())?;
    let k = mode(k)?;
    let n = samples(n)?;
    let search = stokes_search(k, &p, count.max(1), &TolerancePolicy::default(), None).map_err(|e| e.to_string())?;
    let ceiling = search.roots.last().copied().unwrap_or(default_search_ceiling(count, l)) * 1.1;
    let curve = sample_dispersion(k, l, ceiling, n);
    Ok(DispersionView {
        mu_tilde: curve.iter().map(|s| s.mu_tilde).collect(),
        value: curve.iter().map(|s| s.value).collect(),
        lambdas: search.points.iter().map(|q| q.lambda).collect(),
        roots: search.roots,
        diagnostics: search.diagnostics,
    })
}

/// `F(alpha)` for the `j`-th Stokes eigenvalue on `(lo, hi)`, with bisected zeros.
#[allow(clippy::too_many_arguments)]
pub fn alpha_scan(k: i32, j: usize, nu: f64, l: f64, lo: f64, hi: f64, step: f64, n: usize) -> Result<ScanView, String> {
    if j == 0 {
        return Err("j must be >= 1".into());
    }
    if !(step >= MIN_SCAN_STEP) {
        return Err(format!("grid step must be >= {MIN_SCAN_STEP:e}"));
    }
    let n = samples(n)?;
    // alpha only enters through mu2, so any admissible value builds the point
    let p = ChannelParams::new(nu, 0.5 * nu, l).map_err(|e| e.to_string())?;
    let tol = TolerancePolicy::default();
    let points = boussinesq_core::spectra::stokes_eigenvalues(mode(k)?, &p, j, &tol).map_err(|e| e.to_string())?;
    let point = points[j - 1];
    let report = scan_alpha(&point, nu, l, (lo, hi), step, &tol).map_err(|e| e.to_string())?;
    let alpha: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    Ok(ScanView {
        lambda: point.lambda,
        f: alpha.iter().map(|&a| f_of_alpha(&point, l, a)).collect(),
        alpha,
        zeros: report.zeros,
    })
}

/// `xi` and `psi2` of the adjoint eigenfunction for branch `"stokes"` or `"dirichlet"`.
pub fn profile(branch: &str, k: i32, j: usize, nu: f64, alpha: f64, l: f64, n: usize) -> Result<ProfileView, String> {
    let p = ChannelParams::new(nu, alpha, l).map_err(|e| e.to_string())?;
    let tol = TolerancePolicy::default();
    let k = mode(k)?;
    let n = samples(n)?;
    if j == 0 {
        return Err("j must be >= 1".into());
    }
    let point = match branch {
        "stokes" => boussinesq_core::spectra::stokes_eigenvalues(k, &p, j, &tol).map_err(|e| e.to_string())?[j - 1],
        "dirichlet" => dirichlet_eigenvalues(k, &p, j)[j - 1],
        other => return Err(format!("unknown branch {other:?}")),
    };
    let e = solve_eigenfunction(&point, &p, &tol, n).map_err(|e| e.to_string())?;
    let s = &e.samples;
    Ok(ProfileView {
        lambda: point.lambda,
        obs_re: e.obs.re,
        obs_im: e.obs.im,
        max_residual: e.residuals.max(),
        x: s.x.clone(),
        xi_re: s.xi.iter().map(|z| z.re).collect(),
        xi_im: s.xi.iter().map(|z| z.im).collect(),
        psi2_re: s.psi2.iter().map(|z| z.re).collect(),
        psi2_im: s.psi2.iter().map(|z| z.im).collect(),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = dispersionCurve)]
pub fn dispersion_curve(k: i32, nu: f64, alpha: f64, l: f64, count: usize, n: usize) -> Result<String, JsError> {
    to_js(dispersion(k, nu, alpha, l, count, n))
}

#[wasm_bindgen(js_name = alphaScan)]
#[allow(clippy::too_many_arguments)]
pub fn alpha_scan_js(k: i32, j: usize, nu: f64, l: f64, lo: f64, hi: f64, step: f64, n: usize) -> Result<String, JsError> {
    to_js(alpha_scan(k, j, nu, l, lo, hi, step, n))
}

#[wasm_bindgen(js_name = eigenProfile)]
pub fn eigen_profile(branch: &str, k: i32, j: usize, nu: f64, alpha: f64, l: f64, n: usize) -> Result<String, JsError> {
    to_js(profile(branch, k, j, nu, alpha, l, n))
}
