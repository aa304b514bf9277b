//! Adjoint eigenfunctions from the nullspace of the boundary matrix.

use num_complex::Complex64;
use serde::Serialize;

use crate::export::{fmt_real, to_json_document, CsvTable};
use crate::params::{ChannelParams, ModeIndex, TolerancePolicy};
use crate::spectra::{Branch, SpectralPoint};

use super::matrix::{build_m, characteristic_roots, column_log_scale};
use super::AdjointError;

/// Default number of sample points (endpoints included).
pub const DEFAULT_SAMPLES: usize = 1025;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `xi(x) = sum_j coeffs[j] exp(roots[j] x - log_scale[j])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpCombination {
    pub roots: [Complex64; 6],
    pub coeffs: [Complex64; 6],
    pub log_scale: [f64; 6],
}

impl ExpCombination {
    pub fn new(k: ModeIndex, mu1: Complex64, mu2: Complex64, l: f64, coeffs: [Complex64; 6]) -> Self {
        let roots = characteristic_roots(k, mu1, mu2);
        let mut log_scale = [0.0; 6];
        for (s, r) in log_scale.iter_mut().zip(&roots) {
            *s = column_log_scale(*r, l);
        }
        Self {
            roots,
            coeffs,
            log_scale,
        }
    }

    /// `n`-th derivative at `x`.
    pub fn derivative(&self, n: i32, x: f64) -> Complex64 {
        (0..6)
            .map(|j| {
                let r = self.roots[j];
                self.coeffs[j] * r.powi(n) * (r * x - self.log_scale[j]).exp()
            })
            .sum()
    }

    /// Derivatives `0..=max_order` at `x`.
    pub fn derivatives(&self, max_order: usize, x: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); max_order + 1];
        for j in 0..6 {
            let r = self.roots[j];
            let mut v = self.coeffs[j] * (r * x - self.log_scale[j]).exp();
            for d in out.iter_mut() {
                *d += v;
                v *= r;
            }
        }
        out
    }

    fn scale_by(&mut self, factor: Complex64) {
        for c in self.coeffs.iter_mut() {
            *c *= factor;
        }
    }
}

/// Sampled profiles on a uniform grid including both walls.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profiles {
    pub x: Vec<f64>,
    pub xi: Vec<Complex64>,
    pub dxi: Vec<Complex64>,
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
    pub q: Vec<Complex64>,
}

/// Relative residuals of the equations an adjoint eigenfunction satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenResiduals {
    /// Sixth-order equation for `xi`.
    pub ode6: f64,
    /// `xi(0), xi(L), xi''(0), xi''(L)`, then `xi''' - mu2^2 xi'` at 0 and L.
    pub boundary: [f64; 6],
    /// Fourth-order equation for `psi2`.
    pub ode4: f64,
    /// `psi2(0), psi2(L), psi2'(0), psi2'(L)`.
    pub psi2_boundary: [f64; 4],
    /// `i k psi1 + psi2'`.
    pub divergence: f64,
    /// Second momentum equation `(lambda + nu k^2) psi2 - nu psi2'' + q' = 0`.
    pub momentum: f64,
}

impl EigenResiduals {
    pub fn max(&self) -> f64 {
        self.boundary
            .iter()
            .chain(&self.psi2_boundary)
            .chain([&self.ode6, &self.ode4, &self.divergence, &self.momentum])
            .fold(0.0, |a, &b| a.max(b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdjointDiagnostic {
    /// Second-smallest singular value also below the null threshold.
    Multiplicity { second_ratio: f64 },
    /// `sin(mu2_tilde L)` vanishes: `xi` is a pure `sin(mu2_tilde x)` and `psi2 = 0`.
    SinResonance { mu2_tilde: f64, sin_value: f64 },
}

/// Outcome of [`sin_resonance_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceCheck {
    /// `None` when `mu2` is not purely imaginary.
    pub mu2_tilde: Option<f64>,
    pub sin_value: Option<f64>,
    pub flagged: bool,
}

/// Flags `sin(mu2_tilde L)` within `root_abs_tol` of zero.
pub fn sin_resonance_check(point: &SpectralPoint, params: &ChannelParams, tol: &TolerancePolicy) -> ResonanceCheck {
    match point.mu2_tilde {
        Some(m) => {
            let s = (m * params.l()).sin();
            ResonanceCheck {
                mu2_tilde: Some(m),
                sin_value: Some(s),
                flagged: s.abs() <= tol.root_abs_tol,
            }
        }
        None => ResonanceCheck {
            mu2_tilde: None,
            sin_value: None,
            flagged: false,
        },
    }
}

/// Eigenfunction of the adjoint operator for one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjointEigenfunction {
    pub point: SpectralPoint,
    /// Coefficients in the scaled exponential basis; the plain coefficient
    /// of `e^{r_j x}` is `coeffs[j] * exp(-log_scale[j])`.
    pub basis: ExpCombination,
    pub samples: Profiles,
    /// Observation `xi'(L)`.
    pub obs: Complex64,
    /// `sigma_min / sigma_max` of the row-equilibrated boundary matrix (0 on the Dirichlet branch).
    pub null_ratio: f64,
    pub residuals: EigenResiduals,
    pub diagnostics: Vec<AdjointDiagnostic>,
}

#[derive(Serialize)]
struct EigenSummary<'a> {
    branch: &'a str,
    k: i32,
    j: usize,
    lambda: f64,
    obs_re: f64,
    obs_im: f64,
    null_ratio: f64,
    max_residual: f64,
    residuals: &'a EigenResiduals,
    diagnostics: &'a [AdjointDiagnostic],
}

impl AdjointEigenfunction {
    /// Columns `x2`, then real and imaginary parts of `xi, xi', psi1, psi2, q`.
    pub fn to_csv(&self) -> String {
        let mut t = CsvTable::new(&[
            "x2", "xi_re", "xi_im", "dxi_re", "dxi_im", "psi1_re", "psi1_im", "psi2_re", "psi2_im", "q_re", "q_im",
        ]);
        let s = &self.samples;
        for i in 0..s.x.len() {
            let mut row = vec![fmt_real(s.x[i])];
            for z in [s.xi[i], s.dxi[i], s.psi1[i], s.psi2[i], s.q[i]] {
                row.push(fmt_real(z.re));
                row.push(fmt_real(z.im));
            }
            t.push(row);
        }
        t.to_csv_string()
    }

    pub fn summary_json(&self) -> Result<String, serde_json::Error> {
        to_json_document(&EigenSummary {
            branch: self.point.branch.as_str(),
            k: self.point.k.get(),
            j: self.point.j,
            lambda: self.point.lambda,
            obs_re: self.obs.re,
            obs_im: self.obs.im,
            null_ratio: self.null_ratio,
            max_residual: self.residuals.max(),
            residuals: &self.residuals,
            diagnostics: &self.diagnostics,
        })
    }
}

fn grid(l: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { l } else { l * i as f64 / last })
        .collect()
}

/// Solves for the eigenfunction of `point` and samples it on `n` points.
pub fn solve_eigenfunction(
    point: &SpectralPoint,
    params: &ChannelParams,
    tol: &TolerancePolicy,
    n: usize,
) -> Result<AdjointEigenfunction, AdjointError> {
    if n < 3 {
        return Err(AdjointError::InvalidGrid(n));
    }
    match point.branch {
        Branch::Dirichlet => Ok(dirichlet_eigenfunction(point, params, n)),
        Branch::Stokes => stokes_eigenfunction(point, params, tol, n),
    }
}

fn dirichlet_eigenfunction(point: &SpectralPoint, params: &ChannelParams, n: usize) -> AdjointEigenfunction {
    let l = params.l();
    let q = point.j as f64 * std::f64::consts::PI / l;
    let mu2 = Complex64::new(0.0, q);
    // sin(q x) = (e^{iqx} - e^{-iqx}) / 2i
    let half = Complex64::new(0.0, -0.5);
    let zero = Complex64::new(0.0, 0.0);
    let basis = ExpCombination::new(point.k, point.mu1, mu2, l, [zero, zero, zero, zero, half, -half]);
    let x = grid(l, n);
    let xi: Vec<Complex64> = x.iter().map(|&t| Complex64::new((q * t).sin(), 0.0)).collect();
    let dxi: Vec<Complex64> = x.iter().map(|&t| Complex64::new(q * (q * t).cos(), 0.0)).collect();
    let zeros = vec![zero; n];
    let sign = if point.j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let residuals = residuals(&basis, point, params, &x, false);
    AdjointEigenfunction {
        point: *point,
        basis,
        samples: Profiles {
            x,
            xi,
            dxi,
            psi1: zeros.clone(),
            psi2: zeros.clone(),
            q: zeros,
        },
        obs: Complex64::new(sign * q, 0.0),
        null_ratio: 0.0,
        residuals,
        diagnostics: Vec::new(),
    }
}

fn stokes_eigenfunction(
    point: &SpectralPoint,
    params: &ChannelParams,
    tol: &TolerancePolicy,
    n: usize,
) -> Result<AdjointEigenfunction, AdjointError> {
    let l = params.l();
    let bm = build_m(point.k, point.mu1, point.mu2, l, tol.sep_tol)?;
    let mut m = bm.entries;
    for mut row in m.row_iter_mut() {
        let s = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if s > 0.0 {
            row /= Complex64::new(s, 0.0);
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = svd.singular_values[order[0]];
    let null_ratio = svd.singular_values[order[5]] / smax;
    if !(null_ratio < tol.svd_null_ratio) {
        return Err(AdjointError::NotAnEigenvalue {
            lambda: point.lambda,
            null_ratio,
            threshold: tol.svd_null_ratio,
        });
    }
    let mut diagnostics = Vec::new();
    let second_ratio = svd.singular_values[order[4]] / smax;
    if second_ratio < tol.svd_null_ratio {
        diagnostics.push(AdjointDiagnostic::Multiplicity { second_ratio });
    }
    let resonance = sin_resonance_check(point, params, tol);
    if resonance.flagged {
        diagnostics.push(AdjointDiagnostic::SinResonance {
            mu2_tilde: resonance.mu2_tilde.unwrap_or(0.0),
            sin_value: resonance.sin_value.unwrap_or(0.0),
        });
    }

    let row = v_t.row(order[5]);
    let mut coeffs = [Complex64::new(0.0, 0.0); 6];
    for (c, v) in coeffs.iter_mut().zip(row.iter()) {
        *c = v.conj();
    }
    let mut basis = ExpCombination::new(point.k, point.mu1, point.mu2, l, coeffs);

    let x = grid(l, n);
    let (imax, _) = x
        .iter()
        .map(|&t| basis.derivative(0, t).norm())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    basis.scale_by(basis.derivative(0, x[imax]).inv());

    let samples = stokes_profiles(&basis, point, params, &x);
    let obs = basis.derivative(1, l);
    let residuals = residuals(&basis, point, params, &x, true);
    Ok(AdjointEigenfunction {
        point: *point,
        basis,
        samples,
        obs,
        null_ratio,
        residuals,
        diagnostics,
    })
}

/// `psi2 = alpha (mu2^2 xi - xi'')`, `psi1 = i psi2' / k`,
/// `q = nu (psi1'' - mu1^2 psi1) / (i k)`.
pub fn stokes_profiles(basis: &ExpCombination, point: &SpectralPoint, params: &ChannelParams, x: &[f64]) -> Profiles {
    let (alpha, nu) = (params.alpha(), params.nu());
    let k = point.k.as_f64();
    let (m1, m2) = (point.mu1 * point.mu1, point.mu2 * point.mu2);
    let mut p = Profiles {
        x: x.to_vec(),
        xi: Vec::with_capacity(x.len()),
        dxi: Vec::with_capacity(x.len()),
        psi1: Vec::with_capacity(x.len()),
        psi2: Vec::with_capacity(x.len()),
        q: Vec::with_capacity(x.len()),
    };
    for &t in x {
        let d = basis.derivatives(5, t);
        let psi2 = |n: usize| alpha * (m2 * d[n] - d[n + 2]);
        let psi1 = I * psi2(1) / k;
        let psi1_pp = I * psi2(3) / k;
        p.xi.push(d[0]);
        p.dxi.push(d[1]);
        p.psi2.push(psi2(0));
        p.psi1.push(psi1);
        p.q.push(nu * (psi1_pp - m1 * psi1) / (I * k));
    }
    p
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Relative residuals, with equation coefficients taken from `lambda`
/// rather than from `mu1, mu2`.
fn residuals(
    basis: &ExpCombination,
    point: &SpectralPoint,
    params: &ChannelParams,
    x: &[f64],
    stokes: bool,
) -> EigenResiduals {
    let (alpha, nu, l) = (params.alpha(), params.nu(), params.l());
    let lambda = point.lambda;
    let k = point.k.as_f64();
    let kk = k * k;
    let (ln, la) = (lambda / nu, lambda / alpha);
    let a = la + ln + 3.0 * kk;
    let b = (ln + 2.0 * kk) * (la + kk) + kk * (ln + kk);
    let c = kk * (ln + kk) * (la + kk);
    let m2 = la + kk;

    let mut ode6 = (0.0f64, 0.0f64);
    let mut ode4 = (0.0f64, 0.0f64);
    let mut div = (0.0f64, 0.0f64);
    let mut mom = (0.0f64, 0.0f64);
    let (mut xi_max, mut xi2_max, mut third_max) = (0.0f64, 0.0f64, 0.0f64);
    let (mut psi2_max, mut dpsi2_max) = (0.0f64, 0.0f64);
    for &t in x {
        let d = basis.derivatives(8, t);
        let terms = [d[6], a * d[4], b * d[2], c * d[0]];
        let r = -terms[0] + terms[1] - terms[2] + terms[3];
        ode6.0 = ode6.0.max(r.norm());
        ode6.1 = ode6.1.max(terms.iter().map(|z| z.norm()).sum());
        xi_max = xi_max.max(d[0].norm());
        xi2_max = xi2_max.max(d[2].norm());
        third_max = third_max.max(d[3].norm() + m2.abs() * d[1].norm());
        if stokes {
            let psi2: Vec<Complex64> = (0..=5).map(|n| alpha * (m2 * d[n] - d[n + 2])).collect();
            psi2_max = psi2_max.max(psi2[0].norm());
            dpsi2_max = dpsi2_max.max(psi2[1].norm());
            let t4 = [nu * psi2[4], (lambda + 2.0 * nu * kk) * psi2[2], kk * (lambda + nu * kk) * psi2[0]];
            ode4.0 = ode4.0.max((t4[0] - t4[1] + t4[2]).norm());
            ode4.1 = ode4.1.max(t4.iter().map(|z| z.norm()).sum());
            let psi1 = I * psi2[1] / k;
            div.0 = div.0.max((I * k * psi1 + psi2[1]).norm());
            div.1 = div.1.max(psi2[1].norm());
            // q' from the first momentum equation, then the second one
            let psi1_p = I * psi2[2] / k;
            let psi1_ppp = I * psi2[4] / k;
            let q_p = (nu * psi1_ppp - (lambda + nu * kk) * psi1_p) / (I * k);
            let tm = [(lambda + nu * kk) * psi2[0], nu * psi2[2], q_p];
            mom.0 = mom.0.max((tm[0] - tm[1] + tm[2]).norm());
            mom.1 = mom.1.max(tm.iter().map(|z| z.norm()).sum());
        }
    }
    let at = |n: i32, t: f64| basis.derivative(n, t);
    let third = |t: f64| at(3, t) - m2 * at(1, t);
    let boundary = [
        ratio(at(0, 0.0).norm(), xi_max),
        ratio(at(0, l).norm(), xi_max),
        ratio(at(2, 0.0).norm(), xi2_max),
        ratio(at(2, l).norm(), xi2_max),
        ratio(third(0.0).norm(), third_max),
        ratio(third(l).norm(), third_max),
    ];
    let psi2_at = |n: i32, t: f64| alpha * (m2 * at(n, t) - at(n + 2, t));
    let psi2_boundary = if stokes {
        [
            ratio(psi2_at(0, 0.0).norm(), psi2_max),
            ratio(psi2_at(0, l).norm(), psi2_max),
            ratio(psi2_at(1, 0.0).norm(), dpsi2_max),
            ratio(psi2_at(1, l).norm(), dpsi2_max),
        ]
    } else {
        [0.0; 4]
    };
    EigenResiduals {
        ode6: ratio(ode6.0, ode6.1),
        boundary,
        ode4: ratio(ode4.0, ode4.1),
        psi2_boundary,
        divergence: ratio(div.0, div.1),
        momentum: ratio(mom.0, mom.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{dirichlet_eigenvalues, stokes_eigenvalues};
    use std::f64::consts::PI;

    fn setup(alpha: f64) -> (ChannelParams, TolerancePolicy) {
        (ChannelParams::new(1.0, alpha, PI).unwrap(), TolerancePolicy::default())
    }

    #[test]
    fn dirichlet_observation_is_exact() {
        let (p, tol) = setup(0.4);
        let k = ModeIndex::new(1).unwrap();
        let pts = dirichlet_eigenvalues(k, &p, 4);
        let e = solve_eigenfunction(&pts[1], &p, &tol, DEFAULT_SAMPLES).unwrap();
        assert_eq!(e.obs, Complex64::new(2.0, 0.0));
        let e = solve_eigenfunction(&pts[2], &p, &tol, DEFAULT_SAMPLES).unwrap();
        assert_eq!(e.obs, Complex64::new(-3.0, 0.0));
        assert!(e.residuals.max() < 1e-12, "{:?}", e.residuals);
        assert!(e.samples.psi2.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn stokes_eigenfunctions_satisfy_all_equations() {
        let (p, tol) = setup(0.4);
        for k in [1, 2, -3] {
            let k = ModeIndex::new(k).unwrap();
            for pt in stokes_eigenvalues(k, &p, 5, &tol).unwrap() {
                let e = solve_eigenfunction(&pt, &p, &tol, DEFAULT_SAMPLES).unwrap();
                assert!(e.residuals.max() < 1e-9, "{k} {}: {:?}", pt.j, e.residuals);
                assert!(e.null_ratio < 1e-10);
                let peak = e.samples.xi.iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!((peak - 1.0).abs() < 1e-14);
                assert!(e.samples.xi.iter().all(|z| z.im.abs() < 1e-10));
                assert!(e.obs.norm() > 1e-6);
            }
        }
    }

    #[test]
    fn non_eigenvalue_rejected() {
        let (p, tol) = setup(0.4);
        let k = ModeIndex::new(1).unwrap();
        let pt = stokes_eigenvalues(k, &p, 1, &tol).unwrap()[0];
        let off = SpectralPoint::stokes(k, 1, pt.mu1_tilde.unwrap() + 0.01, &p);
        assert!(matches!(
            solve_eigenfunction(&off, &p, &tol, 65),
            Err(AdjointError::NotAnEigenvalue { .. })
        ));
    }

    #[test]
    fn resonance_flags_integer_multiples() {
        let (p, tol) = setup(0.4);
        let k = ModeIndex::new(1).unwrap();
        let mut pt = stokes_eigenvalues(k, &p, 1, &tol).unwrap()[0];
        pt.mu2_tilde = Some(3.0);
        assert!(sin_resonance_check(&pt, &p, &tol).flagged);
        pt.mu2_tilde = Some(2f64.sqrt());
        assert!(!sin_resonance_check(&pt, &p, &tol).flagged);
    }

    #[test]
    fn pure_sine_has_vanishing_psi2() {
        let (p, _) = setup(0.4);
        let k = ModeIndex::new(2).unwrap();
        let q = 2.0;
        let zero = Complex64::new(0.0, 0.0);
        let half = Complex64::new(0.0, -0.5);
        let mu2 = Complex64::new(0.0, q);
        let mu1 = Complex64::new(0.0, 3.7);
        let basis = ExpCombination::new(k, mu1, mu2, PI, [zero, zero, zero, zero, half, -half]);
        let lambda = -p.alpha() * (4.0 + q * q);
        let mut pt = SpectralPoint::from_lambda(Branch::Stokes, k, 1, lambda, &p);
        pt.mu1 = mu1;
        pt.mu2 = mu2;
        let prof = stokes_profiles(&basis, &pt, &p, &grid(PI, 257));
        assert!(prof.psi2.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let (p, tol) = setup(0.4);
        let k = ModeIndex::new(1).unwrap();
        let pt = stokes_eigenvalues(k, &p, 1, &tol).unwrap()[0];
        let e = solve_eigenfunction(&pt, &p, &tol, 11).unwrap();
        let csv = e.to_csv();
        assert_eq!(csv.lines().count(), 12);
        assert!(csv.starts_with("x2,xi_re,xi_im,dxi_re"));
        let v: serde_json::Value = serde_json::from_str(&e.summary_json().unwrap()).unwrap();
        assert_eq!(v["branch"], "stokes");
    }
}
