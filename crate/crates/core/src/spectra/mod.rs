//! Spectrum of the adjoint linearized Boussinesq operator, mode by mode.
//!
//! The spectrum splits into a Dirichlet-Laplacian branch, known in closed
//! form, and a Stokes branch parameterised by the positive roots of
//! [`dispersion_scaled`]. The Stokes branch is cross-checked against the
//! finite-difference pencil in [`fd`].

pub mod dispersion;
pub mod fd;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{ChannelParams, ModeIndex, TolerancePolicy};
use crate::roots::{bisect, golden_min, sign_change_cells};

pub use dispersion::{dispersion_scaled, dispersion_value, sample_dispersion, DispersionSample};
pub use fd::{fd_stokes_oracle, PencilModes, StokesPencil};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("dispersion search exhausted at mu_tilde = {ceiling} with {found} of {requested} roots for k = {k}")]
    GridExhausted {
        k: i32,
        ceiling: f64,
        found: usize,
        requested: usize,
    },
    #[error("eigen-solver failure: {0}")]
    EigenSolver(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Stokes,
    Dirichlet,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Stokes => "stokes",
            Branch::Dirichlet => "dirichlet",
        }
    }
}

/// One eigenvalue of the adjoint operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub branch: Branch,
    pub k: ModeIndex,
    /// 1-based index within `(branch, k)`, ordered by decreasing `lambda`.
    pub j: usize,
    pub lambda: f64,
    /// `sqrt(k^2 + lambda / nu)`, principal branch.
    pub mu1: Complex64,
    /// `sqrt(k^2 + lambda / alpha)`, principal branch.
    pub mu2: Complex64,
    /// `mu1 = i * mu1_tilde` when `mu1` is purely imaginary.
    pub mu1_tilde: Option<f64>,
    pub mu2_tilde: Option<f64>,
}

/// Principal square root of a real number, with the imaginary part reported separately.
fn sqrt_split(s: f64) -> (Complex64, Option<f64>) {
    if s < 0.0 {
        let t = (-s).sqrt();
        (Complex64::new(0.0, t), Some(t))
    } else {
        (Complex64::new(s.sqrt(), 0.0), None)
    }
}

impl SpectralPoint {
    /// Builds a point from `lambda`, deriving both `mu` values.
    pub fn from_lambda(branch: Branch, k: ModeIndex, j: usize, lambda: f64, params: &ChannelParams) -> Self {
        let kk = k.as_f64() * k.as_f64();
        let (mu1, mu1_tilde) = sqrt_split(kk + lambda / params.nu());
        let (mu2, mu2_tilde) = sqrt_split(kk + lambda / params.alpha());
        Self {
            branch,
            k,
            j,
            lambda,
            mu1,
            mu2,
            mu1_tilde,
            mu2_tilde,
        }
    }

    /// Stokes point from a dispersion root; `mu1` is set to `i * mu_tilde` exactly.
    pub fn stokes(k: ModeIndex, j: usize, mu_tilde: f64, params: &ChannelParams) -> Self {
        let kk = k.as_f64() * k.as_f64();
        let lambda = -params.nu() * (kk + mu_tilde * mu_tilde);
        let mut point = Self::from_lambda(Branch::Stokes, k, j, lambda, params);
        point.mu1 = Complex64::new(0.0, mu_tilde);
        point.mu1_tilde = Some(mu_tilde);
        point
    }

    /// Same eigenvalue seen with a different diffusivity (`mu2` changes).
    pub fn with_params(&self, params: &ChannelParams) -> Self {
        let mut p = Self::from_lambda(self.branch, self.k, self.j, self.lambda, params);
        if self.branch == Branch::Stokes {
            p.mu1 = self.mu1;
            p.mu1_tilde = self.mu1_tilde;
        }
        p
    }
}

/// `lambda_j = -alpha (k^2 + j^2 pi^2 / L^2)` for `j = 1..=j_max`.
pub fn dirichlet_eigenvalues(k: ModeIndex, params: &ChannelParams, j_max: usize) -> Vec<SpectralPoint> {
    let kk = k.as_f64() * k.as_f64();
    (1..=j_max)
        .map(|j| {
            let q = j as f64 * PI / params.l();
            let lambda = -params.alpha() * (kk + q * q);
            let mut point = SpectralPoint::from_lambda(Branch::Dirichlet, k, j, lambda, params);
            // exact: k^2 + lambda / alpha = -(j pi / L)^2
            point.mu2 = Complex64::new(0.0, q);
            point.mu2_tilde = Some(q);
            point
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralDiagnostic {
    /// Local minimum of |D| without a sign change, small enough to hide an
    /// even-order root or an unresolved pair of roots.
    DoubleRootCandidate { k: i32, mu_tilde: f64, relative_min: f64 },
    /// Fewer roots in `(0, upto]` than the interlacing bound predicts.
    RootCountDeficit { k: i32, upto: f64, found: usize, expected_min: usize },
    /// A Stokes and a Dirichlet eigenvalue of the same mode coincide.
    Coincidence { k: i32, stokes_j: usize, dirichlet_j: usize, lambda: f64 },
}

/// Result of the Stokes-branch root search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesSearch {
    pub points: Vec<SpectralPoint>,
    /// Positive roots of the dispersion function, increasing.
    pub roots: Vec<f64>,
    /// Scaled residuals `|D(root)| / cosh(kL)`.
    pub residuals: Vec<f64>,
    pub ceiling: f64,
    pub diagnostics: Vec<SpectralDiagnostic>,
}

/// Default upper end of the dispersion grid for `count` roots.
pub fn default_search_ceiling(count: usize, l: f64) -> f64 {
    2.0 * (count as f64 + 4.0) * PI / l
}

/// Brackets and bisects the first `count` positive dispersion roots.
pub fn stokes_search(
    k: ModeIndex,
    params: &ChannelParams,
    count: usize,
    tol: &TolerancePolicy,
    ceiling: Option<f64>,
) -> Result<StokesSearch, SpectraError> {
    if count == 0 {
        return Err(SpectraError::InvalidArgument("count must be >= 1".into()));
    }
    let l = params.l();
    let ceiling = ceiling.unwrap_or_else(|| default_search_ceiling(count, l));
    let step = tol.bracket_grid_step;
    let d = |m: f64| dispersion_scaled(k, m, l);

    let n_cells = (ceiling / step).ceil() as usize;
    let grid: Vec<f64> = (1..=n_cells + 1).map(|i| i as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&m| d(m)).collect();

    let mut roots = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    let mut diagnostics = Vec::new();
    let mut last_cell = None;
    for cell in sign_change_cells(&values) {
        let r = bisect(d, grid[cell], grid[cell + 1], values[cell], values[cell + 1]);
        roots.push(r.x);
        residuals.push(r.fx.abs());
        last_cell = Some(cell);
        if roots.len() == count {
            break;
        }
    }
    if roots.len() < count {
        return Err(SpectraError::GridExhausted {
            k: k.get(),
            ceiling,
            found: roots.len(),
            requested: count,
        });
    }

    // even-order root candidates up to the last accepted root
    let end = last_cell.map_or(0, |c| c + 1);
    for i in 1..end {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let no_change = a.signum() == b.signum() && b.signum() == c.signum();
        if no_change && b.abs() < a.abs() && b.abs() < c.abs() {
            let (m, fmin) = golden_min(|x| d(x).abs(), grid[i - 1], grid[i + 1], 80);
            let relative_min = fmin / a.abs().max(c.abs());
            if relative_min <= tol.residual_rel_tol {
                diagnostics.push(SpectralDiagnostic::DoubleRootCandidate {
                    k: k.get(),
                    mu_tilde: m,
                    relative_min,
                });
            }
        }
    }

    // interlacing bound: #roots in (0, X] >= floor(X L / pi) - 2
    let upto = roots[count - 1];
    let expected_min = ((upto * l / PI).floor() as i64 - 2).max(0) as usize;
    if count < expected_min {
        diagnostics.push(SpectralDiagnostic::RootCountDeficit {
            k: k.get(),
            upto,
            found: count,
            expected_min,
        });
    }

    let points = roots
        .iter()
        .enumerate()
        .map(|(i, &m)| SpectralPoint::stokes(k, i + 1, m, params))
        .collect();
    Ok(StokesSearch {
        points,
        roots,
        residuals,
        ceiling,
        diagnostics,
    })
}

/// First `count` Stokes eigenvalues of mode `k`, decreasing.
pub fn stokes_eigenvalues(
    k: ModeIndex,
    params: &ChannelParams,
    count: usize,
    tol: &TolerancePolicy,
) -> Result<Vec<SpectralPoint>, SpectraError> {
    Ok(stokes_search(k, params, count, tol, None)?.points)
}

/// Both branches of one mode, sorted by decreasing `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergedSpectrum {
    pub k: ModeIndex,
    pub points: Vec<SpectralPoint>,
    pub diagnostics: Vec<SpectralDiagnostic>,
}

/// Union of the two branches. Coincident eigenvalues are both kept (the
/// eigenvalue is then at least double) and flagged.
pub fn merge_spectrum(
    k: ModeIndex,
    params: &ChannelParams,
    count_stokes: usize,
    count_dirichlet: usize,
    tol: &TolerancePolicy,
    ceiling: Option<f64>,
) -> Result<MergedSpectrum, SpectraError> {
    if count_dirichlet == 0 {
        return Err(SpectraError::InvalidArgument("count_dirichlet must be >= 1".into()));
    }
    let search = stokes_search(k, params, count_stokes, tol, ceiling)?;
    let dirichlet = dirichlet_eigenvalues(k, params, count_dirichlet);
    let mut diagnostics = search.diagnostics;
    for s in &search.points {
        for dp in &dirichlet {
            if (s.lambda - dp.lambda).abs() <= tol.root_abs_tol * s.lambda.abs().max(1.0) {
                diagnostics.push(SpectralDiagnostic::Coincidence {
                    k: k.get(),
                    stokes_j: s.j,
                    dirichlet_j: dp.j,
                    lambda: s.lambda,
                });
            }
        }
    }
    let mut points: Vec<SpectralPoint> = search.points.into_iter().chain(dirichlet).collect();
    points.sort_by(|a, b| b.lambda.total_cmp(&a.lambda).then(a.branch.cmp(&b.branch)));
    Ok(MergedSpectrum { k, points, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(k: i32) -> ModeIndex {
        ModeIndex::new(k).unwrap()
    }

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn dirichlet_examples() {
        let p = ChannelParams::new(2.0, 1.0, PI).unwrap();
        assert_eq!(dirichlet_eigenvalues(mode(1), &p, 1)[0].lambda, -2.0);
        let p = ChannelParams::new(1.0, 0.5, PI).unwrap();
        assert_eq!(dirichlet_eigenvalues(mode(2), &p, 3)[2].lambda, -6.5);
        let p = ChannelParams::new(1.0, 0.4, 1.0).unwrap();
        let l = dirichlet_eigenvalues(mode(1), &p, 1)[0].lambda;
        assert_eq!(l, -0.4 * (1.0 + PI * PI));
    }

    #[test]
    fn dirichlet_strictly_decreasing() {
        let p = ChannelParams::new(1.0, 0.4, 2.0).unwrap();
        let pts = dirichlet_eigenvalues(mode(-3), &p, 8);
        assert_eq!(pts.len(), 8);
        assert!(pts.windows(2).all(|w| w[0].lambda > w[1].lambda));
        assert!(pts.iter().all(|p| p.branch == Branch::Dirichlet));
    }

    #[test]
    fn first_root_has_small_residual() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let s = stokes_search(mode(1), &p, 1, &tol(), None).unwrap();
        let m = s.roots[0];
        assert!(m > 1.0 && m < 2.0);
        assert!(dispersion_value(mode(1), m, PI).abs() < tol().root_abs_tol);
    }

    #[test]
    fn stokes_points_below_minus_nu_k2() {
        let p = ChannelParams::new(1.3, 0.4, 2.0).unwrap();
        for k in [1, 2, -3] {
            let pts = stokes_eigenvalues(mode(k), &p, 6, &tol()).unwrap();
            let bound = -p.nu() * f64::from(k * k);
            assert!(pts.iter().all(|q| q.lambda < bound - tol().root_abs_tol));
            assert!(pts.windows(2).all(|w| w[0].lambda > w[1].lambda));
            assert!(pts.iter().all(|q| q.mu1.re == 0.0 && q.mu1_tilde.is_some()));
        }
    }

    #[test]
    fn negative_mode_has_same_roots() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let a = stokes_search(mode(2), &p, 5, &tol(), None).unwrap().roots;
        let b = stokes_search(mode(-2), &p, 5, &tol(), None).unwrap().roots;
        assert_eq!(a, b);
    }

    #[test]
    fn exhausted_grid_reports_ceiling() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let err = stokes_search(mode(1), &p, 5, &tol(), Some(3.0)).unwrap_err();
        match err {
            SpectraError::GridExhausted { ceiling, found, requested, .. } => {
                assert_eq!(ceiling, 3.0);
                assert_eq!(requested, 5);
                assert!(found < 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn root_count_grows_with_ceiling() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let s = stokes_search(mode(1), &p, 30, &tol(), None).unwrap();
        for (i, &r) in s.roots.iter().enumerate() {
            let bound = r.floor() as i64 - 2; // L = pi
            assert!((i as i64 + 1) >= bound);
        }
        assert!(s.diagnostics.is_empty(), "{:?}", s.diagnostics);
    }

    #[test]
    fn merged_spectrum_sorted_without_coincidence() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let m = merge_spectrum(mode(1), &p, 5, 5, &tol(), None).unwrap();
        assert_eq!(m.points.len(), 10);
        assert!(m.points.windows(2).all(|w| w[0].lambda >= w[1].lambda));
        assert!(m.diagnostics.is_empty());
        assert!(m.points.iter().any(|q| q.branch == Branch::Stokes));
        assert!(m.points.iter().any(|q| q.branch == Branch::Dirichlet));
    }

    #[test]
    fn coincidence_is_flagged() {
        // choose alpha so that the first Dirichlet eigenvalue equals the first Stokes one
        let base = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let lambda = stokes_eigenvalues(mode(1), &base, 1, &tol()).unwrap()[0].lambda;
        let alpha = -lambda / (1.0 + 1.0);
        let p = ChannelParams::new(1.0, alpha, PI).unwrap();
        let m = merge_spectrum(mode(1), &p, 3, 3, &tol(), None).unwrap();
        assert_eq!(m.points.len(), 6);
        assert!(matches!(
            m.diagnostics.as_slice(),
            [SpectralDiagnostic::Coincidence { stokes_j: 1, dirichlet_j: 1, .. }]
        ));
    }

    #[test]
    fn mu_branches() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let pt = stokes_eigenvalues(mode(1), &p, 1, &tol()).unwrap()[0];
        assert!(pt.mu2_tilde.is_some());
        let kk = 1.0;
        let expect = (-(kk + pt.lambda / 0.4)).sqrt();
        assert!((pt.mu2.im - expect).abs() < 1e-14 * expect);
        // alpha > nu with lambda just below -nu k^2 gives a real mu2
        let q = SpectralPoint::from_lambda(Branch::Stokes, mode(1), 1, -1.5, &ChannelParams::new(1.0, 3.0, PI).unwrap());
        assert!(q.mu2_tilde.is_none() && q.mu2.re > 0.0);
    }
}
