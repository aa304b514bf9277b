//! Zeros of `alpha -> F(mu2_tilde(alpha))` for a fixed Stokes eigenvalue.

use serde::Serialize;

use crate::export::{fmt_real, CsvTable};
use crate::params::TolerancePolicy;
use crate::roots::{bisect, golden_min, sign_change_cells};
use crate::spectra::{Branch, SpectralPoint};

use super::multiplier::f_value;
use super::FattoriniError;

/// A bisected zero of `F` in `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaZero {
    pub alpha: f64,
    /// `|F|` at `alpha`.
    pub residual: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearZeroCandidate {
    pub alpha: f64,
    pub abs_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaScanReport {
    pub k: i32,
    pub j: usize,
    pub lambda: f64,
    pub nu: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub interval: (f64, f64),
    pub grid_step: f64,
    pub zeros: Vec<AlphaZero>,
    /// `min |F|` over grid points farther than `10 * grid_step` from every zero.
    pub verdict_margin: f64,
    /// Local minima of `|F|` without a sign change, relatively below `residual_rel_tol`.
    pub near_zero_candidates: Vec<NearZeroCandidate>,
}

/// `mu2_tilde(alpha) = sqrt(-k^2 - lambda / alpha)`.
pub fn mu2_tilde_of_alpha(point: &SpectralPoint, alpha: f64) -> f64 {
    let kk = point.k.as_f64().powi(2);
    (-kk - point.lambda / alpha).sqrt()
}

/// `F` as a function of the diffusivity for the Stokes eigenvalue `point`.
pub fn f_of_alpha(point: &SpectralPoint, l: f64, alpha: f64) -> f64 {
    let m1 = point.mu1_tilde.expect("Stokes point has imaginary mu1");
    f_value(point.k, m1, mu2_tilde_of_alpha(point, alpha), l)
}

fn validate(point: &SpectralPoint, nu: f64, interval: (f64, f64), grid_step: f64) -> Result<(), FattoriniError> {
    let bound = -nu * point.k.as_f64().powi(2);
    if point.branch != Branch::Stokes || point.mu1_tilde.is_none() || !(point.lambda < bound) {
        return Err(FattoriniError::NotStokes {
            lambda: point.lambda,
            bound,
        });
    }
    let (lo, hi) = interval;
    if !(lo > 0.0 && hi < nu && lo < hi) {
        return Err(FattoriniError::InvalidInterval { lo, hi, nu });
    }
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(FattoriniError::InvalidGridStep(grid_step));
    }
    Ok(())
}

/// Brackets the sign changes of `F` on a uniform grid over `interval` and
/// bisects each one to machine resolution.
pub fn scan_alpha(
    point: &SpectralPoint,
    nu: f64,
    l: f64,
    interval: (f64, f64),
    grid_step: f64,
    tol: &TolerancePolicy,
) -> Result<AlphaScanReport, FattoriniError> {
    validate(point, nu, interval, grid_step)?;
    let (lo, hi) = interval;
    let cells = ((hi - lo) / grid_step).ceil() as usize;
    let alphas: Vec<f64> = (0..=cells)
        .map(|i| if i == cells { hi } else { lo + i as f64 * grid_step })
        .collect();
    let f = |a: f64| f_of_alpha(point, l, a);
    let values: Vec<f64> = alphas.iter().map(|&a| f(a)).collect();

    let zeros: Vec<AlphaZero> = sign_change_cells(&values)
        .into_iter()
        .map(|c| {
            let r = bisect(f, alphas[c], alphas[c + 1], values[c], values[c + 1]);
            AlphaZero {
                alpha: r.x,
                residual: r.fx.abs(),
                bracket: (alphas[c], alphas[c + 1]),
            }
        })
        .collect();
    let exclusion = 10.0 * grid_step;
    let verdict_margin = alphas
        .iter()
        .zip(&values)
        .filter(|(a, _)| zeros.iter().all(|z| (**a - z.alpha).abs() > exclusion))
        .map(|(_, v)| v.abs())
        .fold(f64::INFINITY, f64::min);

    let mut near_zero_candidates = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let same = a.signum() == b.signum() && b.signum() == c.signum();
        if same && b.abs() < a.abs() && b.abs() < c.abs() {
            let (x, fx) = golden_min(|t| f(t).abs(), alphas[i - 1], alphas[i + 1], 80);
            if fx <= tol.residual_rel_tol * a.abs().max(c.abs()) {
                near_zero_candidates.push(NearZeroCandidate { alpha: x, abs_f: fx });
            }
        }
    }

    Ok(AlphaScanReport {
        k: point.k.get(),
        j: point.j,
        lambda: point.lambda,
        nu,
        l,
        interval,
        grid_step,
        zeros,
        verdict_margin,
        near_zero_candidates,
    })
}

/// One element of the exceptional set with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceptionalAlpha {
    pub alpha: f64,
    pub k: i32,
    pub j: usize,
    pub residual: f64,
}

/// All zeros of all reports, sorted by `alpha`, then `k`, then `j`.
pub fn merge_exceptional_set(reports: &[AlphaScanReport]) -> Vec<ExceptionalAlpha> {
    let mut out: Vec<ExceptionalAlpha> = reports
        .iter()
        .flat_map(|r| {
            r.zeros.iter().map(move |z| ExceptionalAlpha {
                alpha: z.alpha,
                k: r.k,
                j: r.j,
                residual: z.residual,
            })
        })
        .collect();
    out.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.k.cmp(&b.k)).then(a.j.cmp(&b.j)));
    out
}

/// Zeros as CSV (`k,j,alpha_zero,residual`), in report order.
pub fn zeros_csv(reports: &[AlphaScanReport]) -> String {
    let mut t = CsvTable::new(&["k", "j", "alpha_zero", "residual"]);
    for r in reports {
        for z in &r.zeros {
            t.push(vec![r.k.to_string(), r.j.to_string(), fmt_real(z.alpha), fmt_real(z.residual)]);
        }
    }
    t.to_csv_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{ChannelParams, ModeIndex};
    use crate::spectra::{dirichlet_eigenvalues, stokes_eigenvalues};
    use std::f64::consts::PI;

    fn first_points(k: i32, count: usize) -> (ChannelParams, Vec<SpectralPoint>) {
        let p = ChannelParams::new(1.0, 0.5, PI).unwrap();
        let pts = stokes_eigenvalues(ModeIndex::new(k).unwrap(), &p, count, &TolerancePolicy::default()).unwrap();
        (p, pts)
    }

    #[test]
    fn zeros_are_sign_changes_with_small_residual() {
        let (_, pts) = first_points(1, 3);
        let tol = TolerancePolicy::default();
        for pt in &pts {
            let r = scan_alpha(pt, 1.0, PI, (0.05, 0.95), 1e-4, &tol).unwrap();
            for z in &r.zeros {
                let (a, b) = z.bracket;
                assert!(f_of_alpha(pt, PI, a) * f_of_alpha(pt, PI, b) <= 0.0);
                assert!(z.residual < 1e-8);
            }
            assert!(r.verdict_margin > 0.0);
        }
    }

    #[test]
    fn halving_the_grid_reproduces_zeros() {
        let (_, pts) = first_points(1, 2);
        let tol = TolerancePolicy::default();
        for pt in &pts {
            let a = scan_alpha(pt, 1.0, PI, (0.05, 0.95), 2e-4, &tol).unwrap();
            let b = scan_alpha(pt, 1.0, PI, (0.05, 0.95), 1e-4, &tol).unwrap();
            assert_eq!(a.zeros.len(), b.zeros.len());
            for (x, y) in a.zeros.iter().zip(&b.zeros) {
                assert!((x.alpha - y.alpha).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn interval_and_branch_are_validated() {
        let (p, pts) = first_points(1, 1);
        let tol = TolerancePolicy::default();
        assert!(matches!(
            scan_alpha(&pts[0], 1.0, PI, (0.05, 1.0), 1e-3, &tol),
            Err(FattoriniError::InvalidInterval { .. })
        ));
        assert!(scan_alpha(&pts[0], 1.0, PI, (0.0, 0.5), 1e-3, &tol).is_err());
        let d = dirichlet_eigenvalues(ModeIndex::new(1).unwrap(), &p, 1)[0];
        assert!(matches!(
            scan_alpha(&d, 1.0, PI, (0.05, 0.95), 1e-3, &tol),
            Err(FattoriniError::NotStokes { .. })
        ));
    }

    #[test]
    fn merged_set_is_sorted() {
        let tol = TolerancePolicy::default();
        let mut reports = Vec::new();
        for k in [1, 2] {
            let (_, pts) = first_points(k, 3);
            for pt in &pts {
                reports.push(scan_alpha(pt, 1.0, PI, (0.05, 0.95), 1e-3, &tol).unwrap());
            }
        }
        let merged = merge_exceptional_set(&reports);
        assert_eq!(merged.len(), reports.iter().map(|r| r.zeros.len()).sum::<usize>());
        assert!(merged.windows(2).all(|w| w[0].alpha <= w[1].alpha));
        let csv = zeros_csv(&reports);
        assert_eq!(csv.lines().count(), merged.len() + 1);
    }
}
