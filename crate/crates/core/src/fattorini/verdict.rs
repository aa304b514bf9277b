//! Per-eigenvalue unique-continuation verdicts.

use num_complex::Complex64;
use serde::Serialize;

use crate::adjoint::{sin_resonance_check, solve_eigenfunction, ResonanceCheck};
use crate::params::{ChannelParams, TolerancePolicy};
use crate::spectra::{Branch, SpectralPoint};

use super::multiplier::build_r;
use super::FattoriniError;

/// Threshold on `|det R| / prod |row_i|`.
pub const DEFAULT_DET_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Observable,
    NotObservable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Observable => "observable",
            Verdict::NotObservable => "not_observable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `alpha < nu`, where `F` applies.
    AlphaBelowNu,
    /// `alpha > nu`: judged from the complex `det R` only.
    OutsideProofRegime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UcVerdict {
    pub branch: Branch,
    pub k: i32,
    pub j: usize,
    pub lambda: f64,
    pub verdict: Verdict,
    pub regime: Regime,
    /// `None` on the Dirichlet branch.
    pub det_r_normalized: Option<f64>,
    pub obs: Complex64,
    pub obs_abs: f64,
    pub null_ratio: f64,
    pub max_residual: f64,
    pub resonance: Option<ResonanceCheck>,
    pub tags: Vec<String>,
}

/// Verdict from `det R` with a cross-check against `xi'(L)`.
pub fn uc_verdict(
    point: &SpectralPoint,
    params: &ChannelParams,
    tol: &TolerancePolicy,
    samples: usize,
) -> Result<UcVerdict, FattoriniError> {
    let regime = if params.alpha() < params.nu() {
        Regime::AlphaBelowNu
    } else {
        Regime::OutsideProofRegime
    };
    let mut tags = Vec::new();
    if regime == Regime::OutsideProofRegime {
        tags.push("outside_proof_regime".to_string());
    }
    let eig = solve_eigenfunction(point, params, tol, samples)?;
    let mut out = UcVerdict {
        branch: point.branch,
        k: point.k.get(),
        j: point.j,
        lambda: point.lambda,
        verdict: Verdict::Observable,
        regime,
        det_r_normalized: None,
        obs: eig.obs,
        obs_abs: eig.obs.norm(),
        null_ratio: eig.null_ratio,
        max_residual: eig.residuals.max(),
        resonance: None,
        tags,
    };
    if point.branch == Branch::Dirichlet {
        out.tags.push("dirichlet_closed_form".to_string());
        return Ok(out);
    }

    let resonance = sin_resonance_check(point, params, tol);
    out.resonance = Some(resonance);
    let det = build_r(point.k, point.mu1, point.mu2, params.l(), tol.sep_tol)?.normalized_det();
    out.det_r_normalized = Some(det);
    if resonance.flagged {
        out.verdict = Verdict::Inconclusive;
        out.tags.push("sin_resonance".to_string());
        return Ok(out);
    }
    if det > DEFAULT_DET_THRESHOLD {
        if !(out.obs_abs > tol.residual_rel_tol) {
            return Err(FattoriniError::Inconsistency {
                k: out.k,
                j: out.j,
                det_r_normalized: det,
                obs_abs: out.obs_abs,
            });
        }
        return Ok(out);
    }
    out.tags.push("det_r_below_threshold".to_string());
    out.verdict = if out.obs_abs < tol.residual_rel_tol && eig.null_ratio < tol.svd_null_ratio {
        Verdict::NotObservable
    } else {
        Verdict::Inconclusive
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoControlVerdict {
    pub k: i32,
    pub j: usize,
    pub verdict: Verdict,
    pub f_prime_0: Complex64,
    pub f_prime_l: Complex64,
    /// `|f'(L)| / (|k cosh(kL)| + |k cosh(mu1 L)|)`.
    pub normalized: f64,
}

/// With a second control on `u2`, the multiplier
/// `f = sinh(kx) - (k / mu1) sinh(mu1 x)` suffices for any `alpha`.
pub fn two_control_verdict(point: &SpectralPoint, params: &ChannelParams) -> Result<TwoControlVerdict, FattoriniError> {
    if point.branch != Branch::Stokes {
        return Err(FattoriniError::NotStokes {
            lambda: point.lambda,
            bound: -params.nu() * point.k.as_f64().powi(2),
        });
    }
    let k = Complex64::new(point.k.as_f64(), 0.0);
    let mu1 = point.mu1;
    let l = params.l();
    let fp = |x: f64| k * (k * x).cosh() - (k / mu1) * mu1 * (mu1 * x).cosh();
    let f_prime_0 = fp(0.0);
    let f_prime_l = fp(l);
    let scale = (k * (k * l).cosh()).norm() + (k * (mu1 * l).cosh()).norm();
    let normalized = f_prime_l.norm() / scale;
    let verdict = if normalized > DEFAULT_DET_THRESHOLD {
        Verdict::Observable
    } else {
        Verdict::Inconclusive
    };
    Ok(TwoControlVerdict {
        k: point.k.get(),
        j: point.j,
        verdict,
        f_prime_0,
        f_prime_l,
        normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModeIndex;
    use crate::spectra::{dirichlet_eigenvalues, stokes_eigenvalues};
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_points_are_observable() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let tol = TolerancePolicy::default();
        for k in 1..=3 {
            for pt in dirichlet_eigenvalues(ModeIndex::new(k).unwrap(), &p, 4) {
                assert_eq!(uc_verdict(&pt, &p, &tol, 65).unwrap().verdict, Verdict::Observable);
            }
        }
    }

    #[test]
    fn generic_alpha_gives_observable_stokes_points() {
        let p = ChannelParams::new(1.0, 0.5, PI).unwrap();
        let tol = TolerancePolicy::default();
        let pts = stokes_eigenvalues(ModeIndex::new(1).unwrap(), &p, 3, &tol).unwrap();
        for pt in &pts {
            let v = uc_verdict(pt, &p, &tol, 129).unwrap();
            assert_eq!(v.verdict, Verdict::Observable, "{v:?}");
            assert!(v.obs_abs > 1e-6);
        }
    }

    #[test]
    fn alpha_above_nu_is_tagged() {
        let p = ChannelParams::new(1.0, 1.5, PI).unwrap();
        let tol = TolerancePolicy::default();
        let pt = stokes_eigenvalues(ModeIndex::new(2).unwrap(), &p, 1, &tol).unwrap()[0];
        let v = uc_verdict(&pt, &p, &tol, 65).unwrap();
        assert_eq!(v.regime, Regime::OutsideProofRegime);
        assert!(v.tags.iter().any(|t| t == "outside_proof_regime"));
    }

    #[test]
    fn two_control_multiplier_has_flat_start() {
        let p = ChannelParams::new(1.0, 0.3, PI).unwrap();
        let tol = TolerancePolicy::default();
        for pt in stokes_eigenvalues(ModeIndex::new(3).unwrap(), &p, 5, &tol).unwrap() {
            let v = two_control_verdict(&pt, &p).unwrap();
            assert!(v.f_prime_0.norm() < 1e-14);
            assert_eq!(v.verdict, Verdict::Observable);
        }
    }
}
