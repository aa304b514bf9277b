//! Physical parameters, Fourier mode indices and the numeric tolerance policy
//! shared by every solver in the crate.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::ParamError;

/// Default separation required between `alpha` and `nu`.
pub const DEFAULT_SEP_TOL: f64 = 1e-8;

/// Viscosity `nu`, thermal diffusivity `alpha` and channel height `l`.
///
/// The horizontal direction is the torus of length 2π, the vertical one is
/// `(0, l)`. Fields are private so every instance satisfies
/// `nu, alpha, l > 0` and `|alpha - nu| > sep_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    nu: f64,
    alpha: f64,
    #[serde(rename = "L")]
    l: f64,
}

impl ChannelParams {
    pub fn new(nu: f64, alpha: f64, l: f64) -> Result<Self, ParamError> {
        Self::with_sep_tol(nu, alpha, l, DEFAULT_SEP_TOL)
    }

    pub fn with_sep_tol(nu: f64, alpha: f64, l: f64, sep_tol: f64) -> Result<Self, ParamError> {
        for (name, value) in [("nu", nu), ("alpha", alpha), ("L", l)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive { name, value });
            }
        }
        if (alpha - nu).abs() <= sep_tol {
            return Err(ParamError::AlphaEqualsNu { nu, alpha, sep_tol });
        }
        Ok(Self { nu, alpha, l })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Channel height.
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Same geometry and viscosity, different diffusivity.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, ParamError> {
        Self::new(self.nu, alpha, self.l)
    }

    /// Same geometry and diffusivity, different viscosity.
    pub fn with_nu(&self, nu: f64) -> Result<Self, ParamError> {
        Self::new(nu, self.alpha, self.l)
    }
}

impl<'de> Deserialize<'de> for ChannelParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            nu: f64,
            alpha: f64,
            #[serde(rename = "L")]
            l: f64,
        }
        let raw = Raw::deserialize(d)?;
        ChannelParams::new(raw.nu, raw.alpha, raw.l).map_err(serde::de::Error::custom)
    }
}

/// Nonzero Fourier index in the periodic direction.
///
/// The zero mode obeys an autonomous, uncontrolled heat equation and is kept
/// out of every controllability computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ModeIndex(i32);

impl ModeIndex {
    pub fn new(k: i32) -> Result<Self, ParamError> {
        if k == 0 {
            Err(ParamError::ZeroMode)
        } else {
            Ok(Self(k))
        }
    }

    pub fn get(self) -> i32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<i32> for ModeIndex {
    type Error = ParamError;

    fn try_from(k: i32) -> Result<Self, Self::Error> {
        Self::new(k)
    }
}

/// Thresholds used by root finding, residual checks and nullspace tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Acceptance threshold on |D| or |F| at a bisected root, and the matching
    /// distance for roots compared across runs.
    pub root_abs_tol: f64,
    /// Relative residual threshold for eigenfunction checks and observations.
    pub residual_rel_tol: f64,
    /// `sigma_min / sigma_max` below which a boundary matrix is singular.
    pub svd_null_ratio: f64,
    /// Step of the sign-change grid used to bracket dispersion roots.
    pub bracket_grid_step: f64,
    /// Minimal admissible `|alpha - nu|`.
    pub sep_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            root_abs_tol: 1e-10,
            residual_rel_tol: 1e-7,
            svd_null_ratio: 1e-8,
            bracket_grid_step: 1e-2,
            sep_tol: DEFAULT_SEP_TOL,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(self) -> Result<Self, ParamError> {
        for (name, value) in [
            ("tol.root_abs_tol", self.root_abs_tol),
            ("tol.residual_rel_tol", self.residual_rel_tol),
            ("tol.svd_null_ratio", self.svd_null_ratio),
            ("tol.bracket_grid_step", self.bracket_grid_step),
            ("tol.sep_tol", self.sep_tol),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive { name, value });
            }
        }
        if self.svd_null_ratio >= 1.0 {
            return Err(ParamError::OutOfRange {
                name: "tol.svd_null_ratio",
                value: self.svd_null_ratio,
                expected: "< 1",
            });
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_alpha_equal_nu() {
        let err = ChannelParams::new(1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("alpha equals nu"));
        assert!(ChannelParams::new(1.0, 1.0 + 1e-9, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0 + 1e-7, 1.0).is_ok());
    }

    #[test]
    fn rejects_non_positive() {
        assert!(ChannelParams::new(0.0, 0.5, 1.0).is_err());
        assert!(ChannelParams::new(1.0, -0.5, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 0.5, f64::NAN).is_err());
    }

    #[test]
    fn zero_mode_is_not_an_index() {
        assert!(ModeIndex::new(0).is_err());
        assert_eq!(ModeIndex::new(-3).unwrap().get(), -3);
    }

    #[test]
    fn tolerance_ratio_below_one() {
        let tol = TolerancePolicy {
            svd_null_ratio: 1.0,
            ..Default::default()
        };
        assert!(tol.validate().is_err());
        assert!(TolerancePolicy::default().validate().is_ok());
    }
}
