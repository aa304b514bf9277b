//! Multiplier matrix `R` and the function `F`.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::Serialize;

use crate::adjoint::check_root_separation;
use crate::params::ModeIndex;

use super::FattoriniError;

/// Maps the coefficients of `f = A sinh(kx) + B sinh(mu1 x) + C sinh(mu2 x)`
/// to `(f'(0), f(L), f'(L))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierMatrix {
    pub k: ModeIndex,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub l: f64,
    #[serde(skip)]
    pub entries: Matrix3<Complex64>,
}

impl MultiplierMatrix {
    pub fn apply(&self, abc: [Complex64; 3]) -> [Complex64; 3] {
        let v = self.entries * nalgebra::Vector3::from(abc);
        [v[0], v[1], v[2]]
    }

    pub fn det(&self) -> Complex64 {
        self.entries.determinant()
    }

    /// `|det R| / prod_i |row_i|`, in `[0, 1]` by Hadamard's inequality.
    pub fn normalized_det(&self) -> f64 {
        let rows: f64 = (0..3).map(|i| self.entries.row(i).norm()).product();
        if rows == 0.0 {
            0.0
        } else {
            self.det().norm() / rows
        }
    }
}

pub fn build_r(
    k: ModeIndex,
    mu1: Complex64,
    mu2: Complex64,
    l: f64,
    sep_tol: f64,
) -> Result<MultiplierMatrix, FattoriniError> {
    check_root_separation(k, mu1, mu2, sep_tol)?;
    let r = build_r_unchecked(k, mu1, mu2, l);
    if r.entries.iter().any(|z| !z.is_finite()) {
        return Err(FattoriniError::Overflow { k: k.get(), l });
    }
    Ok(r)
}

pub fn build_r_unchecked(k: ModeIndex, mu1: Complex64, mu2: Complex64, l: f64) -> MultiplierMatrix {
    let kc = Complex64::new(k.as_f64(), 0.0);
    let cols = [kc, mu1, mu2];
    let entries = Matrix3::from_fn(|i, j| {
        let r = cols[j];
        match i {
            0 => r,
            1 => (r * l).sinh(),
            _ => r * (r * l).cosh(),
        }
    });
    MultiplierMatrix {
        k,
        mu1,
        mu2,
        l,
        entries,
    }
}

/// The coefficient of `mu2_tilde` in `F`.
pub fn f_leading_factor(k: ModeIndex, mu1_tilde: f64, mu2_tilde: f64, l: f64) -> f64 {
    let k = k.as_f64();
    let (s1, c1) = (mu1_tilde * l).sin_cos();
    let (shk, chk) = ((k * l).sinh(), (k * l).cosh());
    (mu2_tilde * l).cos() * (k * s1 - shk * mu1_tilde) + shk * mu1_tilde * c1 - k * chk * s1
}

/// `F(mu2_tilde)` for `mu1 = i mu1_tilde`, `mu2 = i mu2_tilde`.
pub fn f_value(k: ModeIndex, mu1_tilde: f64, mu2_tilde: f64, l: f64) -> f64 {
    let kf = k.as_f64();
    let c1 = (mu1_tilde * l).cos();
    let s2 = (mu2_tilde * l).sin();
    let chk = (kf * l).cosh();
    f_leading_factor(k, mu1_tilde, mu2_tilde, l) * mu2_tilde + mu1_tilde * s2 * kf * chk
        - mu1_tilde * c1 * s2 * kf
}
