//! Complex numbers carried as `mantissa * exp(log_scale)`.
//!
//! Determinants of the exponential boundary matrices span hundreds of
//! orders of magnitude; this keeps products and sums finite.

use num_complex::Complex64;
use std::ops::Mul;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        mantissa: Complex64::new(0.0, 0.0),
        log_scale: 0.0,
    };

    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        Self {
            mantissa,
            log_scale,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0.0).normalized()
    }

    /// `exp(z)` without evaluating the real exponential.
    pub fn exp(z: Complex64) -> Self {
        Self::new(Complex64::from_polar(1.0, z.im), z.re)
    }

    /// Folds the magnitude of the mantissa into the scale so |mantissa| is 1 (or 0).
    pub fn normalized(self) -> Self {
        let m = self.mantissa.norm();
        if m == 0.0 || !m.is_finite() {
            return self;
        }
        Self::new(self.mantissa / m, self.log_scale + m.ln())
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == Complex64::new(0.0, 0.0)
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.log_scale
        }
    }

    /// The mantissa rescaled to `exp(log_scale)`.
    pub fn rescaled_to(&self, log_scale: f64) -> Complex64 {
        if self.is_zero() {
            return self.mantissa;
        }
        self.mantissa * (self.log_scale - log_scale).exp()
    }

    /// Plain complex value; may overflow to infinity.
    pub fn to_complex(&self) -> Complex64 {
        self.rescaled_to(0.0)
    }

    /// Sum of terms, evaluated at the scale of the largest one.
    pub fn sum(terms: &[ScaledComplex]) -> Self {
        let top = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| t.ln_abs())
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let mantissa = terms.iter().map(|t| t.rescaled_to(top)).sum();
        Self::new(mantissa, top).normalized()
    }

    pub fn scale(self, factor: Complex64) -> Self {
        Self::new(self.mantissa * factor, self.log_scale).normalized()
    }

    pub fn powi(self, n: i32) -> Self {
        let n_f = f64::from(n);
        Self::new(self.mantissa.powi(n), self.log_scale * n_f).normalized()
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.mantissa * rhs.mantissa, self.log_scale + rhs.log_scale).normalized()
    }
}

/// `|a - b| / max(|a|, |b|, floor)` computed at a shared scale.
///
/// `ln_floor` is the natural log of the floor.
pub fn relative_difference(a: ScaledComplex, b: ScaledComplex, ln_floor: f64) -> f64 {
    let top = a.ln_abs().max(b.ln_abs()).max(ln_floor);
    (a.rescaled_to(top) - b.rescaled_to(top)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_keeps_huge_values() {
        let a = ScaledComplex::exp(Complex64::new(800.0, 0.3));
        let b = ScaledComplex::exp(Complex64::new(-790.0, -0.3));
        let p = a * b;
        let expected = Complex64::new(10f64.exp(), 0.0);
        assert!((p.to_complex() - expected).norm() < 1e-10 * expected.norm());
    }

    #[test]
    fn sum_cancels_at_common_scale() {
        let a = ScaledComplex::exp(Complex64::new(500.0, 0.0));
        let b = a.scale(Complex64::new(-1.0, 0.0));
        assert!(ScaledComplex::sum(&[a, b]).is_zero());
    }

    #[test]
    fn relative_difference_uses_floor() {
        let a = ScaledComplex::from_complex(Complex64::new(1e-30, 0.0));
        let b = ScaledComplex::from_complex(Complex64::new(2e-30, 0.0));
        assert!(relative_difference(a, b, 0.0) < 1e-29);
        assert!((relative_difference(a, b, f64::NEG_INFINITY) - 0.5).abs() < 1e-12);
    }
}
