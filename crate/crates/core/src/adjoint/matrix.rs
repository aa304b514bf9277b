//! The 6x6 boundary matrix of the sixth-order adjoint ODE and its
//! closed-form determinant.

use nalgebra::SMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::params::ModeIndex;
use crate::scaled::ScaledComplex;

use super::AdjointError;

pub type Matrix6c = SMatrix<Complex64, 6, 6>;

/// Characteristic roots in column order: `k, -k, mu1, -mu1, mu2, -mu2`.
pub fn characteristic_roots(k: ModeIndex, mu1: Complex64, mu2: Complex64) -> [Complex64; 6] {
    let k = Complex64::new(k.as_f64(), 0.0);
    [k, -k, mu1, -mu1, mu2, -mu2]
}

/// Column scaling exponent `max(0, Re r) L`, so that `e^{r x - s}` stays
/// bounded on `[0, L]`.
pub(crate) fn column_log_scale(r: Complex64, l: f64) -> f64 {
    r.re.max(0.0) * l
}

/// Boundary matrix with columns divided by `exp(log_scale[j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryMatrix {
    pub k: ModeIndex,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub l: f64,
    #[serde(skip)]
    pub entries: Matrix6c,
    /// The unscaled column `j` is `entries[:, j] * exp(log_scale[j])`.
    pub log_scale: [f64; 6],
}

impl BoundaryMatrix {
    pub fn roots(&self) -> [Complex64; 6] {
        characteristic_roots(self.k, self.mu1, self.mu2)
    }

    /// `det(M)` with the column scales folded back in.
    pub fn det_scaled(&self) -> ScaledComplex {
        let det = ScaledComplex::from_complex(self.entries.determinant());
        let total: f64 = self.log_scale.iter().sum();
        ScaledComplex::new(det.mantissa, det.log_scale + total)
    }

    /// Natural log of the Hadamard bound `prod_j |column_j|` of the unscaled matrix.
    pub fn ln_hadamard_bound(&self) -> f64 {
        (0..6)
            .map(|j| self.entries.column(j).norm().ln() + self.log_scale[j])
            .sum()
    }
}

/// Rejects coincident characteristic roots (the exponential basis would not
/// be a fundamental system).
pub fn check_root_separation(
    k: ModeIndex,
    mu1: Complex64,
    mu2: Complex64,
    sep_tol: f64,
) -> Result<(), AdjointError> {
    let roots = characteristic_roots(k, mu1, mu2);
    const NAMES: [&str; 6] = ["k", "-k", "mu1", "-mu1", "mu2", "-mu2"];
    for i in 0..6 {
        for j in i + 1..6 {
            let gap = (roots[i] - roots[j]).norm();
            if gap <= sep_tol {
                return Err(AdjointError::DegenerateRoots {
                    first: NAMES[i],
                    second: NAMES[j],
                    gap,
                });
            }
        }
    }
    Ok(())
}

/// Boundary matrix, rejecting coincident characteristic roots.
pub fn build_m(
    k: ModeIndex,
    mu1: Complex64,
    mu2: Complex64,
    l: f64,
    sep_tol: f64,
) -> Result<BoundaryMatrix, AdjointError> {
    check_root_separation(k, mu1, mu2, sep_tol)?;
    Ok(build_m_unchecked(k, mu1, mu2, l))
}

/// Boundary matrix without the separation check; the determinant then
/// simply vanishes on degenerate inputs.
///
/// Rows: `xi(0)`, `xi(L)`, `xi''(0)`, `xi''(L)`, `xi''' - mu2^2 xi'` at 0 and at L.
pub fn build_m_unchecked(k: ModeIndex, mu1: Complex64, mu2: Complex64, l: f64) -> BoundaryMatrix {
    let roots = characteristic_roots(k, mu1, mu2);
    let m2 = mu2 * mu2;
    let mut entries = Matrix6c::zeros();
    let mut log_scale = [0.0; 6];
    for (j, &r) in roots.iter().enumerate() {
        let s = column_log_scale(r, l);
        log_scale[j] = s;
        let at0 = Complex64::new((-s).exp(), 0.0);
        let at_l = (r * l - s).exp();
        let r2 = r * r;
        let third = r * r2 - r * m2;
        entries[(0, j)] = at0;
        entries[(1, j)] = at_l;
        entries[(2, j)] = r2 * at0;
        entries[(3, j)] = r2 * at_l;
        if j < 4 {
            entries[(4, j)] = third * at0;
            entries[(5, j)] = third * at_l;
        }
    }
    BoundaryMatrix {
        k,
        mu1,
        mu2,
        l,
        entries,
        log_scale,
    }
}

fn term(coef: Complex64, exponent: Complex64) -> ScaledComplex {
    ScaledComplex::exp(exponent).scale(coef)
}

/// The two `(k, mu1)` factors of the closed-form determinant.
pub fn stokes_factors(k: ModeIndex, mu1: Complex64, l: f64) -> (ScaledComplex, ScaledComplex) {
    let k = Complex64::new(k.as_f64(), 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (a, b) = (mu1 - k, mu1 + k);
    let both = (mu1 + k) * l;
    let f1 = ScaledComplex::sum(&[
        term(a, both),
        term(-b, mu1 * l),
        term(b, k * l),
        term(-a, zero),
    ]);
    let f2 = ScaledComplex::sum(&[
        term(a, both),
        term(b, mu1 * l),
        term(-b, k * l),
        term(-a, zero),
    ]);
    (f1, f2)
}

/// Closed-form factorisation of `det M`:
///
/// ```text
/// f1 f2 (mu2-k)^2 (mu2+k)^2 (mu2-mu1)^2 (mu2+mu1)^2 (e^{mu2 L}-1)(e^{mu2 L}+1) e^{-(mu2+mu1+k) L}
/// ```
pub fn det_factored(k: ModeIndex, mu1: Complex64, mu2: Complex64, l: f64) -> ScaledComplex {
    let (f1, f2) = stokes_factors(k, mu1, l);
    let kc = Complex64::new(k.as_f64(), 0.0);
    let poly = (mu2 - kc) * (mu2 + kc) * (mu2 - mu1) * (mu2 + mu1);
    let poly = ScaledComplex::from_complex(poly * poly);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let minus = ScaledComplex::sum(&[term(one, mu2 * l), term(-one, zero)]);
    let plus = ScaledComplex::sum(&[term(one, mu2 * l), term(one, zero)]);
    let tail = ScaledComplex::exp(-(mu2 + mu1 + kc) * l);
    f1 * f2 * poly * minus * plus * tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaled::relative_difference;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn mode(k: i32) -> ModeIndex {
        ModeIndex::new(k).unwrap()
    }

    /// Unscaled matrix written out entry by entry.
    fn literal_m(k: f64, m1: Complex64, m2: Complex64, l: f64) -> Matrix6c {
        let kc = c(k, 0.0);
        let e = |r: Complex64| (r * l).exp();
        let t = |r: Complex64| r * r * r - r * m2 * m2;
        let cols = [kc, -kc, m1, -m1, m2, -m2];
        Matrix6c::from_fn(|i, j| {
            let r = cols[j];
            match i {
                0 => c(1.0, 0.0),
                1 => e(r),
                2 => r * r,
                3 => r * r * e(r),
                4 if j < 4 => t(r),
                5 if j < 4 => t(r) * e(r),
                _ => c(0.0, 0.0),
            }
        })
    }

    #[test]
    fn scaled_columns_reproduce_literal_matrix() {
        let (m1, m2, l) = (c(0.0, 2.3), c(0.0, 3.1), 1.7);
        let bm = build_m_unchecked(mode(-2), m1, m2, l);
        let lit = literal_m(-2.0, m1, m2, l);
        for j in 0..6 {
            let f = bm.log_scale[j].exp();
            for i in 0..6 {
                assert!((bm.entries[(i, j)] * f - lit[(i, j)]).norm() <= 1e-12 * lit[(i, j)].norm().max(1.0));
            }
        }
    }

    #[test]
    fn mu2_columns_vanish_in_last_rows() {
        let bm = build_m_unchecked(mode(3), c(0.0, 7.0), c(1.2, 0.0), 2.0);
        for i in 4..6 {
            for j in 4..6 {
                assert_eq!(bm.entries[(i, j)], c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(build_m(mode(1), c(0.0, 2.0), c(1.0, 0.0), 1.0, 1e-8).is_err());
        assert!(build_m(mode(1), c(0.0, 2.0), c(0.0, -2.0), 1.0, 1e-8).is_err());
        assert!(build_m(mode(1), c(0.0, 2.0), c(0.0, 3.0), 1.0, 1e-8).is_ok());
    }

    #[test]
    fn determinant_vanishes_on_coincident_roots() {
        for (m1, m2) in [(c(0.0, 2.0), c(1.0, 0.0)), (c(0.0, 2.0), c(0.0, 2.0))] {
            let bm = build_m_unchecked(mode(1), m1, m2, 1.3);
            assert!(bm.det_scaled().ln_abs() < bm.ln_hadamard_bound() - 30.0);
            assert!(det_factored(mode(1), m1, m2, 1.3).is_zero());
        }
    }

    #[test]
    fn factored_determinant_vanishes_on_periodic_mu2() {
        let l = 1.4;
        let m2 = c(0.0, 2.0 * PI / l);
        let d = det_factored(mode(2), c(0.0, 3.3), m2, l);
        let other = det_factored(mode(2), c(0.0, 3.3), c(0.0, 2.1), l);
        assert!(d.ln_abs() < other.ln_abs() - 30.0);
    }

    #[test]
    fn factored_matches_numeric_determinant() {
        let cases = [
            (1, c(0.0, 2.7), c(0.0, 4.1), PI),
            (-3, c(0.0, 0.4), c(2.2, 0.0), 5.9),
            (5, c(0.0, 9.5), c(0.0, 0.3), 6.2),
            (2, c(0.0, 1.1), c(4.9, 0.0), 0.6),
        ];
        for (k, m1, m2, l) in cases {
            let bm = build_m(mode(k), m1, m2, l, 1e-8).unwrap();
            let err = relative_difference(bm.det_scaled(), det_factored(mode(k), m1, m2, l), f64::NEG_INFINITY);
            assert!(err < 1e-9, "k={k}: {err}");
        }
    }

    #[test]
    fn stokes_factor_product_identity() {
        // f1 f2 = 4 e^{(mu1+k)L} (sh_k sh_m m^2 + 2k(1 - ch_k ch_m) m + k^2 sh_k sh_m)
        for (k, m1, l) in [(1.0, c(0.0, 2.3), 1.1), (-2.0, c(0.7, 0.2), 2.5), (4.0, c(1.5, 0.0), 0.9)] {
            let (f1, f2) = stokes_factors(mode(k as i32), m1, l);
            let prod = (f1 * f2).to_complex();
            let (shk, chk) = ((k * l).sinh(), (k * l).cosh());
            let (shm, chm) = ((m1 * l).sinh(), (m1 * l).cosh());
            let inner = shk * shm * m1 * m1 + 2.0 * k * (1.0 - chk * chm) * m1 + k * k * shk * shm;
            let expected = 4.0 * ((m1 + k) * l).exp() * inner;
            assert!((prod - expected).norm() <= 1e-11 * expected.norm(), "{prod} vs {expected}");
        }
    }
}
