//! Randomised comparison of the numeric and the factored determinant.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::params::ModeIndex;
use crate::scaled::relative_difference;

use super::matrix::{build_m_unchecked, det_factored};

/// Relative floor, as a fraction of the Hadamard bound of `M`, below which
/// both determinants count as zero.
pub const DET_FLOOR_FRACTION: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetComparison {
    pub k: i32,
    pub mu1: Complex64,
    pub mu2: Complex64,
    pub l: f64,
    /// `ln |det M|` from LU of the scaled matrix.
    pub ln_abs_numeric: f64,
    pub ln_abs_factored: f64,
    /// `|det M - det_factored| / max(|det M|, |det_factored|, floor)`.
    pub rel_err: f64,
}

pub fn compare_determinants(k: ModeIndex, mu1: Complex64, mu2: Complex64, l: f64) -> DetComparison {
    let bm = build_m_unchecked(k, mu1, mu2, l);
    let numeric = bm.det_scaled();
    let factored = det_factored(k, mu1, mu2, l);
    let ln_floor = bm.ln_hadamard_bound() + DET_FLOOR_FRACTION.ln();
    DetComparison {
        k: k.get(),
        mu1,
        mu2,
        l,
        ln_abs_numeric: numeric.ln_abs(),
        ln_abs_factored: factored.ln_abs(),
        rel_err: relative_difference(numeric, factored, ln_floor),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetcheckReport {
    pub samples: usize,
    pub seed: u64,
    pub max_rel_err: f64,
    pub worst: Option<DetComparison>,
    /// Degenerate draw with `mu2 = mu1`, where both sides must vanish.
    pub coincident: DetComparison,
    pub coincident_both_zero: bool,
}

/// Draws `samples` parameter sets: `k` in `{±1..±5}`, `mu1 = i t` with
/// `t` in `(0.1, 10)`, `mu2` alternately `i t` with `t` in `(0.1, 10)` and
/// real in `(0.1, 5)`, `L` in `(0.5, 2 pi)`.
pub fn random_detcheck(samples: usize, seed: u64) -> DetcheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<DetComparison> = None;
    for i in 0..samples {
        let magnitude = rng.gen_range(1..=5);
        let k = if rng.gen_bool(0.5) { magnitude } else { -magnitude };
        let k = ModeIndex::new(k).expect("nonzero by construction");
        let mu1 = Complex64::new(0.0, rng.gen_range(0.1..10.0));
        let mu2 = if i % 2 == 0 {
            Complex64::new(0.0, rng.gen_range(0.1..10.0))
        } else {
            Complex64::new(rng.gen_range(0.1..5.0), 0.0)
        };
        let l = rng.gen_range(0.5..2.0 * std::f64::consts::PI);
        let c = compare_determinants(k, mu1, mu2, l);
        if worst.is_none_or(|w| c.rel_err > w.rel_err) {
            worst = Some(c);
        }
    }
    let k1 = ModeIndex::new(2).expect("nonzero");
    let mu = Complex64::new(0.0, 3.3);
    let coincident = compare_determinants(k1, mu, mu, 1.9);
    let bm = build_m_unchecked(k1, mu, mu, 1.9);
    let ln_floor = bm.ln_hadamard_bound() + DET_FLOOR_FRACTION.ln();
    let coincident_both_zero = coincident.ln_abs_numeric <= ln_floor && coincident.ln_abs_factored <= ln_floor;
    DetcheckReport {
        samples,
        seed,
        max_rel_err: worst.map_or(0.0, |w| w.rel_err),
        worst,
        coincident,
        coincident_both_zero,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_report() {
        assert_eq!(random_detcheck(50, 11), random_detcheck(50, 11));
    }

    #[test]
    fn coincident_roots_give_zero_on_both_sides() {
        let r = random_detcheck(1, 3);
        assert!(r.coincident_both_zero);
        assert!(r.max_rel_err < 1e-9);
    }
}
