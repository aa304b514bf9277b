//! Sign-change bracketing and bisection on a uniform grid.

/// A root refined by bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisected {
    pub x: f64,
    pub fx: f64,
    /// Final bracket width.
    pub width: f64,
}

/// Bisects `[a, b]` (with `f(a)`, `f(b)` of opposite sign) down to the
/// resolution of `f64`, returning the endpoint with the smaller `|f|`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Bisected {
    debug_assert!(fa * fb <= 0.0);
    for _ in 0..200 {
        if fa == 0.0 {
            return Bisected { x: a, fx: 0.0, width: (b - a).abs() };
        }
        if fb == 0.0 {
            return Bisected { x: b, fx: 0.0, width: (b - a).abs() };
        }
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fa.signum() == fm.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    let width = (b - a).abs();
    if fa.abs() <= fb.abs() {
        Bisected { x: a, fx: fa, width }
    } else {
        Bisected { x: b, fx: fb, width }
    }
}

/// Indices `i` such that `values[i]` and `values[i + 1]` have strictly
/// opposite signs, plus exact zeros at `i`.
pub fn sign_change_cells(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] == 0.0 || w[0].signum() != w[1].signum() && w[1] != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, iterations: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_reaches_machine_resolution() {
        let f = |x: f64| x * x - 2.0;
        let r = bisect(f, 1.0, 2.0, f(1.0), f(2.0));
        assert!((r.x - 2f64.sqrt()).abs() <= 4.0 * f64::EPSILON);
        assert!(r.width <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn sign_changes_found() {
        let v = [1.0, 0.5, -0.2, -0.1, 0.3, 0.0, 1.0];
        assert_eq!(sign_change_cells(&v), vec![1, 3, 5]);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, fx) = golden_min(|x| (x - 0.3).powi(2), 0.0, 1.0, 80);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx < 1e-15);
    }
}
