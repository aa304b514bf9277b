//! Finite-difference semidiscretisation of one Fourier mode.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::params::{ChannelParams, ModeIndex};
use crate::spectra::fd::second_difference;
use crate::spectra::StokesPencil;

use super::GalerkinError;

/// Smallest admissible number of interior grid points.
pub const MIN_GRID: usize = 64;
/// Default number of time steps over the horizon.
pub const DEFAULT_STEPS: usize = 512;

/// Interior grid `x_i = i L / (n + 1)`, `i = 1..=n`.
pub fn interior_grid(l: f64, n: usize) -> Vec<f64> {
    let h = l / (n as f64 + 1.0);
    (1..=n).map(|i| i as f64 * h).collect()
}

/// `sinh(|k| x) / sinh(|k| L)` on the interior grid, written as
/// `e^{|k|(x-L)} (1 - e^{-2|k|x}) / (1 - e^{-2|k|L})` so it never overflows.
pub fn lifting_profile(k: ModeIndex, params: &ChannelParams, n: usize) -> Vec<f64> {
    let a = k.as_f64().abs();
    let l = params.l();
    let den = -(-2.0 * a * l).exp_m1();
    interior_grid(l, n)
        .into_iter()
        .map(|x| (a * (x - l)).exp() * -(-2.0 * a * x).exp_m1() / den)
        .collect()
}

/// `x' = A x + b h` with a lifting `lift` such that `z = x - lift h`
/// obeys `z' = A z + b_inner h` for piecewise-constant `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    /// Input vector of the direct discretisation (boundary value in the last heat row).
    pub b_direct: DVector<f64>,
    /// `b_direct + A lift`.
    pub b_inner: DVector<f64>,
    pub lift: DVector<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b_direct: DVector<f64>, lift: DVector<f64>) -> Self {
        let b_inner = &b_direct + &a * &lift;
        Self {
            a,
            b_direct,
            b_inner,
            lift,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// Per-mode system for the state `(u2, theta)` on `n` interior points each.
///
/// ```text
/// K u2' = -G u2 + k^2 theta,          K = k^2 - D2,  G = nu (D4 - 2 k^2 D2 + k^4)
/// theta' = alpha (D2 - k^2) theta + alpha h e_n / dx^2
/// ```
#[derive(Debug, Clone)]
pub struct ModeSystem {
    pub k: ModeIndex,
    pub params: ChannelParams,
    pub n: usize,
    pub dt: f64,
    pub horizon: f64,
    pub steps: usize,
    pub pencil: StokesPencil,
    pub mass: DMatrix<f64>,
    pub stiffness: DMatrix<f64>,
    pub heat: DMatrix<f64>,
    pub lifting: Vec<f64>,
    pub state: StateSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemSettings {
    pub k: i32,
    pub nu: f64,
    pub alpha: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub steps: usize,
}

/// Assembles the mode system; `dt` defaults to `T / 512` and is adjusted so
/// that the horizon is an integer number of steps.
pub fn assemble_mode_system(
    k: ModeIndex,
    params: &ChannelParams,
    n: usize,
    dt: Option<f64>,
    horizon: f64,
) -> Result<ModeSystem, GalerkinError> {
    if n < MIN_GRID {
        return Err(GalerkinError::InvalidSize(format!("grid needs at least {MIN_GRID} points, got {n}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(GalerkinError::InvalidSize(format!("horizon must be positive, got {horizon}")));
    }
    let steps = match dt {
        None => DEFAULT_STEPS,
        Some(d) if d > 0.0 && d.is_finite() => ((horizon / d).round() as usize).max(1),
        Some(d) => return Err(GalerkinError::InvalidSize(format!("dt must be positive, got {d}"))),
    };
    let dt = horizon / steps as f64;

    let pencil = StokesPencil::new(k, params, n);
    let mass = pencil.mass.to_dense();
    let stiffness = pencil.stiffness.to_dense();
    let h = pencil.grid_step();
    let kk = k.as_f64().powi(2);
    let alpha = params.alpha();
    let heat = (second_difference(n, h).to_dense() - DMatrix::identity(n, n) * kk) * alpha;

    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| GalerkinError::Solve("mass matrix not positive definite".into()))?;
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&(-chol.solve(&stiffness)));
    a.view_mut((0, n), (n, n))
        .copy_from(&(chol.solve(&DMatrix::identity(n, n)) * kk));
    a.view_mut((n, n), (n, n)).copy_from(&heat);

    let mut b_direct = DVector::zeros(2 * n);
    b_direct[2 * n - 1] = alpha / (h * h);
    let lifting = lifting_profile(k, params, n);
    let mut lift = DVector::zeros(2 * n);
    for (i, w) in lifting.iter().enumerate() {
        lift[n + i] = *w;
    }
    Ok(ModeSystem {
        k,
        params: *params,
        n,
        dt,
        horizon,
        steps,
        pencil,
        mass,
        stiffness,
        heat,
        lifting,
        state: StateSpace::new(a, b_direct, lift),
    })
}

impl ModeSystem {
    pub fn grid_step(&self) -> f64 {
        self.params.l() / (self.n as f64 + 1.0)
    }

    pub fn settings(&self) -> SystemSettings {
        SystemSettings {
            k: self.k.get(),
            nu: self.params.nu(),
            alpha: self.params.alpha(),
            l: self.params.l(),
            n: self.n,
            dt: self.dt,
            horizon: self.horizon,
            steps: self.steps,
        }
    }

    /// Largest `count` eigenvalues of the Stokes block (`lambda = -sigma`).
    pub fn stokes_block_eigenvalues(&self, count: usize) -> Result<Vec<f64>, GalerkinError> {
        let modes = self
            .pencil
            .lowest_modes(count)
            .map_err(|e| GalerkinError::Solve(e.to_string()))?;
        Ok(modes.sigma.iter().map(|s| -s).collect())
    }

    /// Discrete `int |u2'|^2 + k^2 |u2|^2`.
    pub fn stokes_energy(&self, x: &DVector<f64>) -> f64 {
        let u = x.rows(0, self.n);
        (u.transpose() * &self.mass * u)[(0, 0)] * self.grid_step()
    }

    /// Discrete `L^2` norm of `theta`.
    pub fn heat_norm(&self, x: &DVector<f64>) -> f64 {
        (x.rows(self.n, self.n).norm_squared() * self.grid_step()).sqrt()
    }

    /// Discrete `L^2` norm of `u2`.
    pub fn velocity_norm(&self, x: &DVector<f64>) -> f64 {
        (x.rows(0, self.n).norm_squared() * self.grid_step()).sqrt()
    }

    /// One-sided second-order `theta'(L)` given the boundary value `h`.
    pub fn heat_flux_top(&self, x: &DVector<f64>, h: f64) -> f64 {
        let n = self.n;
        let dx = self.grid_step();
        (3.0 * h - 4.0 * x[2 * n - 1] + x[2 * n - 2]) / (2.0 * dx)
    }

    /// `u1 = i u2' / k`, returned as the imaginary part (central differences,
    /// `u2 = 0` at both walls).
    pub fn horizontal_velocity(&self, x: &DVector<f64>) -> Vec<f64> {
        let n = self.n;
        let dx = self.grid_step();
        let k = self.k.as_f64();
        (0..n)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { x[i - 1] };
                let right = if i + 1 == n { 0.0 } else { x[i + 1] };
                (right - left) / (2.0 * dx) / k
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::TolerancePolicy;
    use crate::spectra::stokes_eigenvalues;
    use std::f64::consts::PI;

    fn params() -> ChannelParams {
        ChannelParams::new(1.0, 0.4, PI).unwrap()
    }

    #[test]
    fn lifting_hits_boundary_values() {
        let p = params();
        for k in [1, 5, 400] {
            let k = ModeIndex::new(k).unwrap();
            let n = 99;
            let w = lifting_profile(k, &p, n);
            assert!(w.iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= 1.0));
            // extend to the walls: formula at x = 0 and x = L
            let a = k.as_f64().abs();
            let l = p.l();
            let den = -(-2.0 * a * l).exp_m1();
            let at = |x: f64| (a * (x - l)).exp() * -(-2.0 * a * x).exp_m1() / den;
            assert_eq!(at(0.0), 0.0);
            assert_eq!(at(l), 1.0);
        }
    }

    #[test]
    fn lifting_residual_is_second_order() {
        let p = params();
        let k = ModeIndex::new(2).unwrap();
        let residual = |n: usize| {
            let w = lifting_profile(k, &p, n);
            let h = p.l() / (n as f64 + 1.0);
            let ext = |i: isize| -> f64 {
                if i < 0 {
                    0.0
                } else if i as usize >= n {
                    1.0
                } else {
                    w[i as usize]
                }
            };
            (0..n as isize)
                .map(|i| ((ext(i - 1) - 2.0 * ext(i) + ext(i + 1)) / (h * h) - 4.0 * ext(i)).abs())
                .fold(0.0, f64::max)
        };
        let (r1, r2) = (residual(100), residual(201));
        assert!(r1 / r2 > 3.5 && r1 / r2 < 4.5, "{r1} {r2}");
    }

    #[test]
    fn large_modes_concentrate_near_the_top() {
        let p = params();
        let norm = |k: i32| {
            let w = lifting_profile(ModeIndex::new(k).unwrap(), &p, 200);
            w.iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        assert!(norm(1) > norm(4) && norm(4) > norm(16) && norm(16) > norm(64));
    }

    #[test]
    fn stokes_block_matches_dispersion_roots() {
        let p = params();
        let k = ModeIndex::new(1).unwrap();
        let sys = assemble_mode_system(k, &p, 256, None, 1.0).unwrap();
        let fd = sys.stokes_block_eigenvalues(5).unwrap();
        let exact = stokes_eigenvalues(k, &p, 5, &TolerancePolicy::default()).unwrap();
        for (a, b) in fd.iter().zip(&exact) {
            assert!(((a - b.lambda) / b.lambda).abs() < 1e-3, "{a} vs {}", b.lambda);
            assert!(*a < -p.nu());
        }
    }

    #[test]
    fn heat_block_is_negative_definite() {
        let sys = assemble_mode_system(ModeIndex::new(1).unwrap(), &params(), 64, None, 1.0).unwrap();
        let eig = sys.heat.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|v| *v < 0.0));
        assert_eq!(sys.heat, sys.heat.transpose());
    }

    #[test]
    fn sizes_are_validated() {
        let k = ModeIndex::new(1).unwrap();
        assert!(assemble_mode_system(k, &params(), 32, None, 1.0).is_err());
        assert!(assemble_mode_system(k, &params(), 64, Some(-1.0), 1.0).is_err());
        let s = assemble_mode_system(k, &params(), 64, Some(0.01), 1.0).unwrap();
        assert_eq!(s.steps, 100);
    }
}
