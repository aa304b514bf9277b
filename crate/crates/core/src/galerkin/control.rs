//! Truncated modal system, input-to-state maps and least-squares control.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::export::{fmt_real, to_json_document, CsvTable};

use super::simulate::{simulate_state_space, CnStepper, ControlSignal, Trajectory};
use super::system::{ModeSystem, StateSpace, SystemSettings};
use super::GalerkinError;

/// Galerkin projection of a [`ModeSystem`] onto its leading `n_u` Stokes
/// eigenvectors and `n_theta` heat eigenvectors.
///
/// Both bases are orthonormal in the grid-weighted inner products, so the
/// Euclidean norm of the Stokes coordinates is the Stokes energy and that of
/// the heat coordinates is the `L^2` norm of `theta`.
#[derive(Debug, Clone)]
pub struct TruncatedSystem {
    pub settings: SystemSettings,
    pub n_u: usize,
    pub n_theta: usize,
    /// `2n x (n_u + n_theta)` basis, block diagonal.
    pub basis: DMatrix<f64>,
    /// Left inverse of `basis`.
    pub projector: DMatrix<f64>,
    pub state: StateSpace,
}

pub fn truncate(system: &ModeSystem, n_u: usize, n_theta: usize) -> Result<TruncatedSystem, GalerkinError> {
    let n = system.n;
    if n_u == 0 || n_theta == 0 || n_u > n || n_theta > n {
        return Err(GalerkinError::InvalidSize(format!(
            "truncation {n_u}+{n_theta} invalid for a grid of {n} points"
        )));
    }
    let dx = system.grid_step();
    let l = system.params.l();
    let modes = system
        .pencil
        .lowest_modes(n_u)
        .map_err(|e| GalerkinError::Solve(e.to_string()))?;
    let v = modes.vectors / dx.sqrt();
    let w = DMatrix::from_fn(n, n_theta, |i, m| {
        let x = (i + 1) as f64 * dx;
        (2.0 / l).sqrt() * ((m + 1) as f64 * std::f64::consts::PI * x / l).sin()
    });
    let dim = n_u + n_theta;
    let mut basis = DMatrix::zeros(2 * n, dim);
    basis.view_mut((0, 0), (n, n_u)).copy_from(&v);
    basis.view_mut((n, n_u), (n, n_theta)).copy_from(&w);
    let mut projector = DMatrix::zeros(dim, 2 * n);
    projector
        .view_mut((0, 0), (n_u, n))
        .copy_from(&(v.transpose() * &system.mass * dx));
    projector.view_mut((n_u, n), (n_theta, n)).copy_from(&(w.transpose() * dx));

    let a = &projector * &system.state.a * &basis;
    let b = &projector * &system.state.b_direct;
    Ok(TruncatedSystem {
        settings: system.settings(),
        n_u,
        n_theta,
        basis,
        projector,
        state: StateSpace::new(a, b, DVector::zeros(dim)),
    })
}

impl TruncatedSystem {
    pub fn dim(&self) -> usize {
        self.n_u + self.n_theta
    }

    pub fn simulate(&self, x0: &DVector<f64>, control: &ControlSignal) -> Result<Trajectory, GalerkinError> {
        simulate_state_space(&self.state, self.settings.steps, self.settings.dt, x0, control)
    }
}

/// Columns are the terminal states reached from zero with a unit control on
/// one segment; built backwards with `col_m = Phi^s col_{m+1}`.
pub fn input_map(
    sys: &StateSpace,
    steps: usize,
    dt: f64,
    segments: usize,
) -> Result<DMatrix<f64>, GalerkinError> {
    if segments == 0 || !steps.is_multiple_of(segments) {
        return Err(GalerkinError::InvalidControl(format!(
            "{segments} segments do not divide {steps} time steps"
        )));
    }
    let per = steps / segments;
    let stepper = CnStepper::new(&sys.a, dt);
    let dim = sys.dim();
    let mut out = DMatrix::zeros(dim, segments);
    let mut col = DVector::zeros(dim);
    for _ in 0..per {
        col = stepper.step(&col, &sys.b_direct, 1.0)?;
    }
    out.set_column(segments - 1, &col);
    for m in (0..segments - 1).rev() {
        for _ in 0..per {
            col = stepper.step(&col, &sys.b_direct, 0.0)?;
        }
        out.set_column(m, &col);
    }
    Ok(out)
}

/// Singular values, non-increasing.
pub fn singular_values<T: nalgebra::ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputStateMap {
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
}

pub fn input_state_map(sys: &TruncatedSystem, segments: usize) -> Result<InputStateMap, GalerkinError> {
    let matrix = input_map(&sys.state, sys.settings.steps, sys.settings.dt, segments)?;
    let singular_values = singular_values(&matrix);
    Ok(InputStateMap {
        matrix,
        singular_values,
    })
}

/// Uniform random direction of unit Euclidean norm.
pub fn random_unit_vector(dim: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
    let n = v.norm();
    v / n
}

/// `argmin |Phi h - r|^2 + ridge |h|^2` by SVD; with `ridge = 0` the
/// minimum-norm least-squares solution.
pub fn ridge_solve(phi: &DMatrix<f64>, r: &DVector<f64>, ridge: f64) -> DVector<f64> {
    let svd = phi.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = smax * f64::EPSILON * phi.nrows().max(phi.ncols()) as f64;
    let mut h = DVector::zeros(phi.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let gain = if ridge > 0.0 {
            s / (s * s + ridge)
        } else if s > cutoff {
            1.0 / s
        } else {
            0.0
        };
        if gain != 0.0 {
            let coef = u.column(i).dot(r) * gain;
            h.axpy(coef, &v_t.row(i).transpose(), 1.0);
        }
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlExperiment {
    pub system: SystemSettings,
    pub n_u: usize,
    pub n_theta: usize,
    pub segments: usize,
    pub ridge: f64,
    pub x0: Vec<f64>,
    pub x_target: Vec<f64>,
    pub control: ControlSignal,
    pub gramian_sv: Vec<f64>,
    pub terminal: Vec<f64>,
    /// `|x(T) - x_target| / |x_target|`, with `x(T)` from a fresh simulation.
    pub achieved_eps: f64,
    pub control_norm: f64,
}

impl ControlExperiment {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        to_json_document(self)
    }

    /// `index, singular_value`.
    pub fn gramian_csv(&self) -> String {
        let mut t = CsvTable::new(&["index", "singular_value"]);
        for (i, s) in self.gramian_sv.iter().enumerate() {
            t.push(vec![(i + 1).to_string(), fmt_real(*s)]);
        }
        t.to_csv_string()
    }

    /// `segment, t_start, t_end, h`.
    pub fn control_csv(&self) -> String {
        let mut t = CsvTable::new(&["segment", "t_start", "t_end", "h"]);
        let w = self.control.horizon / self.control.segments as f64;
        for (m, v) in self.control.values.iter().enumerate() {
            t.push(vec![m.to_string(), fmt_real(m as f64 * w), fmt_real((m + 1) as f64 * w), fmt_real(*v)]);
        }
        t.to_csv_string()
    }
}

pub fn synthesize_control(
    sys: &TruncatedSystem,
    x0: &DVector<f64>,
    x_target: &DVector<f64>,
    segments: usize,
    ridge: f64,
) -> Result<ControlExperiment, GalerkinError> {
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(GalerkinError::InvalidControl(format!("ridge must be >= 0, got {ridge}")));
    }
    if x0.len() != sys.dim() || x_target.len() != sys.dim() {
        return Err(GalerkinError::InvalidSize(format!(
            "states must have length {}, got {} and {}",
            sys.dim(),
            x0.len(),
            x_target.len()
        )));
    }
    let horizon = sys.settings.horizon;
    let map = input_state_map(sys, segments)?;
    let free = sys.simulate(x0, &ControlSignal::zero(horizon, segments))?;
    let r = x_target - free.terminal();
    let h = ridge_solve(&map.matrix, &r, ridge);
    let control = ControlSignal::new(horizon, h.iter().copied().collect())?;
    let reached = sys.simulate(x0, &control)?;
    let terminal = reached.terminal().clone();
    let miss = (&terminal - x_target).norm();
    let target_norm = x_target.norm();
    let achieved_eps = if target_norm > 0.0 { miss / target_norm } else { miss };
    Ok(ControlExperiment {
        system: sys.settings,
        n_u: sys.n_u,
        n_theta: sys.n_theta,
        segments,
        ridge,
        x0: x0.iter().copied().collect(),
        x_target: x_target.iter().copied().collect(),
        control_norm: control.norm(),
        control,
        gramian_sv: map.singular_values,
        terminal: terminal.iter().copied().collect(),
        achieved_eps,
    })
}

/// Reduced trajectory mapped back to the grid: `t, u2_norm, theta_norm, stokes_energy, h`.
pub fn reduced_trajectory_csv(system: &ModeSystem, sys: &TruncatedSystem, traj: &Trajectory) -> String {
    let mut t = CsvTable::new(&["t", "u2_norm", "theta_norm", "stokes_energy", "h"]);
    for (i, xr) in traj.states.iter().enumerate() {
        let x = &sys.basis * xr;
        t.push(vec![
            fmt_real(traj.t[i]),
            fmt_real(system.velocity_norm(&x)),
            fmt_real(system.heat_norm(&x)),
            fmt_real(system.stokes_energy(&x)),
            fmt_real(traj.boundary[i]),
        ]);
    }
    t.to_csv_string()
}

/// Modal input map of a diagonal system `x_i' = lambda_i x_i + b_i h`:
/// entry `(i, m) = b_i (e^{lambda_i (T - t_m)} - e^{lambda_i (T - t_{m+1})}) / lambda_i`.
///
/// With `b_i` the observations `xi'(L)` of adjoint eigenfunctions this is the
/// finite-dimensional dual of the unique-continuation test.
pub fn modal_input_map(modes: &[(f64, Complex64)], horizon: f64, segments: usize) -> DMatrix<Complex64> {
    let w = horizon / segments as f64;
    DMatrix::from_fn(modes.len(), segments, |i, m| {
        let (lambda, b) = modes[i];
        let (t0, t1) = (m as f64 * w, (m + 1) as f64 * w);
        let integral = if lambda == 0.0 {
            w
        } else {
            ((lambda * (horizon - t0)).exp() - (lambda * (horizon - t1)).exp()) / lambda
        };
        b * integral
    })
}
