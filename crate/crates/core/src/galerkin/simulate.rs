//! Crank-Nicolson stepping with piecewise-constant boundary control.

use nalgebra::{DMatrix, DVector, LU};
use serde::Serialize;

use crate::export::{fmt_real, CsvTable};

use super::system::{ModeSystem, StateSpace};
use super::GalerkinError;

/// Piecewise-constant control on `segments` equal sub-intervals of `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlSignal {
    pub segments: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub values: Vec<f64>,
}

impl ControlSignal {
    pub fn new(horizon: f64, values: Vec<f64>) -> Result<Self, GalerkinError> {
        if values.is_empty() {
            return Err(GalerkinError::InvalidControl("at least one segment required".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GalerkinError::InvalidControl("non-finite control value".into()));
        }
        Ok(Self {
            segments: values.len(),
            horizon,
            values,
        })
    }

    pub fn zero(horizon: f64, segments: usize) -> Self {
        Self {
            segments: segments.max(1),
            horizon,
            values: vec![0.0; segments.max(1)],
        }
    }

    /// `sqrt(int_0^T h^2)`.
    pub fn norm(&self) -> f64 {
        let w = self.horizon / self.segments as f64;
        (self.values.iter().map(|v| v * v).sum::<f64>() * w).sqrt()
    }
}

/// Factored Crank-Nicolson step `z+ = lhs^{-1} (rhs z + dt b h)`.
pub struct CnStepper {
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    rhs: DMatrix<f64>,
    dt: f64,
}

impl CnStepper {
    pub fn new(a: &DMatrix<f64>, dt: f64) -> Self {
        let n = a.nrows();
        let id = DMatrix::<f64>::identity(n, n);
        Self {
            lu: (&id - a * (0.5 * dt)).lu(),
            rhs: &id + a * (0.5 * dt),
            dt,
        }
    }

    pub fn step(&self, z: &DVector<f64>, b: &DVector<f64>, h: f64) -> Result<DVector<f64>, GalerkinError> {
        let mut r = &self.rhs * z;
        if h != 0.0 {
            r.axpy(self.dt * h, b, 1.0);
        }
        self.lu
            .solve(&r)
            .ok_or_else(|| GalerkinError::Solve("singular Crank-Nicolson matrix".into()))
    }
}

/// States at `t_0 = 0, ..., t_steps = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Boundary value in force on the step ending at `t[i]` (`h` of the first segment at `t = 0`).
    pub boundary: Vec<f64>,
}

impl Trajectory {
    pub fn terminal(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn steps_per_segment(steps: usize, segments: usize) -> Result<usize, GalerkinError> {
    if segments == 0 || !steps.is_multiple_of(segments) {
        return Err(GalerkinError::InvalidControl(format!(
            "{segments} segments do not divide {steps} time steps"
        )));
    }
    Ok(steps / segments)
}

/// Simulates `x' = A x + b h` through the homogenised variable `z = x - lift h`.
pub fn simulate_state_space(
    sys: &StateSpace,
    steps: usize,
    dt: f64,
    x0: &DVector<f64>,
    control: &ControlSignal,
) -> Result<Trajectory, GalerkinError> {
    if x0.len() != sys.dim() {
        return Err(GalerkinError::InvalidSize(format!(
            "initial state has length {}, expected {}",
            x0.len(),
            sys.dim()
        )));
    }
    let per = steps_per_segment(steps, control.segments)?;
    let stepper = CnStepper::new(&sys.a, dt);
    let mut t = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut boundary = Vec::with_capacity(steps + 1);
    t.push(0.0);
    states.push(x0.clone());
    boundary.push(control.values[0]);
    let mut x = x0.clone();
    for (m, &h) in control.values.iter().enumerate() {
        // x is continuous across segment boundaries, z jumps
        let mut z = &x - &sys.lift * h;
        for s in 0..per {
            z = stepper.step(&z, &sys.b_inner, h)?;
            let step = m * per + s + 1;
            x = &z + &sys.lift * h;
            t.push(step as f64 * dt);
            states.push(x.clone());
            boundary.push(h);
        }
    }
    Ok(Trajectory { t, states, boundary })
}

/// Same scheme applied to the direct form `x' = A x + b_direct h`.
pub fn simulate_direct(
    sys: &StateSpace,
    steps: usize,
    dt: f64,
    x0: &DVector<f64>,
    control: &ControlSignal,
) -> Result<Trajectory, GalerkinError> {
    let per = steps_per_segment(steps, control.segments)?;
    let stepper = CnStepper::new(&sys.a, dt);
    let mut t = vec![0.0];
    let mut states = vec![x0.clone()];
    let mut boundary = vec![control.values[0]];
    let mut x = x0.clone();
    for (m, &h) in control.values.iter().enumerate() {
        for s in 0..per {
            x = stepper.step(&x, &sys.b_direct, h)?;
            t.push((m * per + s + 1) as f64 * dt);
            states.push(x.clone());
            boundary.push(h);
        }
    }
    Ok(Trajectory { t, states, boundary })
}

pub fn simulate(system: &ModeSystem, x0: &DVector<f64>, control: &ControlSignal) -> Result<Trajectory, GalerkinError> {
    simulate_state_space(&system.state, system.steps, system.dt, x0, control)
}

/// `t, u2_norm, theta_norm, stokes_energy, h, heat_flux_L` per step.
pub fn trajectory_csv(system: &ModeSystem, traj: &Trajectory) -> String {
    let mut t = CsvTable::new(&["t", "u2_norm", "theta_norm", "stokes_energy", "h", "heat_flux_L"]);
    for i in 0..traj.t.len() {
        let x = &traj.states[i];
        let h = traj.boundary[i];
        t.push(vec![
            fmt_real(traj.t[i]),
            fmt_real(system.velocity_norm(x)),
            fmt_real(system.heat_norm(x)),
            fmt_real(system.stokes_energy(x)),
            fmt_real(h),
            fmt_real(system.heat_flux_top(x, h)),
        ]);
    }
    t.to_csv_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::system::assemble_mode_system;
    use crate::params::{ChannelParams, ModeIndex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn system() -> ModeSystem {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        assemble_mode_system(ModeIndex::new(1).unwrap(), &p, 64, None, 1.0).unwrap()
    }

    fn random_state(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_control(m: usize, seed: u64) -> ControlSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ControlSignal::new(1.0, (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let s = system();
        let tr = simulate(&s, &DVector::zeros(128), &ControlSignal::zero(1.0, 32)).unwrap();
        assert!(tr.states.iter().all(|x| x.iter().all(|v| *v == 0.0)));
        assert_eq!(tr.t.len(), 513);
    }

    #[test]
    fn superposition_holds() {
        let s = system();
        let x0 = random_state(128, 1);
        let h = random_control(32, 2);
        let both = simulate(&s, &x0, &h).unwrap();
        let free = simulate(&s, &x0, &ControlSignal::zero(1.0, 32)).unwrap();
        let forced = simulate(&s, &DVector::zeros(128), &h).unwrap();
        for i in 0..both.states.len() {
            let d = &both.states[i] - &free.states[i] - &forced.states[i];
            assert!(d.amax() <= 1e-12 * both.states[i].amax().max(1.0));
        }
    }

    #[test]
    fn homogenised_equals_direct() {
        let s = system();
        let x0 = random_state(128, 3);
        let h = random_control(16, 4);
        let a = simulate(&s, &x0, &h).unwrap();
        let b = simulate_direct(&s.state, s.steps, s.dt, &x0, &h).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            assert!((x - y).amax() <= 1e-10 * y.amax().max(1.0));
        }
    }

    #[test]
    fn uncontrolled_energies_decay() {
        let s = system();
        let n = s.n;
        let mut x0 = random_state(2 * n, 5);
        x0.rows_mut(n, n).fill(0.0);
        let tr = simulate(&s, &x0, &ControlSignal::zero(1.0, 1)).unwrap();
        let e: Vec<f64> = tr.states.iter().map(|x| s.stokes_energy(x)).collect();
        assert!(e.windows(2).all(|w| w[1] <= w[0]));

        let mut x0 = random_state(2 * n, 6);
        x0.rows_mut(0, n).fill(0.0);
        let tr = simulate(&s, &x0, &ControlSignal::zero(1.0, 1)).unwrap();
        let h: Vec<f64> = tr.states.iter().map(|x| s.heat_norm(x)).collect();
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn misaligned_segments_rejected() {
        let s = system();
        assert!(simulate(&s, &DVector::zeros(128), &ControlSignal::zero(1.0, 3)).is_err());
    }

    #[test]
    fn trajectory_csv_has_one_row_per_step() {
        let s = system();
        let tr = simulate(&s, &DVector::zeros(128), &random_control(4, 9)).unwrap();
        let csv = trajectory_csv(&s, &tr);
        assert_eq!(csv.lines().count(), 514);
        assert!(csv.starts_with("t,u2_norm,theta_norm,stokes_energy,h,heat_flux_L\n"));
    }
}
