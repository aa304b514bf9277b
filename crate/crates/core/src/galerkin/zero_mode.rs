//! The `k = 0` mode: the mean horizontal velocity obeys an uncontrolled heat
//! equation, so no boundary temperature can steer it.

use nalgebra::{DMatrix, DVector};

use crate::params::ChannelParams;
use crate::spectra::fd::second_difference;

use super::control::input_map;
use super::simulate::{simulate_state_space, ControlSignal, Trajectory};
use super::system::{interior_grid, StateSpace, DEFAULT_STEPS, MIN_GRID};
use super::GalerkinError;

/// State `(u1, theta)` of the mean mode on `n` interior points each;
/// `u2 = 0` by incompressibility and the buoyancy is absorbed by the pressure.
#[derive(Debug, Clone)]
pub struct ZeroModeSystem {
    pub n: usize,
    pub dt: f64,
    pub steps: usize,
    pub horizon: f64,
    pub state: StateSpace,
}

pub fn zero_mode_system(params: &ChannelParams, n: usize, horizon: f64) -> Result<ZeroModeSystem, GalerkinError> {
    if n < MIN_GRID {
        return Err(GalerkinError::InvalidSize(format!("grid needs at least {MIN_GRID} points, got {n}")));
    }
    let h = params.l() / (n as f64 + 1.0);
    let d2 = second_difference(n, h).to_dense();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&(&d2 * params.nu()));
    a.view_mut((n, n), (n, n)).copy_from(&(&d2 * params.alpha()));
    let mut b = DVector::zeros(2 * n);
    b[2 * n - 1] = params.alpha() / (h * h);
    let mut lift = DVector::zeros(2 * n);
    for (i, x) in interior_grid(params.l(), n).into_iter().enumerate() {
        lift[n + i] = x / params.l();
    }
    Ok(ZeroModeSystem {
        n,
        dt: horizon / DEFAULT_STEPS as f64,
        steps: DEFAULT_STEPS,
        horizon,
        state: StateSpace::new(a, b, lift),
    })
}

impl ZeroModeSystem {
    pub fn simulate(&self, x0: &DVector<f64>, control: &ControlSignal) -> Result<Trajectory, GalerkinError> {
        simulate_state_space(&self.state, self.steps, self.dt, x0, control)
    }

    pub fn input_map(&self, segments: usize) -> Result<DMatrix<f64>, GalerkinError> {
        input_map(&self.state, self.steps, self.dt, segments)
    }

    /// The `u1` part of a state.
    pub fn u1<'a>(&self, x: &'a DVector<f64>) -> nalgebra::DVectorView<'a, f64> {
        x.rows(0, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mean_velocity_ignores_the_control() {
        let p = ChannelParams::new(1.0, 0.4, PI).unwrap();
        let z = zero_mode_system(&p, 64, 1.0).unwrap();
        let x0 = DVector::from_fn(128, |i, _| ((i as f64) * 0.3).sin());
        let h = ControlSignal::new(1.0, (0..16).map(|m| (m as f64 * 0.7).cos()).collect()).unwrap();
        let with = z.simulate(&x0, &h).unwrap();
        let without = z.simulate(&x0, &ControlSignal::zero(1.0, 16)).unwrap();
        for (a, b) in with.states.iter().zip(&without.states) {
            assert_eq!(z.u1(a), z.u1(b));
        }
        let map = z.input_map(16).unwrap();
        assert_eq!(map.rows(0, 64).amax(), 0.0);
        assert!(map.rows(64, 64).amax() > 0.0);
    }
}
