//! Per-mode simulation of the linearised system with the temperature
//! controlled on the top wall, and desk-scale control synthesis.
//!
//! After the curl is applied, mode `k` evolves `(u2, theta)` by
//!
//! ```text
//! d/dt (u2'' - k^2 u2) = nu (u2'''' - 2 k^2 u2'' + k^4 u2) - k^2 theta,   u2 = u2' = 0 at the walls
//! d/dt theta = alpha (theta'' - k^2 theta),                                theta(0) = 0, theta(L) = h
//! ```
//!
//! and `u1 = i u2' / k`. Space is discretised by finite differences, time by
//! Crank-Nicolson with the boundary value lifted out.

mod control;
mod simulate;
mod system;
mod zero_mode;

use thiserror::Error;

pub use control::{
    input_map, input_state_map, modal_input_map, random_unit_vector, reduced_trajectory_csv, ridge_solve,
    singular_values, synthesize_control, truncate, ControlExperiment, InputStateMap, TruncatedSystem,
};
pub use simulate::{
    simulate, simulate_direct, simulate_state_space, trajectory_csv, CnStepper, ControlSignal, Trajectory,
};
pub use system::{
    assemble_mode_system, interior_grid, lifting_profile, ModeSystem, StateSpace, SystemSettings, DEFAULT_STEPS,
    MIN_GRID,
};
pub use zero_mode::{zero_mode_system, ZeroModeSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GalerkinError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid control: {0}")]
    InvalidControl(String),
    #[error("linear solve failed: {0}")]
    Solve(String),
}
