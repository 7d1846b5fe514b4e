//! Classical equations of motion of the Be+ / electron / proton system and
//! the integrator that solves them.

mod classical;
pub mod integrator;
mod periodic;

pub use classical::{
    eom_rhs, effective_electron_frequency, in_phase_state, initial_state_from_temperatures, integrate,
    integrate_at, EomCoefficients, MotionState, Temperatures, TrajectoryRow, TriSystem,
};
pub use periodic::{propagate_periodic, PeriodPropagator};
pub use integrator::{IntegratorConfig, Precision, StepStats};
