//! Time integration of the Voigt system and its Navier-Stokes limit (`α = 0`), the
//! semigroup decompositions and the energy diagnostics along trajectories.

pub mod decomposition;
pub mod energy;
pub mod evolve;
pub mod integrator;
pub mod params;

pub use decomposition::{
    linear_semigroup, solve_l_decomposition, solve_v_decomposition, Decomposition,
    DecompositionRecord,
};
pub use energy::{
    absorbing_radius_sq, energy_envelope, entering_time, entry_check, envelope_check,
    integral_estimate_check, EntryCheck, EnvelopeCheck, IntegralCheck,
};
pub use evolve::{
    cfl_limit, continuous_dependence_probe, derivative_norm_sup, energy_identity_residual, evolve,
    evolve_observed, rhs, state_record, step, suggest_dt, DependenceProbe, Trajectory,
};
pub use integrator::IfRk4;
pub use params::{Integrator, StateRecord, TrajectoryConfig, VoigtParams};
