//! Spectral Galerkin simulation of the 3D Navier-Stokes-Voigt equations on the periodic
//! box, together with the analysis passes built on it: dissipative energy estimates,
//! semigroup decompositions, closed-form attractor bounds, trace-formula dimension
//! estimates and the `α → 0` limit diagnostics.

pub mod attractor;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod limit;
pub mod spectral;

pub use attractor::{
    compute_bounds, covering_number_estimate, evolve_tangents, exponential_attractor_check,
    hatted_rhs, linearized_apply, BoundsParams, BoundsReport, TangentBundle, TangentConfig,
    TraceStats,
};
pub use dynamics::{evolve, rhs, step, StateRecord, Trajectory, TrajectoryConfig, VoigtParams};
pub use error::{ErrorCategory, NsvError, Result};
pub use limit::{cloud_semidistance, weak_distance, CloudDistance, FamilyRun};
pub use spectral::{
    bilinear, eigenvalue_table, leray_project, trilinear, DomainSpec, GDirection, Grid, NormKind,
    SpectralField,
};
