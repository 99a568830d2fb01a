//! Closed-form attractor bounds, the hatted system with its linearization, trace-formula
//! dimension estimates and the covering-number estimate for exponential attractors.

pub mod bounds;
pub mod covering;
pub mod hatted;
pub mod tangent;

pub use bounds::{
    compute_bounds, exponential_attractor_check, BoundsParams, BoundsReport,
    ExponentialAttractorComparison,
};
pub use covering::{covering_log2_count, covering_number_estimate, product_bound_log2};
pub use hatted::{hatted_rhs, linearized_apply, quadratic_form_sample, QuadraticFormSample};
pub use tangent::{evolve_tangents, TangentBundle, TangentConfig, TraceStats};
