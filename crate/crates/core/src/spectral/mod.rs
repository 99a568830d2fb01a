//! Fourier Galerkin discretization on the periodic box: fields, Stokes operator,
//! Leray projection, the advection term and the norms built from them.

pub mod domain;
pub mod field;
pub mod serial;
pub mod transform;

pub use domain::{eigenvalue_table, DealiasFraction, DomainSpec, Grid};
pub use field::{leray_project, GDirection, NormKind, SpectralField, Vec3c};
pub use transform::{bilinear, trilinear, PhysicalField};
