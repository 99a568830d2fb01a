//! Shared fixtures for the kernel benchmarks.

use std::f64::consts::PI;
use std::path::Path;

use nsv_core::harness::{generate_forcing, generate_initial, Forcing, InitialCondition};
use nsv_core::{DomainSpec, Grid, SpectralField, VoigtParams};

/// Random low-mode field with unit `L²` norm on an `n³` grid.
pub fn field(n: usize, seed: u64) -> SpectralField {
    let grid = Grid::new(DomainSpec::new(2.0 * PI, n)).expect("valid grid");
    let ic = InitialCondition::RandomLowmode {
        k_max: (n / 3) as f64,
        spectrum_slope: 1.0,
        amplitude: 1.0,
    };
    generate_initial(&ic, &grid, seed, Path::new(".")).expect("generated field")
}

/// Forced Voigt parameters on the grid of `u`.
pub fn params(u: &SpectralField, alpha: f64) -> VoigtParams {
    let f = Forcing::LowmodeRandom {
        k_max: 2.0,
        amplitude: 1.0,
        seed: 1,
    };
    let g = generate_forcing(&f, u.grid(), Path::new(".")).expect("forcing");
    VoigtParams::new(0.1, alpha, g).expect("valid parameters")
}
