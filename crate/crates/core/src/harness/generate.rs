//! Deterministic initial conditions and forcing.
//!
//! All random streams come from `ChaCha8Rng::seed_from_u64(seed)`; modes are visited in
//! storage order and each `±k` pair draws six standard normals for `k`, the partner
//! receiving the complex conjugate.

use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};
use crate::spectral::field::project_unchecked;
use crate::spectral::serial::read_field;
use crate::spectral::{Grid, NormKind, SpectralField, Vec3c};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    RandomLowmode {
        k_max: f64,
        #[serde(default)]
        spectrum_slope: f64,
        /// `L²` norm of the generated field.
        #[serde(default = "one")]
        amplitude: f64,
    },
    File {
        path: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Forcing {
    Zero,
    LowmodeRandom {
        k_max: f64,
        /// `|g|` in `L²`.
        amplitude: f64,
        seed: u64,
    },
    File {
        path: String,
    },
}

fn one() -> f64 {
    1.0
}

/// Gaussian solenoidal field over the modes with `|k| ≤ k_max` (integer units),
/// coefficients scaled by `|k|^{-slope}`. Not normalized.
pub(crate) fn random_lowmode_raw(
    grid: &Grid,
    rng: &mut ChaCha8Rng,
    k_max: f64,
    slope: f64,
) -> SpectralField {
    let mut raw: Vec<Vec3c> = vec![[Complex64::default(); 3]; grid.len()];
    for i in grid.retained_indices() {
        let m = grid.mirror(i);
        if m < i {
            continue;
        }
        let k = grid.wavevector(i);
        let kn = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
        if kn > k_max {
            continue;
        }
        let s = kn.powf(-slope);
        let mut v = [Complex64::default(); 3];
        for z in v.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *z = Complex64::new(re * s, im * s);
        }
        raw[i] = v;
        raw[m] = v.map(|z| z.conj());
    }
    project_unchecked(grid, &raw)
}

/// Random solenoidal field over every retained mode.
pub(crate) fn random_solenoidal(grid: &Grid, rng: &mut ChaCha8Rng, slope: f64) -> SpectralField {
    random_lowmode_raw(grid, rng, f64::INFINITY, slope)
}

fn normalized(mut u: SpectralField, amplitude: f64) -> Result<SpectralField> {
    let n = u.norm(NormKind::L2);
    if n == 0.0 {
        if amplitude == 0.0 {
            return Ok(u);
        }
        return Err(NsvError::InvalidInput(
            "k_max selects no modes; cannot normalize".into(),
        ));
    }
    u.scale(amplitude / n);
    Ok(u)
}

/// `A (sin x cos y cos z, -cos x sin y cos z, 0)` in the scaled coordinates `x ↦ 2πx/L`.
pub fn taylor_green(grid: &Grid, amplitude: f64) -> SpectralField {
    let mut raw: Vec<Vec3c> = vec![[Complex64::default(); 3]; grid.len()];
    for sx in [-1, 1] {
        for sy in [-1, 1] {
            for sz in [-1, 1] {
                let i = grid.index_of([sx, sy, sz]).expect("unit modes on grid");
                raw[i] = [
                    Complex64::new(0.0, -(sx as f64) * amplitude / 8.0),
                    Complex64::new(0.0, (sy as f64) * amplitude / 8.0),
                    Complex64::default(),
                ];
            }
        }
    }
    project_unchecked(grid, &raw)
}

pub fn generate_initial(
    ic: &InitialCondition,
    grid: &Grid,
    seed: u64,
    base_dir: &Path,
) -> Result<SpectralField> {
    match ic {
        InitialCondition::TaylorGreen { amplitude } => Ok(taylor_green(grid, *amplitude)),
        InitialCondition::RandomLowmode {
            k_max,
            spectrum_slope,
            amplitude,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            normalized(
                random_lowmode_raw(grid, &mut rng, *k_max, *spectrum_slope),
                *amplitude,
            )
        }
        InitialCondition::File { path } => read_field(&base_dir.join(path), grid.spec()),
    }
}

pub fn generate_forcing(f: &Forcing, grid: &Grid, base_dir: &Path) -> Result<SpectralField> {
    match f {
        Forcing::Zero => Ok(SpectralField::zeros(grid)),
        Forcing::LowmodeRandom {
            k_max,
            amplitude,
            seed,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            normalized(random_lowmode_raw(grid, &mut rng, *k_max, 0.0), *amplitude)
        }
        Forcing::File { path } => read_field(&base_dir.join(path), grid.spec()),
    }
}
