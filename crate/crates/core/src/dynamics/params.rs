use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};
use crate::spectral::{NormKind, SpectralField};

/// Model instance: viscosity, Voigt length, time-independent forcing and the named
/// calibration constants that stand in for generic constants of the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct VoigtParams {
    pub nu: f64,
    pub alpha: f64,
    pub forcing: SpectralField,
    pub calib: BTreeMap<String, f64>,
}

impl VoigtParams {
    pub fn new(nu: f64, alpha: f64, forcing: SpectralField) -> Result<Self> {
        let p = VoigtParams {
            nu,
            alpha,
            forcing,
            calib: BTreeMap::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(NsvError::InvalidInput(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(NsvError::InvalidInput(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.forcing.invariant_defect() > 1e-10 {
            return Err(NsvError::InvalidInput(
                "forcing is not divergence-free".into(),
            ));
        }
        Ok(())
    }

    /// Same model with a different `α`.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        VoigtParams {
            alpha,
            ..self.clone()
        }
    }

    pub fn is_navier_stokes(&self) -> bool {
        self.alpha == 0.0
    }

    /// Named calibration constant, 1 when unset.
    pub fn calib(&self, name: &str) -> f64 {
        self.calib.get(name).copied().unwrap_or(1.0)
    }

    pub fn gnorm(&self) -> f64 {
        self.forcing.norm(NormKind::L2)
    }

    /// `κ_ν = νλ₁ / (1 + λ₁α²)`.
    pub fn kappa_nu(&self) -> f64 {
        let l1 = self.forcing.grid().lambda1();
        self.nu * l1 / (1.0 + l1 * self.alpha * self.alpha)
    }

    /// Per-mode exponential rate `-νλ_k / (1 + α²λ_k)` of the linear part.
    pub fn linear_rates(&self) -> Vec<f64> {
        let (nu, a2) = (self.nu, self.alpha * self.alpha);
        self.forcing
            .grid()
            .mode_factors(|l| -nu * l / (1.0 + a2 * l))
    }

    /// Per-mode `(1 + α²λ_k)^{-1}`.
    pub fn voigt_inverse(&self) -> Vec<f64> {
        let a2 = self.alpha * self.alpha;
        self.forcing.grid().mode_factors(|l| 1.0 / (1.0 + a2 * l))
    }
}

/// Time integrator tag. Only the integrating-factor RK4 scheme is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default)]
    pub integrator: Integrator,
}

fn default_stride() -> usize {
    10
}

impl TrajectoryConfig {
    pub fn new(dt: f64, t_end: f64, record_stride: usize) -> Self {
        TrajectoryConfig {
            dt,
            t_end,
            record_stride,
            integrator: Integrator::IfRk4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(NsvError::InvalidInput(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(NsvError::InvalidInput(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.record_stride == 0 {
            return Err(NsvError::InvalidInput(
                "record_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of fixed steps covering `[0, t_end]`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Diagnostics recorded along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRecord {
    pub t: f64,
    /// `|u|^2 + α^2 ‖u‖^2`.
    pub e_alpha: f64,
    /// `‖u‖^2`.
    pub h1: f64,
    /// `‖u‖^2 + α^2 |Au|^2`.
    pub psi_alpha: f64,
    pub dtnorm_valpha: f64,
    /// `‖u̇‖_*^{4/3}`.
    pub dtnorm_vstar43: f64,
    /// `⟨g, u⟩`; not part of the CSV record.
    pub g_dot_u: f64,
}

impl StateRecord {
    pub const CSV_HEADER: &'static str = "t,E_alpha,H1,Psi_alpha,dtnorm_Valpha,dtnorm_Vstar43";

    pub fn is_valid(&self) -> bool {
        [
            self.e_alpha,
            self.h1,
            self.psi_alpha,
            self.dtnorm_valpha,
            self.dtnorm_vstar43,
        ]
        .iter()
        .all(|x| x.is_finite() && *x >= 0.0)
    }
}
