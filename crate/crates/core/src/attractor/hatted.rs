//! The Voigt system in the variable `û = G u`, `G² = I + α²A`, and its linearization.

use crate::dynamics::VoigtParams;
use crate::error::{NsvError, Result};
use crate::spectral::transform::{advect_physical, advect_symmetric_physical, PhysicalField};
use crate::spectral::{GDirection, NormKind, SpectralField};

pub(crate) fn require_voigt(p: &VoigtParams) -> Result<()> {
    if p.alpha > 0.0 {
        Ok(())
    } else {
        Err(NsvError::Unsupported(
            "the hatted system is only defined for alpha > 0".into(),
        ))
    }
}

/// `-ν/α² w + ν/α² G^{-2} w`, i.e. the per-mode rate `-νλ_k/(1 + α²λ_k)`.
pub(crate) fn hatted_linear(w: &SpectralField, p: &VoigtParams) -> SpectralField {
    let mut out = w.clone();
    out.mul_modes(&p.linear_rates());
    out
}

/// `G^{-1}(g - B(G^{-1}û, G^{-1}û))`, given the physical samples of `u = G^{-1}û`.
pub(crate) fn hatted_nonlinear(pu: &PhysicalField, p: &VoigtParams) -> SpectralField {
    let grid = p.forcing.grid();
    let mut out = p.forcing.clone();
    out.axpy(-1.0, &advect_physical(grid, pu, pu));
    out.g_apply(p.alpha, GDirection::Inverse)
}

/// `-G^{-1}[B(G^{-1}w, u) + B(u, G^{-1}w)]`, given the physical samples of `u`.
pub(crate) fn linearized_nonlinear(
    pu: &PhysicalField,
    w: &SpectralField,
    p: &VoigtParams,
) -> SpectralField {
    let gw = w.g_apply(p.alpha, GDirection::Inverse);
    let pw = PhysicalField::from_spectral(&gw);
    let mut out = advect_symmetric_physical(w.grid(), &pw, pu);
    out.scale(-1.0);
    out.g_apply(p.alpha, GDirection::Inverse)
}

/// Right-hand side of the hatted system
/// `-(ν/α²)û + (ν/α²)G^{-2}û - G^{-1}B(G^{-1}û, G^{-1}û) + G^{-1}g`.
pub fn hatted_rhs(uhat: &SpectralField, p: &VoigtParams) -> Result<SpectralField> {
    require_voigt(p)?;
    uhat.same_grid(&p.forcing)?;
    let u = uhat.g_apply(p.alpha, GDirection::Inverse);
    let mut out = hatted_nonlinear(&PhysicalField::from_spectral(&u), p);
    out.axpy(1.0, &hatted_linear(uhat, p));
    Ok(out)
}

/// The linearized operator `L(û) w`.
pub fn linearized_apply(
    uhat: &SpectralField,
    w: &SpectralField,
    p: &VoigtParams,
) -> Result<SpectralField> {
    require_voigt(p)?;
    uhat.same_grid(w)?;
    uhat.same_grid(&p.forcing)?;
    let u = uhat.g_apply(p.alpha, GDirection::Inverse);
    let mut out = linearized_nonlinear(&PhysicalField::from_spectral(&u), w, p);
    out.axpy(1.0, &hatted_linear(w, p));
    Ok(out)
}

/// Terms of the quadratic-form bound `⟨Lw, w⟩ ≤ -h₀|w|² + h₁|G^{-1}w|²` for one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFormSample {
    /// `⟨L(û) w, w⟩`.
    pub form: f64,
    /// `h₀ |w|²` with `h₀ = ν/(2α²)`.
    pub h0_term: f64,
    /// `(ν/α²) |G^{-1}w|²`, the calibration-free part of `h₁|G^{-1}w|²`.
    pub viscous_term: f64,
    /// `(M₁²/(α²ν³)) ‖u‖² |G^{-1}w|²`, the part multiplied by the calibration constant.
    pub trilinear_scale: f64,
}

impl QuadraticFormSample {
    /// Smallest calibration constant for which the bound holds on this sample (zero if any works).
    pub fn required_constant(&self) -> f64 {
        let excess = self.form + self.h0_term - self.viscous_term;
        if excess <= 0.0 {
            0.0
        } else {
            excess / self.trilinear_scale
        }
    }

    pub fn holds_with(&self, c: f64) -> bool {
        self.form + self.h0_term <= self.viscous_term + c * self.trilinear_scale
    }
}

/// Evaluates both sides of the quadratic-form bound at `(û, w)` with the attractor radius `m1`.
pub fn quadratic_form_sample(
    uhat: &SpectralField,
    w: &SpectralField,
    p: &VoigtParams,
    m1: f64,
) -> Result<QuadraticFormSample> {
    let lw = linearized_apply(uhat, w, p)?;
    let a2 = p.alpha * p.alpha;
    let u = uhat.g_apply(p.alpha, GDirection::Inverse);
    let gw2 = w
        .g_apply(p.alpha, GDirection::Inverse)
        .norm_sq(NormKind::L2);
    Ok(QuadraticFormSample {
        form: lw.inner(w),
        h0_term: p.nu / (2.0 * a2) * w.norm_sq(NormKind::L2),
        viscous_term: p.nu / a2 * gw2,
        trilinear_scale: m1 * m1 / (a2 * p.nu.powi(3)) * u.norm_sq(NormKind::H1) * gw2,
    })
}
