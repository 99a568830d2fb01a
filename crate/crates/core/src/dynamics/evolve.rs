use log::warn;

use super::integrator::IfRk4;
use super::params::{StateRecord, TrajectoryConfig, VoigtParams};
use crate::error::{NsvError, Result};
use crate::spectral::transform::{advect_physical, PhysicalField};
use crate::spectral::{NormKind, SpectralField};

/// Ratio of energy growth treated as a blow-up of the time stepping.
pub const BLOWUP_FACTOR: f64 = 1e12;

/// Nonlinear tendency `(I + α²A)^{-1}(g - B(u, u))`.
pub(crate) fn nonlinear_term(u: &SpectralField, p: &VoigtParams, minv: &[f64]) -> SpectralField {
    let mut out = p.forcing.clone();
    if !u.is_zero() {
        let pu = PhysicalField::from_spectral(u);
        out.axpy(-1.0, &advect_physical(u.grid(), &pu, &pu));
    }
    out.mul_modes(minv);
    out
}

/// `u̇ = (I + α²A)^{-1}(g - νAu - B(u, u))`.
pub fn rhs(u: &SpectralField, p: &VoigtParams) -> Result<SpectralField> {
    u.same_grid(&p.forcing)?;
    let minv = p.voigt_inverse();
    let mut out = nonlinear_term(u, p, &minv);
    let mut lin = u.clone();
    lin.mul_modes(&p.linear_rates());
    out.axpy(1.0, &lin);
    Ok(out)
}

/// One integrating-factor RK4 step of size `dt`.
pub fn step(u: &SpectralField, p: &VoigtParams, dt: f64) -> Result<SpectralField> {
    u.same_grid(&p.forcing)?;
    let stepper = IfRk4::new(&p.linear_rates(), dt);
    let minv = p.voigt_inverse();
    let mut state = [u.clone()];
    stepper.step(&mut state, |s| Ok(vec![nonlinear_term(&s[0], p, &minv)]))?;
    let [out] = state;
    Ok(out)
}

/// Advective stability limit `2 / (max|u| · k_max)` for the explicit part.
pub fn cfl_limit(u: &SpectralField) -> f64 {
    let speed = PhysicalField::from_spectral(u).max_speed();
    let kmax = u.grid().spec().kmax() as f64 * u.grid().spec().wavenumber_unit();
    if speed == 0.0 {
        f64::INFINITY
    } else {
        2.0 / (speed * kmax)
    }
}

/// Default fixed step: half the advective limit of the initial field, capped at `cap`.
pub fn suggest_dt(u: &SpectralField, cap: f64) -> f64 {
    (0.5 * cfl_limit(u)).min(cap)
}

pub fn state_record(t: f64, u: &SpectralField, p: &VoigtParams) -> Result<StateRecord> {
    let a = p.alpha;
    let udot = rhs(u, p)?;
    Ok(StateRecord {
        t,
        e_alpha: u.norm_sq(NormKind::Valpha(a)),
        h1: u.norm_sq(NormKind::H1),
        psi_alpha: u.norm_sq(NormKind::Valpha2(a)),
        dtnorm_valpha: udot.norm(NormKind::Valpha(a)),
        dtnorm_vstar43: udot.norm(NormKind::Vstar).powf(4.0 / 3.0),
        g_dot_u: p.forcing.inner(u),
    })
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<StateRecord>,
    pub final_field: SpectralField,
}

/// Energy level above which a run is declared divergent.
pub(crate) fn blowup_threshold(u0: &SpectralField, p: &VoigtParams) -> f64 {
    let l1 = u0.grid().lambda1();
    let g2 = p.gnorm().powi(2);
    let ball = 2.0 * (1.0 + l1 * p.alpha * p.alpha) * g2 / (p.nu * p.nu * l1 * l1);
    BLOWUP_FACTOR * u0.norm_sq(NormKind::Valpha(p.alpha)).max(ball).max(1e-30)
}

pub(crate) fn check_finite(e: f64, threshold: f64, t: f64) -> Result<()> {
    if !e.is_finite() {
        return Err(NsvError::Divergence {
            t,
            reason: "non-finite energy".into(),
        });
    }
    if e > threshold {
        return Err(NsvError::Divergence {
            t,
            reason: format!("energy {e:.3e} exceeded blow-up threshold {threshold:.3e}"),
        });
    }
    Ok(())
}

/// Integrates from `u0` over `[0, t_end]`, recording every `record_stride` steps and at the end.
pub fn evolve(u0: &SpectralField, p: &VoigtParams, cfg: &TrajectoryConfig) -> Result<Trajectory> {
    evolve_observed(u0, p, cfg, |_, _| {})
}

/// As [`evolve`], calling `observe(t, u)` at every record.
pub fn evolve_observed<F>(
    u0: &SpectralField,
    p: &VoigtParams,
    cfg: &TrajectoryConfig,
    mut observe: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &SpectralField),
{
    cfg.validate()?;
    u0.same_grid(&p.forcing)?;
    let steps = cfg.steps();
    let stepper = IfRk4::new(&p.linear_rates(), cfg.dt);
    let minv = p.voigt_inverse();
    let threshold = blowup_threshold(u0, p);
    let mut state = [u0.clone()];
    let mut records = Vec::with_capacity(steps / cfg.record_stride + 2);

    let mut record = |n: usize, u: &SpectralField, records: &mut Vec<StateRecord>| -> Result<()> {
        let t = n as f64 * cfg.dt;
        let limit = cfl_limit(u);
        if cfg.dt > limit {
            warn!(
                "dt = {} exceeds advective limit {limit:.3e} at t = {t}",
                cfg.dt
            );
        }
        records.push(state_record(t, u, p)?);
        observe(t, u);
        Ok(())
    };

    record(0, &state[0], &mut records)?;
    for n in 1..=steps {
        stepper.step(&mut state, |s| Ok(vec![nonlinear_term(&s[0], p, &minv)]))?;
        let t = n as f64 * cfg.dt;
        check_finite(state[0].norm_sq(NormKind::Valpha(p.alpha)), threshold, t)?;
        if n % cfg.record_stride == 0 || n == steps {
            record(n, &state[0], &mut records)?;
        }
    }
    let [final_field] = state;
    Ok(Trajectory {
        records,
        final_field,
    })
}

fn uniform_spacing(records: &[StateRecord]) -> Result<f64> {
    let h = records[1].t - records[0].t;
    let uniform = records
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - h).abs() <= 1e-9 * h.abs());
    if !uniform || h <= 0.0 {
        return Err(NsvError::InvalidInput(
            "records must be uniformly spaced in time".into(),
        ));
    }
    Ok(h)
}

/// Discrete check of `½ dE_α/dt + ν‖u‖² = ⟨g, u⟩` with centered differences.
pub fn energy_identity_residual(records: &[StateRecord], p: &VoigtParams) -> Result<f64> {
    if records.len() < 3 {
        return Err(NsvError::InvalidInput(
            "energy identity needs at least three records".into(),
        ));
    }
    let h = uniform_spacing(records)?;
    Ok(records
        .windows(3)
        .map(|w| {
            let de = (w[2].e_alpha - w[0].e_alpha) / (2.0 * h);
            let mid = &w[1];
            (de + 2.0 * p.nu * mid.h1 - 2.0 * mid.g_dot_u).abs() / mid.e_alpha.max(1.0)
        })
        .fold(0.0, f64::max))
}

/// `sup_t ‖u̇(t)‖_{V_α}` over the records, with `u̇` taken from the right-hand side.
pub fn derivative_norm_sup(records: &[StateRecord], p: &VoigtParams) -> Result<f64> {
    if p.is_navier_stokes() {
        return Err(NsvError::Unsupported(
            "the time-derivative bound only applies to the Voigt model (alpha > 0)".into(),
        ));
    }
    if records.is_empty() {
        return Err(NsvError::InvalidInput("no records".into()));
    }
    Ok(records.iter().map(|r| r.dtnorm_valpha).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceProbe {
    /// `sup_t (1/t) log(‖u(t) - v(t)‖_{V_α} / ‖u₀ - v₀‖_{V_α})`, zero for identical data.
    pub growth_rate: f64,
    /// `(t, ‖u(t) - v(t)‖_{V_α})` at every record.
    pub separation: Vec<(f64, f64)>,
}

/// Evolves two nearby solutions and measures the exponential rate at which they separate.
pub fn continuous_dependence_probe(
    u0: &SpectralField,
    v0: &SpectralField,
    p: &VoigtParams,
    cfg: &TrajectoryConfig,
) -> Result<DependenceProbe> {
    if p.is_navier_stokes() {
        return Err(NsvError::Unsupported(
            "continuous dependence is only available for alpha > 0".into(),
        ));
    }
    u0.same_grid(v0)?;
    let norm = NormKind::Valpha(p.alpha);
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let (ru, rv) = rayon::join(
        || evolve_observed(u0, p, cfg, |_, u| us.push(u.clone())),
        || evolve_observed(v0, p, cfg, |_, v| vs.push(v.clone())),
    );
    let (tu, _) = (ru?, rv?);
    let d0 = u0.sub(v0).norm(norm);
    let separation: Vec<(f64, f64)> = tu
        .records
        .iter()
        .zip(us.iter().zip(&vs))
        .map(|(r, (u, v))| (r.t, u.sub(v).norm(norm)))
        .collect();
    let growth_rate = if d0 == 0.0 {
        0.0
    } else {
        separation
            .iter()
            .filter(|(t, _)| *t > 0.0)
            .map(|(t, d)| (d / d0).ln() / t)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    Ok(DependenceProbe {
        growth_rate,
        separation,
    })
}
