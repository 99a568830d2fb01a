//! Diagnostics for the `α → 0` limit: weak-metric trajectory distances, Hausdorff
//! semidistances between sampled attractor clouds, the energy inequality of the
//! Navier-Stokes branch and the nesting of absorbing balls.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evolve_observed, StateRecord, TrajectoryConfig, VoigtParams};
use crate::error::{NsvError, Result};
use crate::spectral::{NormKind, SpectralField};

/// `‖u - v‖_*` for `α = 0`, otherwise `‖u - v‖_{V⁰_α} = (‖u - v‖_*² + α²|u - v|²)^{1/2}`.
pub fn weak_distance(u: &SpectralField, v: &SpectralField, alpha: f64) -> Result<f64> {
    u.same_grid(v)?;
    let d = u.sub(v);
    Ok(if alpha == 0.0 {
        d.norm(NormKind::Vstar)
    } else {
        d.norm(NormKind::Valpha0(alpha))
    })
}

/// A family of runs sharing domain, data and time step, differing only in `α`.
#[derive(Debug, Clone)]
pub struct FamilyRun {
    /// Voigt lengths to compare against the Navier-Stokes reference (`α = 0`).
    pub alphas: Vec<f64>,
    pub shared_u0: SpectralField,
    /// Shared model; its `α` is ignored.
    pub params: VoigtParams,
    pub cfg: TrajectoryConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProfile {
    pub alpha: f64,
    /// `(t, ‖u_α(t) - u₀(t)‖_*)` at each record.
    pub profile: Vec<(f64, f64)>,
    pub max_distance: f64,
}

#[derive(Debug, Clone)]
pub struct FamilyResult {
    pub profiles: Vec<DistanceProfile>,
    /// Branches that failed, with the error message.
    pub failures: Vec<(f64, String)>,
    /// Diagnostics of the Navier-Stokes reference branch.
    pub reference_records: Vec<StateRecord>,
}

impl FamilyResult {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

struct Branch {
    alpha: f64,
    outcome: Result<Vec<(f64, SpectralField)>>,
    records: Vec<StateRecord>,
}

fn run_branch(alpha: f64, fam: &FamilyRun) -> Branch {
    let p = fam.params.with_alpha(alpha);
    let mut snaps = Vec::new();
    let res = evolve_observed(&fam.shared_u0, &p, &fam.cfg, |t, u| {
        snaps.push((t, u.clone()))
    });
    match res {
        Ok(traj) => Branch {
            alpha,
            outcome: Ok(snaps),
            records: traj.records,
        },
        Err(e) => Branch {
            alpha,
            outcome: Err(e),
            records: Vec::new(),
        },
    }
}

/// Evolves every branch (concurrently) and measures its `V*` distance to the reference.
pub fn run_family(fam: &FamilyRun) -> Result<FamilyResult> {
    fam.cfg.validate()?;
    if fam.alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(NsvError::InvalidInput("alphas must lie in [0, 1]".into()));
    }
    let mut all = vec![0.0];
    all.extend(fam.alphas.iter().copied());
    let branches: Vec<Branch> = all.par_iter().map(|&a| run_branch(a, fam)).collect();
    let mut iter = branches.into_iter();
    let reference = iter.next().expect("reference branch");
    let ref_snaps = reference.outcome?;
    let mut profiles = Vec::new();
    let mut failures = Vec::new();
    for b in iter {
        match b.outcome {
            Ok(snaps) => {
                let profile: Vec<(f64, f64)> = snaps
                    .iter()
                    .zip(&ref_snaps)
                    .map(|((t, u), (_, u0))| Ok((*t, weak_distance(u, u0, 0.0)?)))
                    .collect::<Result<_>>()?;
                let max_distance = profile.iter().map(|x| x.1).fold(0.0, f64::max);
                profiles.push(DistanceProfile {
                    alpha: b.alpha,
                    profile,
                    max_distance,
                });
            }
            Err(e) => failures.push((b.alpha, e.to_string())),
        }
    }
    Ok(FamilyResult {
        profiles,
        failures,
        reference_records: reference.records,
    })
}

/// Metric used for cloud distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CloudMetric {
    Vstar,
    Valpha0(f64),
}

impl CloudMetric {
    fn distance(self, u: &SpectralField, v: &SpectralField) -> Result<f64> {
        match self {
            CloudMetric::Vstar => weak_distance(u, v, 0.0),
            CloudMetric::Valpha0(a) => weak_distance(u, v, a),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CloudMetric::Vstar => "Vstar",
            CloudMetric::Valpha0(_) => "Valpha0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CloudDistance {
    /// `sup_{a ∈ A} inf_{b ∈ B} d(a, b)`.
    pub semidist_forward: f64,
    /// `sup_{b ∈ B} inf_{a ∈ A} d(a, b)`.
    pub semidist_backward: f64,
    pub metric: CloudMetric,
}

impl CloudDistance {
    pub fn hausdorff(&self) -> f64 {
        self.semidist_forward.max(self.semidist_backward)
    }
}

fn semidistance(a: &[SpectralField], b: &[SpectralField], metric: CloudMetric) -> Result<f64> {
    let mut sup = 0.0_f64;
    for x in a {
        let mut inf = f64::INFINITY;
        for y in b {
            inf = inf.min(metric.distance(x, y)?);
        }
        sup = sup.max(inf);
    }
    Ok(sup)
}

/// Exact Hausdorff semidistances between two finite clouds.
pub fn cloud_semidistance(
    a: &[SpectralField],
    b: &[SpectralField],
    metric: CloudMetric,
) -> Result<CloudDistance> {
    if a.is_empty() || b.is_empty() {
        return Err(NsvError::InvalidInput("clouds must be nonempty".into()));
    }
    Ok(CloudDistance {
        semidist_forward: semidistance(a, b, metric)?,
        semidist_backward: semidistance(b, a, metric)?,
        metric,
    })
}

/// Largest positive defect of the energy inequality
/// `|u(t)|² + 2ν∫ₛᵗ‖u‖² ≤ |u(s)|² + 2∫ₛᵗ⟨g, u⟩` over all record pairs `s < t`,
/// relative to `max(1, |u(s)|²)`. Integrals use the trapezoid rule on the records.
pub fn energy_inequality_residual(records: &[StateRecord], p: &VoigtParams) -> Result<f64> {
    if !p.is_navier_stokes() {
        return Err(NsvError::InvalidInput(
            "the energy inequality applies to the alpha = 0 branch".into(),
        ));
    }
    if records.len() < 2 {
        return Err(NsvError::InvalidInput("need at least two records".into()));
    }
    // cumulative ∫ (2ν‖u‖² - 2⟨g,u⟩)
    let mut cum = vec![0.0; records.len()];
    for i in 1..records.len() {
        let (a, b) = (&records[i - 1], &records[i]);
        let fa = 2.0 * p.nu * a.h1 - 2.0 * a.g_dot_u;
        let fb = 2.0 * p.nu * b.h1 - 2.0 * b.g_dot_u;
        cum[i] = cum[i - 1] + 0.5 * (b.t - a.t) * (fa + fb);
    }
    let mut worst = 0.0_f64;
    for s in 0..records.len() {
        let us = records[s].e_alpha;
        let scale = us.max(1.0);
        for t in s + 1..records.len() {
            let defect = records[t].e_alpha + (cum[t] - cum[s]) - us;
            worst = worst.max(defect / scale);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NestingRow {
    pub alpha: f64,
    pub radius_sq: f64,
    pub reference_radius_sq: f64,
    pub nested: bool,
}

/// Compares the absorbing-ball radius for each `α` with the `α`-uniform ball
/// `2(1 + λ₁)|g|²/(ν²λ₁²)`.
pub fn absorbing_nesting_check(
    nu: f64,
    gnorm: f64,
    lambda1: f64,
    alphas: &[f64],
) -> Vec<NestingRow> {
    let g2 = gnorm * gnorm;
    let denom = nu * nu * lambda1 * lambda1;
    let reference = 2.0 * (1.0 + lambda1) * g2 / denom;
    alphas
        .iter()
        .map(|&alpha| {
            let r = 2.0 * (1.0 + lambda1 * alpha * alpha) * g2 / denom;
            NestingRow {
                alpha,
                radius_sq: r,
                reference_radius_sq: reference,
                nested: r <= reference,
            }
        })
        .collect()
}

/// States recorded along one trajectory at times `t >= t_from`, for use as an attractor cloud.
pub fn sample_cloud(
    u0: &SpectralField,
    p: &VoigtParams,
    cfg: &TrajectoryConfig,
    t_from: f64,
) -> Result<Vec<SpectralField>> {
    let mut cloud = Vec::new();
    evolve_observed(u0, p, cfg, |t, u| {
        if t >= t_from {
            cloud.push(u.clone());
        }
    })?;
    if cloud.is_empty() {
        return Err(NsvError::InvalidInput(format!(
            "no records after t = {t_from} (t_end = {})",
            cfg.t_end
        )));
    }
    Ok(cloud)
}
