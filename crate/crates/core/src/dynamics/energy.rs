//! Checks of the dissipative energy estimates along recorded trajectories.

use serde::Serialize;

use super::params::{StateRecord, VoigtParams};
use crate::error::{NsvError, Result};

/// `(1 + λ₁α²)|g|² / (ν²λ₁²)`, the forcing part of the energy envelope.
pub fn pump_term(p: &VoigtParams) -> f64 {
    let l1 = p.forcing.grid().lambda1();
    let g2 = p.gnorm().powi(2);
    (1.0 + l1 * p.alpha * p.alpha) * g2 / (p.nu * p.nu * l1 * l1)
}

/// `E_α(0) e^{-κ_ν t} + (1 + λ₁α²)|g|²/(ν²λ₁²)`.
pub fn energy_envelope(e0: f64, t: f64, p: &VoigtParams) -> f64 {
    e0 * (-p.kappa_nu() * t).exp() + pump_term(p)
}

/// Squared radius `2(1 + λ₁α²)|g|²/(ν²λ₁²)` of the absorbing ball.
pub fn absorbing_radius_sq(p: &VoigtParams) -> f64 {
    2.0 * pump_term(p)
}

/// Time after which the envelope lies inside the absorbing ball; zero if it starts there,
/// `None` without forcing.
pub fn entering_time(e0: f64, p: &VoigtParams) -> Option<f64> {
    let pump = pump_term(p);
    if pump == 0.0 {
        return None;
    }
    Some((e0 / pump).ln().max(0.0) / p.kappa_nu())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCheck {
    /// Largest `(E_α(t) - envelope(t)) / envelope(t)`; nonpositive when the bound holds.
    pub worst_excess: f64,
    pub holds: bool,
}

/// Checks `E_α(t) ≤ envelope(t)` at every record with relative slack `slack`.
pub fn envelope_check(
    records: &[StateRecord],
    p: &VoigtParams,
    slack: f64,
) -> Result<EnvelopeCheck> {
    let first = records
        .first()
        .ok_or_else(|| NsvError::InvalidInput("no records".into()))?;
    let mut worst = f64::NEG_INFINITY;
    for r in records {
        let env = energy_envelope(first.e_alpha, r.t - first.t, p);
        let excess = if env > 0.0 {
            (r.e_alpha - env) / env
        } else if r.e_alpha > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        worst = worst.max(excess);
    }
    Ok(EnvelopeCheck {
        worst_excess: worst,
        holds: worst <= slack,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralCheck {
    /// Largest `lhs - rhs - quadrature_error` over the records; nonpositive when the bound holds.
    pub worst_excess: f64,
    /// Trapezoid-vs-coarse-trapezoid difference at the final time.
    pub quadrature_error: f64,
    pub holds: bool,
}

/// Checks `ν∫₀ᵗ‖u‖² ≤ ‖u₀‖²_{V_α} + |g|²t/(νλ₁)` with trapezoid quadrature on the records.
///
/// The slack is the gap between the trapezoid sum and the same rule on every other record.
pub fn integral_estimate_check(records: &[StateRecord], p: &VoigtParams) -> Result<IntegralCheck> {
    if records.len() < 3 {
        return Err(NsvError::InvalidInput(
            "integral estimate needs at least three records".into(),
        ));
    }
    let l1 = p.forcing.grid().lambda1();
    let g2 = p.gnorm().powi(2);
    let t0 = records[0].t;
    let e0 = records[0].e_alpha;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    let mut lhs = Vec::with_capacity(records.len());
    lhs.push(0.0);
    for i in 1..records.len() {
        let (a, b) = (&records[i - 1], &records[i]);
        fine += 0.5 * (b.t - a.t) * (a.h1 + b.h1);
        if i % 2 == 0 {
            let c = &records[i - 2];
            coarse += 0.5 * (b.t - c.t) * (c.h1 + b.h1);
        }
        lhs.push(p.nu * fine);
    }
    let last_even = (records.len() - 1) & !1;
    let fine_at_even: f64 = records[..=last_even]
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].h1 + w[1].h1))
        .sum();
    let quadrature_error = p.nu * (fine_at_even - coarse).abs();
    let mut worst = f64::NEG_INFINITY;
    for (r, l) in records.iter().zip(&lhs) {
        let rhs = e0 + g2 * (r.t - t0) / (p.nu * l1);
        worst = worst.max(l - rhs - quadrature_error);
    }
    Ok(IntegralCheck {
        worst_excess: worst,
        quadrature_error,
        holds: worst <= 1e-12 * e0.max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntryCheck {
    pub t_b: f64,
    /// Largest `E_α(t)` over records with `t ≥ t_B`.
    pub worst_after: f64,
    pub radius_sq: f64,
    pub holds: bool,
}

/// Verifies that every record at or after `t_B` lies in the absorbing ball.
/// `None` without forcing or if the run ends before `t_B`.
pub fn entry_check(records: &[StateRecord], p: &VoigtParams, slack: f64) -> Option<EntryCheck> {
    let first = records.first()?;
    let t_b = first.t + entering_time(first.e_alpha, p)?;
    let radius_sq = absorbing_radius_sq(p);
    let after: Vec<&StateRecord> = records.iter().filter(|r| r.t >= t_b).collect();
    if after.is_empty() {
        return None;
    }
    let worst_after = after.iter().map(|r| r.e_alpha).fold(0.0, f64::max);
    Some(EntryCheck {
        t_b,
        worst_after,
        radius_sq,
        holds: worst_after <= radius_sq * (1.0 + slack),
    })
}
