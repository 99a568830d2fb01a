use std::collections::BTreeMap;

use serde::Serialize;

use super::covering::covering_log2_count;
use crate::dynamics::VoigtParams;
use crate::error::{NsvError, Result};
use crate::spectral::DomainSpec;

/// Calibration constant in the radius bound of the compact part `K_α`.
pub const CALIB_R_ALPHA: &str = "r_alpha";
/// Calibration constant of the Grashof-form dimension bound.
pub const CALIB_DIM: &str = "dim_bound";
/// Calibration constant in the Lipschitz constant `C_*` of the smoothing part.
pub const CALIB_C_STAR: &str = "c_star";
/// Calibration constant of the trilinear estimate in the linearized operator bound.
pub const CALIB_LINEARIZED: &str = "linearized";
/// Calibration constant of the continuous dependence rate.
pub const CALIB_CONTDEP: &str = "contdep";

/// Scalar inputs of the closed-form bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsParams {
    pub nu: f64,
    pub alpha: f64,
    pub gnorm: f64,
    pub calib: BTreeMap<String, f64>,
}

impl BoundsParams {
    pub fn new(nu: f64, alpha: f64, gnorm: f64) -> Self {
        BoundsParams {
            nu,
            alpha,
            gnorm,
            calib: BTreeMap::new(),
        }
    }

    pub fn with_calib(mut self, name: &str, value: f64) -> Self {
        self.calib.insert(name.to_string(), value);
        self
    }

    fn calib(&self, name: &str) -> f64 {
        self.calib.get(name).copied().unwrap_or(1.0)
    }
}

impl From<&VoigtParams> for BoundsParams {
    fn from(p: &VoigtParams) -> Self {
        BoundsParams {
            nu: p.nu,
            alpha: p.alpha,
            gnorm: p.gnorm(),
            calib: p.calib.clone(),
        }
    }
}

/// Closed-form quantities of the dissipative and dimension estimates for one parameter set.
///
/// Fields that only exist for the Voigt model are `None` at `α = 0`; `partial` flags that case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub alpha: f64,
    pub nu: f64,
    pub lambda1: f64,
    pub gnorm: f64,
    pub grashof: f64,
    pub kappa_nu: f64,
    /// Squared radius of the absorbing ball `B_α`.
    pub ball_radius_sq: f64,
    pub m1: f64,
    pub k1: f64,
    pub t_star: f64,
    pub r_alpha: Option<f64>,
    pub dim_bound: Option<f64>,
    pub c_star: Option<f64>,
    /// `ln C_*`, finite even where `C_*` overflows.
    pub ln_c_star: Option<f64>,
    pub h0: Option<f64>,
    pub exp_dim_estimate: Option<f64>,
    pub partial: bool,
}

impl BoundsReport {
    pub const CSV_HEADER: &'static str =
        "alpha,nu,lambda1,gnorm,grashof,kappa_nu,M1,K1,r_alpha,dim_bound,t_star,C_star,exp_dim_estimate";

    /// `c/α^3 [1 + (1 + λ₁α²)/λ₁ 𝔊^4]^{3/2}`.
    pub fn grashof_dimension(alpha: f64, lambda1: f64, grashof: f64, c: f64) -> f64 {
        c / alpha.powi(3)
            * (1.0 + (1.0 + lambda1 * alpha * alpha) / lambda1 * grashof.powi(4)).powf(1.5)
    }
}

/// Evaluates every closed-form bound for `(ν, α, |g|)` on the given domain.
pub fn compute_bounds(bp: &BoundsParams, spec: &DomainSpec) -> Result<BoundsReport> {
    spec.validate()?;
    let BoundsParams {
        nu, alpha, gnorm, ..
    } = *bp;
    if !(nu.is_finite() && nu > 0.0) {
        return Err(NsvError::InvalidInput(format!(
            "nu must be positive, got {nu}"
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(NsvError::InvalidInput(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    if !(gnorm.is_finite() && gnorm >= 0.0) {
        return Err(NsvError::InvalidInput(format!(
            "|g| must be nonnegative, got {gnorm}"
        )));
    }
    let l1 = spec.lambda1();
    let a2 = alpha * alpha;
    let g2 = gnorm * gnorm;
    let kappa = nu * l1 / (1.0 + l1 * a2);
    let ball = 2.0 * (1.0 + l1 * a2) * g2 / (nu * nu * l1 * l1);
    let m1_sq = 3.0 * (1.0 + l1 * a2) * g2 / (nu * nu * l1 * l1);
    let m1 = m1_sq.sqrt();
    let k1 = g2 / (nu * nu * l1);
    let grashof = gnorm / (nu * nu * l1.powf(0.75));
    let t_star = 2.0 * 8.0_f64.ln() / kappa;

    let mut report = BoundsReport {
        alpha,
        nu,
        lambda1: l1,
        gnorm,
        grashof,
        kappa_nu: kappa,
        ball_radius_sq: ball,
        m1,
        k1,
        t_star,
        r_alpha: None,
        dim_bound: None,
        c_star: None,
        ln_c_star: None,
        h0: None,
        exp_dim_estimate: None,
        partial: alpha == 0.0,
    };
    if alpha > 0.0 {
        let c_r = bp.calib(CALIB_R_ALPHA);
        report.r_alpha =
            Some(c_r / kappa * (m1_sq.powi(3) / (a2.powi(3) * nu.powi(3)) + 2.0 * g2 / nu));
        report.dim_bound = Some(BoundsReport::grashof_dimension(
            alpha,
            l1,
            grashof,
            bp.calib(CALIB_DIM),
        ));
        let c_s = bp.calib(CALIB_C_STAR);
        let ln_c = c_s.ln() - 2.5 * alpha.ln() + c_s * (1.0 + t_star) / a2;
        report.ln_c_star = Some(ln_c);
        report.c_star = Some(ln_c.exp());
        report.h0 = Some(nu / (2.0 * a2));
        // N_* counts 1/(8 C_*)-balls, so ln(1/ε) = ln 8 + ln C_*.
        report.exp_dim_estimate = Some(1.0 + covering_log2_count(spec, 8.0_f64.ln() + ln_c));
    }
    Ok(report)
}

/// Comparison of the two dimension estimates for the exponential attractor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialAttractorComparison {
    /// Trace-formula dimension of the global attractor.
    pub trace_dimension: f64,
    /// `1 + trace_dimension`, the exponential attractor bound built on it.
    pub exponential_bound: f64,
    /// Covering-number estimate `1 + log₂ N_*`, when available.
    pub covering_estimate: Option<f64>,
    /// Structural check `exponential_bound ≥ trace_dimension`.
    pub holds: bool,
}

/// Records the pair (trace dimension, `1 +` trace dimension) next to the covering estimate.
pub fn exponential_attractor_check(
    report: &BoundsReport,
    stats: &super::TraceStats,
) -> ExponentialAttractorComparison {
    let trace_dimension = stats.n_numerical.map(|n| n as f64).unwrap_or(f64::INFINITY);
    let exponential_bound = 1.0 + trace_dimension;
    ExponentialAttractorComparison {
        trace_dimension,
        exponential_bound,
        covering_estimate: report.exp_dim_estimate,
        holds: exponential_bound >= trace_dimension,
    }
}
