//! Volumetric covering bound for the unit ball of `V_α²` by `V_α`-balls.
//!
//! In the Galerkin space the `V_α²` unit ball is an ellipsoid in the `V_α` metric whose
//! semiaxis along each solenoidal direction of mode `k` is `λ_k^{-1/2}`, independent of `α`.
//! Covering it by `ε`-balls needs at most `Π (1 + 2 a_i / ε)` balls.

use crate::spectral::{DomainSpec, Grid};

/// `log₂` of the product bound for the given semiaxes.
pub fn product_bound_log2(semiaxes: &[f64], epsilon: f64) -> f64 {
    semiaxes
        .iter()
        .map(|a| (1.0 + 2.0 * a / epsilon).log2().max(0.0))
        .sum()
}

/// `log₂ N_*(ε)` over the retained eigendirections of `spec`.
pub fn covering_number_estimate(spec: &DomainSpec, epsilon: f64) -> f64 {
    assert!(epsilon > 0.0, "covering radius must be positive");
    covering_log2_count(spec, -epsilon.ln())
}

/// Same as [`covering_number_estimate`] with the radius given as `ln(1/ε)`, so that radii
/// far below the smallest normal `f64` remain usable.
pub fn covering_log2_count(spec: &DomainSpec, ln_inv_eps: f64) -> f64 {
    let grid = Grid::new(*spec).expect("validated domain");
    grid.retained_indices()
        .map(|i| {
            // log(1 + 2a/ε) computed as softplus(ln(2a) + ln(1/ε))
            let x = (2.0 / grid.eigenvalue(i).sqrt()).ln() + ln_inv_eps;
            let ln_term = if x > 30.0 {
                x + (-x).exp()
            } else {
                x.exp().ln_1p()
            };
            2.0 * ln_term / std::f64::consts::LN_2
        })
        .sum()
}
