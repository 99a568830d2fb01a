//! Integrating-factor (Lawson) RK4 for systems `ẋ = Λx + N(x)` with diagonal `Λ ≤ 0`.
//!
//! The linear part is propagated exactly by `e^{Λh}`, so a purely linear problem is
//! reproduced to roundoff and the scheme stays stable for any stiffness of `Λ`.

use crate::error::Result;
use crate::spectral::SpectralField;

#[derive(Debug, Clone)]
pub struct IfRk4 {
    h: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

impl IfRk4 {
    pub fn new(rates: &[f64], h: f64) -> Self {
        IfRk4 {
            h,
            full: rates.iter().map(|r| (r * h).exp()).collect(),
            half: rates.iter().map(|r| (0.5 * r * h).exp()).collect(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.h
    }

    /// Exact propagation of the linear part over one step.
    pub fn propagate_linear(&self, x: &mut SpectralField) {
        x.mul_modes(&self.full);
    }

    /// Advances every component of `state` by one step.
    ///
    /// `nonlinear` maps the stage state to the nonlinear tendencies, component by component.
    pub fn step<F>(&self, state: &mut [SpectralField], mut nonlinear: F) -> Result<()>
    where
        F: FnMut(&[SpectralField]) -> Result<Vec<SpectralField>>,
    {
        let h = self.h;
        let half_lin = |x: &SpectralField| {
            let mut y = x.clone();
            y.mul_modes(&self.half);
            y
        };

        let k1 = nonlinear(state)?;
        let s2: Vec<SpectralField> = state
            .iter()
            .zip(&k1)
            .map(|(x, k)| {
                let mut y = x.clone();
                y.axpy(0.5 * h, k);
                y.mul_modes(&self.half);
                y
            })
            .collect();
        let k2 = nonlinear(&s2)?;
        let s3: Vec<SpectralField> = state
            .iter()
            .zip(&k2)
            .map(|(x, k)| {
                let mut y = half_lin(x);
                y.axpy(0.5 * h, k);
                y
            })
            .collect();
        let k3 = nonlinear(&s3)?;
        let s4: Vec<SpectralField> = state
            .iter()
            .zip(&k3)
            .map(|(x, k)| {
                let mut y = half_lin(x);
                y.axpy(h, k);
                y.mul_modes(&self.half);
                y
            })
            .collect();
        let k4 = nonlinear(&s4)?;

        for (i, x) in state.iter_mut().enumerate() {
            // x ← E x + h/6 (E k1 + 2 E2 (k2 + k3) + k4)
            let mut acc = k1[i].clone();
            acc.mul_modes(&self.half);
            acc.axpy(1.0, &k2[i]);
            acc.axpy(1.0, &k2[i]);
            acc.axpy(1.0, &k3[i]);
            acc.axpy(1.0, &k3[i]);
            acc.mul_modes(&self.half);
            acc.axpy(1.0, &k4[i]);
            x.mul_modes(&self.full);
            x.axpy(h / 6.0, &acc);
        }
        Ok(())
    }
}
