//! Time-averaged traces of the linearized hatted flow.
//!
//! A frame of `n` tangent vectors is advanced with the base trajectory and
//! re-orthonormalized every `reorth_stride` steps. The logarithms of the diagonal of the
//! triangular factor add up to `∫ Tr(P_n L(û)) dt`, the growth rate of `n`-volumes, so the
//! running averages of their prefix sums approximate `⟨⟨P_n L⟩⟩`.

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::hatted::{hatted_nonlinear, linearized_nonlinear, require_voigt};
use crate::dynamics::{IfRk4, VoigtParams};
use crate::error::{NsvError, Result};
use crate::harness::generate::random_solenoidal;
use crate::spectral::transform::PhysicalField;
use crate::spectral::{GDirection, NormKind, SpectralField};

/// Relative norm below which a re-orthogonalized tangent counts as collapsed.
const COLLAPSE_TOL: f64 = 1e-12;

/// Base point of the hatted trajectory together with an `L²`-orthonormal frame.
#[derive(Debug, Clone)]
pub struct TangentBundle {
    pub base: SpectralField,
    pub vectors: Vec<SpectralField>,
}

impl TangentBundle {
    /// Random orthonormal frame of `n` vectors around `base`.
    pub fn random(base: SpectralField, n: usize, seed: u64) -> Result<Self> {
        let dim = base.grid().solenoidal_dimension();
        if n == 0 || n > dim {
            return Err(NsvError::Capacity {
                requested: n,
                available: dim,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors = (0..n)
            .map(|_| random_solenoidal(base.grid(), &mut rng, 0.0))
            .collect();
        let mut bundle = TangentBundle { base, vectors };
        let mut reseeds = 0;
        bundle.orthonormalize(&mut rng, &mut reseeds);
        Ok(bundle)
    }

    /// Largest entry of `Q^T Q - I`.
    pub fn gram_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b) - target).abs());
            }
        }
        worst
    }

    /// Modified Gram-Schmidt with one reorthogonalization pass; returns `ln R_jj`.
    ///
    /// A vector that collapses onto the span of its predecessors is replaced by a random
    /// direction and its log-growth is reported as that of the collapsed remainder.
    fn orthonormalize(&mut self, rng: &mut ChaCha8Rng, reseeds: &mut usize) -> Vec<f64> {
        let n = self.vectors.len();
        let mut logs = Vec::with_capacity(n);
        for j in 0..n {
            let (done, rest) = self.vectors.split_at_mut(j);
            let v = &mut rest[0];
            let before = v.norm(NormKind::L2);
            for _ in 0..2 {
                for q in done.iter() {
                    let r = q.inner(v);
                    v.axpy(-r, q);
                }
            }
            let mut r_jj = v.norm(NormKind::L2);
            if r_jj.is_nan() || r_jj <= COLLAPSE_TOL * before {
                *reseeds += 1;
                info!("tangent {j} collapsed (|r_jj| = {r_jj:.3e}); reseeding");
                let mut fresh = random_solenoidal(v.grid(), rng, 0.0);
                for _ in 0..2 {
                    for q in done.iter() {
                        let r = q.inner(&fresh);
                        fresh.axpy(-r, q);
                    }
                }
                r_jj = r_jj.max(f64::MIN_POSITIVE);
                let norm = fresh.norm(NormKind::L2);
                *v = fresh.scaled(1.0 / norm);
            } else {
                v.scale(1.0 / r_jj);
            }
            logs.push(r_jj.ln());
        }
        logs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentConfig {
    pub dt: f64,
    /// Averaging window (time units).
    pub window: f64,
    /// Time spent aligning the frame before averaging starts.
    pub spinup: f64,
    pub reorth_stride: usize,
    /// Keep `û` fixed instead of evolving it.
    pub frozen_base: bool,
    /// Seed for replacement directions after a collapse.
    pub seed: u64,
}

impl TangentConfig {
    pub fn new(dt: f64, window: f64) -> Self {
        TangentConfig {
            dt,
            window,
            spinup: 0.0,
            reorth_stride: 10,
            frozen_base: false,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.window > 0.0 && self.spinup >= 0.0) {
            return Err(NsvError::InvalidInput(
                "tangent evolution needs dt > 0, window > 0 and spinup >= 0".into(),
            ));
        }
        if self.reorth_stride == 0 {
            return Err(NsvError::InvalidInput(
                "reorth_stride must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Number of steps for a duration, rounded up to whole reorthonormalization blocks.
    fn blocks(&self, duration: f64) -> usize {
        let steps = (duration / self.dt).round() as usize;
        steps.div_ceil(self.reorth_stride)
    }
}

/// Windowed trace averages for every frame prefix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStats {
    /// `per_n_average[n - 1]` estimates `⟨⟨P_n L⟩⟩`.
    pub per_n_average: Vec<f64>,
    /// Length of the averaging window actually integrated.
    pub elapsed: f64,
    /// Smallest `n` with a negative average.
    pub n_numerical: Option<usize>,
    /// `n - 1 + T_{n-1} / (T_{n-1} - T_n)` at the first sign change, with `T_0 = 0`.
    pub kaplan_yorke: Option<f64>,
    pub reseeds: usize,
}

impl TraceStats {
    pub const CSV_HEADER: &'static str = "n,avg_trace,window";

    pub fn from_sums(log_sums: &[f64], elapsed: f64, reseeds: usize) -> TraceStats {
        let mut per_n_average = Vec::with_capacity(log_sums.len());
        let mut acc = 0.0;
        for s in log_sums {
            acc += s;
            per_n_average.push(acc / elapsed);
        }
        let n_numerical = per_n_average.iter().position(|&v| v < 0.0).map(|i| i + 1);
        let kaplan_yorke = n_numerical.map(|n| {
            let prev = if n >= 2 { per_n_average[n - 2] } else { 0.0 };
            let cur = per_n_average[n - 1];
            (n - 1) as f64 + prev / (prev - cur)
        });
        TraceStats {
            per_n_average,
            elapsed,
            n_numerical,
            kaplan_yorke,
            reseeds,
        }
    }
}

/// Advances the base point and the frame; returns the windowed trace statistics and the
/// final bundle.
pub fn evolve_tangents(
    bundle: &TangentBundle,
    p: &VoigtParams,
    cfg: &TangentConfig,
) -> Result<(TraceStats, TangentBundle)> {
    require_voigt(p)?;
    cfg.validate()?;
    bundle.base.same_grid(&p.forcing)?;
    let n = bundle.vectors.len();
    if n == 0 {
        return Err(NsvError::InvalidInput(
            "need at least one tangent vector".into(),
        ));
    }
    let stepper = IfRk4::new(&p.linear_rates(), cfg.dt);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut reseeds = 0;
    let frozen_base = bundle.base.clone();
    let frozen_phys =
        PhysicalField::from_spectral(&frozen_base.g_apply(p.alpha, GDirection::Inverse));

    // state[0] is the base point unless it is frozen
    let offset = usize::from(!cfg.frozen_base);
    let mut state: Vec<SpectralField> = Vec::with_capacity(n + offset);
    if !cfg.frozen_base {
        state.push(bundle.base.clone());
    }
    state.extend(bundle.vectors.iter().cloned());

    let nonlinear = |s: &[SpectralField]| -> Result<Vec<SpectralField>> {
        let base_phys;
        let pu = if cfg.frozen_base {
            &frozen_phys
        } else {
            base_phys = PhysicalField::from_spectral(&s[0].g_apply(p.alpha, GDirection::Inverse));
            &base_phys
        };
        let mut out: Vec<SpectralField> = Vec::with_capacity(s.len());
        if !cfg.frozen_base {
            out.push(hatted_nonlinear(pu, p));
        }
        let tangents: Vec<SpectralField> = s[offset..]
            .par_iter()
            .map(|w| linearized_nonlinear(pu, w, p))
            .collect();
        out.extend(tangents);
        Ok(out)
    };

    let spin_blocks = cfg.blocks(cfg.spinup);
    let window_blocks = cfg.blocks(cfg.window).max(1);
    let mut sums = vec![0.0; n];
    let mut frame = TangentBundle {
        base: frozen_base.clone(),
        vectors: Vec::new(),
    };
    let base_norm0 = bundle.base.norm_sq(NormKind::L2).max(1.0);
    for block in 0..spin_blocks + window_blocks {
        for _ in 0..cfg.reorth_stride {
            stepper.step(&mut state, |s| nonlinear(s))?;
        }
        if !cfg.frozen_base {
            let e = state[0].norm_sq(NormKind::L2);
            let t = ((block + 1) * cfg.reorth_stride) as f64 * cfg.dt;
            if !e.is_finite() || e > 1e12 * base_norm0 {
                return Err(NsvError::Divergence {
                    t,
                    reason: format!("hatted base energy {e:.3e} during tangent evolution"),
                });
            }
        }
        frame.vectors = state.split_off(offset);
        let logs = frame.orthonormalize(&mut rng, &mut reseeds);
        if block >= spin_blocks {
            for (s, l) in sums.iter_mut().zip(&logs) {
                *s += l;
            }
        }
        state.append(&mut frame.vectors);
        frame.vectors = Vec::new();
    }
    let elapsed = (window_blocks * cfg.reorth_stride) as f64 * cfg.dt;
    let stats = TraceStats::from_sums(&sums, elapsed, reseeds);
    let base = if cfg.frozen_base {
        frozen_base
    } else {
        state[0].clone()
    };
    let final_bundle = TangentBundle {
        base,
        vectors: state[offset..].to_vec(),
    };
    Ok((stats, final_bundle))
}
