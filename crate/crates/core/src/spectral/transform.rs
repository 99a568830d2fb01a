//! Pseudo-spectral evaluation of the advection term `B(u, v) = P[(u·∇)v]`.
//!
//! Solenoidal `u` gives `(u·∇)v = ∇·(u ⊗ v)`, so only velocities are sampled on the
//! collocation grid and the flux products are transformed back and differentiated in
//! Fourier space. Real fields travel two at a time, packed into the real and imaginary
//! parts of one complex array. The result is truncated to the dealiased cube before
//! projection, so the retained modes coincide with the exact Galerkin convolution
//! whenever `3·kmax < N`. Transforms skip lines that are known to vanish (inverse) or
//! whose output is discarded (forward).

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::domain::{signed_wavenumber, Grid};
use super::field::{project_mode, SpectralField, Vec3c};
use crate::error::Result;

struct Plan {
    n: usize,
    /// `keep[i]`: index `i` along an axis belongs to the dealiased range.
    keep: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    lines: Vec<Complex64>,
    starts: Vec<usize>,
}

/// Which lines of a pass are transformed.
#[derive(Clone, Copy)]
enum Lines {
    All,
    /// Outer index of the line retained.
    Outer,
    /// Both line indices retained.
    Both,
    /// Inner index of the line retained.
    Inner,
}

impl Plan {
    fn new(n: usize, kmax: i32) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Plan {
            n,
            keep: (0..n)
                .map(|i| signed_wavenumber(i, n).abs() <= kmax)
                .collect(),
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            lines: vec![Complex64::default(); n * n * n],
            starts: Vec::with_capacity(n * n),
        }
    }

    /// Transforms along `axis` (0 = x, 1 = y, 2 = z) every line selected by `which`;
    /// a line is labelled by its two remaining indices in `(x, y, z)` order.
    fn pass(&mut self, data: &mut [Complex64], axis: usize, which: Lines, inverse: bool) {
        let n = self.n;
        let stride = [n * n, n, 1][axis];
        self.starts.clear();
        for a in 0..n {
            for b in 0..n {
                let selected = match which {
                    Lines::All => true,
                    Lines::Outer => self.keep[a],
                    Lines::Inner => self.keep[b],
                    Lines::Both => self.keep[a] && self.keep[b],
                };
                if selected {
                    self.starts.push(match axis {
                        0 => a * n + b,
                        1 => a * n * n + b,
                        _ => (a * n + b) * n,
                    });
                }
            }
        }
        let fft = if inverse {
            &self.inverse
        } else {
            &self.forward
        };
        if stride == 1 {
            if matches!(which, Lines::All) {
                fft.process_with_scratch(data, &mut self.scratch);
            } else {
                for &s in &self.starts {
                    fft.process_with_scratch(&mut data[s..s + n], &mut self.scratch);
                }
            }
            return;
        }
        let used = self.starts.len() * n;
        for (l, &s) in self.starts.iter().enumerate() {
            let line = &mut self.lines[l * n..(l + 1) * n];
            for (m, z) in line.iter_mut().enumerate() {
                *z = data[s + m * stride];
            }
        }
        fft.process_with_scratch(&mut self.lines[..used], &mut self.scratch);
        for (l, &s) in self.starts.iter().enumerate() {
            let line = &self.lines[l * n..(l + 1) * n];
            for (m, z) in line.iter().enumerate() {
                data[s + m * stride] = *z;
            }
        }
    }

    /// Unnormalized inverse transform of a spectrum supported on the dealiased cube.
    fn inverse(&mut self, data: &mut [Complex64]) {
        self.pass(data, 2, Lines::Both, true);
        self.pass(data, 1, Lines::Outer, true);
        self.pass(data, 0, Lines::All, true);
    }

    /// Unnormalized forward transform, valid only on the dealiased cube.
    fn forward(&mut self, data: &mut [Complex64]) {
        self.pass(data, 2, Lines::All, false);
        self.pass(data, 1, Lines::Inner, false);
        self.pass(data, 0, Lines::Both, false);
    }
}

thread_local! {
    static PLANS: RefCell<HashMap<(usize, i32), Plan>> = RefCell::new(HashMap::new());
}

fn with_plan<R>(grid: &Grid, f: impl FnOnce(&mut Plan) -> R) -> R {
    let key = (grid.n(), grid.spec().kmax());
    PLANS.with(|cell| {
        let mut plans = cell.borrow_mut();
        let plan = plans.entry(key).or_insert_with(|| Plan::new(key.0, key.1));
        f(plan)
    })
}

/// Inverse-transforms two Hermitian spectra at once; returns the two real fields.
fn inverse_pair(
    grid: &Grid,
    u: &[Vec3c],
    a: impl Fn(&Vec3c) -> Complex64,
    b: impl Fn(&Vec3c) -> Complex64,
) -> (Vec<f64>, Vec<f64>) {
    let i = Complex64::new(0.0, 1.0);
    let mut z: Vec<Complex64> = u.iter().map(|v| a(v) + i * b(v)).collect();
    with_plan(grid, |p| p.inverse(&mut z));
    (
        z.iter().map(|c| c.re).collect(),
        z.iter().map(|c| c.im).collect(),
    )
}

/// Forward-transforms two real fields at once, normalized so that `u(x) = Σ û_k e^{ik·x}`.
/// Only retained modes are filled in.
fn forward_pair(grid: &Grid, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut z: Vec<Complex64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    with_plan(grid, |p| p.forward(&mut z));
    let norm = 1.0 / z.len() as f64;
    let t = &grid.0;
    let mut fa = vec![Complex64::default(); z.len()];
    let mut fb = vec![Complex64::default(); z.len()];
    for idx in 0..z.len() {
        if !t.retained[idx] {
            continue;
        }
        let zk = z[idx];
        let zm = z[t.mirror[idx]].conj();
        fa[idx] = (zk + zm) * (0.5 * norm);
        fb[idx] = (zk - zm) * Complex64::new(0.0, -0.5 * norm);
    }
    (fa, fb)
}

/// Velocity of a field sampled on the collocation grid.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    /// `vel[i]` is the i-th velocity component.
    pub vel: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn from_spectral(u: &SpectralField) -> PhysicalField {
        let grid = u.grid();
        let (u0, u1) = inverse_pair(grid, u.coeffs(), |v| v[0], |v| v[1]);
        let (u2, _) = inverse_pair(grid, u.coeffs(), |v| v[2], |_| Complex64::default());
        PhysicalField { vel: [u0, u1, u2] }
    }

    /// Pointwise maximum of `|u|`.
    pub fn max_speed(&self) -> f64 {
        (0..self.vel[0].len())
            .map(|p| {
                (self.vel[0][p].powi(2) + self.vel[1][p].powi(2) + self.vel[2][p].powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Upper-triangle positions of a symmetric 3×3 tensor stored as six entries.
const SYM: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
const FULL: [[usize; 3]; 3] = [[0, 1, 2], [3, 4, 5], [6, 7, 8]];

/// `P[∇·T]` for a flux tensor with `T_ij = entries[slot[i][j]]` on the grid
/// (row `i` is differentiated along `j`).
fn divergence_projected(
    grid: &Grid,
    entries: &[Vec<f64>],
    slot: &[[usize; 3]; 3],
) -> SpectralField {
    let t = &grid.0;
    let len = grid.len();
    let zeros = vec![0.0; len];
    let mut hat: Vec<Vec<Complex64>> = Vec::with_capacity(entries.len());
    for pair in entries.chunks(2) {
        let b = pair.get(1).unwrap_or(&zeros);
        let (fa, fb) = forward_pair(grid, &pair[0], b);
        hat.push(fa);
        if pair.len() == 2 {
            hat.push(fb);
        }
    }
    let coeffs: Vec<Vec3c> = (0..len)
        .map(|idx| {
            if !t.retained[idx] {
                return [Complex64::default(); 3];
            }
            let k = t.wave[idx];
            let raw: Vec3c = std::array::from_fn(|i| {
                let row = &slot[i];
                let d = k[0] * hat[row[0]][idx] + k[1] * hat[row[1]][idx] + k[2] * hat[row[2]][idx];
                // i k_j T̂_ij
                Complex64::new(-d.im, d.re)
            });
            project_mode(&k, &raw)
        })
        .collect();
    SpectralField::from_raw_unchecked(grid, coeffs)
}

fn products(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// `B(a, b) = P[∇·(a ⊗ b)]` from precomputed physical samples.
pub fn advect_physical(grid: &Grid, a: &PhysicalField, b: &PhysicalField) -> SpectralField {
    if std::ptr::eq(a, b) {
        let sym: Vec<Vec<f64>> = SYM_PAIRS
            .iter()
            .map(|&(i, j)| products(&a.vel[i], &a.vel[j]))
            .collect();
        return divergence_projected(grid, &sym, &SYM);
    }
    // T_ij = b_i a_j
    let full: Vec<Vec<f64>> = (0..9)
        .map(|e| products(&b.vel[e / 3], &a.vel[e % 3]))
        .collect();
    divergence_projected(grid, &full, &FULL)
}

/// `B(a, b) + B(b, a) = P[∇·(a ⊗ b + b ⊗ a)]`; the flux is symmetric, so six entries suffice.
pub fn advect_symmetric_physical(
    grid: &Grid,
    a: &PhysicalField,
    b: &PhysicalField,
) -> SpectralField {
    let sym: Vec<Vec<f64>> = SYM_PAIRS
        .iter()
        .map(|&(i, j)| {
            a.vel[i]
                .iter()
                .zip(&b.vel[j])
                .zip(a.vel[j].iter().zip(&b.vel[i]))
                .map(|((ai, bj), (aj, bi))| ai * bj + aj * bi)
                .collect()
        })
        .collect();
    divergence_projected(grid, &sym, &SYM)
}

/// The bilinear form `B(u, v) = P[(u·∇)v]`.
pub fn bilinear(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.same_grid(v)?;
    let grid = u.grid();
    if u.is_zero() || v.is_zero() {
        return Ok(SpectralField::zeros(grid));
    }
    let pu = PhysicalField::from_spectral(u);
    if std::ptr::eq(u, v) {
        return Ok(advect_physical(grid, &pu, &pu));
    }
    let pv = PhysicalField::from_spectral(v);
    Ok(advect_physical(grid, &pu, &pv))
}

/// The trilinear form `b(u, v, w) = ⟨B(u, v), w⟩`.
pub fn trilinear(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> Result<f64> {
    u.same_grid(w)?;
    Ok(bilinear(u, v)?.inner(w))
}
