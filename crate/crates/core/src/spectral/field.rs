use num_complex::Complex64;

use super::domain::Grid;
use crate::error::{NsvError, Result};

pub type Vec3c = [Complex64; 3];

const ZERO3: Vec3c = [Complex64 { re: 0.0, im: 0.0 }; 3];

/// Divergence-free, zero-mean, real velocity field stored by its Fourier coefficients.
///
/// Coefficients live on the full `N^3` transform grid in FFT order; modes outside the
/// dealiased cube are identically zero. `L^2` quantities use the unit-measure Parseval sum.
#[derive(Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Vec3c>,
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("l2", &self.norm(NormKind::L2))
            .finish_non_exhaustive()
    }
}

/// Norms available through [`SpectralField::norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    H1,
    /// Dual norm `|A^{-1/2} u|`.
    Vstar,
    /// `(|u|^2 + α^2 ‖u‖^2)^{1/2}`.
    Valpha(f64),
    /// `(‖u‖^2 + α^2 |Au|^2)^{1/2}`.
    Valpha2(f64),
    /// `(‖u‖_*^2 + α^2 |u|^2)^{1/2}`.
    Valpha0(f64),
}

/// Direction of the `G = (I + α^2 A)^{1/2}` map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GDirection {
    Forward,
    Inverse,
}

#[inline]
fn dot_re(a: &Vec3c, b: &Vec3c) -> f64 {
    (0..3).map(|c| (a[c] * b[c].conj()).re).sum()
}

#[inline]
fn norm_sqr(a: &Vec3c) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `(I - k k^T / |k|^2) v` for a single mode.
#[inline]
pub(crate) fn project_mode(k: &[f64; 3], v: &Vec3c) -> Vec3c {
    let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if ksq == 0.0 {
        return ZERO3;
    }
    let kv = v[0] * k[0] + v[1] * k[1] + v[2] * k[2];
    let s = kv / ksq;
    [v[0] - s * k[0], v[1] - s * k[1], v[2] - s * k[2]]
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![ZERO3; grid.len()],
        }
    }

    /// Wraps coefficients that are already known to satisfy the field invariants.
    pub(crate) fn from_raw_unchecked(grid: &Grid, coeffs: Vec<Vec3c>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        SpectralField {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Vec3c] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Vec3c> {
        self.coeffs
    }

    pub fn coeff(&self, k: [i32; 3]) -> Option<Vec3c> {
        self.grid.index_of(k).map(|i| self.coeffs[i])
    }

    pub(crate) fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(NsvError::InvalidInput(format!(
                "fields live on different domains ({:?} vs {:?})",
                self.grid.spec(),
                other.grid.spec()
            )))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs
            .iter()
            .all(|v| v.iter().all(|z| *z == Complex64::new(0.0, 0.0)))
    }

    // Arithmetic. All operations preserve the field invariants.

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn scale(&mut self, a: f64) {
        for v in &mut self.coeffs {
            for z in v.iter_mut() {
                *z *= a;
            }
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert!(self.grid == other.grid);
        for (v, w) in self.coeffs.iter_mut().zip(&other.coeffs) {
            for c in 0..3 {
                v[c] += w[c] * a;
            }
        }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Multiplies each mode by the matching entry of `factors` (one per grid index).
    pub fn mul_modes(&mut self, factors: &[f64]) {
        debug_assert_eq!(factors.len(), self.coeffs.len());
        for (v, &f) in self.coeffs.iter_mut().zip(factors) {
            for z in v.iter_mut() {
                *z *= f;
            }
        }
    }

    pub(crate) fn map_modes(&self, f: impl Fn(f64) -> f64) -> Self {
        let t = &self.grid.0;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if t.retained[i] {
                    let s = f(t.lambda[i]);
                    [v[0] * s, v[1] * s, v[2] * s]
                } else {
                    ZERO3
                }
            })
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Weighted Parseval sum `Σ w(λ_k) |û_k|^2` over retained modes.
    pub(crate) fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64 {
        let t = &self.grid.0;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| t.retained[*i])
            .map(|(i, v)| w(t.lambda[i]) * norm_sqr(v))
            .sum()
    }

    /// `L^2` inner product `⟨u, v⟩`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        debug_assert!(self.grid == other.grid);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| dot_re(a, b))
            .sum()
    }

    /// `A^s u`, acting diagonally with `((2π/L)^2 |k|^2)^s`.
    pub fn stokes_apply(&self, power: f64) -> SpectralField {
        if power == 0.0 {
            return self.clone();
        }
        if power == 1.0 {
            return self.map_modes(|l| l);
        }
        if power == -1.0 {
            return self.map_modes(|l| 1.0 / l);
        }
        self.map_modes(|l| l.powf(power))
    }

    /// `G u` or `G^{-1} u` with `G^2 = I + α^2 A`.
    pub fn g_apply(&self, alpha: f64, direction: GDirection) -> SpectralField {
        if alpha == 0.0 {
            return self.clone();
        }
        let a2 = alpha * alpha;
        match direction {
            GDirection::Forward => self.map_modes(|l| (1.0 + a2 * l).sqrt()),
            GDirection::Inverse => self.map_modes(|l| 1.0 / (1.0 + a2 * l).sqrt()),
        }
    }

    pub fn norm(&self, kind: NormKind) -> f64 {
        self.norm_sq(kind).sqrt()
    }

    pub fn norm_sq(&self, kind: NormKind) -> f64 {
        match kind {
            NormKind::L2 => self.weighted_energy(|_| 1.0),
            NormKind::H1 => self.weighted_energy(|l| l),
            NormKind::Vstar => self.weighted_energy(|l| 1.0 / l),
            NormKind::Valpha(a) => self.weighted_energy(|l| 1.0 + a * a * l),
            NormKind::Valpha2(a) => self.weighted_energy(|l| l + a * a * l * l),
            NormKind::Valpha0(a) => self.weighted_energy(|l| 1.0 / l + a * a),
        }
    }

    /// Largest violation of `k·û_k = 0`, reality and zero-mean, relative to the field size.
    pub fn invariant_defect(&self) -> f64 {
        let t = &self.grid.0;
        let scale = self
            .coeffs
            .iter()
            .map(norm_sqr)
            .fold(0.0_f64, f64::max)
            .sqrt()
            .max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for (i, v) in self.coeffs.iter().enumerate() {
            if !t.retained[i] {
                worst = worst.max(norm_sqr(v).sqrt() / scale);
                continue;
            }
            let k = t.wave[i];
            let kn = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt();
            let div = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]).norm() / kn;
            worst = worst.max(div / scale);
            let m = &self.coeffs[t.mirror[i]];
            let herm: f64 = (0..3)
                .map(|c| (v[c] - m[c].conj()).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(herm / scale);
        }
        worst
    }
}

/// Maximum deviation from Hermitian symmetry `v_{-k} = conj(v_k)`, relative to the largest entry.
pub(crate) fn hermitian_defect(grid: &Grid, raw: &[Vec3c]) -> f64 {
    let t = &grid.0;
    let half = (t.n / 2) as i32;
    let scale = raw
        .iter()
        .map(norm_sqr)
        .fold(0.0_f64, f64::max)
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for (i, v) in raw.iter().enumerate() {
        // Nyquist planes have no partner on the grid and are discarded by projection.
        if t.kvec[i].iter().any(|&c| c == -half) {
            continue;
        }
        let m = &raw[t.mirror[i]];
        let d: f64 = (0..3)
            .map(|c| (v[c] - m[c].conj()).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(d / scale);
    }
    worst
}

/// Leray projection of raw Hermitian coefficients onto the Galerkin space.
///
/// Applies `(I - k k^T/|k|^2)` per mode, zeroes the mean and every mode outside the dealiased cube.
pub fn leray_project(grid: &Grid, raw: &[Vec3c]) -> Result<SpectralField> {
    if raw.len() != grid.len() {
        return Err(NsvError::InvalidInput(format!(
            "expected {} coefficient vectors, got {}",
            grid.len(),
            raw.len()
        )));
    }
    let defect = hermitian_defect(grid, raw);
    if defect > 1e-12 {
        return Err(NsvError::InvalidInput(format!(
            "coefficients are not Hermitian-symmetric (relative defect {defect:.3e})"
        )));
    }
    Ok(project_unchecked(grid, raw))
}

pub(crate) fn project_unchecked(grid: &Grid, raw: &[Vec3c]) -> SpectralField {
    let t = &grid.0;
    let coeffs = raw
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if t.retained[i] {
                project_mode(&t.wave[i], v)
            } else {
                ZERO3
            }
        })
        .collect();
    SpectralField::from_raw_unchecked(grid, coeffs)
}

/// Replaces every mode by the average of itself and its mirrored conjugate.
#[cfg(test)]
pub(crate) fn symmetrize(grid: &Grid, raw: &mut [Vec3c]) {
    let t = &grid.0;
    let orig = raw.to_vec();
    for (i, v) in raw.iter_mut().enumerate() {
        let m = &orig[t.mirror[i]];
        for c in 0..3 {
            v[c] = (orig[i][c] + m[c].conj()) * 0.5;
        }
    }
}


#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::testing::*;
    use super::*;
    use crate::spectral::domain::DomainSpec;

    fn grid(n: usize) -> Grid {
        Grid::new(DomainSpec::new(2.0 * PI, n)).unwrap()
    }

    fn single_mode(g: &Grid, k: [i32; 3], dir: [f64; 3], amp: f64) -> SpectralField {
        let mut raw = vec![ZERO3; g.len()];
        let i = g.index_of(k).unwrap();
        let j = g.index_of([-k[0], -k[1], -k[2]]).unwrap();
        for c in 0..3 {
            raw[i][c] = Complex64::new(amp * dir[c] / 2.0_f64.sqrt(), 0.0);
            raw[j][c] = raw[i][c].conj();
        }
        leray_project(g, &raw).unwrap()
    }

    #[test]
    fn gradient_fields_are_annihilated() {
        let g = grid(8);
        let mut raw = vec![ZERO3; g.len()];
        for i in g.retained_indices() {
            let k = g.0.wave[i];
            let phi = Complex64::new(0.3 * k[0], 0.0) + Complex64::new(0.0, 0.1 * k[1]);
            for c in 0..3 {
                raw[i][c] = phi * k[c];
            }
        }
        symmetrize(&g, &mut raw);
        let p = leray_project(&g, &raw).unwrap();
        assert!(p.norm(NormKind::L2) < 1e-13);
    }

    #[test]
    fn projection_is_idempotent_and_self_adjoint() {
        let g = grid(8);
        let u = random_field(&g, 1);
        let again = leray_project(&g, u.coeffs()).unwrap();
        assert!(u.sub(&again).norm(NormKind::L2) <= 1e-14 * u.norm(NormKind::L2));

        let a = random_raw(&g, 2);
        let b = random_raw(&g, 3);
        let pa = project_unchecked(&g, &a);
        let pb = project_unchecked(&g, &b);
        let raw_b = SpectralField::from_raw_unchecked(&g, b.clone());
        let raw_a = SpectralField::from_raw_unchecked(&g, a.clone());
        let lhs = pa.inner(&raw_b);
        let rhs = raw_a.inner(&pb);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn projection_matches_direct_formula_on_n4() {
        let g = grid(4);
        let raw = random_raw(&g, 11);
        let p = leray_project(&g, &raw).unwrap();
        let mut err = 0.0_f64;
        for i in g.retained_indices() {
            let k = g.wavevector(i).map(|c| c as f64);
            let ksq: f64 = k.iter().map(|c| c * c).sum();
            let kdotu: Complex64 = (0..3).map(|c| raw[i][c] * k[c]).sum();
            for c in 0..3 {
                let want = raw[i][c] - kdotu * (k[c] / ksq);
                err = err.max((p.coeffs()[i][c] - want).norm());
            }
        }
        assert!(err < 1e-12 * p.norm(NormKind::L2));
        assert!(p.invariant_defect() < 1e-14);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let g = grid(4);
        let mut raw = random_raw(&g, 5);
        let i = g.retained_indices().next().unwrap();
        raw[i][0] += Complex64::new(0.0, 0.5);
        assert!(matches!(
            leray_project(&g, &raw),
            Err(NsvError::InvalidInput(_))
        ));
    }

    #[test]
    fn stokes_powers() {
        let g = grid(8);
        let u = random_field(&g, 7);
        assert_eq!(u.stokes_apply(0.0), u);
        let back = u.stokes_apply(1.0).stokes_apply(-1.0);
        assert!(back.sub(&u).norm(NormKind::L2) <= 1e-12 * u.norm(NormKind::L2));
        let m = single_mode(&g, [1, 0, 0], [0.0, 1.0, 0.0], 1.0);
        assert_eq!(m.stokes_apply(1.0), m);
        // ⟨Au, u⟩ = ‖u‖^2
        let lhs = u.stokes_apply(1.0).inner(&u);
        assert!((lhs - u.norm_sq(NormKind::H1)).abs() < 1e-12 * lhs);
    }

    #[test]
    fn g_isometry_and_identity() {
        let g = grid(8);
        let u = random_field(&g, 9);
        assert_eq!(u.g_apply(0.0, GDirection::Forward), u);
        assert_eq!(u.g_apply(0.0, GDirection::Inverse), u);
        for alpha in [1.0, 0.5, 0.25, 0.125] {
            let gu = u.g_apply(alpha, GDirection::Forward);
            let lhs = gu.norm(NormKind::L2);
            let rhs = u.norm(NormKind::Valpha(alpha));
            assert!((lhs - rhs).abs() < 1e-12 * rhs);
            let back = gu.g_apply(alpha, GDirection::Inverse);
            assert!(back.sub(&u).norm(NormKind::L2) < 1e-12 * u.norm(NormKind::L2));
            // ‖G^{-1}w‖^2 + α^{-2}|G^{-1}w|^2 = α^{-2}|w|^2
            let gi = u.g_apply(alpha, GDirection::Inverse);
            let a2 = alpha * alpha;
            let lhs = gi.norm_sq(NormKind::H1) + gi.norm_sq(NormKind::L2) / a2;
            let rhs = u.norm_sq(NormKind::L2) / a2;
            assert!((lhs - rhs).abs() < 1e-12 * rhs);
        }
        let w = single_mode(&g, [0, 0, 1], [1.0, 0.0, 0.0], 1.0);
        let gi = w.g_apply(1.0, GDirection::Inverse);
        assert!((gi.norm_sq(NormKind::H1) - 0.5).abs() < 1e-15);
        assert!((gi.norm_sq(NormKind::L2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn norms_closed_form() {
        let g = grid(8);
        let z = SpectralField::zeros(&g);
        for kind in [
            NormKind::L2,
            NormKind::H1,
            NormKind::Vstar,
            NormKind::Valpha(0.5),
            NormKind::Valpha2(0.5),
            NormKind::Valpha0(0.5),
        ] {
            assert_eq!(z.norm(kind), 0.0);
        }
        let a = 0.7;
        let m = single_mode(&g, [0, 1, 0], [1.0, 0.0, 0.0], a);
        assert!((m.norm(NormKind::L2) - a).abs() < 1e-15);
        assert!((m.norm(NormKind::Valpha(1.0)) - a * 2.0_f64.sqrt()).abs() < 1e-15);
        let m4 = single_mode(&g, [0, 2, 0], [1.0, 0.0, 0.0], a);
        assert!((m4.norm(NormKind::Vstar) - a / 2.0).abs() < 1e-15);
        assert!((m4.norm(NormKind::Valpha2(0.5)) - a * (4.0_f64 + 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn poincare_on_random_fields() {
        let g = grid(8);
        for seed in 0..200 {
            let u = random_field(&g, seed);
            let l1 = g.lambda1();
            assert!(u.norm(NormKind::L2) <= u.norm(NormKind::H1) / l1.sqrt() * (1.0 + 1e-14));
            let au = u.stokes_apply(1.0);
            assert!(u.norm(NormKind::H1) <= au.norm(NormKind::L2) / l1.sqrt() * (1.0 + 1e-14));
        }
    }
}
