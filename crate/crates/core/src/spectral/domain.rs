use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{NsvError, Result};

/// Fraction of the transform grid's Nyquist range that survives dealiasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DealiasFraction {
    pub num: u32,
    pub den: u32,
}

impl DealiasFraction {
    pub const TWO_THIRDS: DealiasFraction = DealiasFraction { num: 2, den: 3 };

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for DealiasFraction {
    fn default() -> Self {
        Self::TWO_THIRDS
    }
}

impl fmt::Display for DealiasFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for DealiasFraction {
    type Err = NsvError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            NsvError::Config(format!(
                "dealias fraction must look like \"2/3\", got {s:?}"
            ))
        };
        let (a, b) = s.split_once('/').ok_or_else(bad)?;
        let num: u32 = a.trim().parse().map_err(|_| bad())?;
        let den: u32 = b.trim().parse().map_err(|_| bad())?;
        if num == 0 || den == 0 || num > den {
            return Err(NsvError::Config(format!(
                "dealias fraction must lie in (0, 1], got {s}"
            )));
        }
        Ok(DealiasFraction { num, den })
    }
}

impl Serialize for DealiasFraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DealiasFraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Periodic box `[0, L]^3` discretized by an `N^3` transform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub period: f64,
    pub modes_per_axis: usize,
    #[serde(default)]
    pub dealias: DealiasFraction,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec {
            period: 2.0 * PI,
            modes_per_axis: 16,
            dealias: DealiasFraction::TWO_THIRDS,
        }
    }
}

impl DomainSpec {
    pub fn new(period: f64, modes_per_axis: usize) -> Self {
        DomainSpec {
            period,
            modes_per_axis,
            dealias: DealiasFraction::TWO_THIRDS,
        }
    }

    /// `2π/L`, the spacing of the wavenumber lattice.
    pub fn wavenumber_unit(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Smallest positive Stokes eigenvalue, `(2π/L)^2`.
    pub fn lambda1(&self) -> f64 {
        let k = self.wavenumber_unit();
        k * k
    }

    /// Largest retained integer wavenumber per axis after dealiasing.
    ///
    /// The Nyquist mode `N/2` is never retained since it has no real partner.
    pub fn kmax(&self) -> i32 {
        let n = self.modes_per_axis as u64;
        let cut = (self.dealias.num as u64 * n) / (2 * self.dealias.den as u64);
        (cut as i32).min(self.modes_per_axis as i32 / 2 - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(NsvError::InvalidInput(format!(
                "period must be positive and finite, got {}",
                self.period
            )));
        }
        let n = self.modes_per_axis;
        if n < 4 || !n.is_multiple_of(2) {
            return Err(NsvError::InvalidInput(format!(
                "modes_per_axis must be even and at least 4, got {n}"
            )));
        }
        if self.dealias.num == 0 || self.dealias.den == 0 || self.dealias.num > self.dealias.den {
            return Err(NsvError::InvalidInput(format!(
                "dealias fraction must lie in (0, 1], got {}",
                self.dealias
            )));
        }
        if self.kmax() < 1 {
            return Err(NsvError::InvalidInput(format!(
                "truncation {n} with dealias {} retains no modes",
                self.dealias
            )));
        }
        Ok(())
    }
}

/// Signed wavenumber for FFT-ordered index `i` on an `n`-point axis.
#[inline]
pub(crate) fn signed_wavenumber(i: usize, n: usize) -> i32 {
    if i < n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

#[inline]
pub(crate) fn fft_index(k: i32, n: usize) -> usize {
    if k >= 0 {
        k as usize
    } else {
        (k + n as i32) as usize
    }
}

#[derive(Debug)]
pub(crate) struct GridTables {
    pub spec: DomainSpec,
    pub n: usize,
    pub kvec: Vec<[i32; 3]>,
    /// Physical wavevector components `(2π/L) k`.
    pub wave: Vec<[f64; 3]>,
    /// Stokes eigenvalue `(2π/L)^2 |k|^2` of each mode.
    pub lambda: Vec<f64>,
    pub retained: Vec<bool>,
    /// Flat index of `-k`.
    pub mirror: Vec<usize>,
}

/// Precomputed wavevector tables for a [`DomainSpec`]; cheap to clone.
#[derive(Clone)]
pub struct Grid(pub(crate) Arc<GridTables>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Grid").field(&self.0.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Grid {
    pub fn new(spec: DomainSpec) -> Result<Grid> {
        spec.validate()?;
        let n = spec.modes_per_axis;
        let unit = spec.wavenumber_unit();
        let kmax = spec.kmax();
        let total = n * n * n;
        let mut kvec = Vec::with_capacity(total);
        let mut wave = Vec::with_capacity(total);
        let mut lambda = Vec::with_capacity(total);
        let mut retained = Vec::with_capacity(total);
        let mut mirror = Vec::with_capacity(total);
        for ix in 0..n {
            let kx = signed_wavenumber(ix, n);
            for iy in 0..n {
                let ky = signed_wavenumber(iy, n);
                for iz in 0..n {
                    let kz = signed_wavenumber(iz, n);
                    let k = [kx, ky, kz];
                    kvec.push(k);
                    wave.push([unit * kx as f64, unit * ky as f64, unit * kz as f64]);
                    let ksq = (kx * kx + ky * ky + kz * kz) as f64;
                    lambda.push(unit * unit * ksq);
                    let inside = k.iter().all(|c| c.abs() <= kmax);
                    retained.push(inside && ksq > 0.0);
                    let (mx, my, mz) = (fft_index(-kx, n), fft_index(-ky, n), fft_index(-kz, n));
                    mirror.push((mx * n + my) * n + mz);
                }
            }
        }
        Ok(Grid(Arc::new(GridTables {
            spec,
            n,
            kvec,
            wave,
            lambda,
            retained,
            mirror,
        })))
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.0.spec
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn len(&self) -> usize {
        self.0.kvec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.kvec.is_empty()
    }

    pub fn lambda1(&self) -> f64 {
        self.0.spec.lambda1()
    }

    pub fn index_of(&self, k: [i32; 3]) -> Option<usize> {
        let n = self.0.n;
        let half = (n / 2) as i32;
        if k.iter().any(|&c| c < -half || c >= half) {
            return None;
        }
        let [a, b, c] = k.map(|c| fft_index(c, n));
        Some((a * n + b) * n + c)
    }

    pub fn wavevector(&self, idx: usize) -> [i32; 3] {
        self.0.kvec[idx]
    }

    pub fn eigenvalue(&self, idx: usize) -> f64 {
        self.0.lambda[idx]
    }

    pub fn is_retained(&self, idx: usize) -> bool {
        self.0.retained[idx]
    }

    pub fn mirror(&self, idx: usize) -> usize {
        self.0.mirror[idx]
    }

    /// Flat indices of all retained (nonzero, dealiased) wavevectors in storage order.
    pub fn retained_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .retained
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| r.then_some(i))
    }

    /// Dimension of the real Galerkin space: two solenoidal directions per retained `k`.
    pub fn solenoidal_dimension(&self) -> usize {
        2 * self.retained_indices().count()
    }

    /// Per-mode multiplier `f(λ_k)` on retained modes, zero elsewhere.
    pub fn mode_factors(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.0
            .lambda
            .iter()
            .zip(&self.0.retained)
            .map(|(&l, &r)| if r { f(l) } else { 0.0 })
            .collect()
    }
}

/// The `count` smallest Stokes eigenvalues of the Galerkin space, with multiplicity.
///
/// Every retained nonzero wavevector carries two divergence-free directions.
pub fn eigenvalue_table(spec: &DomainSpec, count: usize) -> Result<Vec<f64>> {
    spec.validate()?;
    let kmax = spec.kmax();
    let unit2 = spec.lambda1();
    let mut table = Vec::new();
    for kx in -kmax..=kmax {
        for ky in -kmax..=kmax {
            for kz in -kmax..=kmax {
                let ksq = kx * kx + ky * ky + kz * kz;
                if ksq > 0 {
                    let l = unit2 * ksq as f64;
                    table.push(l);
                    table.push(l);
                }
            }
        }
    }
    if count > table.len() {
        return Err(NsvError::Capacity {
            requested: count,
            available: table.len(),
        });
    }
    table.sort_by(|a, b| a.total_cmp(b));
    table.truncate(count);
    Ok(table)
}
