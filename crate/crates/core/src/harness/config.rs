//! TOML run configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::generate::{Forcing, InitialCondition};
use crate::dynamics::TrajectoryConfig;
use crate::error::{NsvError, Result};
use crate::spectral::DomainSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub nu: f64,
    pub alpha: f64,
    /// Calibration constants of the closed-form bounds, each defaulting to 1.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub calib: BTreeMap<String, f64>,
}

/// Overrides for the `bounds` subcommand.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// `|g|` to use instead of the norm of the configured forcing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gnorm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionSection {
    pub n_tangents: usize,
    /// Averaging window.
    pub window: f64,
    /// Frame alignment before averaging; defaults to a tenth of the window.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spinup: Option<f64>,
    /// Time the base point is evolved before tangents are attached.
    #[serde(default)]
    pub transient: f64,
    #[serde(default = "default_reorth")]
    pub reorth_stride: usize,
    #[serde(default)]
    pub frozen_base: bool,
}

fn default_reorth() -> usize {
    10
}

impl DimensionSection {
    pub fn spinup(&self) -> f64 {
        self.spinup.unwrap_or(0.1 * self.window)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSection {
    pub alphas: Vec<f64>,
    pub t_end: f64,
    /// `[t_from, t_to]` of the attractor clouds; omitted means no cloud comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub alphas: Vec<f64>,
    /// Also run the trace-formula estimate at each point (needs `[dimension]`).
    #[serde(default)]
    pub dimension: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub domain: DomainSpec,
    pub params: ModelParams,
    pub trajectory: TrajectoryConfig,
    pub initial_condition: InitialCondition,
    #[serde(default = "zero_forcing")]
    pub forcing: Forcing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<DimensionSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn zero_forcing() -> Forcing {
    Forcing::Zero
}

fn check_alpha(a: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(NsvError::Config(format!(
            "{what} must lie in [0, 1], got {a}"
        )));
    }
    Ok(())
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(NsvError::Config(format!(
            "{what} must be positive, got {x}"
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Parses `text`, applies `key.path=value` overrides, then validates.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| NsvError::Config(e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| NsvError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| NsvError::io(path, e))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run configuration is always representable in TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.domain
            .validate()
            .map_err(|e| NsvError::Config(e.to_string()))?;
        check_positive(self.domain.period, "domain.period")?;
        check_positive(self.params.nu, "params.nu")?;
        check_alpha(self.params.alpha, "params.alpha")?;
        for (k, v) in &self.params.calib {
            check_positive(*v, &format!("params.calib.{k}"))?;
        }
        self.trajectory
            .validate()
            .map_err(|e| NsvError::Config(e.to_string()))?;
        match &self.initial_condition {
            InitialCondition::RandomLowmode {
                k_max, amplitude, ..
            } => {
                check_positive(*k_max, "initial_condition.k_max")?;
                if !(amplitude.is_finite() && *amplitude >= 0.0) {
                    return Err(NsvError::Config(
                        "initial_condition.amplitude must be nonnegative".into(),
                    ));
                }
            }
            InitialCondition::TaylorGreen { amplitude } if !amplitude.is_finite() => {
                return Err(NsvError::Config(
                    "initial_condition.amplitude must be finite".into(),
                ));
            }
            _ => {}
        }
        if let Forcing::LowmodeRandom {
            k_max, amplitude, ..
        } = &self.forcing
        {
            check_positive(*k_max, "forcing.k_max")?;
            if !(amplitude.is_finite() && *amplitude >= 0.0) {
                return Err(NsvError::Config(
                    "forcing.amplitude must be nonnegative".into(),
                ));
            }
        }
        if let Some(BoundsSection { gnorm: Some(g) }) = &self.bounds {
            if !(g.is_finite() && *g >= 0.0) {
                return Err(NsvError::Config(format!(
                    "bounds.gnorm must be nonnegative, got {g}"
                )));
            }
        }
        if let Some(d) = &self.dimension {
            if d.n_tangents == 0 {
                return Err(NsvError::Config(
                    "dimension.n_tangents must be at least 1".into(),
                ));
            }
            check_positive(d.window, "dimension.window")?;
            if d.spinup() < 0.0 || d.transient < 0.0 {
                return Err(NsvError::Config(
                    "dimension.spinup and dimension.transient must be nonnegative".into(),
                ));
            }
            if d.reorth_stride == 0 {
                return Err(NsvError::Config(
                    "dimension.reorth_stride must be at least 1".into(),
                ));
            }
        }
        if let Some(l) = &self.limit {
            if l.alphas.is_empty() {
                return Err(NsvError::Config("limit.alphas is empty".into()));
            }
            for a in &l.alphas {
                check_alpha(*a, "limit.alphas")?;
            }
            check_positive(l.t_end, "limit.t_end")?;
            if let Some([a, b]) = l.cloud_window {
                if !(a >= 0.0 && b > a) {
                    return Err(NsvError::Config(
                        "limit.cloud_window must satisfy 0 <= t_from < t_to".into(),
                    ));
                }
            }
        }
        if let Some(s) = &self.sweep {
            if s.alphas.is_empty() {
                return Err(NsvError::Config("sweep.alphas is empty".into()));
            }
            for a in &s.alphas {
                check_alpha(*a, "sweep.alphas")?;
            }
            if s.dimension && self.dimension.is_none() {
                return Err(NsvError::Config(
                    "sweep.dimension needs a [dimension] section".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Parses the right-hand side of an override as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Applies one `a.b.c=value` override, creating intermediate tables as needed.
pub fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| {
        NsvError::Config(format!("override {spec:?} is not of the form key=value"))
    })?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(NsvError::Config(format!(
            "override key {key:?} is malformed"
        )));
    }
    let (last, path) = parts.split_last().expect("nonempty");
    let mut cur = table;
    for p in path {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => {
                return Err(NsvError::Config(format!(
                    "override key {key:?}: {p} is not a table"
                )))
            }
        };
    }
    cur.insert(last.to_string(), parse_value(raw.trim()));
    Ok(())
}
