//! Subcommand orchestration: build inputs from a [`RunConfig`], run, write artifacts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use rayon::prelude::*;
use serde_json::json;

use super::config::RunConfig;
use super::generate::{generate_forcing, generate_initial};
use super::output::{fmt_f64, fmt_opt, Csv, Manifest, OutputDir, Timing, Versions};
use crate::attractor::{
    compute_bounds, evolve_tangents, exponential_attractor_check, BoundsParams, BoundsReport,
    TangentBundle, TangentConfig, TraceStats,
};
use crate::dynamics::{
    energy_identity_residual, entry_check, envelope_check, evolve, integral_estimate_check,
    solve_l_decomposition, solve_v_decomposition, StateRecord, TrajectoryConfig, VoigtParams,
};
use crate::error::{NsvError, Result};
use crate::limit::{
    absorbing_nesting_check, cloud_semidistance, energy_inequality_residual, run_family,
    sample_cloud, CloudMetric, FamilyRun,
};
use crate::spectral::serial::{encode_field, sidecar_for};
use crate::spectral::{GDirection, Grid, SpectralField};

/// Relative slack of the energy envelope checks.
const ENVELOPE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    DecayTest,
    Bounds,
    Dimension,
    LimitStudy,
    SweepAlpha,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Simulate,
        Subcommand::DecayTest,
        Subcommand::Bounds,
        Subcommand::Dimension,
        Subcommand::LimitStudy,
        Subcommand::SweepAlpha,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::DecayTest => "decay-test",
            Subcommand::Bounds => "bounds",
            Subcommand::Dimension => "dimension",
            Subcommand::LimitStudy => "limit-study",
            Subcommand::SweepAlpha => "sweep-alpha",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subcommand {
    type Err = NsvError;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| NsvError::Config(format!("unknown subcommand {s:?}")))
    }
}

/// Where a run wrote its artifacts.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

struct Inputs {
    grid: Grid,
    params: VoigtParams,
}

fn build_params(cfg: &RunConfig, base_dir: &Path) -> Result<Inputs> {
    let grid = Grid::new(cfg.domain)?;
    let forcing = generate_forcing(&cfg.forcing, &grid, base_dir)?;
    let mut params = VoigtParams::new(cfg.params.nu, cfg.params.alpha, forcing)?;
    params.calib = cfg.params.calib.clone();
    Ok(Inputs { grid, params })
}

fn initial(cfg: &RunConfig, grid: &Grid, base_dir: &Path) -> Result<SpectralField> {
    generate_initial(&cfg.initial_condition, grid, cfg.seed, base_dir)
}

fn trajectory_csv(records: &[StateRecord]) -> Csv {
    let mut csv = Csv::new(StateRecord::CSV_HEADER);
    for r in records {
        csv.row(
            [
                r.t,
                r.e_alpha,
                r.h1,
                r.psi_alpha,
                r.dtnorm_valpha,
                r.dtnorm_vstar43,
            ]
            .map(fmt_f64),
        );
    }
    csv
}

fn bounds_row(csv: &mut Csv, r: &BoundsReport) {
    csv.row([
        fmt_f64(r.alpha),
        fmt_f64(r.nu),
        fmt_f64(r.lambda1),
        fmt_f64(r.gnorm),
        fmt_f64(r.grashof),
        fmt_f64(r.kappa_nu),
        fmt_f64(r.m1),
        fmt_f64(r.k1),
        fmt_opt(r.r_alpha),
        fmt_opt(r.dim_bound),
        fmt_f64(r.t_star),
        fmt_opt(r.c_star),
        fmt_opt(r.exp_dim_estimate),
    ]);
}

fn trace_csv(stats: &TraceStats) -> Csv {
    let mut csv = Csv::new(TraceStats::CSV_HEADER);
    for (i, v) in stats.per_n_average.iter().enumerate() {
        csv.row([(i + 1).to_string(), fmt_f64(*v), fmt_f64(stats.elapsed)]);
    }
    csv
}

/// Runs `sub` and writes its artifacts, `manifest.json` and `timing.json` into `out_dir`.
///
/// Relative file paths in the configuration are resolved against `base_dir`.
pub fn run(
    sub: Subcommand,
    cfg: &RunConfig,
    base_dir: &Path,
    out_dir: &Path,
) -> Result<RunSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let mut out = OutputDir::create(out_dir)?;
    info!("{sub}: writing to {}", out_dir.display());
    let summary = match sub {
        Subcommand::Simulate => simulate(cfg, base_dir, &mut out)?,
        Subcommand::DecayTest => decay_test(cfg, base_dir, &mut out)?,
        Subcommand::Bounds => bounds(cfg, base_dir, &mut out)?,
        Subcommand::Dimension => dimension(cfg, base_dir, &mut out)?,
        Subcommand::LimitStudy => limit_study(cfg, base_dir, &mut out)?,
        Subcommand::SweepAlpha => sweep_alpha(cfg, base_dir, &mut out)?,
    };
    let manifest = Manifest {
        subcommand: sub.as_str().to_string(),
        seed: cfg.seed,
        versions: Versions::default(),
        config: cfg.clone(),
        outputs: out.entries().to_vec(),
        summary: summary.clone(),
    };
    let outputs = out
        .entries()
        .iter()
        .map(|e| out.root().join(&e.file))
        .collect();
    let manifest_path = out.root().join("manifest.json");
    std::fs::write(&manifest_path, manifest.to_json())
        .map_err(|e| NsvError::io(&manifest_path, e))?;
    let timing = Timing {
        wall_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
    };
    let timing_path = out.root().join("timing.json");
    let timing_json = serde_json::to_string_pretty(&timing).expect("timing serializes");
    std::fs::write(&timing_path, timing_json).map_err(|e| NsvError::io(&timing_path, e))?;
    Ok(RunSummary {
        manifest: manifest_path,
        outputs,
        summary,
    })
}

fn simulate(cfg: &RunConfig, base_dir: &Path, out: &mut OutputDir) -> Result<serde_json::Value> {
    let Inputs { grid, params } = build_params(cfg, base_dir)?;
    let u0 = initial(cfg, &grid, base_dir)?;
    let traj = evolve(&u0, &params, &cfg.trajectory)?;
    out.write(
        "trajectory.csv",
        &trajectory_csv(&traj.records).into_bytes(),
    )?;
    let bytes = encode_field(&traj.final_field);
    let side = sidecar_for(&traj.final_field, &bytes);
    out.write("final_field.bin", &bytes)?;
    let side_json = serde_json::to_string_pretty(&side).expect("sidecar serializes");
    out.write("final_field.bin.json", side_json.as_bytes())?;
    let first = traj.records.first().expect("initial record");
    let last = traj.records.last().expect("final record");
    Ok(json!({
        "records": traj.records.len(),
        "e_alpha_initial": first.e_alpha,
        "e_alpha_final": last.e_alpha,
    }))
}

fn decay_test(cfg: &RunConfig, base_dir: &Path, out: &mut OutputDir) -> Result<serde_json::Value> {
    let Inputs { grid, params } = build_params(cfg, base_dir)?;
    let u0 = initial(cfg, &grid, base_dir)?;
    let traj = evolve(&u0, &params, &cfg.trajectory)?;
    out.write(
        "trajectory.csv",
        &trajectory_csv(&traj.records).into_bytes(),
    )?;
    let env = envelope_check(&traj.records, &params, ENVELOPE_SLACK)?;
    let integral = integral_estimate_check(&traj.records, &params).ok();
    let entry = entry_check(&traj.records, &params, ENVELOPE_SLACK);
    let identity = energy_identity_residual(&traj.records, &params).ok();

    let (l_split, v_split) = rayon::join(
        || solve_l_decomposition(&u0, &params, &cfg.trajectory),
        || solve_v_decomposition(&u0, &params, &cfg.trajectory),
    );
    let (l_split, v_split) = (l_split?, v_split?);
    let mut csv =
        Csv::new("t,split,u_valpha,v_valpha,w_psi,reconstruction_error,v_closed_form_error");
    for (name, d) in [("L", &l_split), ("V", &v_split)] {
        for r in &d.records {
            csv.row([
                fmt_f64(r.t),
                name.to_string(),
                fmt_f64(r.u_valpha),
                fmt_f64(r.v_valpha),
                fmt_f64(r.w_psi),
                fmt_f64(r.reconstruction_error),
                fmt_f64(r.v_closed_form_error),
            ]);
        }
    }
    out.write("decomposition.csv", &csv.into_bytes())?;
    let worst = |d: &crate::dynamics::Decomposition| {
        d.records
            .iter()
            .map(|r| r.reconstruction_error / r.u_valpha.max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    Ok(json!({
        "kappa_nu": params.kappa_nu(),
        "envelope": env,
        "integral_estimate": integral,
        "entry": entry,
        "energy_identity_residual": identity,
        "l_split_max_relative_reconstruction_error": worst(&l_split),
        "v_split_max_relative_reconstruction_error": worst(&v_split),
        "v_split_max_closed_form_error": v_split.records.iter().map(|r| r.v_closed_form_error).fold(0.0, f64::max),
    }))
}

fn bounds_params(cfg: &RunConfig, base_dir: &Path, alpha: f64) -> Result<BoundsParams> {
    let gnorm = match cfg.bounds.as_ref().and_then(|b| b.gnorm) {
        Some(g) => g,
        None => build_params(cfg, base_dir)?.params.gnorm(),
    };
    let mut bp = BoundsParams::new(cfg.params.nu, alpha, gnorm);
    bp.calib = cfg.params.calib.clone();
    Ok(bp)
}

fn bounds(cfg: &RunConfig, base_dir: &Path, out: &mut OutputDir) -> Result<serde_json::Value> {
    let report = compute_bounds(
        &bounds_params(cfg, base_dir, cfg.params.alpha)?,
        &cfg.domain,
    )?;
    let mut csv = Csv::new(BoundsReport::CSV_HEADER);
    bounds_row(&mut csv, &report);
    out.write("bounds.csv", &csv.into_bytes())?;
    Ok(serde_json::to_value(&report).expect("report serializes"))
}

/// Evolves the base point through the transient, attaches a random frame and averages traces.
fn trace_estimate(cfg: &RunConfig, params: &VoigtParams, u0: &SpectralField) -> Result<TraceStats> {
    let dim = cfg.dimension.as_ref().ok_or_else(|| {
        NsvError::Config("the dimension estimate needs a [dimension] section".into())
    })?;
    let base = if dim.transient > 0.0 {
        let tcfg = TrajectoryConfig {
            t_end: dim.transient,
            ..cfg.trajectory
        };
        evolve(u0, params, &tcfg)?.final_field
    } else {
        u0.clone()
    };
    let uhat = base.g_apply(params.alpha, GDirection::Forward);
    let bundle = TangentBundle::random(uhat, dim.n_tangents, cfg.seed)?;
    let tc = TangentConfig {
        dt: cfg.trajectory.dt,
        window: dim.window,
        spinup: dim.spinup(),
        reorth_stride: dim.reorth_stride,
        frozen_base: dim.frozen_base,
        seed: cfg.seed,
    };
    Ok(evolve_tangents(&bundle, params, &tc)?.0)
}

fn dimension(cfg: &RunConfig, base_dir: &Path, out: &mut OutputDir) -> Result<serde_json::Value> {
    let Inputs { grid, params } = build_params(cfg, base_dir)?;
    let u0 = initial(cfg, &grid, base_dir)?;
    let stats = trace_estimate(cfg, &params, &u0)?;
    out.write("trace.csv", &trace_csv(&stats).into_bytes())?;
    let report = compute_bounds(&BoundsParams::from(&params), &cfg.domain)?;
    let mut csv = Csv::new(BoundsReport::CSV_HEADER);
    bounds_row(&mut csv, &report);
    out.write("bounds.csv", &csv.into_bytes())?;
    let cmp = exponential_attractor_check(&report, &stats);
    Ok(json!({
        "n_numerical": stats.n_numerical,
        "kaplan_yorke": stats.kaplan_yorke,
        "window": stats.elapsed,
        "reseeds": stats.reseeds,
        "dim_bound": report.dim_bound,
        "grashof": report.grashof,
        "exponential_attractor": cmp,
    }))
}

fn limit_study(cfg: &RunConfig, base_dir: &Path, out: &mut OutputDir) -> Result<serde_json::Value> {
    let lim = cfg
        .limit
        .as_ref()
        .ok_or_else(|| NsvError::Config("limit-study needs a [limit] section".into()))?;
    let Inputs { grid, params } = build_params(cfg, base_dir)?;
    let u0 = initial(cfg, &grid, base_dir)?;
    let fam = FamilyRun {
        alphas: lim.alphas.clone(),
        shared_u0: u0.clone(),
        params: params.clone(),
        cfg: TrajectoryConfig {
            t_end: lim.t_end,
            ..cfg.trajectory
        },
    };
    let result = run_family(&fam)?;
    let mut csv = Csv::new("alpha,t,dist_vstar");
    for prof in &result.profiles {
        for (t, d) in &prof.profile {
            csv.row([fmt_f64(prof.alpha), fmt_f64(*t), fmt_f64(*d)]);
        }
    }
    out.write("family.csv", &csv.into_bytes())?;

    let nse = params.with_alpha(0.0);
    let residual = energy_inequality_residual(&result.reference_records, &nse)?;
    let nesting = absorbing_nesting_check(params.nu, params.gnorm(), grid.lambda1(), &lim.alphas);

    let mut cloud_rows = Vec::new();
    if let Some([t_from, t_to]) = lim.cloud_window {
        let ccfg = TrajectoryConfig {
            t_end: t_to,
            ..cfg.trajectory
        };
        let mut all = vec![0.0];
        all.extend(lim.alphas.iter().copied());
        let clouds: Vec<Result<Vec<SpectralField>>> = all
            .par_iter()
            .map(|&a| sample_cloud(&u0, &params.with_alpha(a), &ccfg, t_from))
            .collect();
        let mut clouds = clouds.into_iter();
        let reference = clouds.next().expect("reference cloud")?;
        let mut csv = Csv::new("alpha,forward,backward,metric");
        for (alpha, cloud) in lim.alphas.iter().zip(clouds) {
            let d = cloud_semidistance(&cloud?, &reference, CloudMetric::Vstar)?;
            csv.row([
                fmt_f64(*alpha),
                fmt_f64(d.semidist_forward),
                fmt_f64(d.semidist_backward),
                d.metric.label().to_string(),
            ]);
            cloud_rows.push(d);
        }
        out.write("cloud.csv", &csv.into_bytes())?;
    }

    let maxima: Vec<f64> = result.profiles.iter().map(|p| p.max_distance).collect();
    let ratios: Vec<f64> = maxima.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(json!({
        "alphas": result.profiles.iter().map(|p| p.alpha).collect::<Vec<_>>(),
        "max_distance": maxima,
        "consecutive_ratio": ratios,
        "failures": result.failures,
        "partial": result.is_partial(),
        "nse_energy_inequality_residual": residual,
        "nesting": nesting,
        "clouds": cloud_rows,
    }))
}

struct SweepPoint {
    report: BoundsReport,
    stats: Option<TraceStats>,
}

fn sweep_alpha(cfg: &RunConfig, base_dir: &Path, out: &mut OutputDir) -> Result<serde_json::Value> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| NsvError::Config("sweep-alpha needs a [sweep] section".into()))?;
    let Inputs { grid, params } = build_params(cfg, base_dir)?;
    let u0 = if sweep.dimension {
        Some(initial(cfg, &grid, base_dir)?)
    } else {
        None
    };
    // one worker per point; results are merged below in input order
    let points: Vec<Result<SweepPoint>> = sweep
        .alphas
        .par_iter()
        .map(|&alpha| {
            let p = params.with_alpha(alpha);
            let report = compute_bounds(&BoundsParams::from(&p), &cfg.domain)?;
            let stats = match &u0 {
                Some(u0) if alpha > 0.0 => Some(trace_estimate(cfg, &p, u0)?),
                _ => None,
            };
            Ok(SweepPoint { report, stats })
        })
        .collect();
    let points: Vec<SweepPoint> = points.into_iter().collect::<Result<_>>()?;

    let mut csv = Csv::new(BoundsReport::CSV_HEADER);
    for pt in &points {
        bounds_row(&mut csv, &pt.report);
    }
    out.write("bounds.csv", &csv.into_bytes())?;
    if sweep.dimension {
        let mut csv = Csv::new("alpha,n_numerical,kaplan_yorke,dim_bound");
        for pt in &points {
            let (n, ky) = match &pt.stats {
                Some(s) => (s.n_numerical, s.kaplan_yorke),
                None => (None, None),
            };
            csv.row([
                fmt_f64(pt.report.alpha),
                n.map(|n| n.to_string()).unwrap_or_default(),
                fmt_opt(ky),
                fmt_opt(pt.report.dim_bound),
            ]);
        }
        out.write("sweep.csv", &csv.into_bytes())?;
    }
    Ok(json!({
        "alphas": sweep.alphas,
        "dim_bound": points.iter().map(|p| p.report.dim_bound).collect::<Vec<_>>(),
        "n_numerical": points.iter().map(|p| p.stats.as_ref().and_then(|s| s.n_numerical)).collect::<Vec<_>>(),
    }))
}
