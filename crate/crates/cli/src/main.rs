//! `nsv`: command-line front end of the Navier-Stokes-Voigt simulator.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use nsv_core::harness::{run, RunConfig, Subcommand};
use nsv_core::NsvError;

#[derive(Parser, Debug)]
#[command(
    name = "nsv",
    version,
    about = "Spectral Navier-Stokes-Voigt simulator and attractor diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key.path=value` override applied to the configuration; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "nsv-out")]
    out: PathBuf,
}

#[derive(ClapSubcommand, Debug)]
enum Command {
    /// Integrate one trajectory.
    Simulate(#[command(flatten)] Common),
    /// Energy envelope, integral estimate and both semigroup splits along a trajectory.
    DecayTest(#[command(flatten)] Common),
    /// Closed-form attractor bounds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long)]
        gnorm: Option<f64>,
    },
    /// Trace-formula dimension estimate.
    Dimension {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_tangents: Option<usize>,
        #[arg(long)]
        window: Option<f64>,
    },
    /// Distances between Voigt branches and the Navier-Stokes reference.
    LimitStudy {
        #[command(flatten)]
        common: Common,
        /// Comma-separated list of Voigt lengths.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Bounds (and optionally trace dimensions) over a list of alphas.
    SweepAlpha {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
    },
}

/// Configuration used by `bounds` when no file is given: unit box period 2π, 16³ grid, unit data.
const BOUNDS_DEFAULT: &str = r#"
[params]
nu = 1.0
alpha = 1.0

[trajectory]
dt = 0.01
t_end = 0.0

[initial_condition]
kind = "taylor-green"

[bounds]
gnorm = 1.0
"#;

fn list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn resolve(command: Command) -> (Subcommand, Common, Vec<String>) {
    let mut extra = Vec::new();
    let (sub, common) = match command {
        Command::Simulate(c) => (Subcommand::Simulate, c),
        Command::DecayTest(c) => (Subcommand::DecayTest, c),
        Command::Bounds {
            common,
            alpha,
            nu,
            gnorm,
        } => {
            if let Some(a) = alpha {
                extra.push(format!("params.alpha={a:?}"));
            }
            if let Some(v) = nu {
                extra.push(format!("params.nu={v:?}"));
            }
            if let Some(g) = gnorm {
                extra.push(format!("bounds.gnorm={g:?}"));
            }
            (Subcommand::Bounds, common)
        }
        Command::Dimension {
            common,
            n_tangents,
            window,
        } => {
            if let Some(n) = n_tangents {
                extra.push(format!("dimension.n_tangents={n}"));
            }
            if let Some(w) = window {
                extra.push(format!("dimension.window={w:?}"));
            }
            (Subcommand::Dimension, common)
        }
        Command::LimitStudy {
            common,
            alphas,
            t_end,
        } => {
            if let Some(a) = alphas {
                extra.push(format!("limit.alphas={}", list(&a)));
            }
            if let Some(t) = t_end {
                extra.push(format!("limit.t_end={t:?}"));
            }
            (Subcommand::LimitStudy, common)
        }
        Command::SweepAlpha { common, alphas } => {
            if let Some(a) = alphas {
                extra.push(format!("sweep.alphas={}", list(&a)));
            }
            (Subcommand::SweepAlpha, common)
        }
    };
    (sub, common, extra)
}

fn load(
    sub: Subcommand,
    common: &Common,
    overrides: &[String],
) -> Result<(RunConfig, PathBuf), NsvError> {
    match &common.config {
        Some(path) => {
            let cfg = RunConfig::load(path, overrides)?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((cfg, base))
        }
        None if sub == Subcommand::Bounds => Ok((
            RunConfig::from_toml_with_overrides(BOUNDS_DEFAULT, overrides)?,
            PathBuf::from("."),
        )),
        None => Err(NsvError::Config(format!("{sub} requires --config <path>"))),
    }
}

fn configure_threads() -> Result<(), NsvError> {
    let Ok(raw) = std::env::var("NSV_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        NsvError::Config(format!(
            "NSV_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| NsvError::Config(format!("cannot size the worker pool: {e}")))
}

fn execute(cli: Cli) -> Result<serde_json::Value, NsvError> {
    configure_threads()?;
    let (sub, common, mut overrides) = resolve(cli.command);
    // flag values win over --override
    let mut all = common.overrides.clone();
    all.append(&mut overrides);
    let (cfg, base) = load(sub, &common, &all)?;
    let summary = run(sub, &cfg, &base, &common.out)?;
    Ok(serde_json::json!({
        "status": "ok",
        "subcommand": sub.as_str(),
        "manifest": summary.manifest,
        "summary": summary.summary,
    }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // usage errors are configuration errors
            let err = NsvError::Config(e.to_string().trim().to_string());
            return report_error(&err);
        }
    };
    match execute(cli) {
        Ok(report) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            ExitCode::SUCCESS
        }
        Err(e) => report_error(&e),
    }
}

/// One JSON object on stderr, exit code from the error category.
fn report_error(e: &NsvError) -> ExitCode {
    let cat = e.category();
    let err = serde_json::json!({
        "status": "error",
        "category": cat.as_str(),
        "message": e.to_string(),
    });
    eprintln!("{err}");
    ExitCode::from(cat.exit_code() as u8)
}
