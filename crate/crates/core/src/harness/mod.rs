//! Configuration, deterministic input generation, run orchestration and artifact output.

pub mod config;
pub mod generate;
pub mod output;
pub mod run;

pub use config::{
    apply_override, BoundsSection, DimensionSection, LimitSection, ModelParams, RunConfig,
    SweepSection,
};
pub use generate::{generate_forcing, generate_initial, taylor_green, Forcing, InitialCondition};
pub use output::{fmt_f64, Manifest, OutputEntry};
pub use run::{run, RunSummary, Subcommand};
