//! `omwu-lab`: simulate, certify and sweep OMWU on zero-sum matrix games.
//!
//! Exit codes: 0 when everything requested passed, 1 when a certification
//! failed, 2 on usage or configuration errors.

mod commands;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use omwu_core::dynamics::Algorithm;

use manifest::{Format, InitKind};

pub const SEED_ENV: &str = "OMWU_LAB_SEED";

#[derive(Parser)]
#[command(name = "omwu-lab", version, about = "Optimistic multiplicative weights laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trajectory and write it with a JSON summary.
    Run(RunArgs),
    /// Run a certification suite and write one JSON report per check.
    Verify(VerifyArgs),
    /// Evaluate a distance to equilibrium on a grid over (p(1), q(1)).
    Levelset(LevelsetArgs),
    /// One trajectory per delta with fitted late-time log-KL slopes.
    Sweep(SweepArgs),
    /// Describe a generated instance as JSON.
    Instance(InstanceCmdArgs),
}

#[derive(Args, Clone, Default)]
pub struct InstanceArgs {
    /// Instance family: canonical2x2, scaled_mp, boundary_sym, diagonal10, kl_lower, uniform_lb, dg_lb.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub delta_p: Option<f64>,
    #[arg(long)]
    pub delta_q: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args)]
pub struct RunArgs {
    /// TOML or JSON manifest; flags override its values.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, visible_alias = "T")]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Defaults to the OMWU_LAB_SEED environment variable, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    /// Explicit row-player start, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub init_p: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub init_q: Option<Vec<f64>>,
    /// Refuse stepsizes above the energy-dissipation bound.
    #[arg(long)]
    pub enforce_stepsize: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// dissipation, domination, rates, lower_bounds, stability, drift, chain or all.
    pub suite: String,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random games or states per sampling check.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, visible_alias = "T")]
    pub horizon: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Directory for the JSON reports.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum Measure {
    Kl,
    Tv,
    Dg,
    Chi2,
}

#[derive(Args)]
pub struct LevelsetArgs {
    #[arg(long)]
    pub delta_p: Option<f64>,
    #[arg(long)]
    pub delta_q: Option<f64>,
    /// Sets both deltas when they are not given separately.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub grid_n: usize,
    #[arg(long, value_enum)]
    pub measure: Measure,
    /// Output CSV file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    /// canonical2x2 (symmetric A_{δ,δ}) or diagonal10.
    #[arg(long)]
    pub family: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub eta: f64,
    #[arg(long, visible_alias = "T", default_value_t = 1500)]
    pub horizon: usize,
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct InstanceCmdArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, visible_alias = "T")]
    pub horizon: Option<usize>,
    /// Output JSON file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Whether every requested certification passed.
pub enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Verify(a) => commands::verify(a),
        Command::Levelset(a) => commands::levelset(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Instance(a) => commands::instance(a),
    };
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
