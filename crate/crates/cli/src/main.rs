//! `meshcone` command-line tool.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "meshcone", version, about = "Conic mesh refinement toolkit")]
pub struct Cli {
    /// Flat key=value file; keys are flag names without dashes.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refine a deformed mesh toward a target with the conic program.
    Refine(RefineArgs),
    /// Compare a predicted mesh against ground truth.
    Eval(EvalArgs),
    /// Umbrella-Laplacian smoothing baseline.
    Smooth(SmoothArgs),
    /// Shrink-wrap an icosphere onto a target to make a deformed input.
    GenDeformed(GenDeformedArgs),
    /// Refine and evaluate every pair in a directory; CSV on stdout.
    Bench(BenchArgs),
    /// Write the synthetic benchmark pairs to a directory.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SolveFlags {
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Maximum edge length.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Absolute and relative solver tolerance.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Target surface samples used for the centroid.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the unit-sphere normalization of inputs and output.
    #[arg(long)]
    pub no_normalize: bool,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub solve: SolveFlags,
    /// Write solver diagnostics CSV here.
    #[arg(long, value_name = "CSV")]
    pub diag: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of cd,emd,hd,nc,ce,ar.
    #[arg(long)]
    pub metrics: Option<String>,
    /// Also write the report to this file.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    #[arg(long = "in", value_name = "OBJ")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GenDeformedArgs {
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Icosphere subdivision level of the output.
    #[arg(long)]
    pub subdiv: Option<u32>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Directory of <name>_source.obj / <name>_target.obj pairs.
    #[arg(long)]
    pub pairs: PathBuf,
    /// `lambda=a,b,...` or `delta=a,b,...`.
    #[arg(long)]
    pub sweep: Option<String>,
    #[command(flatten)]
    pub solve: SolveFlags,
    #[arg(long)]
    pub eval_samples: Option<usize>,
    #[arg(long)]
    pub metrics: Option<String>,
    /// Also write the full report as JSON.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub subdiv: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
