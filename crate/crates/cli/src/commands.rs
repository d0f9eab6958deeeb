use std::fs;
use std::io::{self, Write};

use anyhow::{Context, Result};
use meshcone_core::assemble::{refine, RefineConfig, RefineError};
use meshcone_core::baselines::{gen_deformed, laplacian_smooth, DeformConfig, SmoothConfig};
use meshcone_core::bench::{load_pairs, run_bench, synthetic_pairs, write_csv, write_pairs, BenchConfig, Sweep};
use meshcone_core::mesh::{load_obj, save_obj};
use meshcone_core::metrics::{evaluate, EvalConfig, Metric};
use meshcone_core::solver::{write_diagnostics, SolverResult, Status};
use serde::Serialize;

use crate::config::FileConfig;
use crate::{BenchArgs, Cli, Command, EvalArgs, GenDeformedArgs, RefineArgs, SmoothArgs, SolveFlags, SynthArgs};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_MAX_ITERS: u8 = 2;

pub fn run(cli: Cli) -> Result<u8> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Refine(a) => cmd_refine(a, &file),
        Command::Eval(a) => cmd_eval(a, &file),
        Command::Smooth(a) => cmd_smooth(a, &file),
        Command::GenDeformed(a) => cmd_gen_deformed(a, &file),
        Command::Bench(a) => cmd_bench(a, &file),
        Command::Synth(a) => cmd_synth(a, &file),
    }
}

fn refine_config(flags: SolveFlags, file: &FileConfig) -> Result<RefineConfig> {
    let d = RefineConfig::default();
    let eps = file.resolve("eps", flags.eps, d.solver.eps_abs)?;
    let cfg = RefineConfig {
        lambda: file.resolve("lambda", flags.lambda, d.lambda)?,
        delta: file.resolve("delta", flags.delta, d.delta)?,
        sample_count: file.resolve("samples", flags.samples, d.sample_count)?,
        seed: file.resolve_seed(flags.seed)?,
        normalize: !file.resolve_switch("no-normalize", flags.no_normalize)?,
        solver: meshcone_core::solver::SolverSettings {
            eps_abs: eps,
            eps_rel: eps,
            max_iters: file.resolve("max-iters", flags.max_iters, d.solver.max_iters)?,
            ..d.solver
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

fn metric_list(s: Option<String>, file: &FileConfig) -> Result<Vec<Metric>> {
    match file.resolve_opt("metrics", s)? {
        Some(list) => {
            let m = Metric::parse_list(&list)?;
            anyhow::ensure!(!m.is_empty(), "no metrics selected");
            Ok(m)
        }
        None => Ok(Metric::ALL.to_vec()),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct RefineLine {
    status: Status,
    iterations: usize,
    primal_res: f64,
    dual_res: f64,
    gap: f64,
    objective: f64,
    solve_time_s: f64,
}

impl From<&SolverResult> for RefineLine {
    fn from(r: &SolverResult) -> Self {
        Self {
            status: r.status,
            iterations: r.iterations,
            primal_res: r.primal_res,
            dual_res: r.dual_res,
            gap: r.gap,
            objective: r.objective,
            solve_time_s: r.solve_time,
        }
    }
}

fn cmd_refine(a: RefineArgs, file: &FileConfig) -> Result<u8> {
    let cfg = refine_config(a.solve, file)?;
    let diag = file.resolve_opt("diag", a.diag)?;
    let source = load_obj(&a.source).with_context(|| format!("loading {}", a.source.display()))?;
    let target = load_obj(&a.target).with_context(|| format!("loading {}", a.target.display()))?;
    let out = match refine(&source, &target, &cfg) {
        Ok(out) => out,
        Err(RefineError::Numerical(r)) => {
            print_json(&RefineLine::from(r.as_ref()))?;
            eprintln!("error: solver hit a numerical error after {} iterations", r.iterations);
            return Ok(EXIT_ERROR);
        }
        Err(e) => return Err(e.into()),
    };
    save_obj(&out.refined, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(path) = diag {
        write_diagnostics(&out.solver_result, &path).with_context(|| format!("writing {}", path.display()))?;
    }
    print_json(&RefineLine::from(&out.solver_result))?;
    Ok(match out.solver_result.status {
        Status::Optimal => EXIT_OK,
        Status::MaxIters => EXIT_MAX_ITERS,
        Status::NumericalError => EXIT_ERROR,
    })
}

fn cmd_eval(a: EvalArgs, file: &FileConfig) -> Result<u8> {
    let d = EvalConfig::default();
    let cfg = EvalConfig {
        metrics: metric_list(a.metrics, file)?,
        samples: file.resolve("samples", a.samples, d.samples)?,
        seed: file.resolve_seed(a.seed)?,
        ..d
    };
    anyhow::ensure!(cfg.samples > 0, "samples must be at least 1");
    let pred = load_obj(&a.pred).with_context(|| format!("loading {}", a.pred.display()))?;
    let gt = load_obj(&a.gt).with_context(|| format!("loading {}", a.gt.display()))?;
    let report = evaluate(&pred, &gt, &cfg)?;
    if let Some(path) = &a.json {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print_json(&report)?;
    Ok(EXIT_OK)
}

fn cmd_smooth(a: SmoothArgs, file: &FileConfig) -> Result<u8> {
    let d = SmoothConfig::default();
    let cfg = SmoothConfig {
        step: file.resolve("step", a.step, d.step)?,
        iterations: file.resolve("iters", a.iters, d.iterations)?,
    };
    cfg.validate()?;
    let mesh = load_obj(&a.input).with_context(|| format!("loading {}", a.input.display()))?;
    let out = laplacian_smooth(&mesh, &cfg)?;
    save_obj(&out, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(EXIT_OK)
}

fn cmd_gen_deformed(a: GenDeformedArgs, file: &FileConfig) -> Result<u8> {
    let d = DeformConfig::default();
    let cfg = DeformConfig {
        iterations: file.resolve("iters", a.iters, d.iterations)?,
        subdivisions: file.resolve("subdiv", a.subdiv, d.subdivisions)?,
        seed: file.resolve_seed(a.seed)?,
        ..d
    };
    cfg.validate()?;
    let target = load_obj(&a.target).with_context(|| format!("loading {}", a.target.display()))?;
    let out = gen_deformed(&target, &cfg)?;
    save_obj(&out, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    Ok(EXIT_OK)
}

fn cmd_bench(a: BenchArgs, file: &FileConfig) -> Result<u8> {
    let sweep = file
        .resolve_opt::<String>("sweep", a.sweep)?
        .map(|s| s.parse::<Sweep>())
        .transpose()?;
    let eval = EvalConfig {
        metrics: metric_list(a.metrics, file)?,
        samples: file.resolve("eval-samples", a.eval_samples, EvalConfig::default().samples)?,
        seed: file.resolve_seed(a.solve.seed)?,
        ..EvalConfig::default()
    };
    anyhow::ensure!(eval.samples > 0, "eval-samples must be at least 1");
    let cfg = BenchConfig {
        refine: refine_config(a.solve, file)?,
        sweep,
        eval,
    };
    let pairs = load_pairs(&a.pairs)?;
    let report = run_bench(&pairs, &cfg)?;
    write_csv(&report, io::stdout().lock())?;
    if let Some(path) = &a.json {
        fs::write(path, serde_json::to_string_pretty(&report)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(EXIT_OK)
}

fn cmd_synth(a: SynthArgs, file: &FileConfig) -> Result<u8> {
    let deform = DeformConfig {
        seed: file.resolve_seed(a.seed)?,
        ..DeformConfig::default()
    };
    let subdiv = file.resolve("subdiv", a.subdiv, deform.subdivisions)?;
    let pairs = synthetic_pairs(subdiv, &deform)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_pairs(&a.out, &pairs)?;
    eprintln!("wrote {} pairs to {}", pairs.len(), a.out.display());
    Ok(EXIT_OK)
}
