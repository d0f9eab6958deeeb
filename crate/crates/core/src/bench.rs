//! Batch refinement and evaluation over mesh pairs, with optional parameter
//! sweeps, plus a procedural suite of target shapes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assemble::{refine, RefineConfig, RefineError};
use crate::baselines::{gen_deformed, BaselineError, DeformConfig};
use crate::mesh::{load_obj, save_obj, shapes, MeshError, TriMesh, Vec3};
use crate::metrics::{evaluate, EvalConfig, Metric, MetricsError};
use crate::solver::Status;

const SOURCE_SUFFIX: &str = "_source.obj";
const TARGET_SUFFIX: &str = "_target.obj";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no `*{SOURCE_SUFFIX}` / `*{TARGET_SUFFIX}` pairs found in {0}")]
    NoPairs(PathBuf),
    #[error("`{0}` has a source but no target")]
    MissingTarget(String),
    #[error("invalid sweep `{0}`; expected lambda=v1,v2,... or delta=v1,v2,...")]
    Sweep(String),
    #[error("{name}: {source}")]
    Load { name: String, source: MeshError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone)]
pub struct BenchPair {
    pub name: String,
    pub source: TriMesh,
    pub target: TriMesh,
}

/// Reads `<name>_source.obj` / `<name>_target.obj` pairs, sorted by name.
pub fn load_pairs(dir: &Path) -> Result<Vec<BenchPair>, BenchError> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir)? {
        let file = entry?.file_name().to_string_lossy().into_owned();
        if let Some(name) = file.strip_suffix(SOURCE_SUFFIX) {
            names.push(name.to_string());
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(BenchError::NoPairs(dir.to_path_buf()));
    }
    let load = |name: &str, path: PathBuf| {
        load_obj(&path).map_err(|e| BenchError::Load {
            name: name.to_string(),
            source: e,
        })
    };
    names
        .into_iter()
        .map(|name| {
            let target_path = dir.join(format!("{name}{TARGET_SUFFIX}"));
            if !target_path.exists() {
                return Err(BenchError::MissingTarget(name));
            }
            Ok(BenchPair {
                source: load(&name, dir.join(format!("{name}{SOURCE_SUFFIX}")))?,
                target: load(&name, target_path)?,
                name,
            })
        })
        .collect()
}

pub fn write_pairs(dir: &Path, pairs: &[BenchPair]) -> Result<(), BenchError> {
    fs::create_dir_all(dir)?;
    for p in pairs {
        save_obj(&p.source, dir.join(format!("{}{SOURCE_SUFFIX}", p.name)))?;
        save_obj(&p.target, dir.join(format!("{}{TARGET_SUFFIX}", p.name)))?;
    }
    Ok(())
}

fn warp(subdivisions: u32, f: impl Fn(Vec3) -> Vec3) -> TriMesh {
    let s = shapes::icosphere(subdivisions, 1.0);
    let v = s.vertices().iter().map(|&u| f(u)).collect();
    s.with_vertices(v).expect("same count")
}

/// Five closed target shapes sharing icosphere connectivity at the given
/// subdivision level.
pub fn synthetic_targets(subdivisions: u32) -> Vec<(&'static str, TriMesh)> {
    vec![
        ("cube", shapes::cube_sphere(subdivisions)),
        (
            "ellipsoid",
            warp(subdivisions, |u| Vec3::new(u.x, 0.75 * u.y, 0.55 * u.z)),
        ),
        (
            "flower",
            warp(subdivisions, |u| {
                let r = 1.0 + 0.2 * (4.0 * u.y.atan2(u.x)).sin() * (1.0 - u.z * u.z);
                u * r
            }),
        ),
        (
            "peanut",
            warp(subdivisions, |u| {
                let waist = 1.0 - 0.35 * (-(3.0 * u.x).powi(2)).exp();
                Vec3::new(1.3 * u.x, 0.8 * waist * u.y, 0.8 * waist * u.z)
            }),
        ),
        (
            "twist",
            warp(subdivisions, |u| {
                let (y, z) = (0.6 * u.y, 0.4 * u.z);
                let (s, c) = (1.2 * u.x).sin_cos();
                Vec3::new(u.x, c * y - s * z, s * y + c * z)
            }),
        ),
    ]
}

/// Synthetic targets paired with `gen_deformed` outputs of the same size.
pub fn synthetic_pairs(subdivisions: u32, deform: &DeformConfig) -> Result<Vec<BenchPair>, BenchError> {
    let cfg = DeformConfig {
        subdivisions,
        ..*deform
    };
    synthetic_targets(subdivisions)
        .into_iter()
        .map(|(name, target)| {
            Ok(BenchPair {
                name: name.to_string(),
                source: gen_deformed(&target, &cfg)?,
                target,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Lambda,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BenchError::Sweep(s.to_string());
        let (key, list) = s.split_once('=').ok_or_else(bad)?;
        let param = match key.trim() {
            "lambda" => SweepParam::Lambda,
            "delta" => SweepParam::Delta,
            _ => return Err(bad()),
        };
        let values = list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(bad());
        }
        Ok(Self { param, values })
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let key = match self.param {
            SweepParam::Lambda => "lambda",
            SweepParam::Delta => "delta",
        };
        let vals: Vec<String> = self.values.iter().map(f64::to_string).collect();
        write!(f, "{key}={}", vals.join(","))
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchConfig {
    pub refine: RefineConfig,
    pub sweep: Option<Sweep>,
    pub eval: EvalConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub mesh: String,
    pub lambda: f64,
    pub delta: f64,
    pub status: Status,
    pub iterations: usize,
    pub time_s: f64,
    pub cd: Option<f64>,
    pub emd: Option<f64>,
    pub hd: Option<f64>,
    pub nc: Option<f64>,
    pub ce: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub runs: usize,
    pub avg_time_s: f64,
    pub avg_iterations: f64,
    pub success_rate: f64,
    pub cd: Option<f64>,
    pub emd: Option<f64>,
    pub hd: Option<f64>,
    pub nc: Option<f64>,
    pub ce: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

fn run_one(pair: &BenchPair, refine_cfg: &RefineConfig, eval: &EvalConfig) -> Result<BenchRow, BenchError> {
    let start = Instant::now();
    let outcome = refine(&pair.source, &pair.target, refine_cfg);
    let time_s = start.elapsed().as_secs_f64();
    let mut row = BenchRow {
        mesh: pair.name.clone(),
        lambda: refine_cfg.lambda,
        delta: refine_cfg.delta,
        status: Status::NumericalError,
        iterations: 0,
        time_s,
        cd: None,
        emd: None,
        hd: None,
        nc: None,
        ce: None,
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(RefineError::Numerical(r)) => {
            row.iterations = r.iterations;
            return Ok(row);
        }
        Err(e) => return Err(e.into()),
    };
    row.status = outcome.solver_result.status;
    row.iterations = outcome.solver_result.iterations;
    let metrics: Vec<Metric> = eval.metrics.iter().copied().filter(|m| *m != Metric::Ar).collect();
    if !metrics.is_empty() {
        let report = evaluate(
            &outcome.refined,
            &pair.target,
            &EvalConfig {
                metrics,
                ..eval.clone()
            },
        )?;
        (row.cd, row.emd, row.hd, row.nc, row.ce) = (report.cd, report.emd, report.hd, report.nc, report.ce);
    }
    Ok(row)
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn summarize(rows: &[BenchRow]) -> BenchSummary {
    let n = rows.len().max(1) as f64;
    BenchSummary {
        runs: rows.len(),
        avg_time_s: rows.iter().map(|r| r.time_s).sum::<f64>() / n,
        avg_iterations: rows.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
        success_rate: rows.iter().filter(|r| r.status == Status::Optimal).count() as f64 / n,
        cd: mean(rows.iter().map(|r| r.cd)),
        emd: mean(rows.iter().map(|r| r.emd)),
        hd: mean(rows.iter().map(|r| r.hd)),
        nc: mean(rows.iter().map(|r| r.nc)),
        ce: mean(rows.iter().map(|r| r.ce)),
    }
}

/// Refines and evaluates every pair for every sweep value. Rows are ordered
/// by pair, then by sweep value as given.
pub fn run_bench(pairs: &[BenchPair], config: &BenchConfig) -> Result<BenchReport, BenchError> {
    let settings: Vec<RefineConfig> = match &config.sweep {
        None => vec![config.refine.clone()],
        Some(sweep) => sweep
            .values
            .iter()
            .map(|&v| {
                let mut c = config.refine.clone();
                match sweep.param {
                    SweepParam::Lambda => c.lambda = v,
                    SweepParam::Delta => c.delta = v,
                }
                c
            })
            .collect(),
    };
    let mut rows = Vec::with_capacity(pairs.len() * settings.len());
    for pair in pairs {
        for cfg in &settings {
            rows.push(run_one(pair, cfg, &config.eval)?);
        }
    }
    let summary = summarize(&rows);
    Ok(BenchReport { rows, summary })
}

#[derive(Serialize)]
struct CsvRecord<'a> {
    mesh: &'a str,
    lambda: Option<f64>,
    delta: Option<f64>,
    optimal: f64,
    iterations: f64,
    time_s: f64,
    cd: Option<f64>,
    emd: Option<f64>,
    hd: Option<f64>,
    nc: Option<f64>,
    ce: Option<f64>,
}

/// One line per row plus a final `mean` row whose `optimal` column is the
/// success rate.
pub fn write_csv<W: Write>(report: &BenchReport, w: W) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    for r in &report.rows {
        out.serialize(CsvRecord {
            mesh: &r.mesh,
            lambda: Some(r.lambda),
            delta: Some(r.delta),
            optimal: if r.status == Status::Optimal { 1.0 } else { 0.0 },
            iterations: r.iterations as f64,
            time_s: r.time_s,
            cd: r.cd,
            emd: r.emd,
            hd: r.hd,
            nc: r.nc,
            ce: r.ce,
        })?;
    }
    let s = &report.summary;
    out.serialize(CsvRecord {
        mesh: "mean",
        lambda: None,
        delta: None,
        optimal: s.success_rate,
        iterations: s.avg_iterations,
        time_s: s.avg_time_s,
        cd: s.cd,
        emd: s.emd,
        hd: s.hd,
        nc: s.nc,
        ce: s.ce,
    })?;
    out.flush()?;
    Ok(())
}
