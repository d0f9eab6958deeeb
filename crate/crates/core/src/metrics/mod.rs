//! Point-set and mesh-quality metrics: Chamfer, earth mover's and Hausdorff
//! distances, normal consistency, curvature error and triangle aspect ratio.

mod assignment;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{mean_curvature, normalize_unit_sphere, sample_surface, MeshError, PointSample, TriMesh, Vec3};
use crate::spatial::KdIndex;

pub use assignment::solve_assignment;

pub const EMD_MAX_POINTS: usize = 4096;
const LEAF_SIZE: usize = 16;
const MIN_FACE_AREA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("point sample is empty")]
    Empty,
    #[error("EMD needs equal sample counts, got {pred} and {gt}")]
    CountMismatch { pred: usize, gt: usize },
    #[error("EMD is limited to {max} points, got {got}; subsample first")]
    TooLarge { got: usize, max: usize },
    #[error("normal consistency needs normals on both samples")]
    MissingNormals,
    #[error("curvature error needs closed meshes")]
    NotClosed,
    #[error("face {face} is degenerate (area {area:e})")]
    Degenerate { face: usize, area: f64 },
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn index(points: &[Vec3]) -> Result<KdIndex, MetricsError> {
    KdIndex::build(points, LEAF_SIZE).map_err(|_| MetricsError::Empty)
}

fn check_nonempty(a: &PointSample, b: &PointSample) -> Result<(), MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::Empty);
    }
    Ok(())
}

/// Nearest-neighbour distances from every point of `from` into `to`.
fn nn_distances(from: &[Vec3], to: &KdIndex) -> Vec<(usize, f64)> {
    from.iter().map(|p| to.nearest(p)).collect()
}

/// Bidirectional mean of squared nearest-neighbour distances.
pub fn chamfer(pred: &PointSample, gt: &PointSample) -> Result<f64, MetricsError> {
    check_nonempty(pred, gt)?;
    let directed = |a: &PointSample, b: &PointSample| -> Result<f64, MetricsError> {
        let idx = index(&b.points)?;
        let s: f64 = nn_distances(&a.points, &idx).iter().map(|&(_, d)| d * d).sum();
        Ok(s / a.len() as f64)
    };
    Ok(directed(pred, gt)? + directed(gt, pred)?)
}

/// Symmetric Hausdorff distance (unsquared).
pub fn hausdorff(pred: &PointSample, gt: &PointSample) -> Result<f64, MetricsError> {
    check_nonempty(pred, gt)?;
    let directed = |a: &PointSample, b: &PointSample| -> Result<f64, MetricsError> {
        let idx = index(&b.points)?;
        Ok(nn_distances(&a.points, &idx)
            .iter()
            .map(|&(_, d)| d)
            .fold(0.0, f64::max))
    };
    Ok(directed(pred, gt)?.max(directed(gt, pred)?))
}

/// Mean matched Euclidean distance of an exact minimum-cost perfect matching.
pub fn emd(pred: &PointSample, gt: &PointSample) -> Result<f64, MetricsError> {
    check_nonempty(pred, gt)?;
    if pred.len() != gt.len() {
        return Err(MetricsError::CountMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    if pred.len() > EMD_MAX_POINTS {
        return Err(MetricsError::TooLarge {
            got: pred.len(),
            max: EMD_MAX_POINTS,
        });
    }
    let (p, q) = (&pred.points, &gt.points);
    let (_, total) = solve_assignment(p.len(), |i, j| (p[i] - q[j]).norm());
    Ok(total / p.len() as f64)
}

/// Mean absolute cosine between each point's normal and its nearest
/// neighbour's, averaged over both directions.
pub fn normal_consistency(pred: &PointSample, gt: &PointSample) -> Result<f64, MetricsError> {
    check_nonempty(pred, gt)?;
    let (Some(pn), Some(gn)) = (&pred.normals, &gt.normals) else {
        return Err(MetricsError::MissingNormals);
    };
    let directed = |a: &[Vec3], an: &[Vec3], b: &[Vec3], bn: &[Vec3]| -> Result<f64, MetricsError> {
        let idx = index(b)?;
        let s: f64 = nn_distances(a, &idx)
            .iter()
            .zip(an)
            .map(|(&(j, _), n)| abs_cos(n, &bn[j]))
            .sum();
        Ok(s / a.len() as f64)
    };
    let forward = directed(&pred.points, pn, &gt.points, gn)?;
    let backward = directed(&gt.points, gn, &pred.points, pn)?;
    Ok(0.5 * (forward + backward))
}

fn abs_cos(a: &Vec3, b: &Vec3) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (a.dot(b) / denom).abs().min(1.0)
}

/// Mean `|H_pred(i) − H_gt(nn(i))|` over predicted vertices, `nn` being the
/// nearest target vertex.
pub fn curvature_error(pred: &TriMesh, gt: &TriMesh) -> Result<f64, MetricsError> {
    if !pred.is_closed() || !gt.is_closed() {
        return Err(MetricsError::NotClosed);
    }
    let hp = mean_curvature(pred).values;
    let hg = mean_curvature(gt).values;
    let idx = index(gt.vertices())?;
    let s: f64 = pred
        .vertices()
        .iter()
        .zip(&hp)
        .map(|(v, h)| (h - hg[idx.nearest(v).0]).abs())
        .sum();
    Ok(s / pred.num_vertices() as f64)
}

/// Mean circumradius / (2 · inradius) over faces.
pub fn aspect_ratio(mesh: &TriMesh) -> Result<f64, MetricsError> {
    if mesh.num_faces() == 0 {
        return Err(MetricsError::Empty);
    }
    let mut total = 0.0;
    for f in 0..mesh.num_faces() {
        total += triangle_aspect(mesh, f)?;
    }
    Ok(total / mesh.num_faces() as f64)
}

fn triangle_aspect(mesh: &TriMesh, f: usize) -> Result<f64, MetricsError> {
    let area = mesh.face_area(f);
    if !(area > MIN_FACE_AREA) {
        return Err(MetricsError::Degenerate { face: f, area });
    }
    let [p, q, r] = mesh.face_corners(f);
    let (a, b, c) = ((q - r).norm(), (p - r).norm(), (p - q).norm());
    // R = abc / 4A, r = A / s
    let s = 0.5 * (a + b + c);
    Ok(a * b * c * s / (8.0 * area * area))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Cd,
    Emd,
    Hd,
    Nc,
    Ce,
    Ar,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Metric::Cd, Metric::Emd, Metric::Hd, Metric::Nc, Metric::Ce, Metric::Ar];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Cd => "cd",
            Metric::Emd => "emd",
            Metric::Hd => "hd",
            Metric::Nc => "nc",
            Metric::Ce => "ce",
            Metric::Ar => "ar",
        }
    }

    /// Parses a comma-separated list such as `cd,hd,nc`.
    pub fn parse_list(s: &str) -> Result<Vec<Metric>, MetricsError> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let m: Metric = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| MetricsError::UnknownMetric(s.to_string()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cd: Option<f64>,
    pub emd: Option<f64>,
    pub hd: Option<f64>,
    pub nc: Option<f64>,
    pub ce: Option<f64>,
    pub ar: Option<f64>,
    pub sample_count: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl MetricsReport {
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Cd => self.cd,
            Metric::Emd => self.emd,
            Metric::Hd => self.hd,
            Metric::Nc => self.nc,
            Metric::Ce => self.ce,
            Metric::Ar => self.ar,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub metrics: Vec<Metric>,
    pub samples: usize,
    pub seed: u64,
    /// Normalize both meshes to the unit sphere before measuring.
    pub normalize: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            metrics: Metric::ALL.to_vec(),
            samples: 5000,
            seed: 0,
            normalize: true,
        }
    }
}

/// Samples both surfaces with the same seed and computes the requested
/// metrics. EMD runs on the first `min(samples, 4096)` points. AR is measured
/// on `pred`.
pub fn evaluate(pred: &TriMesh, gt: &TriMesh, config: &EvalConfig) -> Result<MetricsReport, MetricsError> {
    let (pred, gt) = if config.normalize {
        (normalize_unit_sphere(pred)?.0, normalize_unit_sphere(gt)?.0)
    } else {
        (pred.clone(), gt.clone())
    };
    let wants = |m: Metric| config.metrics.contains(&m);
    let mut report = MetricsReport {
        sample_count: config.samples,
        seed: config.seed,
        ..Default::default()
    };
    let needs_samples = [Metric::Cd, Metric::Emd, Metric::Hd, Metric::Nc].into_iter().any(wants);
    if needs_samples {
        let ps = sample_surface(&pred, config.samples, config.seed)?;
        let gs = sample_surface(&gt, config.samples, config.seed)?;
        if wants(Metric::Cd) {
            report.cd = Some(chamfer(&ps, &gs)?);
        }
        if wants(Metric::Hd) {
            report.hd = Some(hausdorff(&ps, &gs)?);
        }
        if wants(Metric::Nc) {
            report.nc = Some(normal_consistency(&ps, &gs)?);
        }
        if wants(Metric::Emd) {
            let k = config.samples.min(EMD_MAX_POINTS);
            if k < config.samples {
                report.warning = Some(format!("emd computed on {k} of {} samples", config.samples));
            }
            report.emd = Some(emd(&ps.truncated(k), &gs.truncated(k))?);
        }
    }
    if wants(Metric::Ce) {
        report.ce = Some(curvature_error(&pred, &gt)?);
    }
    if wants(Metric::Ar) {
        report.ar = Some(aspect_ratio(&pred)?);
    }
    Ok(report)
}
