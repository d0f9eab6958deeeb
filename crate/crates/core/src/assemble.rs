//! Assembly and solution of the refinement program
//!
//! ```text
//! minimize   ‖X − 1μᵀ‖²_F + λ‖X − X_ref‖²_F
//! subject to ‖X_i − X_j‖ ≤ δ   for every edge (i, j)
//! ```
//!
//! Vertex `i` occupies coordinates `3i..3i+3` of the decision vector. Each
//! edge contributes one four-dimensional second-order cone block.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::ConeLayout;
use crate::mesh::{centroid, normalize_unit_sphere, sample_surface, MeshError, Transform, TriMesh, Vec3};
use crate::solver::{solve, ConicProblem, SolverError, SolverResult, SolverSettings, Status, WarmStart};
use crate::sparse::CscMatrix;

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("mesh has no edges; the program would be unconstrained")]
    NoEdges,
    #[error("reference has {got} rows, mesh has {expected} vertices")]
    Reference { expected: usize, got: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("solver hit a numerical error after {} iterations", .0.iterations)]
    Numerical(Box<SolverResult>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefineConfig {
    pub lambda: f64,
    pub delta: f64,
    pub sample_count: usize,
    pub seed: u64,
    pub normalize: bool,
    pub solver: SolverSettings,
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            lambda: 0.01,
            delta: 0.5,
            sample_count: 10_000,
            seed: 0,
            normalize: true,
            solver: SolverSettings::default(),
        }
    }
}

impl RefineConfig {
    pub fn validate(&self) -> Result<(), RefineError> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(RefineError::Config(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(RefineError::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.sample_count == 0 {
            return Err(RefineError::Config("sample_count must be at least 1".into()));
        }
        self.solver.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    Target,
    Deformed,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    /// Solution after the final unit-sphere normalization (if enabled).
    pub refined: TriMesh,
    /// Solution in the optimization frame, before re-normalization.
    pub solution: TriMesh,
    pub solver_result: SolverResult,
    pub x_ref_source: ReferenceSource,
    pub mu: Vec3,
    pub deformed_transform: Transform,
    pub target_transform: Transform,
    /// Maps `solution` onto `refined`.
    pub output_transform: Transform,
}

/// Target vertices when the vertex counts agree, otherwise the deformed ones.
pub fn choose_reference(deformed: &TriMesh, target: &TriMesh) -> (Vec<Vec3>, ReferenceSource) {
    if deformed.num_vertices() == target.num_vertices() {
        (target.vertices().to_vec(), ReferenceSource::Target)
    } else {
        (deformed.vertices().to_vec(), ReferenceSource::Deformed)
    }
}

pub fn build_program(
    deformed: &TriMesh,
    mu: &Vec3,
    x_ref: &[Vec3],
    config: &RefineConfig,
) -> Result<ConicProblem, RefineError> {
    build_program_from_edges(deformed.num_vertices(), deformed.edges(), mu, x_ref, config)
}

/// Same program over an explicit edge list.
pub fn build_program_from_edges(
    num_vertices: usize,
    edges: &[(usize, usize)],
    mu: &Vec3,
    x_ref: &[Vec3],
    config: &RefineConfig,
) -> Result<ConicProblem, RefineError> {
    config.validate()?;
    if x_ref.len() != num_vertices {
        return Err(RefineError::Reference {
            expected: num_vertices,
            got: x_ref.len(),
        });
    }
    if edges.is_empty() {
        return Err(RefineError::NoEdges);
    }
    let (n, lambda) = (3 * num_vertices, config.lambda);

    let p = CscMatrix::from_diagonal(&vec![2.0 * (1.0 + lambda); n]);
    let mut c = Vec::with_capacity(n);
    for r in x_ref {
        for d in 0..3 {
            c.push(-2.0 * (mu[d] + lambda * r[d]));
        }
    }

    let mut t = Vec::with_capacity(6 * edges.len());
    let mut b = vec![0.0; 4 * edges.len()];
    for (k, &(i, j)) in edges.iter().enumerate() {
        b[4 * k] = config.delta;
        for d in 0..3 {
            t.push((4 * k + 1 + d, 3 * i + d, 1.0));
            t.push((4 * k + 1 + d, 3 * j + d, -1.0));
        }
    }
    let a = CscMatrix::from_triplets(4 * edges.len(), n, &t).map_err(SolverError::from)?;
    let cones = ConeLayout::repeated_soc(edges.len(), 4).map_err(SolverError::from)?;
    Ok(ConicProblem::new(p, c, a, b, cones)?)
}

/// Unconstrained minimizer `(μ + λ x_ref_i) / (1 + λ)`; exact whenever its
/// edge lengths are all within δ.
pub fn closed_form_oracle(mu: &Vec3, x_ref: &[Vec3], lambda: f64) -> Vec<Vec3> {
    x_ref.iter().map(|r| (mu + lambda * r) / (1.0 + lambda)).collect()
}

pub fn flatten(vertices: &[Vec3]) -> Vec<f64> {
    vertices.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
}

pub fn unflatten(x: &[f64]) -> Vec<Vec3> {
    x.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

/// Longest edge of `vertices` under the connectivity of `mesh`.
pub fn max_edge_length(mesh: &TriMesh, vertices: &[Vec3]) -> f64 {
    mesh.edges()
        .iter()
        .map(|&(i, j)| (vertices[i] - vertices[j]).norm())
        .fold(0.0, f64::max)
}

pub fn refine(deformed: &TriMesh, target: &TriMesh, config: &RefineConfig) -> Result<RefineOutcome, RefineError> {
    config.validate()?;
    if deformed.edges().is_empty() {
        return Err(RefineError::NoEdges);
    }
    let (deformed_n, deformed_transform, target_n, target_transform) = if config.normalize {
        let (d, dt) = normalize_unit_sphere(deformed)?;
        let (t, tt) = normalize_unit_sphere(target)?;
        (d, dt, t, tt)
    } else {
        (
            deformed.clone(),
            Transform::identity(),
            target.clone(),
            Transform::identity(),
        )
    };

    let samples = sample_surface(&target_n, config.sample_count, config.seed)?;
    let mu = centroid(&samples);
    let (x_ref, x_ref_source) = choose_reference(&deformed_n, &target_n);
    let problem = build_program(&deformed_n, &mu, &x_ref, config)?;

    let x0 = flatten(deformed_n.vertices());
    let ax0 = problem.a().spmv(&x0).map_err(SolverError::from)?;
    let s0 = problem.b().iter().zip(&ax0).map(|(b, a)| b - a).collect();
    let warm = WarmStart {
        x: x0,
        y: vec![0.0; problem.m()],
        s: s0,
    };
    let result = solve(&problem, &config.solver, Some(&warm))?;
    if result.status == Status::NumericalError {
        return Err(RefineError::Numerical(Box::new(result)));
    }

    let solution = deformed_n.with_vertices(unflatten(&result.x))?;
    let (refined, output_transform) = if config.normalize {
        normalize_unit_sphere(&solution)?
    } else {
        (solution.clone(), Transform::identity())
    };
    Ok(RefineOutcome {
        refined,
        solution,
        solver_result: result,
        x_ref_source,
        mu,
        deformed_transform,
        target_transform,
        output_transform,
    })
}
