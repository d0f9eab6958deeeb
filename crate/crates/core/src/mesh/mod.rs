//! Triangle meshes, surface sampling and per-vertex differential quantities.

mod curvature;
mod obj;
pub mod shapes;

use std::sync::OnceLock;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curvature::{mean_curvature, Curvature};
pub use obj::{load_obj, parse_obj, save_obj, write_obj};

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("face index {index} out of range (mesh has {count} vertices){}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Index {
        index: i64,
        count: usize,
        line: Option<usize>,
    },
    #[error("face {face} repeats a vertex")]
    RepeatedVertex { face: usize },
    #[error("mesh has no {0}")]
    Empty(&'static str),
    #[error("degenerate mesh: {0}")]
    Degenerate(String),
    #[error("mesh is not closed: {0}")]
    NotClosed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Indexed triangle mesh. Faces are 0-based vertex triples.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    edges: OnceLock<Vec<(usize, usize)>>,
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.faces == other.faces
    }
}

impl TriMesh {
    /// Builds a mesh after checking face indices. A mesh without faces is
    /// allowed (a bare vertex set) but must have at least one vertex.
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if vertices.is_empty() {
            return Err(MeshError::Empty("vertices"));
        }
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= n {
                    return Err(MeshError::Index {
                        index: v as i64,
                        count: n,
                        line: None,
                    });
                }
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::RepeatedVertex { face: fi });
            }
        }
        Ok(Self {
            vertices,
            faces,
            edges: OnceLock::new(),
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Unique undirected edges as sorted `(min, max)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        self.edges.get_or_init(|| extract_edges(&self.faces))
    }

    /// Same connectivity, new positions.
    pub fn with_vertices(&self, vertices: Vec<Vec3>) -> Result<Self, MeshError> {
        if vertices.len() != self.vertices.len() {
            return Err(MeshError::Degenerate(format!(
                "expected {} vertices, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        let edges = OnceLock::new();
        if let Some(e) = self.edges.get() {
            let _ = edges.set(e.clone());
        }
        Ok(Self {
            vertices,
            faces: self.faces.clone(),
            edges,
        })
    }

    pub fn face_corners(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized face normal; its length is twice the face area.
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.face_corners(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.faces.len() as i64
    }

    /// Number of faces incident to each edge, aligned with [`TriMesh::edges`].
    pub fn edge_face_counts(&self) -> Vec<usize> {
        let edges = self.edges();
        let mut counts = vec![0usize; edges.len()];
        for f in &self.faces {
            for (a, b) in face_edges(f) {
                let key = (a.min(b), a.max(b));
                if let Ok(k) = edges.binary_search(&key) {
                    counts[k] += 1;
                }
            }
        }
        counts
    }

    /// Every edge borders exactly two faces.
    pub fn is_closed(&self) -> bool {
        !self.faces.is_empty() && self.edge_face_counts().iter().all(|&c| c == 2)
    }

    /// Vertex-to-vertex adjacency lists, sorted.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(i, j) in self.edges() {
            adj[i].push(j);
            adj[j].push(i);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    pub fn vertex_mean(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    pub fn translated(&self, t: Vec3) -> Self {
        self.with_vertices(self.vertices.iter().map(|v| v + t).collect())
            .expect("same vertex count")
    }
}

fn face_edges(f: &[usize; 3]) -> [(usize, usize); 3] {
    [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]
}

/// Sorted unique undirected edges of a triangle list.
pub fn extract_edges(faces: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = faces
        .iter()
        .flat_map(face_edges)
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Similarity transform `v' = (v - center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub center: [f64; 3],
    pub scale: f64,
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            center: [0.0; 3],
            scale: 1.0,
        }
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        (v - Vec3::from(self.center)) / self.scale
    }

    pub fn invert(&self, v: &Vec3) -> Vec3 {
        v * self.scale + Vec3::from(self.center)
    }
}

/// Centers at the vertex mean and scales so the farthest vertex has norm 1.
pub fn normalize_unit_sphere(mesh: &TriMesh) -> Result<(TriMesh, Transform), MeshError> {
    let center = mesh.vertex_mean();
    let scale = mesh.vertices.iter().map(|v| (v - center).norm()).fold(0.0, f64::max);
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(MeshError::Degenerate("all vertices coincide".into()));
    }
    let t = Transform {
        center: center.into(),
        scale,
    };
    let out = mesh.with_vertices(mesh.vertices.iter().map(|v| t.apply(v)).collect())?;
    Ok((out, t))
}

/// Points drawn on a mesh surface.
#[derive(Debug, Clone)]
pub struct PointSample {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub source_face: Vec<usize>,
}

impl PointSample {
    /// A bare point set without normals or face provenance.
    pub fn from_points(points: Vec<Vec3>) -> Self {
        let source_face = vec![0; points.len()];
        Self {
            points,
            normals: None,
            source_face,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the first `count` points.
    pub fn truncated(&self, count: usize) -> Self {
        let count = count.min(self.points.len());
        Self {
            points: self.points[..count].to_vec(),
            normals: self.normals.as_ref().map(|n| n[..count].to_vec()),
            source_face: self.source_face[..count].to_vec(),
        }
    }
}

/// Area-weighted uniform sampling; normals are the source face normals.
pub fn sample_surface(mesh: &TriMesh, count: usize, seed: u64) -> Result<PointSample, MeshError> {
    if count == 0 {
        return Err(MeshError::Empty("samples requested"));
    }
    let mut cdf = Vec::with_capacity(mesh.faces.len());
    let mut total = 0.0;
    for f in 0..mesh.faces.len() {
        total += mesh.face_area(f);
        cdf.push(total);
    }
    if !(total > 0.0) {
        return Err(MeshError::Degenerate("total surface area is zero".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let mut normals = Vec::with_capacity(count);
    let mut source_face = Vec::with_capacity(count);
    for _ in 0..count {
        let target = rng.gen::<f64>() * total;
        // First face whose cumulative area exceeds the draw; never a zero-area face.
        let f = cdf.partition_point(|&c| c <= target).min(cdf.len() - 1);
        let [a, b, c] = mesh.face_corners(f);
        let r1: f64 = rng.gen::<f64>().sqrt();
        let r2: f64 = rng.gen();
        points.push(a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2));
        normals.push(mesh.face_cross(f).normalize());
        source_face.push(f);
    }
    Ok(PointSample {
        points,
        normals: Some(normals),
        source_face,
    })
}

/// Arithmetic mean of the sampled points.
pub fn centroid(sample: &PointSample) -> Vec3 {
    sample.points.iter().sum::<Vec3>() / sample.points.len() as f64
}

#[derive(Debug, Clone)]
pub struct VertexNormals {
    pub normals: Vec<Vec3>,
    /// Vertices with no incident non-degenerate face; their normal is zero.
    pub isolated: Vec<usize>,
}

/// Area-weighted vertex normals.
pub fn vertex_normals(mesh: &TriMesh) -> VertexNormals {
    let mut acc = vec![Vec3::zeros(); mesh.vertices.len()];
    for (fi, f) in mesh.faces.iter().enumerate() {
        // |cross| = 2 * area, so summing raw cross products weights by area.
        let n = mesh.face_cross(fi);
        for &v in f {
            acc[v] += n;
        }
    }
    let mut isolated = Vec::new();
    let normals = acc
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let len = n.norm();
            if len > 1e-300 {
                n / len
            } else {
                isolated.push(i);
                Vec3::zeros()
            }
        })
        .collect();
    VertexNormals { normals, isolated }
}
