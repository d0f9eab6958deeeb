//! Discrete mean curvature from the cotangent Laplacian with mixed Voronoi areas.

use super::{TriMesh, Vec3};

const COT_CLAMP: f64 = 1e4;

#[derive(Debug, Clone)]
pub struct Curvature {
    /// Mean curvature magnitude per vertex.
    pub values: Vec<f64>,
    /// Vertices on an open boundary (or without area); their value is 0.
    pub boundary: Vec<usize>,
}

fn cot(a: &Vec3, b: &Vec3) -> f64 {
    let cross = a.cross(b).norm();
    let c = if cross > 0.0 {
        a.dot(b) / cross
    } else if a.dot(b) >= 0.0 {
        COT_CLAMP
    } else {
        -COT_CLAMP
    };
    c.clamp(-COT_CLAMP, COT_CLAMP)
}

/// `H_i = |sum_j (cot a_ij + cot b_ij)(v_j - v_i)| / (4 A_mixed(i))`.
pub fn mean_curvature(mesh: &TriMesh) -> Curvature {
    let n = mesh.num_vertices();
    let verts = mesh.vertices();
    let mut lap = vec![Vec3::zeros(); n];
    let mut area = vec![0.0; n];

    for f in mesh.faces() {
        let p = [verts[f[0]], verts[f[1]], verts[f[2]]];
        let face_area = 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm();
        // cotangent of the angle at each corner
        let mut cots = [0.0; 3];
        let mut obtuse = None;
        for k in 0..3 {
            let (a, b) = (p[(k + 1) % 3] - p[k], p[(k + 2) % 3] - p[k]);
            cots[k] = cot(&a, &b);
            if a.dot(&b) < 0.0 {
                obtuse = Some(k);
            }
        }
        for k in 0..3 {
            // the edge opposite corner k joins the other two corners
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let d = p[j] - p[i];
            lap[f[i]] += d * cots[k];
            lap[f[j]] -= d * cots[k];
        }
        for k in 0..3 {
            let a_k = match obtuse {
                None => {
                    // Voronoi region of corner k inside the triangle
                    let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                    let e_kj = (p[j] - p[k]).norm_squared();
                    let e_ki = (p[i] - p[k]).norm_squared();
                    (e_kj * cots[i] + e_ki * cots[j]) / 8.0
                }
                Some(o) if o == k => face_area / 2.0,
                Some(_) => face_area / 4.0,
            };
            area[f[k]] += a_k;
        }
    }

    let mut on_boundary = vec![false; n];
    for (&(i, j), &c) in mesh.edges().iter().zip(&mesh.edge_face_counts()) {
        if c != 2 {
            on_boundary[i] = true;
            on_boundary[j] = true;
        }
    }
    let mut boundary = Vec::new();
    let values = (0..n)
        .map(|i| {
            if on_boundary[i] || !(area[i] > 0.0) {
                boundary.push(i);
                0.0
            } else {
                lap[i].norm() / (4.0 * area[i])
            }
        })
        .collect();
    Curvature { values, boundary }
}
