//! Procedural meshes used by the deformation generator, the synthetic
//! benchmark suite and tests. All closed shapes are wound counter-clockwise
//! seen from outside.

use std::collections::HashMap;

use super::{TriMesh, Vec3};

/// Subdivided icosahedron projected on a sphere; `10 * 4^k + 2` vertices.
pub fn icosphere(subdivisions: u32, radius: f64) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    for v in &mut verts {
        *v *= radius;
    }
    TriMesh::new(verts, faces).expect("icosphere is valid")
}

/// Torus around the z axis with `major` x `minor` quads split into triangles.
pub fn torus(major: usize, minor: usize, big_r: f64, small_r: f64) -> TriMesh {
    let mut verts = Vec::with_capacity(major * minor);
    for i in 0..major {
        let u = 2.0 * std::f64::consts::PI * i as f64 / major as f64;
        for j in 0..minor {
            let v = 2.0 * std::f64::consts::PI * j as f64 / minor as f64;
            let r = big_r + small_r * v.cos();
            verts.push(Vec3::new(r * u.cos(), r * u.sin(), small_r * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % major) * minor + (j % minor);
    let mut faces = Vec::with_capacity(2 * major * minor);
    for i in 0..major {
        for j in 0..minor {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(verts, faces).expect("torus is valid")
}

/// Axis-aligned cube with corners at `±half`, 8 vertices and 12 faces.
pub fn cube(half: f64) -> TriMesh {
    let verts = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -half } else { half },
                if i & 2 == 0 { -half } else { half },
                if i & 4 == 0 { -half } else { half },
            )
        })
        .collect();
    let faces = vec![
        [0, 2, 1],
        [1, 2, 3],
        [4, 5, 6],
        [5, 7, 6],
        [0, 1, 4],
        [1, 5, 4],
        [2, 6, 3],
        [3, 6, 7],
        [0, 4, 2],
        [2, 4, 6],
        [1, 3, 5],
        [3, 7, 5],
    ];
    TriMesh::new(verts, faces).expect("cube is valid")
}

/// Icosphere connectivity pushed radially onto the surface of the cube `[-1, 1]^3`.
pub fn cube_sphere(subdivisions: u32) -> TriMesh {
    let s = icosphere(subdivisions, 1.0);
    let verts = s.vertices().iter().map(|v| v / v.amax()).collect();
    s.with_vertices(verts).expect("same count")
}

/// Regular tetrahedron inscribed in the unit sphere.
pub fn tetrahedron() -> TriMesh {
    let k = 1.0 / 3f64.sqrt();
    TriMesh::new(
        vec![
            Vec3::new(k, k, k),
            Vec3::new(k, -k, -k),
            Vec3::new(-k, k, -k),
            Vec3::new(-k, -k, k),
        ],
        vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    )
    .expect("tetrahedron is valid")
}

/// Flat `nx` x `ny` vertex grid in the z = 0 plane.
pub fn grid(nx: usize, ny: usize, spacing: f64) -> TriMesh {
    let mut verts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            verts.push(Vec3::new(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let mut faces = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            faces.push([a, a + 1, a + nx + 1]);
            faces.push([a, a + nx + 1, a + nx]);
        }
    }
    TriMesh::new(verts, faces).expect("grid is valid")
}
