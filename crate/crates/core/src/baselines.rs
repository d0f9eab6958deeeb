//! Umbrella-Laplacian smoothing baseline and the generator of deformed
//! inputs (a sphere partially shrink-wrapped onto a target).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{normalize_unit_sphere, sample_surface, shapes, MeshError, TriMesh, Vec3};
use crate::spatial::KdIndex;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("vertex {0} has no neighbors")]
    IsolatedVertex(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

fn check_step(name: &str, step: f64) -> Result<(), BaselineError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(BaselineError::Config(format!("{name} must be in (0, 1], got {step}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothConfig {
    pub step: f64,
    pub iterations: usize,
}

impl Default for SmoothConfig {
    fn default() -> Self {
        Self {
            step: 0.5,
            iterations: 10,
        }
    }
}

impl SmoothConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        check_step("step", self.step)?;
        if self.iterations == 0 {
            return Err(BaselineError::Config("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

fn adjacency(mesh: &TriMesh) -> Result<Vec<Vec<usize>>, BaselineError> {
    let adj = mesh.neighbors();
    if let Some(i) = adj.iter().position(Vec::is_empty) {
        return Err(BaselineError::IsolatedVertex(i));
    }
    Ok(adj)
}

/// One Jacobi update `v_i += step * (mean(N(i)) - v_i)`.
fn smooth_once(vertices: &[Vec3], adj: &[Vec<usize>], step: f64) -> Vec<Vec3> {
    vertices
        .iter()
        .zip(adj)
        .map(|(v, nb)| {
            let mean = nb.iter().map(|&j| vertices[j]).sum::<Vec3>() / nb.len() as f64;
            v + step * (mean - v)
        })
        .collect()
}

pub fn laplacian_smooth(mesh: &TriMesh, config: &SmoothConfig) -> Result<TriMesh, BaselineError> {
    config.validate()?;
    let adj = adjacency(mesh)?;
    let mut v = mesh.vertices().to_vec();
    for _ in 0..config.iterations {
        v = smooth_once(&v, &adj, config.step);
    }
    Ok(mesh.with_vertices(v)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformConfig {
    pub subdivisions: u32,
    pub attract_step: f64,
    pub smooth_step: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for DeformConfig {
    fn default() -> Self {
        Self {
            subdivisions: 4,
            attract_step: 0.3,
            smooth_step: 0.2,
            iterations: 15,
            seed: 0,
        }
    }
}

impl DeformConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        check_step("attract_step", self.attract_step)?;
        check_step("smooth_step", self.smooth_step)?;
        if self.iterations == 0 {
            return Err(BaselineError::Config("iterations must be at least 1".into()));
        }
        if self.subdivisions > 7 {
            return Err(BaselineError::Config(format!(
                "subdivisions {} is too large",
                self.subdivisions
            )));
        }
        Ok(())
    }
}

/// Shrink-wraps a unit icosphere onto `target` for a fixed number of
/// attraction + smoothing rounds and returns it in the target's frame.
pub fn gen_deformed(target: &TriMesh, config: &DeformConfig) -> Result<TriMesh, BaselineError> {
    config.validate()?;
    let (tn, frame) = normalize_unit_sphere(target)?;
    let sphere = shapes::icosphere(config.subdivisions, 1.0);
    let samples = sample_surface(&tn, 10 * sphere.num_vertices(), config.seed)?;
    let index = KdIndex::build(&samples.points, 16).expect("sample is nonempty");
    let adj = adjacency(&sphere)?;

    let mut v = sphere.vertices().to_vec();
    for _ in 0..config.iterations {
        for p in v.iter_mut() {
            let (j, _) = index.nearest(p);
            *p += config.attract_step * (samples.points[j] - *p);
        }
        v = smooth_once(&v, &adj, config.smooth_step);
    }
    Ok(sphere.with_vertices(v.iter().map(|p| frame.invert(p)).collect())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{refine, RefineConfig};
    use crate::metrics::{chamfer, hausdorff};
    use proptest::prelude::*;

    #[test]
    fn tetrahedron_update_formula() {
        let m = shapes::tetrahedron();
        let tau = 0.3;
        let out = laplacian_smooth(
            &m,
            &SmoothConfig {
                step: tau,
                iterations: 1,
            },
        )
        .unwrap();
        let c = m.vertex_mean();
        for (a, v) in out.vertices().iter().zip(m.vertices()) {
            let expect = v * (1.0 - 4.0 * tau / 3.0) + c * (4.0 * tau / 3.0);
            assert!((a - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn tiny_step_barely_moves() {
        let m = shapes::torus(12, 16, 1.0, 0.3);
        let out = laplacian_smooth(
            &m,
            &SmoothConfig {
                step: 1e-9,
                iterations: 1,
            },
        )
        .unwrap();
        let d = out
            .vertices()
            .iter()
            .zip(m.vertices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-8);
    }

    #[test]
    fn balanced_vertex_is_fixed() {
        // interior grid vertices have neighbors symmetric about themselves
        let g = shapes::grid(5, 5, 0.25);
        let out = laplacian_smooth(
            &g,
            &SmoothConfig {
                step: 0.7,
                iterations: 1,
            },
        )
        .unwrap();
        let adj = g.neighbors();
        let mut checked = 0;
        for (i, nb) in adj.iter().enumerate() {
            let mean = nb.iter().map(|&j| g.vertices()[j]).sum::<Vec3>() / nb.len() as f64;
            if (mean - g.vertices()[i]).norm() < 1e-15 {
                assert_eq!(out.vertices()[i], g.vertices()[i]);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn invalid_inputs() {
        let m = shapes::tetrahedron();
        for cfg in [
            SmoothConfig {
                step: 0.0,
                iterations: 1,
            },
            SmoothConfig {
                step: 1.5,
                iterations: 1,
            },
            SmoothConfig {
                step: 0.5,
                iterations: 0,
            },
        ] {
            assert!(matches!(laplacian_smooth(&m, &cfg), Err(BaselineError::Config(_))));
        }
        let mut v = m.vertices().to_vec();
        v.push(Vec3::new(5.0, 5.0, 5.0));
        let lonely = TriMesh::new(v, m.faces().to_vec()).unwrap();
        assert!(matches!(
            laplacian_smooth(&lonely, &SmoothConfig::default()),
            Err(BaselineError::IsolatedVertex(4))
        ));
        let bad = DeformConfig {
            iterations: 0,
            ..Default::default()
        };
        assert!(matches!(gen_deformed(&m, &bad), Err(BaselineError::Config(_))));
    }

    #[test]
    fn smoothing_shrinks_area_every_iteration() {
        for m in [shapes::icosphere(3, 1.0), shapes::torus(24, 32, 1.0, 0.35)] {
            let mut cur = m;
            let mut area = cur.surface_area();
            for _ in 0..10 {
                cur = laplacian_smooth(
                    &cur,
                    &SmoothConfig {
                        step: 0.5,
                        iterations: 1,
                    },
                )
                .unwrap();
                let a = cur.surface_area();
                assert!(a < area);
                area = a;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn translation_equivariant(t in prop::array::uniform3(-10.0f64..10.0), step in 0.01f64..1.0, iters in 1usize..5) {
            let m = shapes::torus(8, 10, 1.0, 0.4);
            let t = Vec3::from(t);
            let cfg = SmoothConfig { step, iterations: iters };
            let a = laplacian_smooth(&m.translated(t), &cfg).unwrap();
            let b = laplacian_smooth(&m, &cfg).unwrap().translated(t);
            for (p, q) in a.vertices().iter().zip(b.vertices()) {
                prop_assert!((p - q).amax() < 1e-12);
            }
            prop_assert_eq!(a.faces(), m.faces());
        }
    }

    #[test]
    fn deformed_has_sphere_connectivity_and_is_deterministic() {
        let target = shapes::cube(1.0);
        let cfg = DeformConfig {
            subdivisions: 3,
            seed: 4,
            ..Default::default()
        };
        let a = gen_deformed(&target, &cfg).unwrap();
        let b = gen_deformed(&target, &cfg).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.faces(), shapes::icosphere(3, 1.0).faces());
    }

    #[test]
    fn sphere_target_is_reproduced() {
        let target = shapes::icosphere(4, 1.0);
        let cfg = DeformConfig {
            iterations: 200,
            ..Default::default()
        };
        let out = gen_deformed(&target, &cfg).unwrap();
        let a = sample_surface(&normalize_unit_sphere(&out).unwrap().0, 4000, 1).unwrap();
        let b = sample_surface(&target, 4000, 2).unwrap();
        assert!(chamfer(&a, &b).unwrap() < 0.01);
    }

    #[test]
    fn refinement_beats_deformed_on_cube() {
        let target = shapes::cube_sphere(4);
        let deformed = gen_deformed(&target, &DeformConfig::default()).unwrap();
        let out = refine(&deformed, &target, &RefineConfig::default()).unwrap();
        let gt = sample_surface(&normalize_unit_sphere(&target).unwrap().0, 4000, 1).unwrap();
        let hd = |m: &TriMesh| {
            let s = sample_surface(&normalize_unit_sphere(m).unwrap().0, 4000, 2).unwrap();
            hausdorff(&s, &gt).unwrap()
        };
        assert!(hd(&deformed) > hd(&out.refined));
    }
}
