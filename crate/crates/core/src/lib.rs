//! Geometry-guided mesh refinement by second-order cone programming.
//!
//! A deformed triangle mesh is pulled toward the sampled centroid of a target
//! surface, anchored to reference positions by a Tikhonov term, and kept
//! smooth by one second-order cone `|X_i - X_j| <= δ` per edge. The program
//! is solved with an ADMM splitting method on top of a sparse LDLᵀ
//! factorization; results are scored with point-cloud and mesh-quality
//! metrics.

pub mod assemble;
pub mod baselines;
pub mod bench;
pub mod cones;
pub mod mesh;
pub mod metrics;
pub mod solver;
pub mod sparse;
pub mod spatial;
