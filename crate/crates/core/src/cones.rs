//! Cone layouts and Euclidean projections onto products of zero, nonnegative
//! and second-order cones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("vector has length {got}, cone dimension is {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("second-order block needs dimension >= 2, got {0}")]
    SocTooSmall(usize),
    #[error("cone blocks must have positive dimension")]
    EmptyBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    /// `{0}`.
    Zero,
    /// All of `R^d`; only appears as the dual of a zero block.
    Free,
    Nonnegative,
    /// `{(t, u) : |u| <= t}` with `t` stored first.
    SecondOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeBlock {
    pub kind: ConeKind,
    pub dim: usize,
}

/// Ordered product of cone blocks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeLayout {
    blocks: Vec<ConeBlock>,
    dim: usize,
}

impl ConeLayout {
    pub fn new(blocks: Vec<ConeBlock>) -> Result<Self, ConeError> {
        for b in &blocks {
            if b.dim == 0 {
                return Err(ConeError::EmptyBlock);
            }
            if b.kind == ConeKind::SecondOrder && b.dim < 2 {
                return Err(ConeError::SocTooSmall(b.dim));
            }
        }
        let dim = blocks.iter().map(|b| b.dim).sum();
        Ok(Self { blocks, dim })
    }

    /// `count` second-order blocks of dimension `dim` each.
    pub fn repeated_soc(count: usize, dim: usize) -> Result<Self, ConeError> {
        Self::new(vec![
            ConeBlock {
                kind: ConeKind::SecondOrder,
                dim
            };
            count
        ])
    }

    pub fn blocks(&self) -> &[ConeBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, len: usize) -> Result<(), ConeError> {
        if len != self.dim {
            return Err(ConeError::Dimension {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>, ConeError> {
        self.check(v.len())?;
        let mut out = v.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    pub(crate) fn project_in_place(&self, v: &mut [f64]) {
        let mut start = 0;
        for b in &self.blocks {
            let seg = &mut v[start..start + b.dim];
            match b.kind {
                ConeKind::Zero => seg.fill(0.0),
                ConeKind::Free => {}
                ConeKind::Nonnegative => seg.iter_mut().for_each(|x| *x = x.max(0.0)),
                ConeKind::SecondOrder => project_soc(seg),
            }
            start += b.dim;
        }
    }

    /// Projection onto the polar cone `K° = -K*`.
    pub fn project_polar(&self, v: &[f64]) -> Result<Vec<f64>, ConeError> {
        // Moreau: v = Π_K(v) + Π_K°(v)
        let p = self.project(v)?;
        Ok(v.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    /// Dual cone: zero and free swap, the rest is self-dual.
    pub fn dual(&self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| ConeBlock {
                kind: match b.kind {
                    ConeKind::Zero => ConeKind::Free,
                    ConeKind::Free => ConeKind::Zero,
                    k => k,
                },
                dim: b.dim,
            })
            .collect();
        Self { blocks, dim: self.dim }
    }

    /// Largest violation of blockwise cone membership (0 when inside).
    pub fn violation(&self, v: &[f64]) -> Result<f64, ConeError> {
        self.check(v.len())?;
        let mut worst: f64 = 0.0;
        let mut start = 0;
        for b in &self.blocks {
            let seg = &v[start..start + b.dim];
            let viol = match b.kind {
                ConeKind::Zero => seg.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                ConeKind::Free => 0.0,
                ConeKind::Nonnegative => seg.iter().fold(0.0f64, |m, &x| m.max(-x)),
                ConeKind::SecondOrder => {
                    let nu = seg[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
                    (nu - seg[0]).max(0.0)
                }
            };
            worst = worst.max(viol);
            start += b.dim;
        }
        Ok(worst)
    }
}

/// In-place projection of `(t, u)` onto the second-order cone.
pub fn project_soc(seg: &mut [f64]) {
    let t = seg[0];
    let nu = seg[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if nu <= t {
        return;
    }
    if nu <= -t {
        seg.fill(0.0);
        return;
    }
    let a = 0.5 * (nu + t);
    seg[0] = a;
    let s = a / nu;
    seg[1..].iter_mut().for_each(|x| *x *= s);
}
