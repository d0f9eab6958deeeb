#![allow(dead_code)]

use meshcone_core::cones::{ConeBlock, ConeKind, ConeLayout};
use meshcone_core::solver::{ConicProblem, SolverResult, SolverSettings};
use meshcone_core::sparse::CscMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A strictly feasible SOCP with `P ≻ 0`: `b = A x₀ + s₀` with `s₀` in the
/// interior of the cone. Returns the problem and `x₀`.
pub fn random_socp(n: usize, seed: u64) -> (ConicProblem, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // P = MᵀM + 0.1 I with M sparse-ish
    let mut dense_p = vec![vec![0.0; n]; n];
    let rows_m = n / 2 + 1;
    let m_rows: Vec<Vec<(usize, f64)>> = (0..rows_m)
        .map(|_| {
            (0..3)
                .map(|_| (rng.gen_range(0..n), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    for row in &m_rows {
        for &(i, a) in row {
            for &(j, b) in row {
                dense_p[i][j] += a * b;
            }
        }
    }
    let mut pt = Vec::new();
    for (i, row) in dense_p.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if i < j && v != 0.0 {
                pt.push((i, j, v));
            }
        }
        pt.push((i, i, row[i] + 0.1));
    }
    let p = CscMatrix::from_triplets(n, n, &pt).unwrap();
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut blocks = vec![ConeBlock {
        kind: ConeKind::Nonnegative,
        dim: rng.gen_range(1..=n.max(2) / 2),
    }];
    for _ in 0..rng.gen_range(1..=4) {
        blocks.push(ConeBlock {
            kind: ConeKind::SecondOrder,
            dim: rng.gen_range(2..=5),
        });
    }
    let cones = ConeLayout::new(blocks).unwrap();
    let m = cones.dim();

    let mut at = Vec::new();
    for i in 0..m {
        for _ in 0..3 {
            at.push((i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
        }
    }
    let a = CscMatrix::from_triplets(m, n, &at).unwrap();

    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut s0 = Vec::with_capacity(m);
    for b in cones.blocks() {
        match b.kind {
            ConeKind::SecondOrder => {
                let u: Vec<f64> = (1..b.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
                s0.push(nu + rng.gen_range(0.2..1.0));
                s0.extend(u);
            }
            _ => s0.extend((0..b.dim).map(|_| rng.gen_range(0.2..1.0))),
        }
    }
    let ax0 = a.spmv(&x0).unwrap();
    let b: Vec<f64> = ax0.iter().zip(&s0).map(|(a, s)| a + s).collect();
    (ConicProblem::new(p, c, a, b, cones).unwrap(), x0)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn decay_settings() -> SolverSettings {
    SolverSettings {
        eps_abs: 1e-12,
        eps_rel: 1e-12,
        max_iters: 1000,
        diag_every: 1,
        ..Default::default()
    }
}

/// Residuals below this are at round-off level and no longer expected to
/// decay.
pub const DECAY_FLOOR: f64 = 1e-9;

/// Fraction of sampled `k ∈ [10, 500]` where the best-so-far combined
/// residual fails `r(2k) ≤ 0.75 r(k)`, together with the number of `k`
/// sampled.
pub fn decay_failures(result: &SolverResult) -> (f64, usize) {
    let mut best = Vec::with_capacity(result.diagnostics.len());
    let mut cur = f64::INFINITY;
    for row in &result.diagnostics {
        cur = cur.min(row.pri_res.max(row.dual_res));
        best.push((row.iter, cur));
    }
    let at = |k: usize| best.iter().take_while(|(i, _)| *i <= k).last().map(|r| r.1);
    let last = best.last().map_or(0, |r| r.0);
    let (mut fails, mut total) = (0usize, 0usize);
    for k in 10..=500 {
        if 2 * k > last {
            break;
        }
        let (Some(rk), Some(r2k)) = (at(k), at(2 * k)) else {
            continue;
        };
        if rk <= DECAY_FLOOR {
            break;
        }
        total += 1;
        if r2k > 0.75 * rk {
            fails += 1;
        }
    }
    if total == 0 {
        (0.0, 0)
    } else {
        (fails as f64 / total as f64, total)
    }
}
