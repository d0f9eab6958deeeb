//! Up-looking sparse LDLᵀ with static pivoting, driven by the elimination tree.

use super::{minimum_degree, CscMatrix, SparseError};

const ZERO_PIVOT: f64 = 1e-13;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ordering {
    Natural,
    MinimumDegree,
}

/// `P M Pᵀ = L D Lᵀ` with `L` unit lower triangular (diagonal implicit).
#[derive(Debug, Clone)]
pub struct LdlFactorization {
    /// `perm[k]` is the original index placed at position `k`.
    perm: Vec<usize>,
    l: CscMatrix,
    d: Vec<f64>,
}

pub fn ldl_factor(m: &CscMatrix, ordering: Ordering) -> Result<LdlFactorization, SparseError> {
    if m.rows() != m.cols() {
        return Err(SparseError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let perm = match ordering {
        Ordering::Natural => (0..m.cols()).collect(),
        Ordering::MinimumDegree => minimum_degree(m),
    };
    ldl_factor_with_perm(m, perm)
}

/// Factors with a caller-provided ordering. Only the upper triangle of `m`
/// (row <= col) is read.
pub fn ldl_factor_with_perm(m: &CscMatrix, perm: Vec<usize>) -> Result<LdlFactorization, SparseError> {
    let n = m.cols();
    if m.rows() != n {
        return Err(SparseError::NotSquare {
            rows: m.rows(),
            cols: n,
        });
    }
    if perm.len() != n {
        return Err(SparseError::Permutation);
    }
    let mut iperm = vec![NONE; n];
    for (k, &p) in perm.iter().enumerate() {
        if p >= n || iperm[p] != NONE {
            return Err(SparseError::Permutation);
        }
        iperm[p] = k;
    }

    // upper triangle of P M Pᵀ
    let t: Vec<(usize, usize, f64)> = m
        .triplets()
        .into_iter()
        .filter(|&(i, j, _)| i <= j)
        .map(|(i, j, v)| {
            let (a, b) = (iperm[i], iperm[j]);
            (a.min(b), a.max(b), v)
        })
        .collect();
    let c = CscMatrix::from_triplets(n, n, &t)?;
    let (ap, ai, ax) = (c.col_ptr(), c.row_idx(), c.values());

    // elimination tree and column counts of L
    let mut etree = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    let mut work = vec![NONE; n];
    for j in 0..n {
        work[j] = j;
        for &row in &ai[ap[j]..ap[j + 1]] {
            let mut i = row;
            while i < j && work[i] != j {
                if etree[i] == NONE {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }

    let mut lp = vec![0usize; n + 1];
    for i in 0..n {
        lp[i + 1] = lp[i] + lnz[i];
    }
    let total = lp[n];
    let mut li = vec![0usize; total];
    let mut lx = vec![0.0; total];
    let mut d = vec![0.0; n];
    let mut dinv = vec![0.0; n];
    let mut next_space: Vec<usize> = lp[..n].to_vec();
    let mut y_vals = vec![0.0; n];
    let mut y_mark = vec![false; n];
    let mut y_idx: Vec<usize> = Vec::with_capacity(n);
    let mut elim: Vec<usize> = Vec::with_capacity(n);

    for k in 0..n {
        y_idx.clear();
        d[k] = 0.0;
        // scatter column k of the upper triangle and find the reach in the etree
        for p in ap[k]..ap[k + 1] {
            let b = ai[p];
            if b == k {
                d[k] = ax[p];
                continue;
            }
            y_vals[b] = ax[p];
            if !y_mark[b] {
                elim.clear();
                y_mark[b] = true;
                elim.push(b);
                let mut next = etree[b];
                while next != NONE && next < k && !y_mark[next] {
                    y_mark[next] = true;
                    elim.push(next);
                    next = etree[next];
                }
                y_idx.extend(elim.iter().rev());
            }
        }
        for &col in y_idx.iter().rev() {
            let slot = next_space[col];
            let yc = y_vals[col];
            for q in lp[col]..slot {
                y_vals[li[q]] -= lx[q] * yc;
            }
            li[slot] = k;
            lx[slot] = yc * dinv[col];
            d[k] -= yc * lx[slot];
            next_space[col] += 1;
            y_vals[col] = 0.0;
            y_mark[col] = false;
        }
        if !(d[k].abs() >= ZERO_PIVOT) {
            return Err(SparseError::Singular {
                index: perm[k],
                value: d[k],
            });
        }
        dinv[k] = 1.0 / d[k];
    }

    let l = CscMatrix {
        rows: n,
        cols: n,
        col_ptr: lp,
        row_idx: li,
        values: lx,
    };
    Ok(LdlFactorization { perm, l, d })
}

impl LdlFactorization {
    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// Strictly lower part of `L`.
    pub fn l(&self) -> &CscMatrix {
        &self.l
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Off-diagonal nonzeros of `L`.
    pub fn nnz_l(&self) -> usize {
        self.l.nnz()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SparseError> {
        if rhs.len() != self.dim() {
            return Err(SparseError::Dimension {
                expected: self.dim(),
                got: rhs.len(),
            });
        }
        let mut out = rhs.to_vec();
        let mut work = vec![0.0; self.dim()];
        self.solve_in_place(&mut out, &mut work);
        Ok(out)
    }

    /// Overwrites `x` with `M⁻¹ x`; `work` must have the factor's dimension.
    pub(crate) fn solve_in_place(&self, x: &mut [f64], work: &mut [f64]) {
        let n = self.dim();
        let (lp, li, lx) = (&self.l.col_ptr, &self.l.row_idx, &self.l.values);
        for k in 0..n {
            work[k] = x[self.perm[k]];
        }
        for i in 0..n {
            let wi = work[i];
            if wi != 0.0 {
                for p in lp[i]..lp[i + 1] {
                    work[li[p]] -= lx[p] * wi;
                }
            }
        }
        for i in 0..n {
            work[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut s = work[i];
            for p in lp[i]..lp[i + 1] {
                s -= lx[p] * work[li[p]];
            }
            work[i] = s;
        }
        for k in 0..n {
            x[self.perm[k]] = work[k];
        }
    }

    /// Dense `L D Lᵀ` in permuted coordinates (small sizes only).
    pub fn reconstruct_permuted(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut l = vec![vec![0.0; n]; n];
        for (i, row) in l.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        for (i, j, v) in self.l.triplets() {
            l[i][j] = v;
        }
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                out[i][j] = (0..n).map(|k| l[i][k] * self.d[k] * l[j][k]).sum();
            }
        }
        out
    }
}
