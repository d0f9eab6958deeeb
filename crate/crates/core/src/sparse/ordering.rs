//! Minimum-degree fill-reducing ordering on an explicit elimination graph.

use std::collections::BTreeSet;

use super::CscMatrix;

/// Sorted union of `a` and `b` with `skip_a`/`skip_b` removed.
fn merge_without(a: &[usize], b: &[usize], skip_a: usize, skip_b: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if next != skip_a && next != skip_b {
            out.push(next);
        }
    }
    out
}

/// Greedy minimum-degree order of a square matrix's symmetrized pattern.
/// Returns `perm` with `perm[k]` the original index eliminated at step `k`;
/// equal degrees are broken by the lowest index.
pub fn minimum_degree(m: &CscMatrix) -> Vec<usize> {
    let n = m.cols();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        for (i, _) in m.column(j) {
            if i != j && i < n {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }

    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (adj[i].len(), i)).collect();
    let mut perm = Vec::with_capacity(n);
    while let Some((_, p)) = queue.pop_first() {
        perm.push(p);
        let clique = std::mem::take(&mut adj[p]);
        for &a in &clique {
            queue.remove(&(adj[a].len(), a));
            adj[a] = merge_without(&adj[a], &clique, p, a);
            queue.insert((adj[a].len(), a));
        }
    }
    perm
}
