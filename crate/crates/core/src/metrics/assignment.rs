//! Dense linear assignment in the Jonker–Volgenant style: column reduction
//! with reduction transfer, then one shortest augmenting path per free row.
//! Costs are requested through a closure so an `n × n` matrix is never
//! stored.
//!
//! The augmenting row reduction phase of the original method is left out: on
//! real-valued costs it can cycle through tiny price decrements for millions
//! of steps.

const NONE: usize = usize::MAX;

/// Minimum-cost perfect matching; returns `row -> col` and the total cost.
pub fn solve_assignment<F: Fn(usize, usize) -> f64>(n: usize, cost: F) -> (Vec<usize>, f64) {
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut x = vec![NONE; n];
    let mut y = vec![NONE; n];
    let mut v = vec![0.0; n];

    let free = column_reduction(n, &cost, &mut x, &mut y, &mut v);
    if !free.is_empty() {
        augment(n, &cost, &free, &mut x, &mut y, &mut v);
    }
    let total = x.iter().enumerate().map(|(i, &j)| cost(i, j)).sum();
    (x, total)
}

fn column_reduction<F: Fn(usize, usize) -> f64>(
    n: usize,
    cost: &F,
    x: &mut [usize],
    y: &mut [usize],
    v: &mut [f64],
) -> Vec<usize> {
    v.fill(f64::INFINITY);
    for i in 0..n {
        for j in 0..n {
            let c = cost(i, j);
            if c < v[j] {
                v[j] = c;
                y[j] = i;
            }
        }
    }
    let mut unique = vec![true; n];
    for j in (0..n).rev() {
        let i = y[j];
        if x[i] == NONE {
            x[i] = j;
        } else {
            unique[i] = false;
            y[j] = NONE;
        }
    }
    let mut free = Vec::new();
    for i in 0..n {
        if x[i] == NONE {
            free.push(i);
        } else if unique[i] {
            // reduction transfer
            let j = x[i];
            let mut min = f64::INFINITY;
            for j2 in 0..n {
                if j2 != j {
                    min = min.min(cost(i, j2) - v[j2]);
                }
            }
            if min.is_finite() {
                v[j] -= min;
            }
        }
    }
    free
}

fn augment<F: Fn(usize, usize) -> f64>(
    n: usize,
    cost: &F,
    free: &[usize],
    x: &mut [usize],
    y: &mut [usize],
    v: &mut [f64],
) {
    let mut pred = vec![0; n];
    let mut cols: Vec<usize> = (0..n).collect();
    let mut d = vec![0.0; n];
    for &free_i in free {
        let mut j = shortest_path(n, cost, free_i, y, v, &mut pred, &mut cols, &mut d);
        loop {
            let i = pred[j];
            y[j] = i;
            std::mem::swap(&mut j, &mut x[i]);
            if i == free_i {
                break;
            }
        }
    }
}

/// Dijkstra over reduced costs from `start`; returns the first free column
/// reached and updates the column potentials of the settled set.
#[allow(clippy::too_many_arguments)]
fn shortest_path<F: Fn(usize, usize) -> f64>(
    n: usize,
    cost: &F,
    start: usize,
    y: &[usize],
    v: &mut [f64],
    pred: &mut [usize],
    cols: &mut [usize],
    d: &mut [f64],
) -> usize {
    // cols[..lo] are settled, cols[lo..hi] are at the current minimum
    let (mut lo, mut hi) = (0, 0);
    let mut n_ready = 0;
    for (k, c) in cols.iter_mut().enumerate() {
        *c = k;
    }
    for j in 0..n {
        d[j] = cost(start, j) - v[j];
        pred[j] = start;
    }
    let mut final_j = NONE;
    let mut mind = 0.0;
    while final_j == NONE {
        if lo == hi {
            n_ready = lo;
            hi = collect_minimum(n, lo, d, cols);
            mind = d[cols[lo]];
            for &j in &cols[lo..hi] {
                if y[j] == NONE {
                    final_j = j;
                    break;
                }
            }
        }
        if final_j == NONE {
            final_j = scan(n, cost, &mut lo, &mut hi, d, cols, pred, y, v);
        }
    }
    // every column settled so far lies at distance <= mind
    for &j in &cols[..n_ready] {
        v[j] += d[j] - mind;
    }
    final_j
}

fn collect_minimum(n: usize, lo: usize, d: &[f64], cols: &mut [usize]) -> usize {
    let mut hi = lo + 1;
    let mut mind = d[cols[lo]];
    for k in hi..n {
        let j = cols[k];
        if d[j] <= mind {
            if d[j] < mind {
                hi = lo;
                mind = d[j];
            }
            cols[k] = cols[hi];
            cols[hi] = j;
            hi += 1;
        }
    }
    hi
}

#[allow(clippy::too_many_arguments)]
fn scan<F: Fn(usize, usize) -> f64>(
    n: usize,
    cost: &F,
    lo: &mut usize,
    hi: &mut usize,
    d: &mut [f64],
    cols: &mut [usize],
    pred: &mut [usize],
    y: &[usize],
    v: &[f64],
) -> usize {
    while *lo != *hi {
        let j = cols[*lo];
        *lo += 1;
        let i = y[j];
        let mind = d[j];
        let h = cost(i, j) - v[j] - mind;
        for k in *hi..n {
            let j = cols[k];
            let reduced = cost(i, j) - v[j] - h;
            if reduced < d[j] {
                d[j] = reduced;
                pred[j] = i;
                if reduced == mind {
                    if y[j] == NONE {
                        return j;
                    }
                    cols[k] = cols[*hi];
                    cols[*hi] = j;
                    *hi += 1;
                }
            }
        }
    }
    NONE
}
