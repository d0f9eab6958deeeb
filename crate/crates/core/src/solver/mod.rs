//! ADMM splitting solver for conic quadratic programs
//!
//! ```text
//! minimize   ½ xᵀPx + cᵀx
//! subject to Ax + s = b,  s ∈ K
//! ```
//!
//! The iteration splits `x` from `z = b − Ax ∈ K`. The x-update solves one
//! fixed SPD system `(P + ρₓI + ρAᵀA)`, factored once (and again only when
//! the penalty ρ is adapted). The returned dual `y` lives in `K*` and satisfies
//! `Px + c + Aᵀy = 0` at optimality.

mod diagnostics;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cones::{ConeError, ConeLayout};
use crate::sparse::{ldl_factor, ldl_factor_with_perm, CscMatrix, LdlFactorization, Ordering, SparseError};

pub use diagnostics::{write_diagnostics, write_diagnostics_to, DiagnosticsError};

/// Iterations between adaptive-penalty checks.
const ADAPT_INTERVAL: usize = 10;
const MAX_RESCALES: usize = 10;
const ADAPT_RATIO: f64 = 10.0;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("problem dimensions are inconsistent: {0}")]
    Dimension(String),
    #[error("P is not symmetric")]
    Asymmetric,
    #[error("invalid settings: {0}")]
    Settings(String),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("factorization failed: {0}")]
    Factor(#[from] SparseError),
}

/// Problem data. `P` is kept as its upper triangle.
#[derive(Debug, Clone)]
pub struct ConicProblem {
    p: CscMatrix,
    c: Vec<f64>,
    a: CscMatrix,
    b: Vec<f64>,
    cones: ConeLayout,
}

impl ConicProblem {
    /// `p` may be given as a full symmetric matrix or as its upper triangle.
    pub fn new(p: CscMatrix, c: Vec<f64>, a: CscMatrix, b: Vec<f64>, cones: ConeLayout) -> Result<Self, SolverError> {
        let n = c.len();
        if p.rows() != n || p.cols() != n {
            return Err(SolverError::Dimension(format!(
                "P is {}x{}, c has length {n}",
                p.rows(),
                p.cols()
            )));
        }
        if a.cols() != n {
            return Err(SolverError::Dimension(format!(
                "A has {} columns, expected {n}",
                a.cols()
            )));
        }
        if a.rows() != b.len() {
            return Err(SolverError::Dimension(format!(
                "A has {} rows, b has length {}",
                a.rows(),
                b.len()
            )));
        }
        if cones.dim() != b.len() {
            return Err(SolverError::Dimension(format!(
                "cones cover {} rows, b has length {}",
                cones.dim(),
                b.len()
            )));
        }
        let has_lower = p.triplets().iter().any(|&(i, j, _)| i > j);
        let p = if has_lower {
            if p.max_asymmetry() > 1e-12 {
                return Err(SolverError::Asymmetric);
            }
            p.upper_triangle()
        } else {
            p
        };
        Ok(Self { p, c, a, b, cones })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn p_upper(&self) -> &CscMatrix {
        &self.p
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &CscMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn cones(&self) -> &ConeLayout {
        &self.cones
    }

    /// Same constraints with `P` and `c` multiplied by `k`.
    pub fn with_scaled_objective(&self, k: f64) -> Self {
        Self {
            p: self.p.scaled(k),
            c: self.c.iter().map(|v| v * k).collect(),
            ..self.clone()
        }
    }

    /// Same problem with `b` replaced.
    pub fn with_b(&self, b: Vec<f64>) -> Result<Self, SolverError> {
        if b.len() != self.m() {
            return Err(SolverError::Dimension("b length changed".into()));
        }
        Ok(Self { b, ..self.clone() })
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut px = vec![0.0; self.n()];
        self.p.sym_upper_spmv_acc(x, &mut px);
        0.5 * dot(x, &px) + dot(&self.c, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iters: usize,
    /// Over-relaxation in (0, 2).
    pub alpha: f64,
    /// ADMM penalty.
    pub rho: f64,
    /// Proximal regularization on x.
    pub rho_x: f64,
    pub warm_start: bool,
    pub adaptive_rho: bool,
    pub diag_every: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            eps_abs: 1e-5,
            eps_rel: 1e-5,
            max_iters: 1000,
            alpha: 1.5,
            rho: 0.1,
            rho_x: 1e-6,
            warm_start: true,
            adaptive_rho: true,
            diag_every: 25,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: &str| Err(SolverError::Settings(msg.into()));
        if !(self.eps_abs > 0.0) || !(self.eps_rel > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return bad("alpha must lie in (0, 2)");
        }
        if !(self.rho > 0.0) || !(self.rho_x > 0.0) {
            return bad("rho and rho_x must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if self.diag_every == 0 {
            return bad("diag_every must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    MaxIters,
    NumericalError,
}

/// One recorded iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagRow {
    pub iter: usize,
    pub pri_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub obj: f64,
    /// Penalty ρ in effect.
    pub scale: f64,
    /// Seconds since the solve started.
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct SolverResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub status: Status,
    pub iterations: usize,
    pub objective: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub solve_time: f64,
    pub diagnostics: Vec<DiagRow>,
    /// Numeric factorizations of the x-update system performed.
    pub factorizations: usize,
    pub rho: f64,
}

/// Primal/dual iterate used to start a solve.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}

impl From<&SolverResult> for WarmStart {
    fn from(r: &SolverResult) -> Self {
        Self {
            x: r.x.clone(),
            y: r.y.clone(),
            s: r.s.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖Ax + s − b‖`, `‖Px + c + Aᵀy‖` and `|p_obj − d_obj|` with
/// `d_obj = −bᵀy − ½xᵀPx`, recomputed from scratch.
pub fn residuals(problem: &ConicProblem, x: &[f64], y: &[f64], s: &[f64]) -> Result<Residuals, SolverError> {
    let (n, m) = (problem.n(), problem.m());
    if x.len() != n || y.len() != m || s.len() != m {
        return Err(SolverError::Dimension("iterate lengths".into()));
    }
    Ok(Evaluation::new(problem, x, y, s).residuals())
}

struct Evaluation {
    primal_res: f64,
    dual_res: f64,
    p_obj: f64,
    d_obj: f64,
    norm_ax: f64,
}

impl Evaluation {
    fn new(problem: &ConicProblem, x: &[f64], y: &[f64], s: &[f64]) -> Self {
        let (n, m) = (problem.n(), problem.m());
        let mut ax = vec![0.0; m];
        problem.a.spmv_acc(x, 1.0, &mut ax);
        let norm_ax = norm(&ax);
        let pri: f64 = (0..m)
            .map(|i| (ax[i] + s[i] - problem.b[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        let mut px = vec![0.0; n];
        problem.p.sym_upper_spmv_acc(x, &mut px);
        let xpx = dot(x, &px);
        let mut r = px;
        for (ri, ci) in r.iter_mut().zip(&problem.c) {
            *ri += ci;
        }
        problem.a.transpose_spmv_acc(y, 1.0, &mut r);
        Self {
            primal_res: pri,
            dual_res: norm(&r),
            p_obj: 0.5 * xpx + dot(&problem.c, x),
            d_obj: -dot(&problem.b, y) - 0.5 * xpx,
            norm_ax,
        }
    }

    fn residuals(&self) -> Residuals {
        Residuals {
            primal_res: self.primal_res,
            dual_res: self.dual_res,
            gap: (self.p_obj - self.d_obj).abs(),
        }
    }
}

/// Termination thresholds for a given iterate.
struct Tolerances {
    primal: f64,
    dual: f64,
    gap: f64,
}

impl Tolerances {
    fn new(problem: &ConicProblem, settings: &SolverSettings, eval: &Evaluation, s: &[f64]) -> Self {
        let (n, m) = (problem.n() as f64, problem.m() as f64);
        let scale_p = eval.norm_ax.max(norm(s)).max(norm(&problem.b));
        Self {
            primal: settings.eps_abs * m.sqrt() + settings.eps_rel * scale_p,
            dual: settings.eps_abs * n.sqrt() + settings.eps_rel * norm(&problem.c),
            gap: settings.eps_abs + settings.eps_rel * eval.p_obj.abs().max(eval.d_obj.abs()),
        }
    }

    fn met(&self, r: &Residuals) -> bool {
        r.primal_res <= self.primal && r.dual_res <= self.dual && r.gap <= self.gap
    }
}

/// Whether `(x, y, s)` passes the termination test of `settings`.
pub fn satisfies_tolerances(
    problem: &ConicProblem,
    settings: &SolverSettings,
    x: &[f64],
    y: &[f64],
    s: &[f64],
) -> Result<bool, SolverError> {
    let r = residuals(problem, x, y, s)?;
    let eval = Evaluation::new(problem, x, y, s);
    Ok(Tolerances::new(problem, settings, &eval, s).met(&r))
}

/// x-update system `P + ρₓI + ρAᵀA`, split so ρ can change cheaply.
struct KktSystem {
    base: Vec<(usize, usize, f64)>,
    gram: Vec<(usize, usize, f64)>,
    n: usize,
    perm: Option<Vec<usize>>,
    factor: Option<LdlFactorization>,
    count: usize,
}

impl KktSystem {
    fn new(problem: &ConicProblem, rho_x: f64) -> Self {
        let n = problem.n();
        let mut base = problem.p.triplets();
        base.extend((0..n).map(|i| (i, i, rho_x)));
        // AᵀA, upper triangle, accumulated row by row
        let at = problem.a.transpose();
        let mut gram = Vec::new();
        for row in 0..problem.m() {
            let entries: Vec<(usize, f64)> = at.column(row).collect();
            for (p, &(j, vj)) in entries.iter().enumerate() {
                for &(k, vk) in &entries[p..] {
                    gram.push((j.min(k), j.max(k), vj * vk));
                }
            }
        }
        Self {
            base,
            gram,
            n,
            perm: None,
            factor: None,
            count: 0,
        }
    }

    fn refactor(&mut self, rho: f64) -> Result<(), SparseError> {
        let mut t = self.base.clone();
        t.extend(self.gram.iter().map(|&(i, j, v)| (i, j, rho * v)));
        let k = CscMatrix::from_triplets(self.n, self.n, &t)?;
        let f = match &self.perm {
            Some(p) => ldl_factor_with_perm(&k, p.clone())?,
            None => ldl_factor(&k, Ordering::MinimumDegree)?,
        };
        self.perm = Some(f.perm().to_vec());
        self.factor = Some(f);
        self.count += 1;
        Ok(())
    }
}

/// Runs ADMM from `warm` (used only when `settings.warm_start`) or from zero.
pub fn solve(
    problem: &ConicProblem,
    settings: &SolverSettings,
    warm: Option<&WarmStart>,
) -> Result<SolverResult, SolverError> {
    settings.validate()?;
    let start = Instant::now();
    let (n, m) = (problem.n(), problem.m());

    let mut x = vec![0.0; n];
    let mut z = vec![0.0; m];
    // internal multiplier; the reported dual is its negation
    let mut lam = vec![0.0; m];
    if let (true, Some(w)) = (settings.warm_start, warm) {
        if w.x.len() != n || w.y.len() != m || w.s.len() != m {
            return Err(SolverError::Dimension("warm start lengths".into()));
        }
        x.clone_from(&w.x);
        z = problem.cones.project(&w.s)?;
        lam = w.y.iter().map(|v| -v).collect();
    }

    let mut rho = settings.rho;
    let mut kkt = KktSystem::new(problem, settings.rho_x);
    kkt.refactor(rho)?;
    let mut rescales = 0;

    let mut rhs = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut tmp_m = vec![0.0; m];
    let mut ax = vec![0.0; m];
    let mut h = vec![0.0; m];
    let mut y_out = vec![0.0; m];
    let mut diagnostics = Vec::new();
    let mut status = Status::MaxIters;
    let mut iterations = 0;
    let mut last_eval: Option<Residuals> = None;
    let mut last_obj = f64::NAN;
    let (mut x_prev, mut z_prev, mut lam_prev) = (x.clone(), z.clone(), lam.clone());

    for k in 0..settings.max_iters {
        x_prev.clone_from(&x);
        z_prev.clone_from(&z);
        lam_prev.clone_from(&lam);

        // x-update
        for i in 0..m {
            tmp_m[i] = lam[i] + rho * (problem.b[i] - z[i]);
        }
        for i in 0..n {
            rhs[i] = -problem.c[i] + settings.rho_x * x[i];
        }
        problem.a.transpose_spmv_acc(&tmp_m, 1.0, &mut rhs);
        kkt.factor
            .as_ref()
            .expect("factored")
            .solve_in_place(&mut rhs, &mut work);
        x.clone_from(&rhs);

        // relaxed z-update and multiplier step
        ax.fill(0.0);
        problem.a.spmv_acc(&x, 1.0, &mut ax);
        for i in 0..m {
            h[i] = settings.alpha * (problem.b[i] - ax[i]) + (1.0 - settings.alpha) * z[i];
            z[i] = h[i] + lam[i] / rho;
        }
        problem.cones.project_in_place(&mut z);
        for i in 0..m {
            lam[i] += rho * (h[i] - z[i]);
            y_out[i] = -lam[i];
        }
        iterations = k + 1;

        let finite = x.iter().chain(&z).chain(&lam).all(|v| v.is_finite());
        if !finite {
            x.clone_from(&x_prev);
            z.clone_from(&z_prev);
            lam.clone_from(&lam_prev);
            for i in 0..m {
                y_out[i] = -lam[i];
            }
            status = Status::NumericalError;
            break;
        }

        let eval = Evaluation::new(problem, &x, &y_out, &z);
        let res = eval.residuals();
        let tol = Tolerances::new(problem, settings, &eval, &z);
        let converged = tol.met(&res);
        last_obj = eval.p_obj;
        last_eval = Some(res);

        let last = converged || k + 1 == settings.max_iters;
        if k == 0 || k % settings.diag_every == 0 || last {
            diagnostics.push(DiagRow {
                iter: k,
                pri_res: res.primal_res,
                dual_res: res.dual_res,
                gap: res.gap,
                obj: eval.p_obj,
                scale: rho,
                time: start.elapsed().as_secs_f64(),
            });
        }
        if converged {
            status = Status::Optimal;
            break;
        }

        if settings.adaptive_rho && rescales < MAX_RESCALES && k > 0 && k % ADAPT_INTERVAL == 0 {
            // residuals relative to the magnitudes they are compared against
            let pri_rel = res.primal_res / tol.primal;
            let dual_rel = res.dual_res / tol.dual;
            let new_rho = if pri_rel > ADAPT_RATIO * dual_rel {
                Some(rho * 10.0)
            } else if dual_rel > ADAPT_RATIO * pri_rel {
                Some(rho / 10.0)
            } else {
                None
            };
            if let Some(r) = new_rho {
                rho = r;
                rescales += 1;
                kkt.refactor(rho)?;
            }
        }
    }

    let res = match last_eval {
        Some(r) if status != Status::NumericalError => r,
        _ => residuals(problem, &x, &y_out, &z)?,
    };
    let objective = if status == Status::NumericalError || !last_obj.is_finite() {
        problem.objective(&x)
    } else {
        last_obj
    };
    if diagnostics.is_empty() || status == Status::NumericalError {
        diagnostics.push(DiagRow {
            iter: iterations.saturating_sub(1),
            pri_res: res.primal_res,
            dual_res: res.dual_res,
            gap: res.gap,
            obj: objective,
            scale: rho,
            time: start.elapsed().as_secs_f64(),
        });
    }

    Ok(SolverResult {
        x,
        y: y_out,
        s: z,
        status,
        iterations,
        objective,
        primal_res: res.primal_res,
        dual_res: res.dual_res,
        gap: res.gap,
        solve_time: start.elapsed().as_secs_f64(),
        diagnostics,
        factorizations: kkt.count,
        rho,
    })
}
