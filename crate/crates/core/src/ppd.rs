//! Diagonally preconditioned primal-dual baseline (Pock–Chambolle) on the
//! split `F = f + g(K x)`, where `f` is the fidelity term, `K` stacks the
//! weighted differences `lam_uv (x_u - x_v)` and the weighted values
//! `lam_v x_v`, and `g` is the plain l1 norm.
//!
//! Step sizes follow the diagonal rule with exponent `alpha`:
//! `tau_j = 1 / sum_i |K_ij|^(2 - alpha)`, `sigma_i = 1 / sum_j |K_ij|^alpha`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::GraphProblem;
use crate::solver::{drive, relative_change, Iterate, Solution, SolverConfig};

/// Sparse operator with at most two nonzeros per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOperatorK {
    num_cols: usize,
    /// `(column, coefficient)` pairs; edge rows first, then vertex rows.
    rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Row {
    Edge { u: usize, v: usize, lam: f64 },
    Vertex { v: usize, lam: f64 },
}

impl SplitOperatorK {
    pub fn build(p: &GraphProblem) -> Self {
        let active = p.active();
        let rows = active
            .e_plus
            .iter()
            .map(|&k| {
                let e = p.edges()[k];
                Row::Edge {
                    u: e.u,
                    v: e.v,
                    lam: p.lam_d1()[k],
                }
            })
            .chain(active.v_plus.iter().map(|&v| Row::Vertex {
                v,
                lam: p.lam_l1()[v],
            }))
            .collect();
        SplitOperatorK {
            num_cols: p.num_vertices(),
            rows,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    /// Nonzeros of row `i` as `(column, coefficient)`.
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        match self.rows[i] {
            Row::Edge { u, v, lam } => vec![(u, lam), (v, -lam)],
            Row::Vertex { v, lam } => vec![(v, lam)],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| row_dot(r, x)).collect()
    }

    pub fn apply_transpose(&self, d: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_cols];
        self.apply_transpose_into(d, &mut out);
        out
    }

    fn apply_transpose_into(&self, d: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &di) in self.rows.iter().zip(d) {
            match *r {
                Row::Edge { u, v, lam } => {
                    out[u] += lam * di;
                    out[v] -= lam * di;
                }
                Row::Vertex { v, lam } => out[v] += lam * di,
            }
        }
    }
}

#[inline]
fn row_dot(r: &Row, x: &[f64]) -> f64 {
    match *r {
        Row::Edge { u, v, lam } => lam * (x[u] - x[v]),
        Row::Vertex { v, lam } => lam * x[v],
    }
}

/// Primal (`tau`, per vertex) and dual (`sigma`, per row) step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct PpdSteps {
    pub tau: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Diagonal step sizes for `k`. Columns untouched by any row get
/// `tau_j = 1 / fallback[j]` when a fallback is given (the fidelity weight in
/// the solver); otherwise they are an error.
pub fn ppd_precond(k: &SplitOperatorK, alpha: f64, fallback: Option<&[f64]>) -> Result<PpdSteps> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::Config(format!(
            "alpha must lie in [0, 2], got {alpha}"
        )));
    }
    let mut col = vec![0.0; k.num_cols];
    let mut sigma = Vec::with_capacity(k.num_rows());
    for i in 0..k.num_rows() {
        let mut row_sum = 0.0;
        for (j, c) in k.row(i) {
            let a = c.abs();
            col[j] += a.powf(2.0 - alpha);
            row_sum += a.powf(alpha);
        }
        if !(row_sum > 0.0) {
            return Err(Error::InvalidInput(format!("row {i} of K is zero")));
        }
        sigma.push(1.0 / row_sum);
    }
    let tau = col
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            if c > 0.0 {
                Ok(1.0 / c)
            } else {
                match fallback.map(|f| f[j]) {
                    Some(f) if f > 0.0 => Ok(1.0 / f),
                    _ => Err(Error::InvalidInput(format!(
                        "column {j} of K is zero and has no fallback"
                    ))),
                }
            }
        })
        .collect::<Result<_>>()?;
    Ok(PpdSteps { tau, sigma })
}

pub struct PpdSolver<'a> {
    problem: &'a GraphProblem,
    k: SplitOperatorK,
    steps: PpdSteps,
    x: Vec<f64>,
    x_prev: Vec<f64>,
    x_bar: Vec<f64>,
    dual: Vec<f64>,
    kt: Vec<f64>,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> PpdSolver<'a> {
    /// Primal start at the observation, dual start at zero.
    pub fn new(problem: &'a GraphProblem, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let k = SplitOperatorK::build(problem);
        let steps = ppd_precond(&k, 1.0, Some(problem.lam_l2()))?;
        let x = problem.y().to_vec();
        Ok(PpdSolver {
            problem,
            steps,
            x_prev: x.clone(),
            x_bar: x.clone(),
            x,
            dual: vec![0.0; k.num_rows()],
            kt: vec![0.0; problem.num_vertices()],
            k,
            pool: cfg.thread_pool()?,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn dual(&self) -> &[f64] {
        &self.dual
    }

    pub fn steps(&self) -> &PpdSteps {
        &self.steps
    }

    pub fn step(&mut self) -> Result<f64> {
        let rows = &self.k.rows;
        let sigma = &self.steps.sigma;
        let x_bar = &self.x_bar;
        // dual ascent, then projection on [-1, 1]
        let dual_update = |(i, d): (usize, &mut f64)| {
            *d = (*d + sigma[i] * row_dot(&rows[i], x_bar)).clamp(-1.0, 1.0);
        };
        match &self.pool {
            Some(pool) => {
                pool.install(|| self.dual.par_iter_mut().enumerate().for_each(dual_update))
            }
            None => self.dual.iter_mut().enumerate().for_each(dual_update),
        }
        self.k.apply_transpose_into(&self.dual, &mut self.kt);
        std::mem::swap(&mut self.x, &mut self.x_prev);
        let (y, l2, tau) = (self.problem.y(), self.problem.lam_l2(), &self.steps.tau);
        for j in 0..self.x.len() {
            let t = tau[j];
            self.x[j] = (self.x_prev[j] - t * self.kt[j] + t * l2[j] * y[j]) / (1.0 + t * l2[j]);
            self.x_bar[j] = 2.0 * self.x[j] - self.x_prev[j];
        }
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("primal iterate is not finite".into()));
        }
        Ok(relative_change(&self.x_prev, &self.x))
    }
}

impl Iterate for PpdSolver<'_> {
    fn step(&mut self) -> Result<f64> {
        PpdSolver::step(self)
    }

    fn x(&self) -> &[f64] {
        &self.x
    }
}

pub fn ppd_run(p: &GraphProblem, cfg: &SolverConfig) -> Result<Solution> {
    let mut s = PpdSolver::new(p, cfg)?;
    let trace = drive(&mut s, p, cfg.max_iter, cfg.tol)?;
    Ok(Solution { x: s.x, trace })
}
