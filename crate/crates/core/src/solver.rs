//! Preconditioned generalized forward-backward iteration over the tight
//! edge/vertex splitting of the graph objective.
//!
//! The smooth part is the quadratic fidelity term. Each active edge term
//! `lam_uv |x_u - x_v|` keeps a 2-dimensional auxiliary variable and each
//! active vertex term `lam_v |x_v|` a scalar one, so the auxiliary state has
//! exactly `2 |E+| + |V+|` entries (plus the residual support of the zero
//! term when one is needed and relaxation is not 1).

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DiagonalMetric, GraphProblem};
use crate::precond::{
    recondition, GammaMode, PrecondParams, Preconditioner, QuadApprox, WeightMode,
};
use crate::prox::{prox_abs_scaled, prox_pair_diff};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Diagonally preconditioned splitting with optional reconditioning.
    Pgfb,
    /// Scalar step and uniform weights over full-space auxiliary copies.
    GfbScalar,
    /// Preconditioned primal-dual baseline.
    Ppd,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgfb" => Ok(Algorithm::Pgfb),
            "gfb-scalar" => Ok(Algorithm::GfbScalar),
            "ppd" => Ok(Algorithm::Ppd),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Pgfb => "pgfb",
            Algorithm::GfbScalar => "gfb-scalar",
            Algorithm::Ppd => "ppd",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub algo: Algorithm,
    /// Constant relaxation, in (0, 2).
    pub rho: f64,
    /// Safety factor on the step-size cap, in (0, 1).
    pub delta: f64,
    pub gamma_mode: GammaMode,
    pub weight_mode: WeightMode,
    pub max_iter: usize,
    /// Stop when the relative iterate change is at most `tol`.
    pub tol: f64,
    /// Initial reconditioning threshold on the relative iterate change;
    /// 0 disables reconditioning.
    pub recond_threshold: f64,
    /// Threshold divisor applied after each reconditioning.
    pub recond_divisor: f64,
    pub max_reconditionings: usize,
    /// Lipschitz coefficient for vertices without fidelity; `None` uses the
    /// mean positive fidelity weight.
    pub lipschitz_fallback: Option<f64>,
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algo: Algorithm::Pgfb,
            rho: 1.5,
            delta: 0.99,
            gamma_mode: GammaMode::WholeFunctional,
            weight_mode: WeightMode::CoordinateScaled,
            max_iter: 1000,
            tol: 1e-8,
            recond_threshold: 1e-3,
            recond_divisor: 10.0,
            max_reconditionings: 8,
            lipschitz_fallback: None,
            threads: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.rho > 0.0 && self.rho < 2.0) {
            return bad(format!(
                "relaxation rho must lie in (0, 2), got {}",
                self.rho
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be >= 0, got {}", self.tol));
        }
        if !(self.recond_threshold >= 0.0 && self.recond_threshold.is_finite()) {
            return bad(format!(
                "reconditioning threshold must be >= 0, got {}",
                self.recond_threshold
            ));
        }
        if !(self.recond_divisor > 1.0) {
            return bad(format!(
                "reconditioning divisor must be > 1, got {}",
                self.recond_divisor
            ));
        }
        if let Some(f) = self.lipschitz_fallback {
            if !(f > 0.0 && f.is_finite()) {
                return bad(format!("lipschitz fallback must be > 0, got {f}"));
            }
        }
        if self.threads == 0 {
            return bad("threads must be >= 1".into());
        }
        Ok(())
    }

    pub(crate) fn lipschitz(&self, p: &GraphProblem) -> Result<DiagonalMetric> {
        p.lipschitz_metric(
            self.lipschitz_fallback
                .unwrap_or_else(|| p.default_lipschitz_fallback()),
        )
    }

    pub fn precond_params(&self) -> PrecondParams {
        PrecondParams {
            rho: self.rho,
            delta: self.delta,
            gamma_mode: self.gamma_mode,
            weight_mode: self.weight_mode,
        }
    }

    pub(crate) fn thread_pool(&self) -> Result<Option<rayon::ThreadPool>> {
        if self.threads <= 1 {
            return Ok(None);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map(Some)
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))
    }
}

/// Auxiliary variables of the splitting, stored as embedded coordinates:
/// `z_edge[i]` holds the `(u, v)` components for the `i`-th active edge,
/// `z_vertex[i]` the component for the `i`-th active vertex, and
/// `z_residual` one value per vertex of the residual support.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryVariables {
    pub z_edge: Vec<[f64; 2]>,
    pub z_vertex: Vec<f64>,
    pub z_residual: Vec<f64>,
}

impl AuxiliaryVariables {
    /// Warm start at the observation.
    pub fn at_observation(p: &GraphProblem, residual_support: &[usize]) -> Self {
        let y = p.y();
        AuxiliaryVariables {
            z_edge: p
                .active()
                .e_plus
                .iter()
                .map(|&k| {
                    let e = p.edges()[k];
                    [y[e.u], y[e.v]]
                })
                .collect(),
            z_vertex: p.active().v_plus.iter().map(|&v| y[v]).collect(),
            z_residual: residual_support.iter().map(|&v| y[v]).collect(),
        }
    }

    /// Number of stored reals.
    pub fn len(&self) -> usize {
        2 * self.z_edge.len() + self.z_vertex.len() + self.z_residual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.z_edge.iter().flatten());
        out.extend(&self.z_vertex);
        out.extend(&self.z_residual);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub rel_change: f64,
    pub seconds: f64,
    pub recond: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<IterRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub fn recond_iters(&self) -> Vec<usize> {
        self.records
            .iter()
            .filter(|r| r.recond)
            .map(|r| r.iter)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub trace: ConvergenceTrace,
}

/// `|cur - prev| / |prev|`, with the denominator floored at the smallest
/// positive normal.
pub fn relative_change(prev: &[f64], cur: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in prev.iter().zip(cur) {
        num += (b - a) * (b - a);
        den += a * a;
    }
    num.sqrt() / den.sqrt().max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub aux: AuxiliaryVariables,
    pub iter: usize,
    pub recond_threshold: f64,
    pub reconditionings: usize,
}

impl SolverState {
    /// Relative change of the last iteration; zero before the first step.
    pub fn fixed_point_residual(&self) -> f64 {
        if self.iter == 0 {
            0.0
        } else {
            relative_change(&self.x_prev, &self.x)
        }
    }
}

/// Shared driver for the iterative methods.
pub(crate) trait Iterate {
    /// One iteration; returns the relative iterate change.
    fn step(&mut self) -> Result<f64>;
    fn x(&self) -> &[f64];
    /// Called after each non-final iteration; returns whether the metric
    /// was rebuilt.
    fn after_step(&mut self, _rel_change: f64) -> Result<bool> {
        Ok(false)
    }
}

pub(crate) fn drive(
    solver: &mut dyn Iterate,
    p: &GraphProblem,
    max_iter: usize,
    tol: f64,
) -> Result<ConvergenceTrace> {
    let mut trace = ConvergenceTrace::default();
    let start = Instant::now();
    for iter in 1..=max_iter {
        let rel = solver.step()?;
        let objective = p.objective_unchecked(solver.x());
        if !objective.is_finite() {
            return Err(Error::Numerical(format!(
                "objective is not finite at iteration {iter}"
            )));
        }
        let done = rel <= tol;
        let recond = if done { false } else { solver.after_step(rel)? };
        trace.records.push(IterRecord {
            iter,
            objective,
            rel_change: rel,
            seconds: start.elapsed().as_secs_f64(),
            recond,
        });
        if done {
            break;
        }
    }
    Ok(trace)
}

/// Per-vertex list of the auxiliary slots covering it, in ascending term
/// order. Slot `2 i + s` is side `s` of the `i`-th active edge; slot
/// `2 |E+| + i` is the `i`-th active vertex.
#[derive(Debug, Clone)]
struct CoverLayout {
    offsets: Vec<usize>,
    slots: Vec<usize>,
}

impl CoverLayout {
    fn new(p: &GraphProblem) -> Self {
        let n = p.num_vertices();
        let active = p.active();
        let mut counts = vec![0usize; n + 1];
        for &k in &active.e_plus {
            let e = p.edges()[k];
            counts[e.u + 1] += 1;
            counts[e.v + 1] += 1;
        }
        for &v in &active.v_plus {
            counts[v + 1] += 1;
        }
        for v in 0..n {
            counts[v + 1] += counts[v];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut slots = vec![0; offsets[n]];
        for (i, &k) in active.e_plus.iter().enumerate() {
            let e = p.edges()[k];
            slots[fill[e.u]] = 2 * i;
            fill[e.u] += 1;
            slots[fill[e.v]] = 2 * i + 1;
            fill[e.v] += 1;
        }
        let base = 2 * active.e_plus.len();
        for (i, &v) in active.v_plus.iter().enumerate() {
            slots[fill[v]] = base + i;
            fill[v] += 1;
        }
        CoverLayout { offsets, slots }
    }
}

/// Read-only per-term data used by the inner loop.
#[derive(Debug, Clone)]
struct Terms {
    edge_ends: Vec<(usize, usize)>,
    edge_lam: Vec<f64>,
    vertex_ids: Vec<usize>,
    vertex_lam: Vec<f64>,
}

/// Prox metrics `w / gamma` and residual lookup for the current
/// preconditioner.
#[derive(Debug, Clone)]
struct Metrics {
    edge: Vec<[f64; 2]>,
    vertex: Vec<f64>,
    /// Position of each vertex in the residual support, or `usize::MAX`.
    residual_pos: Vec<usize>,
}

impl Metrics {
    fn new(terms: &Terms, pc: &Preconditioner, n: usize) -> Self {
        let mut residual_pos = vec![usize::MAX; n];
        for (i, &v) in pc.residual_support.iter().enumerate() {
            residual_pos[v] = i;
        }
        Metrics {
            edge: terms
                .edge_ends
                .iter()
                .zip(&pc.w_edge)
                .map(|(&(u, v), w)| [w[0] / pc.gamma[u], w[1] / pc.gamma[v]])
                .collect(),
            vertex: terms
                .vertex_ids
                .iter()
                .zip(&pc.w_vertex)
                .map(|(&v, w)| w / pc.gamma[v])
                .collect(),
            residual_pos,
        }
    }
}

/// Preconditioned generalized forward-backward solver.
pub struct PgfbSolver<'a> {
    problem: &'a GraphProblem,
    cfg: SolverConfig,
    lipschitz: DiagonalMetric,
    precond: Preconditioner,
    layout: CoverLayout,
    terms: Terms,
    metrics: Metrics,
    state: SolverState,
    // scratch
    p: Vec<f64>,
    residual_now: Vec<f64>,
    pool: Option<rayon::ThreadPool>,
}

fn store_residual(pc: &Preconditioner, rho: f64) -> bool {
    !pc.residual_support.is_empty() && rho != 1.0
}

impl<'a> PgfbSolver<'a> {
    /// Cold-start preconditioner, auxiliary variables at the observation.
    pub fn new(problem: &'a GraphProblem, cfg: SolverConfig) -> Result<Self> {
        Self::with_aux(problem, cfg, None)
    }

    /// As [`PgfbSolver::new`] with explicit initial auxiliary variables.
    /// `z0.z_residual` must cover the residual support of the cold-start
    /// preconditioner; with `rho == 1` it is only used to form the initial
    /// iterate.
    pub fn with_aux(
        problem: &'a GraphProblem,
        cfg: SolverConfig,
        z0: Option<AuxiliaryVariables>,
    ) -> Result<Self> {
        let precond = {
            cfg.validate()?;
            let lipschitz = cfg.lipschitz(problem)?;
            Preconditioner::build(
                problem,
                &QuadApprox::cold_start(problem),
                &lipschitz,
                &cfg.precond_params(),
            )?
        };
        Self::with_preconditioner(problem, cfg, precond, z0)
    }

    /// Starts from an explicit preconditioner, which must satisfy the
    /// relaxation bound.
    pub fn with_preconditioner(
        problem: &'a GraphProblem,
        cfg: SolverConfig,
        precond: Preconditioner,
        z0: Option<AuxiliaryVariables>,
    ) -> Result<Self> {
        cfg.validate()?;
        let lipschitz = cfg.lipschitz(problem)?;
        check_margin(cfg.rho, &precond, &lipschitz)?;
        let n = problem.num_vertices();
        let active = problem.active();
        if precond.gamma.len() != n
            || precond.w_edge.len() != active.e_plus.len()
            || precond.w_vertex.len() != active.v_plus.len()
        {
            return Err(Error::InvalidInput(
                "preconditioner does not match the problem".into(),
            ));
        }
        let mut aux = z0.unwrap_or_else(|| {
            AuxiliaryVariables::at_observation(problem, &precond.residual_support)
        });
        for (got, want) in [
            (aux.z_edge.len(), active.e_plus.len()),
            (aux.z_vertex.len(), active.v_plus.len()),
            (aux.z_residual.len(), precond.residual_support.len()),
        ] {
            if got != want {
                return Err(Error::Dimension {
                    expected: want,
                    got,
                });
            }
        }
        let terms = Terms {
            edge_ends: active
                .e_plus
                .iter()
                .map(|&k| (problem.edges()[k].u, problem.edges()[k].v))
                .collect(),
            edge_lam: active.e_plus.iter().map(|&k| problem.lam_d1()[k]).collect(),
            vertex_ids: active.v_plus.clone(),
            vertex_lam: active.v_plus.iter().map(|&v| problem.lam_l1()[v]).collect(),
        };
        let metrics = Metrics::new(&terms, &precond, n);
        let layout = CoverLayout::new(problem);
        let mut x = vec![0.0; n];
        aggregate(
            &layout,
            &precond,
            &metrics,
            &aux,
            &aux.z_residual,
            &mut x,
            None,
        );
        if !store_residual(&precond, cfg.rho) {
            aux.z_residual.clear();
        }
        let pool = cfg.thread_pool()?;
        let state = SolverState {
            x_prev: x.clone(),
            x,
            aux,
            iter: 0,
            recond_threshold: cfg.recond_threshold,
            reconditionings: 0,
        };
        Ok(PgfbSolver {
            problem,
            cfg,
            lipschitz,
            precond,
            layout,
            terms,
            metrics,
            state,
            p: vec![0.0; n],
            residual_now: Vec::new(),
            pool,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn preconditioner(&self) -> &Preconditioner {
        &self.precond
    }

    pub fn lipschitz(&self) -> &DiagonalMetric {
        &self.lipschitz
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    /// One full iteration; returns the relative iterate change.
    pub fn step(&mut self) -> Result<f64> {
        let rho = self.cfg.rho;
        let n = self.problem.num_vertices();
        let gamma = &self.precond.gamma;
        let x = &self.state.x;
        // forward step, p = 2x - Gamma grad f(x)
        self.problem.grad_f_into(x, &mut self.p);
        for j in 0..n {
            self.p[j] = 2.0 * x[j] - gamma[j] * self.p[j];
        }
        let p = &self.p;
        let terms = &self.terms;
        let metrics = &self.metrics;
        let aux = &mut self.state.aux;

        let edge_update = |(i, z): (usize, &mut [f64; 2])| {
            let (u, v) = terms.edge_ends[i];
            let m = metrics.edge[i];
            let (r0, r1) = prox_pair_diff(p[u] - z[0], p[v] - z[1], terms.edge_lam[i], m[0], m[1]);
            z[0] += rho * (r0 - x[u]);
            z[1] += rho * (r1 - x[v]);
        };
        let vertex_update = |(i, z): (usize, &mut f64)| {
            let v = terms.vertex_ids[i];
            let r = prox_abs_scaled(p[v] - *z, terms.vertex_lam[i], metrics.vertex[i]);
            *z += rho * (r - x[v]);
        };
        let support = &self.precond.residual_support;
        let residual_update = |(i, z): (usize, &mut f64)| {
            let j = support[i];
            *z += rho * (p[j] - *z - x[j]);
        };
        match &self.pool {
            Some(pool) => pool.install(|| {
                aux.z_edge.par_iter_mut().enumerate().for_each(edge_update);
                aux.z_vertex
                    .par_iter_mut()
                    .enumerate()
                    .for_each(vertex_update);
                aux.z_residual
                    .par_iter_mut()
                    .enumerate()
                    .for_each(residual_update);
            }),
            None => {
                aux.z_edge.iter_mut().enumerate().for_each(edge_update);
                aux.z_vertex.iter_mut().enumerate().for_each(vertex_update);
                aux.z_residual
                    .iter_mut()
                    .enumerate()
                    .for_each(residual_update);
            }
        }
        // without relaxation the residual variable is p - x, not stored
        let stored = store_residual(&self.precond, rho);
        if !stored {
            self.residual_now.clear();
            self.residual_now
                .extend(support.iter().map(|&j| p[j] - x[j]));
        }
        let residual: &[f64] = if stored {
            &self.state.aux.z_residual
        } else {
            &self.residual_now
        };

        std::mem::swap(&mut self.state.x, &mut self.state.x_prev);
        aggregate(
            &self.layout,
            &self.precond,
            &self.metrics,
            &self.state.aux,
            residual,
            &mut self.state.x,
            self.pool.as_ref(),
        );
        self.state.iter += 1;
        if let Some(j) = self.state.x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "iterate coordinate {j} is not finite at iteration {}",
                self.state.iter
            )));
        }
        Ok(relative_change(&self.state.x_prev, &self.state.x))
    }

    /// Rebuilds the preconditioner from approximations at the current
    /// iterate and remaps the auxiliary variables.
    pub fn recondition(&mut self) -> Result<()> {
        let qa = QuadApprox::at_point(self.problem, &self.state.x)?;
        let new = Preconditioner::build(
            self.problem,
            &qa,
            &self.lipschitz,
            &self.cfg.precond_params(),
        )?;
        self.replace_preconditioner(new)
    }

    /// Switches to `new`, remapping the auxiliary variables so that the
    /// current iterate is kept.
    pub fn replace_preconditioner(&mut self, new: Preconditioner) -> Result<()> {
        check_margin(self.cfg.rho, &new, &self.lipschitz)?;
        let bx = self.problem.grad_f(&self.state.x)?;
        let keep = store_residual(&new, self.cfg.rho);
        let aux = recondition(
            self.problem,
            &self.state.x,
            &bx,
            &self.precond,
            &new,
            &self.state.aux,
            keep,
        )?;
        self.metrics = Metrics::new(&self.terms, &new, self.problem.num_vertices());
        self.precond = new;
        self.state.aux = aux;
        Ok(())
    }

    /// Runs until the stopping rule or `max_iter`, reconditioning whenever
    /// the relative change drops below the current threshold.
    pub fn run(&mut self) -> Result<ConvergenceTrace> {
        let (max_iter, tol) = (self.cfg.max_iter, self.cfg.tol);
        let problem = self.problem;
        drive(self, problem, max_iter, tol)
    }

    pub fn into_x(self) -> Vec<f64> {
        self.state.x
    }
}

impl Iterate for PgfbSolver<'_> {
    fn step(&mut self) -> Result<f64> {
        PgfbSolver::step(self)
    }

    fn x(&self) -> &[f64] {
        &self.state.x
    }

    fn after_step(&mut self, rel: f64) -> Result<bool> {
        let st = &self.state;
        if st.recond_threshold > 0.0
            && rel < st.recond_threshold
            && st.reconditionings < self.cfg.max_reconditionings
        {
            self.recondition()?;
            self.state.recond_threshold /= self.cfg.recond_divisor;
            self.state.reconditionings += 1;
            Ok(true)
        } else {
            Ok(false)
        }
    }
}

fn check_margin(rho: f64, pc: &Preconditioner, lipschitz: &DiagonalMetric) -> Result<()> {
    let bound = 2.0 - 0.5 * pc.step_norm(lipschitz);
    if rho < bound {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "relaxation {rho} violates the bound {bound} of the step metric"
        )))
    }
}

/// `x_v = sum of w * z over the slots covering v, plus the residual term`,
/// summed in ascending slot order for every vertex.
fn aggregate(
    layout: &CoverLayout,
    pc: &Preconditioner,
    metrics: &Metrics,
    aux: &AuxiliaryVariables,
    residual: &[f64],
    x: &mut [f64],
    pool: Option<&rayon::ThreadPool>,
) {
    let ne = 2 * aux.z_edge.len();
    let value = |j: usize| {
        let mut acc = 0.0;
        for &s in &layout.slots[layout.offsets[j]..layout.offsets[j + 1]] {
            acc += if s < ne {
                pc.w_edge[s / 2][s % 2] * aux.z_edge[s / 2][s % 2]
            } else {
                pc.w_vertex[s - ne] * aux.z_vertex[s - ne]
            };
        }
        let r = metrics.residual_pos[j];
        if r != usize::MAX {
            acc += pc.w_residual[j] * residual[r];
        }
        acc
    };
    match pool {
        Some(pool) => pool.install(|| {
            x.par_iter_mut()
                .enumerate()
                .for_each(|(j, xj)| *xj = value(j))
        }),
        None => x.iter_mut().enumerate().for_each(|(j, xj)| *xj = value(j)),
    }
}

/// Solves `p` with the algorithm selected in `cfg`.
pub fn solve(p: &GraphProblem, cfg: &SolverConfig) -> Result<Solution> {
    match cfg.algo {
        Algorithm::Pgfb => {
            let mut s = PgfbSolver::new(p, cfg.clone())?;
            let trace = s.run()?;
            Ok(Solution {
                x: s.into_x(),
                trace,
            })
        }
        Algorithm::GfbScalar => {
            let mut s = crate::scalar::ScalarGfb::new(p, cfg.clone())?;
            let trace = s.run()?;
            Ok(Solution {
                x: s.into_x(),
                trace,
            })
        }
        Algorithm::Ppd => crate::ppd::ppd_run(p, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ProblemData;

    fn two_vertex() -> GraphProblem {
        GraphProblem::new(ProblemData {
            y: vec![0.0, 4.0],
            lam_l2: vec![1.0, 1.0],
            lam_l1: vec![0.0, 0.0],
            edges: vec![(0, 1)],
            lam_d1: vec![1.0],
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn init_reproduces_constant_observation() {
        let p = GraphProblem::new(ProblemData {
            y: vec![2.0; 4],
            lam_l2: vec![1.0, 0.0, 2.0, 1.0],
            lam_l1: vec![0.0, 1.0, 0.0, 0.0],
            edges: vec![(0, 1), (1, 2), (2, 3)],
            lam_d1: vec![1.0, 0.5, 2.0],
            ..Default::default()
        })
        .unwrap();
        for mode in [WeightMode::CoordinateScaled, WeightMode::ShapePreserving] {
            let cfg = SolverConfig {
                weight_mode: mode,
                ..Default::default()
            };
            let s = PgfbSolver::new(&p, cfg).unwrap();
            for &v in &s.state().x {
                assert!((v - 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn init_rejects_mismatched_aux() {
        let p = two_vertex();
        let z = AuxiliaryVariables {
            z_edge: vec![],
            z_vertex: vec![],
            z_residual: vec![],
        };
        assert!(matches!(
            PgfbSolver::with_aux(&p, SolverConfig::default(), Some(z)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn config_rejects_bad_relaxation() {
        let p = two_vertex();
        let cfg = SolverConfig {
            rho: 2.5,
            ..Default::default()
        };
        assert!(matches!(PgfbSolver::new(&p, cfg), Err(Error::Config(_))));
    }

    #[test]
    fn two_vertex_converges_to_known_optimum() {
        let p = two_vertex();
        let cfg = SolverConfig {
            max_iter: 5000,
            tol: 1e-14,
            ..Default::default()
        };
        let sol = solve(&p, &cfg).unwrap();
        assert!(
            (sol.x[0] - 1.0).abs() < 1e-6 && (sol.x[1] - 3.0).abs() < 1e-6,
            "{:?}",
            sol.x
        );
    }

    #[test]
    fn zero_iterations_returns_initialization() {
        let p = two_vertex();
        let cfg = SolverConfig {
            max_iter: 0,
            tol: 0.0,
            ..Default::default()
        };
        let sol = solve(&p, &cfg).unwrap();
        assert_eq!(sol.x, vec![0.0, 4.0]);
        assert!(sol.trace.is_empty());
    }

    #[test]
    fn disabled_scheduler_never_reconditions() {
        let p = GraphProblem::new(ProblemData {
            y: vec![0.0, 4.0, 1.0, 5.0, 2.0],
            lam_l2: vec![1.0, 0.1, 3.0, 0.0, 2.0],
            lam_l1: vec![0.0, 0.0, 0.0, 0.5, 0.0],
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 4)],
            lam_d1: vec![1.0, 0.5, 2.0, 1.0],
            ..Default::default()
        })
        .unwrap();
        let cfg = SolverConfig {
            recond_threshold: 0.0,
            max_iter: 300,
            tol: 0.0,
            ..Default::default()
        };
        let sol = solve(&p, &cfg).unwrap();
        assert!(sol.trace.recond_iters().is_empty());
        let cfg = SolverConfig {
            recond_threshold: 1e-1,
            ..cfg
        };
        assert!(!solve(&p, &cfg).unwrap().trace.recond_iters().is_empty());
    }

    #[test]
    fn pure_fidelity_is_preconditioned_gradient_descent() {
        // no active term: every vertex is carried by the residual term
        let p = GraphProblem::new(ProblemData {
            y: vec![1.0, -2.0, 3.0],
            lam_l2: vec![1.0, 2.0, 0.5],
            lam_l1: vec![0.0; 3],
            edges: vec![(0, 1), (1, 2)],
            lam_d1: vec![0.0, 0.0],
            ..Default::default()
        })
        .unwrap();
        let x0 = vec![0.5, 0.0, -1.0];
        let cfg = SolverConfig {
            weight_mode: WeightMode::ShapePreserving,
            ..Default::default()
        };
        let pre = PgfbSolver::new(&p, cfg.clone()).unwrap().precond.clone();
        let z0 = AuxiliaryVariables {
            z_edge: vec![],
            z_vertex: vec![],
            z_residual: x0.clone(),
        };
        let mut s = PgfbSolver::with_preconditioner(&p, cfg, pre.clone(), Some(z0)).unwrap();
        assert_eq!(s.state().x, x0);
        s.step().unwrap();
        let g = p.grad_f(&x0).unwrap();
        for j in 0..3 {
            let want = x0[j] - 1.5 * pre.gamma[j] * g[j];
            assert!((s.state().x[j] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn fixed_point_residual_guards() {
        let p = two_vertex();
        let mut s = PgfbSolver::new(&p, SolverConfig::default()).unwrap();
        assert_eq!(s.state().fixed_point_residual(), 0.0);
        s.step().unwrap();
        assert!(s.state().fixed_point_residual() > 0.0);
        assert_eq!(relative_change(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        let r = relative_change(&[0.0, 0.0], &[1e-3, 0.0]);
        assert!(r.is_finite() && r > 1e300);
    }

    #[test]
    fn aux_size_is_tight() {
        let p = GraphProblem::new(ProblemData {
            y: vec![1.0; 5],
            lam_l2: vec![1.0; 5],
            lam_l1: vec![0.0, 1.0, 0.0, 2.0, 0.0],
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)],
            lam_d1: vec![1.0, 0.0, 1.0, 1.0, 1.0],
            ..Default::default()
        })
        .unwrap();
        let s = PgfbSolver::new(&p, SolverConfig::default()).unwrap();
        assert_eq!(s.state().aux.len(), 2 * 4 + 2);
    }
}
