//! Unpreconditioned generalized forward-backward: scalar step
//! `gamma = delta (4 - 2 rho) / max l`, uniform weights `1/n`, and one
//! full-length auxiliary vector per term. Memory is `n |V|`; meant for
//! small instances and for comparison with the preconditioned solver.

use crate::error::{Error, Result};
use crate::graph::GraphProblem;
use crate::prox::{prox_abs_scaled, prox_pair_diff};
use crate::solver::{drive, relative_change, ConvergenceTrace, Iterate, SolverConfig};

#[derive(Debug, Clone, Copy)]
enum Term {
    Edge { u: usize, v: usize, lam: f64 },
    Vertex { v: usize, lam: f64 },
    Zero,
}

pub struct ScalarGfb<'a> {
    problem: &'a GraphProblem,
    cfg: SolverConfig,
    terms: Vec<Term>,
    gamma: f64,
    weight: f64,
    z: Vec<Vec<f64>>,
    x: Vec<f64>,
    x_prev: Vec<f64>,
    grad: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> ScalarGfb<'a> {
    /// Every auxiliary copy starts at the observation.
    pub fn new(problem: &'a GraphProblem, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let lipschitz = cfg.lipschitz(problem)?;
        let gamma = cfg.delta * (4.0 - 2.0 * cfg.rho) / lipschitz.max();
        let active = problem.active();
        let mut terms: Vec<Term> = active
            .e_plus
            .iter()
            .map(|&k| {
                let e = problem.edges()[k];
                Term::Edge {
                    u: e.u,
                    v: e.v,
                    lam: problem.lam_d1()[k],
                }
            })
            .chain(active.v_plus.iter().map(|&v| Term::Vertex {
                v,
                lam: problem.lam_l1()[v],
            }))
            .collect();
        if terms.is_empty() {
            terms.push(Term::Zero);
        }
        let weight = 1.0 / terms.len() as f64;
        let n = problem.num_vertices();
        let z = vec![problem.y().to_vec(); terms.len()];
        let mut s = ScalarGfb {
            problem,
            cfg,
            terms,
            gamma,
            weight,
            z,
            x: vec![0.0; n],
            x_prev: vec![0.0; n],
            grad: vec![0.0; n],
            scratch: vec![0.0; n],
        };
        s.aggregate();
        s.x_prev.clone_from(&s.x);
        Ok(s)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn aux(&self) -> &[Vec<f64>] {
        &self.z
    }

    fn aggregate(&mut self) {
        for j in 0..self.x.len() {
            let mut acc = 0.0;
            for zi in &self.z {
                acc += self.weight * zi[j];
            }
            self.x[j] = acc;
        }
    }

    pub fn step(&mut self) -> Result<f64> {
        let rho = self.cfg.rho;
        let m = self.weight / self.gamma;
        self.problem.grad_f_into(&self.x, &mut self.grad);
        for (term, zi) in self.terms.iter().zip(self.z.iter_mut()) {
            // resolvent argument 2x - z_i - gamma grad
            for j in 0..self.x.len() {
                self.scratch[j] = 2.0 * self.x[j] - zi[j] - self.gamma * self.grad[j];
            }
            match *term {
                Term::Edge { u, v, lam } => {
                    let (a, b) = prox_pair_diff(self.scratch[u], self.scratch[v], lam, m, m);
                    self.scratch[u] = a;
                    self.scratch[v] = b;
                }
                Term::Vertex { v, lam } => {
                    self.scratch[v] = prox_abs_scaled(self.scratch[v], lam, m);
                }
                Term::Zero => {}
            }
            for j in 0..self.x.len() {
                zi[j] += rho * (self.scratch[j] - self.x[j]);
            }
        }
        std::mem::swap(&mut self.x, &mut self.x_prev);
        self.aggregate();
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("iterate is not finite".into()));
        }
        Ok(relative_change(&self.x_prev, &self.x))
    }

    pub fn run(&mut self) -> Result<ConvergenceTrace> {
        let (max_iter, tol) = (self.cfg.max_iter, self.cfg.tol);
        let problem = self.problem;
        drive(self, problem, max_iter, tol)
    }

    pub fn into_x(self) -> Vec<f64> {
        self.x
    }
}

impl Iterate for ScalarGfb<'_> {
    fn step(&mut self) -> Result<f64> {
        ScalarGfb::step(self)
    }

    fn x(&self) -> &[f64] {
        &self.x
    }
}
