//! Problem instance: a weighted graph with observations, and the objective
//!
//! ```text
//! F(x) = 1/2 sum_v l2_v (x_v - y_v)^2 + sum_(u,v) d1_uv |x_u - x_v| + sum_v l1_v |x_v|
//! ```
//!
//! together with the gradient of its smooth (quadratic) part, a diagonal
//! Lipschitz metric for that gradient, and two evaluation metrics used to
//! judge aggregations of spatial data.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    /// Normalizes the endpoint order. Self-loops are rejected by the problem
    /// constructor, not here.
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }
}

/// Indices of the terms that actually contribute a nonsmooth part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSets {
    /// Edge indices with a positive total-variation weight, ascending.
    pub e_plus: Vec<usize>,
    /// Vertex indices with a positive l1 weight, ascending.
    pub v_plus: Vec<usize>,
}

/// Strictly positive diagonal operator over the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalMetric {
    coeffs: Vec<f64>,
}

impl DiagonalMetric {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some((i, c)) = coeffs
            .iter()
            .enumerate()
            .find(|(_, c)| !(c.is_finite() && **c > 0.0))
        {
            return Err(Error::InvalidInput(format!(
                "metric coefficient {i} must be finite and > 0, got {c}"
            )));
        }
        Ok(DiagonalMetric { coeffs })
    }

    pub fn identity(n: usize) -> Self {
        DiagonalMetric {
            coeffs: vec![1.0; n],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.coeffs.iter().copied().fold(0.0, f64::max)
    }
}

/// Validated optimization instance.
#[derive(Debug, Clone)]
pub struct GraphProblem {
    y: Vec<f64>,
    lam_l2: Vec<f64>,
    lam_l1: Vec<f64>,
    edges: Vec<Edge>,
    lam_d1: Vec<f64>,
    mu: Option<Vec<f64>>,
    nu: Option<Vec<f64>>,
    active: ActiveSets,
}

/// Raw columns of an instance before validation.
#[derive(Debug, Clone, Default)]
pub struct ProblemData {
    pub y: Vec<f64>,
    pub lam_l2: Vec<f64>,
    pub lam_l1: Vec<f64>,
    pub edges: Vec<(usize, usize)>,
    pub lam_d1: Vec<f64>,
    pub mu: Option<Vec<f64>>,
    pub nu: Option<Vec<f64>>,
}

fn check_nonneg(name: &str, values: &[f64]) -> Result<()> {
    for (i, &c) in values.iter().enumerate() {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::validation(format!(
                "{name}[{i}] must be finite and >= 0, got {c}"
            )));
        }
    }
    Ok(())
}

impl GraphProblem {
    /// Validates the raw columns. Vertex ids in error messages are 0-based.
    pub fn new(data: ProblemData) -> Result<Self> {
        let n = data.y.len();
        for (name, len) in [("lam_l2", data.lam_l2.len()), ("lam_l1", data.lam_l1.len())] {
            if len != n {
                return Err(Error::validation(format!(
                    "{name} has {len} entries for {n} vertices"
                )));
            }
        }
        if data.lam_d1.len() != data.edges.len() {
            return Err(Error::validation(format!(
                "lam_d1 has {} entries for {} edges",
                data.lam_d1.len(),
                data.edges.len()
            )));
        }
        if let Some(i) = data.y.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!("y[{i}] is not finite")));
        }
        check_nonneg("lam_l2", &data.lam_l2)?;
        check_nonneg("lam_l1", &data.lam_l1)?;
        check_nonneg("lam_d1", &data.lam_d1)?;
        if let Some(mu) = &data.mu {
            if mu.len() != data.edges.len() {
                return Err(Error::validation("mu length differs from edge count"));
            }
            if let Some(i) = mu.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
                return Err(Error::validation(format!("mu[{i}] must be > 0")));
            }
        }
        if let Some(nu) = &data.nu {
            if nu.len() != n {
                return Err(Error::validation("nu length differs from vertex count"));
            }
            check_nonneg("nu", nu)?;
        }

        let mut seen = HashSet::with_capacity(data.edges.len());
        let mut edges = Vec::with_capacity(data.edges.len());
        for (k, &(a, b)) in data.edges.iter().enumerate() {
            if a >= n || b >= n {
                return Err(Error::validation(format!(
                    "edge {k} ({a}, {b}) has an endpoint outside [0, {n})"
                )));
            }
            if a == b {
                return Err(Error::validation(format!("edge {k} is a self-loop on {a}")));
            }
            let e = Edge::new(a, b);
            if !seen.insert(e) {
                return Err(Error::validation(format!(
                    "edge {k} duplicates ({}, {})",
                    e.u, e.v
                )));
            }
            edges.push(e);
        }

        let e_plus: Vec<usize> = (0..edges.len()).filter(|&k| data.lam_d1[k] > 0.0).collect();
        let v_plus: Vec<usize> = (0..n).filter(|&v| data.lam_l1[v] > 0.0).collect();

        let mut covered: Vec<bool> = (0..n)
            .map(|v| data.lam_l1[v] > 0.0 || data.lam_l2[v] > 0.0)
            .collect();
        for &k in &e_plus {
            covered[edges[k].u] = true;
            covered[edges[k].v] = true;
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(Error::validation(format!(
                "vertex {v} is uncovered (no fidelity, no l1 weight, no weighted edge)"
            )));
        }

        Ok(GraphProblem {
            y: data.y,
            lam_l2: data.lam_l2,
            lam_l1: data.lam_l1,
            edges,
            lam_d1: data.lam_d1,
            mu: data.mu,
            nu: data.nu,
            active: ActiveSets { e_plus, v_plus },
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.y.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn lam_l2(&self) -> &[f64] {
        &self.lam_l2
    }

    pub fn lam_l1(&self) -> &[f64] {
        &self.lam_l1
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn lam_d1(&self) -> &[f64] {
        &self.lam_d1
    }

    pub fn mu(&self) -> Option<&[f64]> {
        self.mu.as_deref()
    }

    pub fn nu(&self) -> Option<&[f64]> {
        self.nu.as_deref()
    }

    pub fn active(&self) -> &ActiveSets {
        &self.active
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_vertices() {
            return Err(Error::Dimension {
                expected: self.num_vertices(),
                got: x.len(),
            });
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("x[{i}] is not finite")));
        }
        Ok(())
    }

    /// Objective value, summed in ascending index order.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.objective_unchecked(x))
    }

    pub(crate) fn objective_unchecked(&self, x: &[f64]) -> f64 {
        let mut fid = 0.0;
        for v in 0..x.len() {
            let d = x[v] - self.y[v];
            fid += self.lam_l2[v] * d * d;
        }
        let mut tv = 0.0;
        for (e, &w) in self.edges.iter().zip(&self.lam_d1) {
            tv += w * (x[e.u] - x[e.v]).abs();
        }
        let mut l1 = 0.0;
        for v in 0..x.len() {
            l1 += self.lam_l1[v] * x[v].abs();
        }
        0.5 * fid + tv + l1
    }

    /// Gradient of the quadratic fidelity term.
    pub fn grad_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.num_vertices() {
            return Err(Error::Dimension {
                expected: self.num_vertices(),
                got: x.len(),
            });
        }
        let mut g = vec![0.0; x.len()];
        self.grad_f_into(x, &mut g);
        Ok(g)
    }

    pub(crate) fn grad_f_into(&self, x: &[f64], out: &mut [f64]) {
        for v in 0..x.len() {
            out[v] = self.lam_l2[v] * (x[v] - self.y[v]);
        }
    }

    /// Diagonal Lipschitz metric of the fidelity gradient: `lam_l2[v]` where
    /// positive, `fallback` elsewhere.
    pub fn lipschitz_metric(&self, fallback: f64) -> Result<DiagonalMetric> {
        if !(fallback.is_finite() && fallback > 0.0) {
            return Err(Error::InvalidInput(format!(
                "lipschitz fallback must be > 0, got {fallback}"
            )));
        }
        DiagonalMetric::new(
            self.lam_l2
                .iter()
                .map(|&l| if l > 0.0 { l } else { fallback })
                .collect(),
        )
    }

    /// Mean of the positive fidelity weights, or 1 when there are none.
    pub fn default_lipschitz_fallback(&self) -> f64 {
        let (sum, count) = self
            .lam_l2
            .iter()
            .filter(|&&l| l > 0.0)
            .fold((0.0, 0usize), |(s, c), &l| (s + l, c + 1));
        if count == 0 {
            1.0
        } else {
            sum / count as f64
        }
    }

    /// Default tolerance for deciding that a difference is zero in the
    /// metrics: `1e-9 * (max|y| + 1)`.
    pub fn default_zero_tol(&self) -> f64 {
        1e-9 * (self.y.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + 1.0)
    }

    /// Ratio of the border length of `y`'s level sets to that of `x`'s.
    /// Returns `f64::INFINITY` when `x` has no jump at all.
    pub fn compression_ratio(&self, x: &[f64], zero_tol: f64) -> Result<f64> {
        self.check_point(x)?;
        let mu = self
            .mu
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("compression ratio needs mu".into()))?;
        let jump = |s: &[f64], e: &Edge| (s[e.u] - s[e.v]).abs() > zero_tol;
        let mut num = 0.0;
        let mut den = 0.0;
        for (e, &m) in self.edges.iter().zip(mu) {
            if jump(&self.y, e) {
                num += m;
            }
            if jump(x, e) {
                den += m;
            }
        }
        Ok(if den == 0.0 { f64::INFINITY } else { num / den })
    }

    /// Weighted root-mean-square deviation of `x` from `y`, relative to the
    /// weighted deviation of `y` from its weighted mean.
    pub fn relative_error(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        let nu = self
            .nu
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("relative error needs nu".into()))?;
        let mut total = 0.0;
        let mut weighted = 0.0;
        for v in 0..nu.len() {
            total += nu[v];
            weighted += nu[v] * self.y[v];
        }
        if total <= 0.0 {
            return Err(Error::InvalidInput("sum of nu is zero".into()));
        }
        let mean = weighted / total;
        let mut num = 0.0;
        let mut den = 0.0;
        for v in 0..nu.len() {
            num += nu[v] * (x[v] - self.y[v]).powi(2);
            den += nu[v] * (self.y[v] - mean).powi(2);
        }
        if den <= 0.0 {
            return Err(Error::InvalidInput(
                "y is constant on the support of nu".into(),
            ));
        }
        Ok(num.sqrt() / den.sqrt())
    }
}
