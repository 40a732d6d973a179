//! Diagonal preconditioners built from per-term quadratic approximations.
//!
//! Every term of the splitting suggests a diagonal metric: the fidelity term
//! its own (diagonal) Hessian, each l1 or total-variation term the Hessian of
//! a quadratic majorant at the current point. The step metric `gamma` and the
//! per-term weights are derived from these so that
//!
//! * `gamma_v * l_v <= delta (4 - 2 rho)` for the Lipschitz metric `l`;
//! * the weights of all terms covering a vertex, plus the residual weight of
//!   the zero term, sum to one.

use crate::error::{Error, Result};
use crate::graph::{DiagonalMetric, GraphProblem};
use crate::solver::AuxiliaryVariables;

/// How the step metric is derived from the approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    /// Inverse Hessian of the smooth part alone.
    SmoothOnly,
    /// Inverse of the summed Hessians of all terms.
    WholeFunctional,
}

/// How per-term weights are normalized to a partition of identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Each coordinate normalized separately; no residual term.
    CoordinateScaled,
    /// Each term scaled by one scalar, keeping its metric's shape; the
    /// leftover goes to a residual zero term.
    ShapePreserving,
}

/// Diagonal Hessian coefficients of the quadratic approximations.
///
/// `m_edge` is aligned with `ActiveSets::e_plus`, `m_vertex` with `v_plus`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadApprox {
    pub m_f: Vec<f64>,
    pub m_edge: Vec<[f64; 2]>,
    pub m_vertex: Vec<f64>,
}

/// Step metric and weights of the splitting.
///
/// `w_edge` and `w_vertex` are aligned with the active sets of the problem
/// they were built for. `residual_support` lists the vertices with a positive
/// residual weight, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Preconditioner {
    pub gamma: Vec<f64>,
    pub w_edge: Vec<[f64; 2]>,
    pub w_vertex: Vec<f64>,
    pub w_residual: Vec<f64>,
    pub residual_support: Vec<usize>,
    pub weight_mode: WeightMode,
}

/// Safeguard floor for the l1 threshold when the reference point is zero.
pub const EPS_FLOOR: f64 = 1e-300;

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "epsilon must be > 0, got {eps}"
        )))
    }
}

/// Hessian of the quadratic majorant of `lam |x_v|` at `xhat`.
pub fn quad_approx_vertex(xhat: f64, lam: f64, eps_l1: f64) -> Result<f64> {
    check_eps(eps_l1)?;
    Ok(lam / xhat.abs().max(eps_l1))
}

/// Common diagonal coefficient of the majorant of `lam |x_u - x_v|` at
/// `(xhat_u, xhat_v)`, off-diagonal terms dropped.
pub fn quad_approx_edge(xhat_u: f64, xhat_v: f64, lam: f64, eps_d1: f64) -> Result<f64> {
    check_eps(eps_d1)?;
    Ok(lam / (xhat_u - xhat_v).abs().max(eps_d1))
}

/// Default safeguards at `xhat`.
#[derive(Debug, Clone, PartialEq)]
pub struct Epsilons {
    pub eps_l1: f64,
    /// Aligned with `ActiveSets::e_plus`.
    pub eps_d1: Vec<f64>,
}

/// `eps_l1 = 1e-6 * mean |xhat|` (floored), and per active edge
/// `eps_d1 = max(|xhat_u| / 10, eps_l1)` where `u` is the lower endpoint.
pub fn eps_defaults(p: &GraphProblem, xhat: &[f64]) -> Result<Epsilons> {
    if xhat.len() != p.num_vertices() {
        return Err(Error::Dimension {
            expected: p.num_vertices(),
            got: xhat.len(),
        });
    }
    let mut sum = 0.0;
    for v in xhat {
        sum += v.abs();
    }
    let n = xhat.len().max(1) as f64;
    let eps_l1 = (1e-6 * sum / n).max(EPS_FLOOR);
    let eps_d1 = p
        .active()
        .e_plus
        .iter()
        .map(|&k| (xhat[p.edges()[k].u].abs() / 10.0).max(eps_l1))
        .collect();
    Ok(Epsilons { eps_l1, eps_d1 })
}

impl QuadApprox {
    /// Approximations at the point `xhat`, with default safeguards.
    pub fn at_point(p: &GraphProblem, xhat: &[f64]) -> Result<Self> {
        let eps = eps_defaults(p, xhat)?;
        let active = p.active();
        let m_edge = active
            .e_plus
            .iter()
            .zip(&eps.eps_d1)
            .map(|(&k, &e)| {
                let edge = p.edges()[k];
                quad_approx_edge(xhat[edge.u], xhat[edge.v], p.lam_d1()[k], e).map(|m| [m, m])
            })
            .collect::<Result<_>>()?;
        let m_vertex = active
            .v_plus
            .iter()
            .map(|&v| quad_approx_vertex(xhat[v], p.lam_l1()[v], eps.eps_l1))
            .collect::<Result<_>>()?;
        Ok(QuadApprox {
            m_f: p.lam_l2().to_vec(),
            m_edge,
            m_vertex,
        })
    }

    /// Coarse approximations used before any iterate is available: every
    /// amplitude and every difference is replaced by the mean amplitude of
    /// the observed values.
    pub fn cold_start(p: &GraphProblem) -> Self {
        let amp = observed_amplitude(p);
        let active = p.active();
        QuadApprox {
            m_f: p.lam_l2().to_vec(),
            m_edge: active
                .e_plus
                .iter()
                .map(|&k| {
                    let m = p.lam_d1()[k] / amp;
                    [m, m]
                })
                .collect(),
            m_vertex: active.v_plus.iter().map(|&v| p.lam_l1()[v] / amp).collect(),
        }
    }

    fn check_dims(&self, p: &GraphProblem) -> Result<()> {
        let a = p.active();
        if self.m_f.len() != p.num_vertices()
            || self.m_edge.len() != a.e_plus.len()
            || self.m_vertex.len() != a.v_plus.len()
        {
            return Err(Error::InvalidInput(
                "quadratic approximation does not match the problem's active sets".into(),
            ));
        }
        Ok(())
    }
}

/// Mean |y_v| over observed vertices (positive fidelity); 1 if that is not
/// positive.
pub fn observed_amplitude(p: &GraphProblem) -> f64 {
    let (sum, count) = p
        .y()
        .iter()
        .zip(p.lam_l2())
        .filter(|(_, &l)| l > 0.0)
        .fold((0.0, 0usize), |(s, c), (y, _)| (s + y.abs(), c + 1));
    let amp = if count > 0 { sum / count as f64 } else { 0.0 };
    if amp > 0.0 && amp.is_finite() {
        amp
    } else {
        1.0
    }
}

fn check_relaxation(rho_bar: f64, delta: f64) -> Result<()> {
    if !(rho_bar > 0.0 && rho_bar < 2.0) {
        return Err(Error::Config(format!(
            "relaxation must lie in (0, 2), got {rho_bar}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(())
}

/// Sum over the terms covering each vertex of their Hessian coefficient,
/// in ascending term order (edges first, then vertex terms).
fn summed_term_hessians(p: &GraphProblem, qa: &QuadApprox) -> Vec<f64> {
    let mut sums = vec![0.0; p.num_vertices()];
    for (&k, m) in p.active().e_plus.iter().zip(&qa.m_edge) {
        let e = p.edges()[k];
        sums[e.u] += m[0];
        sums[e.v] += m[1];
    }
    for (&v, m) in p.active().v_plus.iter().zip(&qa.m_vertex) {
        sums[v] += m;
    }
    sums
}

/// Largest `g <= cap / l` whose product with `l` does not round above `cap`.
fn capped_step(cap: f64, l: f64) -> f64 {
    let mut g = cap / l;
    while g * l > cap {
        g = g.next_down();
    }
    g
}

/// Step metric: inverse approximate Hessian, capped at
/// `delta (4 - 2 rho_bar) / l_v`.
pub fn build_gamma(
    p: &GraphProblem,
    qa: &QuadApprox,
    lipschitz: &DiagonalMetric,
    rho_bar: f64,
    delta: f64,
    mode: GammaMode,
) -> Result<Vec<f64>> {
    check_relaxation(rho_bar, delta)?;
    qa.check_dims(p)?;
    if lipschitz.len() != p.num_vertices() {
        return Err(Error::Dimension {
            expected: p.num_vertices(),
            got: lipschitz.len(),
        });
    }
    let sums = match mode {
        GammaMode::SmoothOnly => None,
        GammaMode::WholeFunctional => Some(summed_term_hessians(p, qa)),
    };
    let cap = delta * (4.0 - 2.0 * rho_bar);
    (0..p.num_vertices())
        .map(|v| {
            let m = qa.m_f[v] + sums.as_ref().map_or(0.0, |s| s[v]);
            if !(m > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "vertex {v} has a nonpositive approximate Hessian ({m})"
                )));
            }
            Ok(capped_step(cap, lipschitz.coeffs()[v]).min(1.0 / m))
        })
        .collect()
}

/// Per-term weights `gamma_v * m_iv`, normalized according to `mode`.
///
/// Vertices covered by no active term carry their whole weight on the
/// residual term in both modes. In coordinate-scaled mode a vertex covered
/// by active terms whose scaled coefficients sum to zero is an error.
pub fn build_weights(
    p: &GraphProblem,
    gamma: &[f64],
    qa: &QuadApprox,
    mode: WeightMode,
) -> Result<Preconditioner> {
    qa.check_dims(p)?;
    let n = p.num_vertices();
    if gamma.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: gamma.len(),
        });
    }
    let active = p.active();
    let raw_edge: Vec<[f64; 2]> = active
        .e_plus
        .iter()
        .zip(&qa.m_edge)
        .map(|(&k, m)| {
            let e = p.edges()[k];
            [gamma[e.u] * m[0], gamma[e.v] * m[1]]
        })
        .collect();
    let raw_vertex: Vec<f64> = active
        .v_plus
        .iter()
        .zip(&qa.m_vertex)
        .map(|(&v, m)| gamma[v] * m)
        .collect();

    let mut s_tilde = vec![0.0; n];
    let mut touched = vec![false; n];
    for (&k, w) in active.e_plus.iter().zip(&raw_edge) {
        let e = p.edges()[k];
        s_tilde[e.u] += w[0];
        s_tilde[e.v] += w[1];
        touched[e.u] = true;
        touched[e.v] = true;
    }
    for (&v, w) in active.v_plus.iter().zip(&raw_vertex) {
        s_tilde[v] += w;
        touched[v] = true;
    }

    let (w_edge, w_vertex): (Vec<[f64; 2]>, Vec<f64>) = match mode {
        WeightMode::CoordinateScaled => {
            if let Some(v) = (0..n).find(|&v| touched[v] && !(s_tilde[v] > 0.0)) {
                return Err(Error::InvalidInput(format!(
                    "vertex {v} has zero total weight in coordinate-scaled mode"
                )));
            }
            (
                active
                    .e_plus
                    .iter()
                    .zip(&raw_edge)
                    .map(|(&k, w)| {
                        let e = p.edges()[k];
                        [w[0] / s_tilde[e.u], w[1] / s_tilde[e.v]]
                    })
                    .collect(),
                active
                    .v_plus
                    .iter()
                    .zip(&raw_vertex)
                    .map(|(&v, w)| w / s_tilde[v])
                    .collect(),
            )
        }
        WeightMode::ShapePreserving => (
            active
                .e_plus
                .iter()
                .zip(&raw_edge)
                .map(|(&k, w)| {
                    let e = p.edges()[k];
                    let s = s_tilde[e.u].max(s_tilde[e.v]);
                    [w[0] / s, w[1] / s]
                })
                .collect(),
            active
                .v_plus
                .iter()
                .zip(&raw_vertex)
                .map(|(&v, w)| w / s_tilde[v])
                .collect(),
        ),
    };
    for (i, w) in w_edge.iter().flatten().chain(&w_vertex).enumerate() {
        if !(w.is_finite() && *w > 0.0) {
            return Err(Error::Numerical(format!(
                "weight {i} is not strictly positive ({w})"
            )));
        }
    }

    let mut sums = vec![0.0; n];
    for (&k, w) in active.e_plus.iter().zip(&w_edge) {
        let e = p.edges()[k];
        sums[e.u] += w[0];
        sums[e.v] += w[1];
    }
    for (&v, w) in active.v_plus.iter().zip(&w_vertex) {
        sums[v] += w;
    }
    let w_residual: Vec<f64> = (0..n)
        .map(|v| {
            if !touched[v] {
                1.0
            } else if mode == WeightMode::CoordinateScaled {
                0.0
            } else {
                // rounding can leave a tiny negative remainder
                (1.0 - sums[v]).max(0.0)
            }
        })
        .collect();
    let residual_support = (0..n).filter(|&v| w_residual[v] > 0.0).collect();
    Ok(Preconditioner {
        gamma: gamma.to_vec(),
        w_edge,
        w_vertex,
        w_residual,
        residual_support,
        weight_mode: mode,
    })
}

/// Parameters shared by every (re)build of the preconditioner.
#[derive(Debug, Clone, Copy)]
pub struct PrecondParams {
    pub rho: f64,
    pub delta: f64,
    pub gamma_mode: GammaMode,
    pub weight_mode: WeightMode,
}

impl Preconditioner {
    pub fn build(
        p: &GraphProblem,
        qa: &QuadApprox,
        lipschitz: &DiagonalMetric,
        params: &PrecondParams,
    ) -> Result<Self> {
        let gamma = build_gamma(
            p,
            qa,
            lipschitz,
            params.rho,
            params.delta,
            params.gamma_mode,
        )?;
        build_weights(p, &gamma, qa, params.weight_mode)
    }

    /// Largest deviation from one of the per-vertex weight sums.
    pub fn partition_error(&self, p: &GraphProblem) -> f64 {
        let mut sums = self.w_residual.clone();
        for (&k, w) in p.active().e_plus.iter().zip(&self.w_edge) {
            let e = p.edges()[k];
            sums[e.u] += w[0];
            sums[e.v] += w[1];
        }
        for (&v, w) in p.active().v_plus.iter().zip(&self.w_vertex) {
            sums[v] += w;
        }
        sums.iter().fold(0.0, |m, s| f64::max(m, (s - 1.0).abs()))
    }

    /// `max_v gamma_v l_v`, the norm of `L^1/2 Gamma L^1/2`.
    pub fn step_norm(&self, lipschitz: &DiagonalMetric) -> f64 {
        self.gamma
            .iter()
            .zip(lipschitz.coeffs())
            .fold(0.0, |m, (g, l)| f64::max(m, g * l))
    }
}

/// Remaps auxiliary variables from the `old` preconditioner to `new` while
/// keeping the primal point `x`.
///
/// For each term `i` the implied subgradient
/// `y_i = (w_i / gamma) (x - gamma bx - z_i)` is held fixed and `z_i` is
/// solved for under the new metric. The residual term's subgradient is zero,
/// so its variable becomes `x - gamma bx` on the new residual support.
pub fn recondition(
    p: &GraphProblem,
    x: &[f64],
    bx: &[f64],
    old: &Preconditioner,
    new: &Preconditioner,
    z: &AuxiliaryVariables,
    keep_residual: bool,
) -> Result<AuxiliaryVariables> {
    let n = p.num_vertices();
    let active = p.active();
    for len in [x.len(), bx.len(), old.gamma.len(), new.gamma.len()] {
        if len != n {
            return Err(Error::Dimension {
                expected: n,
                got: len,
            });
        }
    }
    for (got, want) in [
        (z.z_edge.len(), active.e_plus.len()),
        (z.z_vertex.len(), active.v_plus.len()),
        (old.w_edge.len(), active.e_plus.len()),
        (new.w_edge.len(), active.e_plus.len()),
        (old.w_vertex.len(), active.v_plus.len()),
        (new.w_vertex.len(), active.v_plus.len()),
    ] {
        if got != want {
            return Err(Error::Dimension {
                expected: want,
                got,
            });
        }
    }
    let remap = |j: usize, z: f64, w_old: f64, w_new: f64| {
        let y = (w_old / old.gamma[j]) * (x[j] - old.gamma[j] * bx[j] - z);
        (x[j] - new.gamma[j] * bx[j]) - (new.gamma[j] / w_new) * y
    };
    let z_edge = active
        .e_plus
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let e = p.edges()[k];
            [
                remap(e.u, z.z_edge[i][0], old.w_edge[i][0], new.w_edge[i][0]),
                remap(e.v, z.z_edge[i][1], old.w_edge[i][1], new.w_edge[i][1]),
            ]
        })
        .collect();
    let z_vertex = active
        .v_plus
        .iter()
        .enumerate()
        .map(|(i, &v)| remap(v, z.z_vertex[i], old.w_vertex[i], new.w_vertex[i]))
        .collect();
    let z_residual = if keep_residual {
        new.residual_support
            .iter()
            .map(|&j| x[j] - new.gamma[j] * bx[j])
            .collect()
    } else {
        Vec::new()
    };
    Ok(AuxiliaryVariables {
        z_edge,
        z_vertex,
        z_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::ProblemData;

    fn problem(
        y: Vec<f64>,
        l2: Vec<f64>,
        l1: Vec<f64>,
        edges: Vec<(usize, usize)>,
        d1: Vec<f64>,
    ) -> GraphProblem {
        GraphProblem::new(ProblemData {
            y,
            lam_l2: l2,
            lam_l1: l1,
            edges,
            lam_d1: d1,
            mu: None,
            nu: None,
        })
        .unwrap()
    }

    #[test]
    fn vertex_approximation() {
        assert_eq!(quad_approx_vertex(0.0, 2.0, 0.5).unwrap(), 4.0);
        let m = quad_approx_vertex(2.0, 1.0, 1e-9).unwrap();
        assert_eq!(m, 0.5);
        // second derivative of q(x) = (lam/2) x^2 / |xhat| + (lam/2) |xhat|
        let q = |x: f64| 0.5 * x * x / 2.0 + 0.5 * 2.0;
        let h = 1e-3;
        let fd = (q(1.0 + h) - 2.0 * q(1.0) + q(1.0 - h)) / (h * h);
        assert!((fd - m).abs() < 1e-6);
    }

    #[test]
    fn edge_approximation() {
        assert_eq!(quad_approx_edge(1.0, 1.0, 3.0, 0.5).unwrap(), 6.0);
        let m = quad_approx_edge(5.0, 1.0, 2.0, 1e-9).unwrap();
        assert_eq!(m, 0.5);
        let q = |a: f64, b: f64| 0.5 * 2.0 * (a - b).powi(2) / 4.0 + 0.5 * 2.0 * 4.0;
        let h = 1e-3;
        let fd = (q(5.0 + h, 1.0) - 2.0 * q(5.0, 1.0) + q(5.0 - h, 1.0)) / (h * h);
        assert!((fd - m).abs() < 1e-6);
        assert!(quad_approx_edge(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn epsilon_defaults() {
        let p = problem(
            vec![0.0; 3],
            vec![1.0; 3],
            vec![0.0; 3],
            vec![(0, 1), (1, 2)],
            vec![1.0, 1.0],
        );
        let e = eps_defaults(&p, &[0.0; 3]).unwrap();
        assert_eq!(e.eps_l1, EPS_FLOOR);
        assert_eq!(e.eps_d1, vec![EPS_FLOOR; 2]);
        let e = eps_defaults(&p, &[1.0, -1.0, 1.0]).unwrap();
        assert_eq!(e.eps_l1, 1e-6);
        let e = eps_defaults(&p, &[5.0, 0.0, 0.0]).unwrap();
        assert_eq!(e.eps_d1[0], 0.5);
        assert_eq!(e.eps_d1[1], e.eps_l1);
    }

    #[test]
    fn gamma_whole_functional_single_vertex() {
        // vertex 0: m_f = 1, one incident edge coefficient 1
        let p = problem(
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![0.0; 2],
            vec![(0, 1)],
            vec![1.0],
        );
        let qa = QuadApprox {
            m_f: vec![1.0, 1.0],
            m_edge: vec![[1.0, 1.0]],
            m_vertex: vec![],
        };
        let l = DiagonalMetric::identity(2);
        let g = build_gamma(&p, &qa, &l, 1.5, 0.99, GammaMode::WholeFunctional).unwrap();
        assert_eq!(g, vec![0.5, 0.5]);

        let tiny = QuadApprox {
            m_f: vec![1e-12, 1e-12],
            m_edge: vec![[1e-12, 1e-12]],
            m_vertex: vec![],
        };
        let g = build_gamma(&p, &tiny, &l, 1.5, 0.99, GammaMode::WholeFunctional).unwrap();
        assert_eq!(g, vec![0.99 * (4.0 - 3.0); 2]);

        let smooth = QuadApprox {
            m_f: vec![2.0, 2.0],
            m_edge: vec![[100.0, 100.0]],
            m_vertex: vec![],
        };
        let g = build_gamma(&p, &smooth, &l, 1.5, 0.99, GammaMode::SmoothOnly).unwrap();
        assert_eq!(g, vec![0.5, 0.5]);

        assert!(build_gamma(&p, &qa, &l, 2.0, 0.99, GammaMode::WholeFunctional).is_err());
        let zero = QuadApprox {
            m_f: vec![0.0, 1.0],
            ..smooth
        };
        assert!(build_gamma(&p, &zero, &l, 1.5, 0.99, GammaMode::SmoothOnly).is_err());
    }

    #[test]
    fn coordinate_scaled_weights() {
        // vertex 1 covered by two edges with raw weights 1 and 3
        let p = problem(
            vec![0.0; 3],
            vec![1.0; 3],
            vec![0.0; 3],
            vec![(0, 1), (1, 2)],
            vec![1.0, 1.0],
        );
        let qa = QuadApprox {
            m_f: vec![1.0; 3],
            m_edge: vec![[1.0, 1.0], [3.0, 3.0]],
            m_vertex: vec![],
        };
        let pc = build_weights(&p, &[1.0; 3], &qa, WeightMode::CoordinateScaled).unwrap();
        assert_eq!(pc.w_edge, vec![[1.0, 0.25], [0.75, 1.0]]);
        assert_eq!(pc.w_residual, vec![0.0; 3]);
        assert!(pc.residual_support.is_empty());
        assert!(pc.partition_error(&p) <= 1e-12);

        let bad = QuadApprox {
            m_edge: vec![[0.0, 0.0], [3.0, 3.0]],
            ..qa
        };
        assert!(build_weights(&p, &[1.0; 3], &bad, WeightMode::CoordinateScaled).is_err());
    }

    #[test]
    fn shape_preserving_disjoint_supports() {
        let p = problem(vec![0.0; 2], vec![1.0; 2], vec![1.0, 1.0], vec![], vec![]);
        let qa = QuadApprox {
            m_f: vec![1.0; 2],
            m_edge: vec![],
            m_vertex: vec![0.4, 0.8],
        };
        let pc = build_weights(&p, &[1.0, 1.0], &qa, WeightMode::ShapePreserving).unwrap();
        assert_eq!(pc.w_vertex, vec![1.0, 1.0]);
        assert_eq!(pc.w_residual, vec![0.0, 0.0]);
        assert!(pc.partition_error(&p) <= 1e-12);
    }

    #[test]
    fn shape_preserving_keeps_ratio_and_fills_residual() {
        let p = problem(
            vec![0.0; 3],
            vec![1.0; 3],
            vec![0.0; 3],
            vec![(0, 1), (1, 2)],
            vec![1.0, 1.0],
        );
        let qa = QuadApprox {
            m_f: vec![1.0; 3],
            m_edge: vec![[1.0, 2.0], [3.0, 1.0]],
            m_vertex: vec![],
        };
        let pc = build_weights(&p, &[1.0; 3], &qa, WeightMode::ShapePreserving).unwrap();
        // s~ = (1, 5, 1): both edges scaled by 1/5
        assert_eq!(pc.w_edge, vec![[0.2, 0.4], [0.6, 0.2]]);
        assert_eq!(pc.residual_support, vec![0, 2]);
        assert!(pc.partition_error(&p) <= 1e-12);
    }

    #[test]
    fn uncovered_by_terms_goes_to_residual() {
        let p = problem(
            vec![1.0, 2.0, 3.0],
            vec![1.0; 3],
            vec![0.0; 3],
            vec![(0, 1)],
            vec![1.0],
        );
        let qa = QuadApprox::cold_start(&p);
        for mode in [WeightMode::CoordinateScaled, WeightMode::ShapePreserving] {
            let pc = build_weights(&p, &[0.5; 3], &qa, mode).unwrap();
            assert_eq!(pc.w_residual[2], 1.0);
            assert!(pc.residual_support.contains(&2));
        }
    }

    #[test]
    fn recondition_identity_and_round_trip() {
        let p = problem(
            vec![1.0, -2.0, 0.5],
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 0.5],
            vec![(0, 1), (1, 2)],
            vec![1.0, 0.3],
        );
        let l = p.lipschitz_metric(1.0).unwrap();
        let params = PrecondParams {
            rho: 1.5,
            delta: 0.99,
            gamma_mode: GammaMode::WholeFunctional,
            weight_mode: WeightMode::CoordinateScaled,
        };
        let old = Preconditioner::build(&p, &QuadApprox::cold_start(&p), &l, &params).unwrap();
        let x = [0.3, -1.1, 0.2];
        let new =
            Preconditioner::build(&p, &QuadApprox::at_point(&p, &x).unwrap(), &l, &params).unwrap();
        let bx = p.grad_f(&x).unwrap();
        let z = AuxiliaryVariables {
            z_edge: vec![[0.1, 0.7], [-0.4, 2.0]],
            z_vertex: vec![1.5, -0.25],
            z_residual: vec![],
        };
        let same = recondition(&p, &x, &bx, &old, &old, &z, false).unwrap();
        for (a, b) in same.flat().iter().zip(z.flat()) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
        let there = recondition(&p, &x, &bx, &old, &new, &z, false).unwrap();
        let back = recondition(&p, &x, &bx, &new, &old, &there, false).unwrap();
        for (a, b) in back.flat().iter().zip(z.flat()) {
            assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn recondition_scalar_metric_shift() {
        let p = problem(
            vec![1.0, 3.0],
            vec![1.0, 1.0],
            vec![0.0; 2],
            vec![(0, 1)],
            vec![1.0],
        );
        let make = |g: f64, w: f64| Preconditioner {
            gamma: vec![g, g],
            w_edge: vec![[w, w]],
            w_vertex: vec![],
            w_residual: vec![0.0, 0.0],
            residual_support: vec![],
            weight_mode: WeightMode::CoordinateScaled,
        };
        let (old, new) = (make(0.8, 1.0), make(0.4, 1.0));
        let x = [1.5, 2.0];
        let bx = p.grad_f(&x).unwrap();
        let z = AuxiliaryVariables {
            z_edge: vec![[0.2, -0.3]],
            z_vertex: vec![],
            z_residual: vec![],
        };
        let out = recondition(&p, &x, &bx, &old, &new, &z, false).unwrap();
        for j in 0..2 {
            let y = (1.0 / 0.8) * (x[j] - 0.8 * bx[j] - z.z_edge[0][j]);
            let want = x[j] - 0.4 * bx[j] - 0.4 * y;
            assert!((out.z_edge[0][j] - want).abs() < 1e-15);
        }
    }
}
