#![allow(dead_code)]

use pgfb::{GraphProblem, ProblemData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn two_vertex() -> GraphProblem {
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

/// Random connected graph on `n` vertices: a random spanning tree plus
/// `extra` chords. Some fidelity weights are zero (those vertices get an l1
/// weight), some edges are inactive.
pub fn random_problem(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> GraphProblem {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        let e = (a.min(b), a.max(b));
        if a != b && !edges.iter().any(|&(u, v)| (u.min(v), u.max(v)) == e) {
            edges.push(e);
        }
    }
    let mut lam_l2 = Vec::with_capacity(n);
    let mut lam_l1 = Vec::with_capacity(n);
    for _ in 0..n {
        if rng.random_bool(0.2) {
            lam_l2.push(0.0);
            lam_l1.push(rng.random_range(0.1..2.0));
        } else {
            lam_l2.push(rng.random_range(0.1..3.0));
            lam_l1.push(if rng.random_bool(0.3) {
                rng.random_range(0.0..1.0)
            } else {
                0.0
            });
        }
    }
    let lam_d1 = edges
        .iter()
        .map(|_| {
            if rng.random_bool(0.1) {
                0.0
            } else {
                rng.random_range(0.05..2.0)
            }
        })
        .collect();
    let y = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    // keep every vertex covered: an isolated inactive vertex needs fidelity
    let mut data = ProblemData {
        y,
        lam_l2,
        lam_l1,
        edges,
        lam_d1,
        ..Default::default()
    };
    for v in 0..n {
        let touched = data
            .edges
            .iter()
            .zip(&data.lam_d1)
            .any(|(&(a, b), &l)| l > 0.0 && (a == v || b == v));
        if !touched && data.lam_l2[v] == 0.0 && data.lam_l1[v] == 0.0 {
            data.lam_l2[v] = 1.0;
        }
    }
    GraphProblem::new(data).unwrap()
}

/// Random 10-vertex chain with positive fidelity everywhere.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> GraphProblem {
    GraphProblem::new(ProblemData {
        y: (0..n).map(|_| rng.random_range(-5.0..5.0)).collect(),
        lam_l2: (0..n).map(|_| rng.random_range(0.2..3.0)).collect(),
        lam_l1: (0..n)
            .map(|_| {
                if rng.random_bool(0.4) {
                    rng.random_range(0.0..1.0)
                } else {
                    0.0
                }
            })
            .collect(),
        edges: (1..n).map(|v| (v - 1, v)).collect(),
        lam_d1: (1..n).map(|_| rng.random_range(0.1..2.0)).collect(),
        ..Default::default()
    })
    .unwrap()
}

/// Certified optimum by dual coordinate ascent. With `K` stacking the
/// weighted differences and weighted values, the dual of the problem is
/// `max_{|d| <= 1} d.K y - 1/2 d.K L^-1 K^T d` with `x(d) = y - L^-1 K^T d`.
/// Returns `(x, primal, dual)`; `primal - dual` bounds the gap. Requires
/// positive fidelity everywhere.
pub fn dual_oracle(p: &GraphProblem, sweeps: usize) -> (Vec<f64>, f64, f64) {
    let l2 = p.lam_l2();
    assert!(l2.iter().all(|&l| l > 0.0));
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    for (e, &l) in p.edges().iter().zip(p.lam_d1()) {
        if l > 0.0 {
            rows.push(vec![(e.u, l), (e.v, -l)]);
        }
    }
    for (v, &l) in p.lam_l1().iter().enumerate() {
        if l > 0.0 {
            rows.push(vec![(v, l)]);
        }
    }
    let mut d = vec![0.0; rows.len()];
    let mut x = p.y().to_vec();
    for _ in 0..sweeps {
        for (i, row) in rows.iter().enumerate() {
            let q: f64 = row.iter().map(|&(j, c)| c * c / l2[j]).sum();
            let g: f64 = row.iter().map(|&(j, c)| c * x[j]).sum();
            let new = (d[i] + g / q).clamp(-1.0, 1.0);
            let delta = new - d[i];
            if delta != 0.0 {
                for &(j, c) in row {
                    x[j] -= c * delta / l2[j];
                }
                d[i] = new;
            }
        }
    }
    let primal = p.objective(&x).unwrap();
    // dual value at d, evaluated from x(d): d.K y - 1/2 |L^-1/2 K^T d|^2
    let kty: Vec<f64> = x.iter().zip(p.y()).map(|(xi, yi)| yi - xi).collect();
    let dual = rows
        .iter()
        .zip(&d)
        .map(|(row, di)| di * row.iter().map(|&(j, c)| c * p.y()[j]).sum::<f64>())
        .sum::<f64>()
        - 0.5 * kty.iter().zip(l2).map(|(r, l)| l * r * r).sum::<f64>();
    (x, primal, dual)
}

/// Literal generalized forward-backward with scalar step `gamma` and scalar
/// weights, one full copy per term, all copies starting at `y`. Returns the
/// iterates `x_1 .. x_iters`.
pub fn literal_gfb(p: &GraphProblem, rho: f64, delta: f64, iters: usize) -> Vec<Vec<f64>> {
    let n = p.num_vertices();
    let l_max = p.lam_l2().iter().cloned().fold(0.0, f64::max);
    let gamma = delta * (4.0 - 2.0 * rho) / l_max;
    // term list: (kind, a, b, lam)
    let mut terms: Vec<(u8, usize, usize, f64)> = Vec::new();
    for (e, &l) in p.edges().iter().zip(p.lam_d1()) {
        if l > 0.0 {
            terms.push((0, e.u, e.v, l));
        }
    }
    for (v, &l) in p.lam_l1().iter().enumerate() {
        if l > 0.0 {
            terms.push((1, v, v, l));
        }
    }
    if terms.is_empty() {
        terms.push((2, 0, 0, 0.0));
    }
    let w = 1.0 / terms.len() as f64;
    let mut z = vec![p.y().to_vec(); terms.len()];
    let mut x = p.y().to_vec();
    let mut out = Vec::new();
    for _ in 0..iters {
        let grad: Vec<f64> = (0..n).map(|j| p.lam_l2()[j] * (x[j] - p.y()[j])).collect();
        for (t, zi) in terms.iter().zip(z.iter_mut()) {
            let mut u: Vec<f64> = (0..n)
                .map(|j| 2.0 * x[j] - zi[j] - gamma * grad[j])
                .collect();
            // prox of (gamma / w) g_i, scalar metric
            let th = gamma * t.3 / w;
            match t.0 {
                0 => {
                    let (a, b) = (u[t.1], u[t.2]);
                    if (a - b).abs() <= 2.0 * th {
                        u[t.1] = 0.5 * (a + b);
                        u[t.2] = 0.5 * (a + b);
                    } else {
                        let s = (a - b).signum();
                        u[t.1] = a - th * s;
                        u[t.2] = b + th * s;
                    }
                }
                1 => {
                    let a = u[t.1];
                    u[t.1] = a.signum() * (a.abs() - th).max(0.0);
                }
                _ => {}
            }
            for j in 0..n {
                zi[j] += rho * (u[j] - x[j]);
            }
        }
        for j in 0..n {
            let mut acc = 0.0;
            for zi in &z {
                acc += w * zi[j];
            }
            x[j] = acc;
        }
        out.push(x.clone());
    }
    out
}
