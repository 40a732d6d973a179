//! Synthetic grid instances: a piecewise-constant field observed with
//! Gaussian noise on a 4-connected grid, with heterogeneous extensive
//! weights and an optional fraction of unobserved vertices.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{GraphProblem, ProblemData};

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Standard deviation of the additive noise.
    pub noise: f64,
    /// Number of constant regions (nearest-seed cells).
    pub pieces: usize,
    /// Fraction of vertices with no observation.
    pub zero_frac: f64,
    /// Total-variation weight per unit border length.
    pub tv_weight: f64,
    /// l1 weight on unobserved vertices.
    pub l1_weight: f64,
    /// Extensive weights are drawn log-uniformly over this many decades
    /// on each side of 1; 0 gives unit weights.
    pub decades: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            width: 32,
            height: 32,
            seed: 0,
            noise: 0.3,
            pieces: 4,
            zero_frac: 0.0,
            tv_weight: 1.0,
            l1_weight: 1.0,
            decades: 0.0,
        }
    }
}

/// Number of edges of a `w x h` 4-connected grid.
pub fn grid_edge_count(width: usize, height: usize) -> usize {
    2 * width * height - width - height
}

pub fn grid_instance(spec: &GridSpec) -> Result<GraphProblem> {
    let (w, h) = (spec.width, spec.height);
    if w == 0 || h == 0 || w.checked_mul(h).is_none() {
        return Err(Error::InvalidInput(format!("invalid grid size {w}x{h}")));
    }
    if spec.pieces == 0 {
        return Err(Error::InvalidInput("need at least one piece".into()));
    }
    if !(0.0..1.0).contains(&spec.zero_frac) {
        return Err(Error::InvalidInput(format!(
            "zero fraction must lie in [0, 1), got {}",
            spec.zero_frac
        )));
    }
    if !(spec.noise >= 0.0 && spec.tv_weight >= 0.0 && spec.decades >= 0.0) {
        return Err(Error::InvalidInput(
            "noise, tv weight and decades must be >= 0".into(),
        ));
    }
    if spec.zero_frac > 0.0 && !(spec.l1_weight > 0.0) {
        return Err(Error::InvalidInput(
            "unobserved vertices need a positive l1 weight".into(),
        ));
    }
    let n = w * h;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let centers: Vec<(f64, f64, f64)> = (0..spec.pieces)
        .map(|_| {
            (
                rng.random::<f64>() * w as f64,
                rng.random::<f64>() * h as f64,
                rng.random_range(-5.0..5.0),
            )
        })
        .collect();
    let truth: Vec<f64> = (0..n)
        .map(|id| {
            let (c, r) = ((id % w) as f64 + 0.5, (id / w) as f64 + 0.5);
            centers
                .iter()
                .map(|&(cx, cy, val)| ((cx - c).powi(2) + (cy - r).powi(2), val))
                .fold((f64::INFINITY, 0.0), |best, cur| {
                    if cur.0 < best.0 {
                        cur
                    } else {
                        best
                    }
                })
                .1
        })
        .collect();

    let normal = Normal::new(0.0, spec.noise.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut nu: Vec<f64> = (0..n)
        .map(|_| 10f64.powf(rng.random_range(-1.0..=1.0) * spec.decades))
        .collect();
    let mut y: Vec<f64> = truth
        .iter()
        .map(|t| {
            if spec.noise > 0.0 {
                t + normal.sample(&mut rng)
            } else {
                *t
            }
        })
        .collect();
    let mut lam_l1 = vec![0.0; n];
    let n_zero = (spec.zero_frac * n as f64).round() as usize;
    let mut missing = sample(&mut rng, n, n_zero).into_vec();
    missing.sort_unstable();
    for &v in &missing {
        nu[v] = 0.0;
        y[v] = 0.0;
        lam_l1[v] = spec.l1_weight;
    }

    let mut edges = Vec::with_capacity(grid_edge_count(w, h));
    for r in 0..h {
        for c in 0..w {
            let id = r * w + c;
            if c + 1 < w {
                edges.push((id, id + 1));
            }
            if r + 1 < h {
                edges.push((id, id + w));
            }
        }
    }
    let m = edges.len();
    GraphProblem::new(ProblemData {
        lam_l2: nu.clone(),
        y,
        lam_l1,
        edges,
        lam_d1: vec![spec.tv_weight; m],
        mu: Some(vec![1.0; m]),
        nu: Some(nu),
    })
}
