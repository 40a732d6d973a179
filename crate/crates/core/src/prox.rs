//! Closed-form proximity operators in diagonal metrics.
//!
//! The proximity operator of `g` in the metric `M` maps `x` to
//! `argmin_y 1/2 |x - y|_M^2 + g(y)`. Everything here works for any
//! strictly positive diagonal `M`, which is what lets the splitting solver
//! use per-coordinate step sizes.
//!
//! [`oracle_prox`] is a derivative-free reference minimizer used only to
//! verify the closed forms.

use crate::error::{Error, Result};

/// Soft-thresholding: prox of `lam |.|` in the scalar metric `m`.
#[inline]
pub fn prox_abs_scaled(x: f64, lam: f64, m: f64) -> f64 {
    debug_assert!(lam > 0.0 && m > 0.0);
    let thr = lam / m;
    let a = x.abs();
    if a > thr {
        (1.0 - thr / a) * x
    } else {
        0.0
    }
}

/// Prox of `mu |x1 - x2|` in the metric `diag(m1, m2)`.
///
/// The metric-weighted mean `m1 x1 + m2 x2` is preserved; the two values
/// either merge to that mean or move towards each other by a total of
/// `mu (1/m1 + 1/m2)`.
#[inline]
pub fn prox_pair_diff(x1: f64, x2: f64, mu: f64, m1: f64, m2: f64) -> (f64, f64) {
    debug_assert!(mu > 0.0 && m1 > 0.0 && m2 > 0.0);
    let sum = m1 + m2;
    let w1 = m1 / sum;
    let w2 = m2 / sum;
    let mean = w1 * x1 + w2 * x2;
    let mu_bar = mu * (1.0 / m1 + 1.0 / m2);
    let d = x1 - x2;
    let a = d.abs();
    if a > mu_bar {
        let s = 1.0 - mu_bar / a;
        (mean + s * w2 * d, mean - s * w1 * d)
    } else {
        (mean, mean)
    }
}

/// A coordinate subspace, optionally restricted to its zero-mean part
/// (the orthogonal complement of the constant vector on the subset).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    pub coords: Vec<usize>,
    pub remove_mean: bool,
}

impl Subspace {
    pub fn span(coords: Vec<usize>) -> Self {
        Subspace {
            coords,
            remove_mean: false,
        }
    }

    pub fn deviation(coords: Vec<usize>) -> Self {
        Subspace {
            coords,
            remove_mean: true,
        }
    }
}

/// Metric-orthogonal projection of `x` on `s`, restricted to `s.coords`,
/// and its metric norm.
fn project(x: &[f64], s: &Subspace, metric: Option<&[f64]>) -> Result<(Vec<f64>, f64)> {
    if s.coords.is_empty() {
        return Err(Error::InvalidInput("empty coordinate subset".into()));
    }
    let m = |j: usize| metric.map_or(1.0, |m| m[j]);
    if let Some(mm) = metric {
        if mm.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: mm.len(),
            });
        }
    }
    if let Some(&j) = s.coords.iter().find(|&&j| j >= x.len()) {
        return Err(Error::InvalidInput(format!("coordinate {j} out of range")));
    }
    let shift = if s.remove_mean {
        let (num, den) = s
            .coords
            .iter()
            .fold((0.0, 0.0), |(a, b), &j| (a + m(j) * x[j], b + m(j)));
        num / den
    } else {
        0.0
    };
    let proj: Vec<f64> = s.coords.iter().map(|&j| x[j] - shift).collect();
    let norm = s
        .coords
        .iter()
        .zip(&proj)
        .map(|(&j, p)| m(j) * p * p)
        .sum::<f64>()
        .sqrt();
    Ok((proj, norm))
}

/// In-place prox of `lam |P_S x|_M` in the metric `M` (`None` for identity).
/// Only the coordinates of `s` are touched.
pub fn prox_group_seminorm_in_place(
    x: &mut [f64],
    lam: f64,
    s: &Subspace,
    metric: Option<&[f64]>,
) -> Result<()> {
    let (proj, norm) = project(x, s, metric)?;
    let keep = if norm > lam { lam / norm } else { 1.0 };
    for (&j, p) in s.coords.iter().zip(&proj) {
        x[j] -= keep * p;
    }
    Ok(())
}

pub fn prox_group_seminorm(
    x: &[f64],
    lam: f64,
    s: &Subspace,
    metric: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    prox_group_seminorm_in_place(&mut out, lam, s, metric)?;
    Ok(out)
}

/// In-place prox (metric projection) of the constraint `|P_S x|_M <= lam`.
pub fn prox_group_constraint_in_place(
    x: &mut [f64],
    lam: f64,
    s: &Subspace,
    metric: Option<&[f64]>,
) -> Result<()> {
    let (proj, norm) = project(x, s, metric)?;
    if norm > lam {
        let shrink = 1.0 - lam / norm;
        for (&j, p) in s.coords.iter().zip(&proj) {
            x[j] -= shrink * p;
        }
    }
    Ok(())
}

pub fn prox_group_constraint(
    x: &[f64],
    lam: f64,
    s: &Subspace,
    metric: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let mut out = x.to_vec();
    prox_group_constraint_in_place(&mut out, lam, s, metric)?;
    Ok(out)
}

/// Search parameters of [`oracle_prox`].
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Grid points per axis in the coarse search.
    pub grid_points: usize,
    /// Absolute width at which golden-section refinement stops. In two
    /// dimensions the inner search always runs to floating-point resolution
    /// so that the outer search sees exact partial minima.
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            grid_points: 2001,
            tol: 1e-9,
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const GOLDEN_CAP: usize = 200;

/// Minimizes a convex (possibly extended-valued) function of one variable
/// over `[center - half, center + half]`: grid scan, then golden section on
/// the bracket around the best grid point.
fn minimize_1d(
    f: &mut dyn FnMut(f64) -> f64,
    center: f64,
    half: f64,
    tol: f64,
    cfg: &OracleConfig,
) -> f64 {
    let n = cfg.grid_points.max(3);
    let lo = center - half;
    let h = 2.0 * half / (n - 1) as f64;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..n {
        let val = f(lo + h * i as f64);
        if val < best_val {
            best_val = val;
            best = i;
        }
    }
    let mut a = lo + h * best.saturating_sub(1) as f64;
    let mut b = lo + h * (best + 1).min(n - 1) as f64;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // the cap only matters for tol = 0, where the bracket shrinks to
    // floating-point resolution
    for _ in 0..GOLDEN_CAP {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    let grid_best = lo + h * best as f64;
    if f(mid) <= f(grid_best) {
        mid
    } else {
        grid_best
    }
}

/// Brute-force prox of `objective` at `x` in the diagonal metric `metric`,
/// for dimension 1 or 2.
///
/// The search box is centered at `x` with half-width `2 |x|_inf + 10`. In
/// two dimensions the second coordinate is minimized exactly (in the sense
/// above) for every trial value of the first, which keeps the outer function
/// convex.
pub fn oracle_prox(
    objective: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    metric: &[f64],
    cfg: &OracleConfig,
) -> Result<Vec<f64>> {
    if metric.len() != x.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: metric.len(),
        });
    }
    let half = 2.0 * x.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + 10.0;
    match x.len() {
        1 => {
            let mut phi = |t: f64| 0.5 * metric[0] * (x[0] - t).powi(2) + objective(&[t]);
            Ok(vec![minimize_1d(&mut phi, x[0], half, cfg.tol, cfg)])
        }
        2 => {
            let inner = |t: f64| {
                let mut psi = |s: f64| {
                    0.5 * metric[0] * (x[0] - t).powi(2)
                        + 0.5 * metric[1] * (x[1] - s).powi(2)
                        + objective(&[t, s])
                };
                let s = minimize_1d(&mut psi, x[1], half, 0.0, cfg);
                (s, psi(s))
            };
            let mut outer = |t: f64| inner(t).1;
            let t = minimize_1d(&mut outer, x[0], half, cfg.tol, cfg);
            Ok(vec![t, inner(t).0])
        }
        d => Err(Error::InvalidInput(format!(
            "oracle supports dimension 1 or 2, got {d}"
        ))),
    }
}
