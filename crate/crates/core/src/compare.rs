//! Side-by-side convergence comparison of several solver configurations
//! against a common reference minimum.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::GraphProblem;
use crate::solver::{solve, Algorithm, ConvergenceTrace, SolverConfig};

/// A labelled solver configuration.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub label: String,
    pub cfg: SolverConfig,
}

impl RunSpec {
    /// Parses `pgfb`, `pgfb:<theta>`, `gfb-scalar` or `ppd` on top of
    /// `base`. A bare `pgfb` keeps the base reconditioning threshold.
    pub fn parse(spec: &str, base: &SolverConfig) -> Result<Self> {
        let (name, theta) = match spec.split_once(':') {
            Some((n, t)) => {
                let t: f64 = t
                    .parse()
                    .map_err(|_| Error::Config(format!("bad threshold in `{spec}`")))?;
                (n, Some(t))
            }
            None => (spec, None),
        };
        let algo: Algorithm = name.parse()?;
        if theta.is_some() && algo != Algorithm::Pgfb {
            return Err(Error::Config(format!(
                "only pgfb takes a reconditioning threshold: `{spec}`"
            )));
        }
        let cfg = SolverConfig {
            algo,
            recond_threshold: theta.unwrap_or(base.recond_threshold),
            ..base.clone()
        };
        let label = match algo {
            Algorithm::Pgfb => format!("pgfb-{}", cfg.recond_threshold),
            other => other.to_string(),
        };
        Ok(RunSpec { label, cfg })
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    /// Smallest objective seen across all runs and the reference run.
    pub reference: f64,
    pub runs: Vec<(String, ConvergenceTrace)>,
}

impl Comparison {
    /// CSV with header `algo,iter,seconds,gap`, gap to the reference.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("algo,iter,seconds,gap\n");
        for (label, trace) in &self.runs {
            for r in &trace.records {
                let _ = writeln!(
                    s,
                    "{label},{},{},{}",
                    r.iter,
                    r.seconds,
                    r.objective - self.reference
                );
            }
        }
        s
    }

    pub fn trace(&self, label: &str) -> Option<&ConvergenceTrace> {
        self.runs.iter().find(|(l, _)| l == label).map(|(_, t)| t)
    }
}

/// First iteration whose objective is within `target` of `reference`.
pub fn iterations_to_gap(trace: &ConvergenceTrace, reference: f64, target: f64) -> Option<usize> {
    trace
        .records
        .iter()
        .find(|r| r.objective - reference <= target)
        .map(|r| r.iter)
}

/// Runs every configuration (stopping rule disabled so traces have equal
/// length), then extends the best one to `ref_iter` iterations to obtain
/// the reference minimum.
pub fn compare(p: &GraphProblem, runs: &[RunSpec], ref_iter: usize) -> Result<Comparison> {
    if runs.is_empty() {
        return Err(Error::Config("nothing to compare".into()));
    }
    let mut out = Vec::with_capacity(runs.len());
    for run in runs {
        let cfg = SolverConfig {
            tol: 0.0,
            ..run.cfg.clone()
        };
        out.push((run.label.clone(), solve(p, &cfg)?.trace));
    }
    let min_of = |t: &ConvergenceTrace| {
        t.records
            .iter()
            .map(|r| r.objective)
            .fold(f64::INFINITY, f64::min)
    };
    let best = (0..runs.len())
        .min_by(|&a, &b| min_of(&out[a].1).total_cmp(&min_of(&out[b].1)))
        .unwrap_or(0);
    let ref_cfg = SolverConfig {
        tol: 0.0,
        max_iter: ref_iter.max(runs[best].cfg.max_iter),
        ..runs[best].cfg.clone()
    };
    let ref_trace = solve(p, &ref_cfg)?.trace;
    let reference = out
        .iter()
        .map(|(_, t)| min_of(t))
        .fold(min_of(&ref_trace), f64::min);
    Ok(Comparison {
        reference,
        runs: out,
    })
}
