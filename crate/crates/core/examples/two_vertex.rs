//! The smallest nontrivial instance: two observations joined by one edge.
//! Every solver should land on the fused-lasso optimum (1, 3).

use pgfb::{solve, Algorithm, GraphProblem, ProblemData, SolverConfig};

fn main() -> pgfb::Result<()> {
    let p = GraphProblem::new(ProblemData {
        y: vec![0.0, 4.0],
        lam_l2: vec![1.0, 1.0],
        lam_l1: vec![0.0, 0.0],
        edges: vec![(0, 1)],
        lam_d1: vec![1.0],
        ..Default::default()
    })?;
    for algo in [Algorithm::Pgfb, Algorithm::GfbScalar, Algorithm::Ppd] {
        let cfg = SolverConfig {
            algo,
            max_iter: 10_000,
            tol: 1e-12,
            ..Default::default()
        };
        let sol = solve(&p, &cfg)?;
        println!(
            "{:>10}: x = ({:.6}, {:.6}), F = {:.6}, {} iterations",
            algo.to_string(),
            sol.x[0],
            sol.x[1],
            p.objective(&sol.x)?,
            sol.trace.len()
        );
    }
    Ok(())
}
