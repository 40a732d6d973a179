//! Drives the solver by hand and rebuilds the preconditioner at chosen
//! iterations, printing the objective around each rebuild.

use pgfb::synth::{grid_instance, GridSpec};
use pgfb::{PgfbSolver, SolverConfig};

fn main() -> pgfb::Result<()> {
    let p = grid_instance(&GridSpec {
        width: 24,
        height: 24,
        seed: 4,
        zero_frac: 0.1,
        decades: 1.0,
        ..Default::default()
    })?;
    let cfg = SolverConfig {
        recond_threshold: 0.0,
        ..Default::default()
    };
    let mut s = PgfbSolver::new(&p, cfg)?;
    let rebuild_at = [20, 60, 150];
    for k in 1..=300 {
        s.step()?;
        if rebuild_at.contains(&k) {
            let before = p.objective(&s.state().x)?;
            s.recondition()?;
            s.step()?;
            println!(
                "iteration {k}: F = {before:.6} before rebuild, {:.6} one step after",
                p.objective(&s.state().x)?
            );
        }
    }
    println!("final F = {:.6}", p.objective(&s.state().x)?);
    Ok(())
}
