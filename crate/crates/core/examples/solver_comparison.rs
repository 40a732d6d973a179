//! Compares reconditioned PGFB, PGFB without reconditioning, and the
//! primal-dual baseline on a synthetic grid, reporting the iterations each
//! needs to reach a relative objective gap.

use pgfb::compare::{compare, iterations_to_gap, RunSpec};
use pgfb::synth::{grid_instance, GridSpec};
use pgfb::SolverConfig;

fn main() -> pgfb::Result<()> {
    let p = grid_instance(&GridSpec {
        width: 48,
        height: 48,
        seed: 2,
        pieces: 5,
        zero_frac: 0.1,
        decades: 1.0,
        ..Default::default()
    })?;
    let base = SolverConfig {
        max_iter: 2000,
        ..Default::default()
    };
    let runs = ["pgfb:1e-3", "pgfb:0", "ppd"]
        .iter()
        .map(|s| RunSpec::parse(s, &base))
        .collect::<pgfb::Result<Vec<_>>>()?;
    let c = compare(&p, &runs, 8000)?;
    println!("reference F = {:.9}", c.reference);
    for rel in [1e-2, 1e-3, 1e-4, 1e-5] {
        let target = rel * (1.0 + c.reference.abs());
        let counts: Vec<String> = c
            .runs
            .iter()
            .map(|(label, t)| {
                let k = iterations_to_gap(t, c.reference, target);
                format!("{label}={}", k.map_or("-".into(), |k| k.to_string()))
            })
            .collect();
        println!("gap {rel:.0e}: {}", counts.join("  "));
    }
    Ok(())
}
