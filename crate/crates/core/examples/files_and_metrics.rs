//! Round trip through the text formats: write an instance, load it back,
//! solve, and report the aggregation metrics.

use pgfb::io::{format_solution, load_problem, save_problem};
use pgfb::synth::{grid_instance, GridSpec};
use pgfb::{solve, SolverConfig};

fn main() -> pgfb::Result<()> {
    let dir = std::env::temp_dir().join(format!("pgfb-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let (v, e) = (dir.join("vertices.txt"), dir.join("edges.txt"));
    save_problem(&grid_instance(&GridSpec::default())?, &v, &e)?;

    let p = load_problem(&v, &e)?;
    let sol = solve(&p, &SolverConfig::default())?;
    std::fs::write(dir.join("x.txt"), format_solution(&sol.x))?;
    println!("vertices           {}", p.num_vertices());
    println!("edges              {}", p.num_edges());
    println!("objective          {:.6}", p.objective(&sol.x)?);
    println!(
        "compression ratio  {:.3}",
        p.compression_ratio(&sol.x, p.default_zero_tol())?
    );
    println!("relative error     {:.4}", p.relative_error(&sol.x)?);
    println!("written to         {}", dir.display());
    Ok(())
}
