use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use pgfb::compare::{compare, RunSpec};
use pgfb::io::{format_solution, format_trace, load_problem, save_problem};
use pgfb::synth::{grid_instance, GridSpec};
use pgfb::{solve, Algorithm, Error, Result, SolverConfig};

#[derive(Parser)]
#[command(
    version,
    about = "Preconditioned forward-backward solver for graph problems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Write a synthetic grid instance.
    Synth(SynthArgs),
    /// Run several solvers and write their gap to a common reference.
    Compare(CompareArgs),
}

#[derive(Args)]
struct Instance {
    #[arg(long)]
    vertices: PathBuf,
    #[arg(long)]
    edges: PathBuf,
}

#[derive(Args)]
struct Tuning {
    #[arg(long, default_value_t = 1.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.99)]
    delta: f64,
    #[arg(long, default_value_t = 1e-3)]
    recond_threshold: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, env = "PGFB_THREADS", default_value_t = 1)]
    threads: usize,
}

impl Tuning {
    fn config(&self, algo: Algorithm) -> SolverConfig {
        SolverConfig {
            algo,
            rho: self.rho,
            delta: self.delta,
            recond_threshold: self.recond_threshold,
            max_iter: self.max_iter,
            tol: self.tol,
            threads: self.threads,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long, default_value = "pgfb")]
    algo: Algorithm,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Grid size as WxH.
    #[arg(long, default_value = "32x32", value_parser = parse_grid)]
    grid: (usize, usize),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long, default_value_t = 4)]
    pieces: usize,
    #[arg(long, default_value_t = 0.0)]
    zero_frac: f64,
    #[arg(long, default_value_t = 1.0)]
    tv_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    l1_weight: f64,
    /// Spread of the extensive weights, in decades around 1.
    #[arg(long, default_value_t = 0.0)]
    decades: f64,
    #[arg(long, default_value = "vertices.txt")]
    vertices: PathBuf,
    #[arg(long, default_value = "edges.txt")]
    edges: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    instance: Instance,
    /// Solvers to run: pgfb, pgfb:<theta>, gfb-scalar, ppd.
    #[arg(long, value_delimiter = ',', default_value = "pgfb:1e-3,pgfb:0,ppd")]
    algos: Vec<String>,
    #[command(flatten)]
    tuning: Tuning,
    /// Iterations of the run that fixes the reference minimum.
    #[arg(long, default_value_t = 5000)]
    ref_iter: usize,
    #[arg(long)]
    output: PathBuf,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w = w.parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h = h.parse().map_err(|_| format!("bad height in `{s}`"))?;
    Ok((w, h))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(Error::from)
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let p = load_problem(&a.instance.vertices, &a.instance.edges)?;
    let cfg = a.tuning.config(a.algo);
    let start = Instant::now();
    let sol = solve(&p, &cfg)?;
    let seconds = sol
        .trace
        .last()
        .map_or_else(|| start.elapsed().as_secs_f64(), |r| r.seconds);
    if let Some(path) = &a.trace {
        write(path, &format_trace(&sol.trace))?;
    }
    if let Some(path) = &a.solution {
        write(path, &format_solution(&sol.x))?;
    }
    println!("objective={}", p.objective(&sol.x)?);
    println!("iterations={}", sol.trace.len());
    println!("seconds={seconds}");
    if p.mu().is_some() || p.nu().is_some() {
        println!(
            "compression_ratio={}",
            p.compression_ratio(&sol.x, p.default_zero_tol())?
        );
        println!("relative_error={}", p.relative_error(&sol.x)?);
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let spec = GridSpec {
        width: a.grid.0,
        height: a.grid.1,
        seed: a.seed,
        noise: a.noise,
        pieces: a.pieces,
        zero_frac: a.zero_frac,
        tv_weight: a.tv_weight,
        l1_weight: a.l1_weight,
        decades: a.decades,
    };
    let p = grid_instance(&spec)?;
    save_problem(&p, &a.vertices, &a.edges)?;
    println!("vertices={}", p.num_vertices());
    println!("edges={}", p.num_edges());
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let p = load_problem(&a.instance.vertices, &a.instance.edges)?;
    let base = a.tuning.config(Algorithm::Pgfb);
    let runs = a
        .algos
        .iter()
        .map(|s| RunSpec::parse(s, &base))
        .collect::<Result<Vec<_>>>()?;
    let c = compare(&p, &runs, a.ref_iter)?;
    write(&a.output, &c.to_csv())?;
    println!("reference={}", c.reference);
    for (label, trace) in &c.runs {
        if let Some(last) = trace.last() {
            println!("{label}.gap={}", last.objective - c.reference);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match cli.cmd {
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Synth(a) => cmd_synth(a),
        Cmd::Compare(a) => cmd_compare(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
