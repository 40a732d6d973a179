//! Plain-text instance, solution and trace files.
//!
//! Vertex file: header `vertex y lam_l2 lam_l1 [nu]`, then one
//! whitespace-separated row per vertex with ids `0..n` in order.
//! Edge file: header `u v lam_d1 [mu]`, then one row per edge.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Edge, GraphProblem, ProblemData};
use crate::solver::ConvergenceTrace;

const VERTEX_HEADER: [&str; 4] = ["vertex", "y", "lam_l2", "lam_l1"];
const EDGE_HEADER: [&str; 3] = ["u", "v", "lam_d1"];

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn invalid(line: usize, msg: impl Into<String>) -> Error {
    Error::Validation {
        line: Some(line),
        msg: msg.into(),
    }
}

/// Returns whether the optional trailing column is present.
fn parse_header(text: &str, required: &[&str], optional: &str) -> Result<bool> {
    let cols: Vec<&str> = text.split_whitespace().collect();
    let has_opt = cols.len() == required.len() + 1;
    if cols.len() < required.len()
        || cols.len() > required.len() + 1
        || cols[..required.len()] != *required
        || (has_opt && cols[required.len()] != optional)
    {
        return Err(parse_err(
            1,
            format!("expected header `{} [{optional}]`", required.join(" ")),
        ));
    }
    Ok(has_opt)
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, name: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing column `{name}`")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse `{tok}` as {name}")))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn nonneg(value: f64, line: usize, name: &str) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(invalid(
            line,
            format!("{name} must be finite and >= 0, got {value}"),
        ))
    }
}

/// Parses and validates an instance from the contents of a vertex table and
/// an edge table.
pub fn parse_problem(vertex_table: &str, edge_table: &str) -> Result<GraphProblem> {
    let header = vertex_table
        .lines()
        .next()
        .ok_or_else(|| parse_err(1, "empty vertex file"))?;
    let has_nu = parse_header(header, &VERTEX_HEADER, "nu")?;
    let ncols = VERTEX_HEADER.len() + has_nu as usize;

    let mut data = ProblemData::default();
    let mut nu = Vec::new();
    let mut vertex_lines = Vec::new();
    for (line, text) in data_lines(vertex_table) {
        let mut toks = text.split_whitespace();
        let id: usize = field(toks.next(), line, "vertex")?;
        if id != data.y.len() {
            return Err(parse_err(
                line,
                format!("vertex ids must be consecutive, expected {}", data.y.len()),
            ));
        }
        let y: f64 = field(toks.next(), line, "y")?;
        if !y.is_finite() {
            return Err(invalid(line, "y must be finite"));
        }
        let l2 = nonneg(field(toks.next(), line, "lam_l2")?, line, "lam_l2")?;
        let l1 = nonneg(field(toks.next(), line, "lam_l1")?, line, "lam_l1")?;
        if has_nu {
            nu.push(nonneg(field(toks.next(), line, "nu")?, line, "nu")?);
        }
        if toks.next().is_some() {
            return Err(parse_err(line, format!("expected {ncols} columns")));
        }
        data.y.push(y);
        data.lam_l2.push(l2);
        data.lam_l1.push(l1);
        vertex_lines.push(line);
    }
    let n = data.y.len();

    let header = edge_table
        .lines()
        .next()
        .ok_or_else(|| parse_err(1, "empty edge file"))?;
    let has_mu = parse_header(header, &EDGE_HEADER, "mu")?;
    let ncols = EDGE_HEADER.len() + has_mu as usize;
    let mut mu = Vec::new();
    let mut seen = HashSet::new();
    let mut covered: Vec<bool> = (0..n)
        .map(|v| data.lam_l2[v] > 0.0 || data.lam_l1[v] > 0.0)
        .collect();
    for (line, text) in data_lines(edge_table) {
        let mut toks = text.split_whitespace();
        let a: usize = field(toks.next(), line, "u")?;
        let b: usize = field(toks.next(), line, "v")?;
        let w = nonneg(field(toks.next(), line, "lam_d1")?, line, "lam_d1")?;
        if has_mu {
            let m: f64 = field(toks.next(), line, "mu")?;
            if !(m.is_finite() && m > 0.0) {
                return Err(invalid(line, format!("mu must be > 0, got {m}")));
            }
            mu.push(m);
        }
        if toks.next().is_some() {
            return Err(parse_err(line, format!("expected {ncols} columns")));
        }
        if a >= n || b >= n {
            return Err(invalid(line, format!("endpoint outside [0, {n})")));
        }
        if a == b {
            return Err(invalid(line, format!("self-loop on vertex {a}")));
        }
        if !seen.insert(Edge::new(a, b)) {
            return Err(invalid(line, format!("duplicate edge ({a}, {b})")));
        }
        if w > 0.0 {
            covered[a] = true;
            covered[b] = true;
        }
        data.edges.push((a, b));
        data.lam_d1.push(w);
    }
    if let Some(v) = covered.iter().position(|c| !c) {
        return Err(invalid(
            vertex_lines[v],
            format!("vertex {v} is uncovered (no fidelity, no l1 weight, no weighted edge)"),
        ));
    }
    data.nu = has_nu.then_some(nu);
    data.mu = has_mu.then_some(mu);
    GraphProblem::new(data)
}

pub fn load_problem(vertex_path: &Path, edge_path: &Path) -> Result<GraphProblem> {
    let vertices = fs::read_to_string(vertex_path)?;
    let edges = fs::read_to_string(edge_path)?;
    parse_problem(&vertices, &edges)
}

/// Renders the vertex table and the edge table of `p`.
pub fn format_problem(p: &GraphProblem) -> (String, String) {
    let mut vt = String::from("vertex y lam_l2 lam_l1");
    if p.nu().is_some() {
        vt.push_str(" nu");
    }
    vt.push('\n');
    for v in 0..p.num_vertices() {
        let _ = write!(vt, "{v} {} {} {}", p.y()[v], p.lam_l2()[v], p.lam_l1()[v]);
        if let Some(nu) = p.nu() {
            let _ = write!(vt, " {}", nu[v]);
        }
        vt.push('\n');
    }
    let mut et = String::from("u v lam_d1");
    if p.mu().is_some() {
        et.push_str(" mu");
    }
    et.push('\n');
    for (k, e) in p.edges().iter().enumerate() {
        let _ = write!(et, "{} {} {}", e.u, e.v, p.lam_d1()[k]);
        if let Some(mu) = p.mu() {
            let _ = write!(et, " {}", mu[k]);
        }
        et.push('\n');
    }
    (vt, et)
}

pub fn save_problem(p: &GraphProblem, vertex_path: &Path, edge_path: &Path) -> Result<()> {
    let (vt, et) = format_problem(p);
    fs::write(vertex_path, vt)?;
    fs::write(edge_path, et)?;
    Ok(())
}

/// One value per line, shortest round-trip decimal representation.
pub fn format_solution(x: &[f64]) -> String {
    let mut s = String::with_capacity(x.len() * 20);
    for v in x {
        let _ = writeln!(s, "{v}");
    }
    s
}

pub fn parse_solution(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| parse_err(i + 1, format!("cannot parse `{l}`")))
        })
        .collect()
}

pub const TRACE_HEADER: &str = "iter,objective,rel_change,seconds,recond";

pub fn format_trace(trace: &ConvergenceTrace) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for r in &trace.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.iter, r.objective, r.rel_change, r.seconds, r.recond as u8
        );
    }
    s
}
