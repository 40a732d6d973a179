//! Closed-form proximity operators next to the brute-force oracle.

use pgfb::prox::{
    oracle_prox, prox_abs_scaled, prox_group_constraint, prox_group_seminorm, prox_pair_diff,
    OracleConfig, Subspace,
};

fn main() -> pgfb::Result<()> {
    let oracle = OracleConfig::default();

    let (x, lam, m) = (3.0, 1.0, 2.0);
    let o = oracle_prox(&|t| lam * t[0].abs(), &[x], &[m], &oracle)?;
    println!(
        "soft threshold   {:.9}  oracle {:.9}",
        prox_abs_scaled(x, lam, m),
        o[0]
    );

    let (x, mu, m) = ([0.0, 4.0], 1.0, [1.0, 3.0]);
    let (a, b) = prox_pair_diff(x[0], x[1], mu, m[0], m[1]);
    let o = oracle_prox(&|t| mu * (t[0] - t[1]).abs(), &x, &m, &oracle)?;
    println!(
        "pair difference  ({a:.9}, {b:.9})  oracle ({:.9}, {:.9})",
        o[0], o[1]
    );

    let metric = [1.0, 4.0];
    let x = [1.5, -2.0];
    let span = Subspace::span(vec![0, 1]);
    let norm = |t: &[f64]| (metric[0] * t[0] * t[0] + metric[1] * t[1] * t[1]).sqrt();
    let g = prox_group_seminorm(&x, 1.0, &span, Some(&metric))?;
    let o = oracle_prox(&|t| norm(t), &x, &metric, &oracle)?;
    println!("group seminorm   {g:.9?}  oracle {o:.9?}");
    let c = prox_group_constraint(&x, 1.0, &span, Some(&metric))?;
    println!("group constraint {c:.9?}  |c|_M = {:.12}", norm(&c));
    Ok(())
}
