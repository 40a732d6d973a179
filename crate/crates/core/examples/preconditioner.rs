//! Builds the step metric and term weights for a small graph in both
//! normalization modes and checks that the weights partition the identity.

use pgfb::precond::PrecondParams;
use pgfb::{GammaMode, GraphProblem, Preconditioner, ProblemData, QuadApprox, WeightMode};

fn main() -> pgfb::Result<()> {
    let p = GraphProblem::new(ProblemData {
        y: vec![0.0, 4.0, 1.0],
        lam_l2: vec![1.0, 3.0, 0.0],
        lam_l1: vec![0.0, 0.0, 1.0],
        edges: vec![(0, 1), (1, 2)],
        lam_d1: vec![1.0, 1.0],
        ..Default::default()
    })?;
    let lipschitz = p.lipschitz_metric(p.default_lipschitz_fallback())?;
    let qa = QuadApprox::at_point(&p, &[0.5, 3.0, 1.0])?;
    for weight_mode in [WeightMode::CoordinateScaled, WeightMode::ShapePreserving] {
        let params = PrecondParams {
            rho: 1.5,
            delta: 0.99,
            gamma_mode: GammaMode::WholeFunctional,
            weight_mode,
        };
        let pc = Preconditioner::build(&p, &qa, &lipschitz, &params)?;
        println!("{weight_mode:?}");
        println!("  gamma      {:.4?}", pc.gamma);
        println!("  edges      {:.4?}", pc.w_edge);
        println!("  vertices   {:.4?}", pc.w_vertex);
        println!(
            "  residual   {:.4?} on {:?}",
            pc.w_residual, pc.residual_support
        );
        println!(
            "  partition error {:.1e}, max gamma*l {:.4}",
            pc.partition_error(&p),
            pc.step_norm(&lipschitz)
        );
    }
    Ok(())
}
