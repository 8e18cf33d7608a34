//! Error of degree-k Lagrange interpolation of a gradient under uniform
//! refinement, with the fitted log-log slope.
//!
//! `cargo run --release --example interpolation_convergence`

use protmesh::functionals::MeshContext;
use protmesh::interp::field::SineProduct;
use protmesh::interp::{Exponent, GradientField};
use protmesh::mesh::structured_grid;
use protmesh::verify::fit_slope;

fn main() -> protmesh::Result<()> {
    let v = SineProduct { dim: 2, frequency: std::f64::consts::PI };
    let grad = GradientField(&v);
    for k in [1, 2, 3] {
        let (mut hs, mut errs) = (Vec::new(), Vec::new());
        for n in [4, 8, 16] {
            let mesh = structured_grid(2, n)?;
            let ctx = MeshContext::new(&mesh, 7, k)?;
            let e = ctx.vector_bound_l2(&grad, k, Exponent::Finite(2.0), 1.0)?.lhs;
            println!("k={k} n={n:>2} h={:.5} |grad v - I_h grad v|_L2 = {e:.6e}", ctx.report.h);
            hs.push(ctx.report.h);
            errs.push(e);
        }
        let (slope, r2) = fit_slope(&hs, &errs);
        println!("k={k} slope={slope:.3} R^2={r2:.5}\n");
    }
    Ok(())
}
