//! P1 finite elements for manufactured Poisson problems: error decay, the
//! best-approximation inequality and the energy identity.
//!
//! `cargo run --release --example fem_mms`

use protmesh::fem::{approximation_bounds, assemble, bilinear, energy_functional, solve, FemConstants, MmsCase, PoissonProblem};
use protmesh::functionals::MeshContext;
use protmesh::mesh::structured_grid;
use protmesh::verify::fit_slope;

fn main() -> protmesh::Result<()> {
    for case in [MmsCase::SineProduct, MmsCase::QuadraticBubble] {
        let (mut hs, mut errs) = (Vec::new(), Vec::new());
        for n in [4, 8, 16, 32] {
            let mesh = structured_grid(2, n)?;
            let problem = PoissonProblem::manufactured(case, &mesh);
            let system = assemble(&problem)?;
            let sol = solve(&system, 1e-12)?;
            let ctx = MeshContext::new(&mesh, 7, 1)?;
            let c = FemConstants { c_int_first: 1.0, c_int_second: 1.0 };
            let cea = &approximation_bounds(&problem, &sol, &ctx, c)?[0];
            let j = energy_functional(&sol.values, &system);
            let a = bilinear(&sol.values, &sol.values, &system);
            println!(
                "{} n={n:>2}: cg iterations={:>3} error={:.6e} interpolation error={:.6e} J={:.6} -a(u_h,u_h)={:.6}",
                case.name(),
                sol.iterations,
                cea.lhs,
                cea.rhs,
                j,
                -a
            );
            hs.push(ctx.report.h);
            errs.push(cea.lhs);
        }
        let (slope, _) = fit_slope(&hs, &errs);
        println!("{} H1 slope={slope:.3}\n", case.name());
    }
    Ok(())
}
