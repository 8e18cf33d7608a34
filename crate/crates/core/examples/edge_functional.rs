//! The edge functional and its two-sided bounds on a regular grid and on
//! a mesh containing a sliver.
//!
//! `cargo run --release --example edge_functional`

use protmesh::functionals::{c_rho, MeshContext};
use protmesh::interp::field::PlaneWave;
use protmesh::interp::Exponent;
use protmesh::mesh::structured_grid;
use protmesh::verify::sliver_gadget;

fn main() -> protmesh::Result<()> {
    let rhos = [Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(4.0), Exponent::Infinity];
    for rho in rhos {
        println!("C_rho(d=2, rho={rho}) = {:.12}", c_rho(2, rho));
    }
    let meshes = [("grid", structured_grid(2, 6)?), ("sliver", sliver_gadget(2, 1e-3)?)];
    let v = PlaneWave { wave: vec![2.0, -1.0], phase: 0.4 };
    for (name, mesh) in &meshes {
        let ctx = MeshContext::new(mesh, 7, 2)?;
        println!("\n{name}: C_Xi={:.3e}", ctx.report.c_xi);
        for r in ctx.lemma_bounds(&v, &rhos)? {
            println!("  {:<13} lhs={:.6e} rhs={:.6e} pass={}", r.name, r.lhs, r.rhs, r.pass);
        }
    }
    Ok(())
}
