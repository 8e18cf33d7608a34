//! Protection of Coxeter A~_d meshes, normalized by the longest edge, for
//! increasing dimension.
//!
//! `cargo run --release --example coxeter_trend`

use protmesh::coxeter::coxeter_protection_trend;
use protmesh::verify::protection_thickness_check;
use protmesh::coxeter::{generate_coxeter, trend_box_side, CoxeterSpec};

fn main() -> protmesh::Result<()> {
    println!("{:>3} {:>7} {:>12} {:>12}", "d", "cells", "delta", "delta/h");
    for row in coxeter_protection_trend(&[2, 3, 4, 5], 1.0)? {
        println!("{:>3} {:>7} {:>12.6} {:>12.6}", row.dim, row.cells, row.delta, row.delta_over_h);
    }
    for d in [2, 3] {
        let m = generate_coxeter(&CoxeterSpec::cube(d, 1.0, 0.0, trend_box_side(d)))?;
        let (thickness, ratio) = protection_thickness_check(&m)?;
        println!(
            "d={d}: C_Xi={:.4} >= {:.4} ({}), C_sigma={:.4} <= {:.4} ({})",
            thickness.rhs, thickness.lhs, thickness.pass, ratio.lhs, ratio.rhs, ratio.pass
        );
    }
    Ok(())
}
