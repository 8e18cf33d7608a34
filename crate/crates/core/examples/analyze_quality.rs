//! Element metrics of reference simplices and the quality report of a
//! structured grid.
//!
//! `cargo run --example analyze_quality`

use protmesh::geom::Simplex;
use protmesh::mesh::structured_grid;
use protmesh::quality::{element_metrics, quality_report, theta_upper_bound};

fn main() -> protmesh::Result<()> {
    let h = 3f64.sqrt() / 2.0;
    let elements = [
        ("right triangle", Simplex::from_flat(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0])?),
        ("equilateral triangle", Simplex::from_flat(2, vec![0.0, 0.0, 1.0, 0.0, 0.5, h])?),
        (
            "unit tetrahedron",
            Simplex::from_flat(3, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0])?,
        ),
    ];
    println!("{:<22} {:>10} {:>10} {:>10} {:>10} {:>10}", "element", "Xi", "sigma", "Theta_K", "Upsilon", "R_min");
    for (name, s) in &elements {
        let m = element_metrics(s)?;
        println!(
            "{name:<22} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            m.xi, m.sigma, m.theta_local, m.upsilon, m.r_min
        );
    }

    for d in [2, 3] {
        let mesh = structured_grid(d, 4)?;
        let r = quality_report(&mesh)?;
        println!(
            "\nKuhn grid d={d} n=4: cells={} h={:.6} C_Xi={:.6} C_sigma={:.6} Theta={:.6} (bound {:.6})",
            r.card,
            r.h,
            r.c_xi,
            r.c_sigma,
            r.theta,
            theta_upper_bound(&r, d)?
        );
    }
    Ok(())
}
