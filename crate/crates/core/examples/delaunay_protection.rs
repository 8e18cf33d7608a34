//! Delaunay triangulation of random points, the empty-sphere oracle and
//! the protection of the result, compared with a lattice configuration.
//!
//! `cargo run --example delaunay_protection`

use protmesh::delaunay::{delaunay_triangulate, empty_sphere_violations, protection_report};
use protmesh::mesh::{validate_manifold, PointSet};
use rand::{Rng, SeedableRng};

fn main() -> protmesh::Result<()> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for d in [2, 3, 4] {
        let n = 60;
        let coords: Vec<f64> = (0..n * d).map(|_| rng.gen::<f64>()).collect();
        let mesh = delaunay_triangulate(&PointSet::new(d, coords)?)?;
        let valid = validate_manifold(&mesh).pass;
        let violations = empty_sphere_violations(&mesh).len();
        let delta = protection_report(&mesh)?.delta;
        println!("random d={d}: {n} points, {} cells, manifold={valid}, empty-sphere violations={violations}, delta={delta:.3e}", mesh.num_cells());
    }

    let square = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])?;
    let mesh = delaunay_triangulate(&square)?;
    println!("square corners: delta={:.3e} (co-circular, unprotected)", protection_report(&mesh)?.delta);
    Ok(())
}
