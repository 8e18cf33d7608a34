//! Ã_d Coxeter triangulations clipped to a box.
//!
//! The Freudenthal-Kuhn triangulation of Z^d (cells `z, z+e_π(1), ...,
//! z+e_π(1)+...+e_π(d)`) is mapped by `A = scale (I - c 11^T)` with
//! `c = (1 - 1/sqrt(d+1)) / d`. Then `|Az|^2 = scale^2 (|z|^2 - (Σz)^2/(d+1))`,
//! the metric in which the Kuhn cells are the alcoves of Ã_d.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::delaunay::protection_report;
use crate::error::{Error, Result};
use crate::mesh::{permutations, PointSet, SimplicialMesh};
use crate::quality::quality_report;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoxeterSpec {
    pub dim: usize,
    pub scale: f64,
    /// Per-axis `(lo, hi)` bounds.
    #[serde(rename = "box")]
    pub bounds: Vec<(f64, f64)>,
}

impl CoxeterSpec {
    /// The cube `[lo, hi]^d`.
    pub fn cube(dim: usize, scale: f64, lo: f64, hi: f64) -> Self {
        CoxeterSpec {
            dim,
            scale,
            bounds: vec![(lo, hi); dim],
        }
    }
}

fn shear(d: usize) -> f64 {
    (1.0 - 1.0 / ((d + 1) as f64).sqrt()) / d as f64
}

fn map_point(z: &[i64], scale: f64, c: f64) -> Vec<f64> {
    let s: i64 = z.iter().sum();
    z.iter()
        .map(|&zi| scale * (zi as f64 - c * s as f64))
        .collect()
}

pub fn generate_coxeter(spec: &CoxeterSpec) -> Result<SimplicialMesh> {
    let d = spec.dim;
    if d < 2 {
        return Err(Error::InvalidArgument("coxeter patches need d >= 2".into()));
    }
    if spec.bounds.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: spec.bounds.len(),
        });
    }
    if !(spec.scale > 0.0 && spec.scale.is_finite()) {
        return Err(Error::InvalidArgument("scale must be positive".into()));
    }
    if spec.bounds.iter().any(|&(lo, hi)| !(lo < hi)) {
        return Err(Error::InvalidArgument("box needs lo < hi on every axis".into()));
    }
    let c = shear(d);
    // A^{-1} = (I + c' 11^T) / scale with c' = c / (1 - c d)
    let cinv = c / (1.0 - c * d as f64);
    let mut zlo = vec![i64::MAX; d];
    let mut zhi = vec![i64::MIN; d];
    for mask in 0..(1usize << d) {
        let x: Vec<f64> = (0..d)
            .map(|i| {
                if mask >> i & 1 == 1 {
                    spec.bounds[i].1
                } else {
                    spec.bounds[i].0
                }
            })
            .collect();
        let s: f64 = x.iter().sum();
        for i in 0..d {
            let z = (x[i] + cinv * s) / spec.scale;
            zlo[i] = zlo[i].min(z.floor() as i64 - 1);
            zhi[i] = zhi[i].max(z.ceil() as i64 + 1);
        }
    }
    let extent: Vec<f64> = spec.bounds.iter().map(|&(lo, hi)| hi - lo).collect();
    let inside = |x: &[f64]| {
        x.iter().zip(&spec.bounds).zip(&extent).all(|((&xi, &(lo, hi)), &e)| {
            let tol = 1e-12 * e.max(lo.abs()).max(hi.abs());
            xi >= lo - tol && xi <= hi + tol
        })
    };

    let perms = permutations(d);
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut coords: Vec<f64> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    let mut z = zlo.clone();
    loop {
        for p in &perms {
            let mut w = z.clone();
            let mut verts = vec![w.clone()];
            for &axis in p {
                w[axis] += 1;
                verts.push(w.clone());
            }
            let mapped: Vec<Vec<f64>> = verts.iter().map(|v| map_point(v, spec.scale, c)).collect();
            if !mapped.iter().all(|x| inside(x)) {
                continue;
            }
            let cell = verts
                .into_iter()
                .zip(mapped)
                .map(|(v, x)| {
                    *index.entry(v).or_insert_with(|| {
                        coords.extend_from_slice(&x);
                        coords.len() / d - 1
                    })
                })
                .collect();
            cells.push(cell);
        }
        // odometer over the integer range
        let mut i = 0;
        while i < d {
            z[i] += 1;
            if z[i] <= zhi[i] {
                break;
            }
            z[i] = zlo[i];
            i += 1;
        }
        if i == d {
            break;
        }
    }
    if cells.is_empty() {
        return Err(Error::BoxTooSmall);
    }
    SimplicialMesh::new(PointSet::new(d, coords)?, cells)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub dim: usize,
    pub delta: f64,
    pub h: f64,
    pub delta_over_h: f64,
    pub cells: usize,
}

/// Box side, in units of `scale`, large enough to contain cells whose
/// neighbourhoods are complete.
pub fn trend_box_side(d: usize) -> f64 {
    if d <= 3 {
        3.0
    } else {
        2.5
    }
}

/// Normalized protection δ/h of a clipped patch for every dimension.
pub fn coxeter_protection_trend(dims: &[usize], scale: f64) -> Result<Vec<TrendRow>> {
    dims.iter()
        .map(|&d| {
            let side = trend_box_side(d) * scale;
            let m = generate_coxeter(&CoxeterSpec::cube(d, scale, 0.0, side))?;
            let delta = protection_report(&m)?.delta;
            let h = quality_report(&m)?.h;
            Ok(TrendRow {
                dim: d,
                delta,
                h,
                delta_over_h: delta / h,
                cells: m.num_cells(),
            })
        })
        .collect()
}
