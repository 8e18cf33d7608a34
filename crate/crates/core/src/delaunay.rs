//! Incremental Delaunay triangulation in R^d (Bowyer-Watson with ghost
//! cells) and protection measurement.
//!
//! A finite cell conflicts with a new point only when the point is strictly
//! inside its circumsphere, so co-spherical configurations resolve by
//! insertion order. Points are inserted sorted lexicographically by
//! coordinates, which keeps conflict search local.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Simplex};
use crate::mesh::{PointSet, SimplicialMesh};
use crate::predicates::{self, SpherePosition};

pub const MAX_DIM: usize = 5;
pub const MAX_POINTS: usize = 5000;

const INF: usize = usize::MAX;

/// Exact position of `q` relative to the circumsphere of `s`.
pub fn in_sphere(s: &Simplex, q: &[f64]) -> Result<SpherePosition> {
    if q.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: q.len(),
        });
    }
    let pts: Vec<&[f64]> = s.vertices().collect();
    predicates::in_sphere(&pts, q).ok_or(Error::DegenerateSimplex)
}

struct Cell {
    v: Vec<usize>,
    nbr: Vec<usize>,
    alive: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Unknown,
    In,
    Out,
}

struct Builder<'a> {
    ps: &'a PointSet,
    cells: Vec<Cell>,
    /// Strictly interior reference point (centroid of the first simplex).
    interior: Vec<f64>,
}

impl<'a> Builder<'a> {
    fn coords(&self, cell: &[usize], sub: usize) -> Vec<&[f64]> {
        cell.iter()
            .map(|&v| {
                if v == INF {
                    self.ps.point(sub)
                } else {
                    self.ps.point(v)
                }
            })
            .collect()
    }

    fn orient_with(&self, cell: &[usize], q: &[f64]) -> i8 {
        let pts: Vec<&[f64]> = cell
            .iter()
            .map(|&v| if v == INF { q } else { self.ps.point(v) })
            .collect();
        predicates::orient(&pts)
    }

    fn finite_conflict(&self, c: usize, p: usize) -> bool {
        let pts = self.coords(&self.cells[c].v, p);
        predicates::in_sphere_oriented(&pts, 1, self.ps.point(p)) == SpherePosition::Inside
    }

    fn conflicts(&self, c: usize, p: usize) -> bool {
        let cell = &self.cells[c];
        match cell.v.iter().position(|&v| v == INF) {
            None => self.finite_conflict(c, p),
            Some(k) => match self.orient_with(&cell.v, self.ps.point(p)) {
                s if s > 0 => true,
                0 => self.finite_conflict(cell.nbr[k], p),
                _ => false,
            },
        }
    }

    /// Reorders `v` (and `nbr`) so that the cell has the stored orientation
    /// convention; returns false when the cell is flat.
    fn orient_cell(&self, v: &mut [usize], nbr: &mut [usize]) -> bool {
        let s = if v.contains(&INF) {
            -self.orient_with(v, &self.interior)
        } else {
            self.orient_with(v, &[])
        };
        if s == 0 {
            return false;
        }
        if s < 0 {
            v.swap(0, 1);
            nbr.swap(0, 1);
        }
        true
    }

    fn insert(&mut self, p: usize) -> Result<()> {
        let start = (0..self.cells.len())
            .rev()
            .find(|&c| self.cells[c].alive && self.conflicts(c, p))
            .ok_or_else(|| Error::Unsupported("empty conflict region".into()))?;

        let mut status: HashMap<usize, Status> = HashMap::new();
        status.insert(start, Status::In);
        let mut stack = vec![start];
        let mut region = vec![start];
        let mut boundary: Vec<(usize, usize)> = Vec::new();
        while let Some(c) = stack.pop() {
            for i in 0..self.cells[c].nbr.len() {
                let n = self.cells[c].nbr[i];
                let st = *status.get(&n).unwrap_or(&Status::Unknown);
                let st = if st == Status::Unknown {
                    let s = if self.conflicts(n, p) {
                        stack.push(n);
                        region.push(n);
                        Status::In
                    } else {
                        Status::Out
                    };
                    status.insert(n, s);
                    s
                } else {
                    st
                };
                if st == Status::Out {
                    boundary.push((c, i));
                }
            }
        }

        let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for &(c, i) in &boundary {
            let outside = self.cells[c].nbr[i];
            let mut v = self.cells[c].v.clone();
            v[i] = p;
            let mut nbr = vec![INF; v.len()];
            nbr[i] = outside;
            if !self.orient_cell(&mut v, &mut nbr) {
                return Err(Error::Unsupported("flat cell in cavity".into()));
            }
            let id = self.cells.len();
            let slot = self.cells[outside]
                .nbr
                .iter()
                .position(|&x| x == c)
                .expect("adjacency is symmetric");
            self.cells[outside].nbr[slot] = id;
            let pos_p = v.iter().position(|&x| x == p).unwrap();
            for k in 0..v.len() {
                if k == pos_p {
                    continue;
                }
                let mut key: Vec<usize> = v
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &x)| x)
                    .collect();
                key.sort_unstable();
                if let Some((other, oslot)) = open.remove(&key) {
                    nbr[k] = other;
                    self.cells[other].nbr[oslot] = id;
                } else {
                    open.insert(key, (id, k));
                }
            }
            self.cells.push(Cell { v, nbr, alive: true });
        }
        debug_assert!(open.is_empty());
        for c in region {
            self.cells[c].alive = false;
        }
        Ok(())
    }
}

/// Delaunay triangulation of `ps` (no Steiner points).
pub fn delaunay_triangulate(ps: &PointSet) -> Result<SimplicialMesh> {
    let d = ps.dim();
    let n = ps.len();
    if d > MAX_DIM {
        return Err(Error::LimitExceeded(format!("dimension {d} > {MAX_DIM}")));
    }
    if n > MAX_POINTS {
        return Err(Error::LimitExceeded(format!("{n} points > {MAX_POINTS}")));
    }
    if n < d + 1 {
        return Err(Error::TooFewPoints {
            needed: d + 1,
            found: n,
        });
    }
    if let Some((a, b)) = ps.find_duplicate() {
        return Err(Error::DuplicatePoints(a, b));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ps.point(a)
            .iter()
            .zip(ps.point(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let first = initial_simplex(ps, &order)?;

    let interior: Vec<f64> = (0..d)
        .map(|m| first.iter().map(|&v| ps.point(v)[m]).sum::<f64>() / (d + 1) as f64)
        .collect();
    let mut b = Builder {
        ps,
        cells: Vec::new(),
        interior,
    };

    // first finite cell plus one ghost per facet
    let mut v = first.clone();
    let mut nbr = vec![0; d + 1];
    if !b.orient_cell(&mut v, &mut nbr) {
        return Err(Error::AffinelyDependent);
    }
    b.cells.push(Cell {
        v: v.clone(),
        nbr: (1..=d + 1).collect(),
        alive: true,
    });
    for i in 0..=d {
        let mut gv = v.clone();
        gv[i] = INF;
        let mut gn = vec![INF; d + 1];
        gn[i] = 0;
        b.orient_cell(&mut gv, &mut gn);
        b.cells.push(Cell {
            v: gv,
            nbr: gn,
            alive: true,
        });
    }
    // ghost-ghost adjacency across ridges
    let ghosts: Vec<usize> = (1..=d + 1).collect();
    let mut open: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
    for &g in &ghosts {
        for k in 0..=d {
            if b.cells[g].v[k] == INF {
                continue;
            }
            let mut key: Vec<usize> = b.cells[g]
                .v
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &x)| x)
                .collect();
            key.sort_unstable();
            if let Some((other, oslot)) = open.remove(&key) {
                b.cells[g].nbr[k] = other;
                b.cells[other].nbr[oslot] = g;
            } else {
                open.insert(key, (g, k));
            }
        }
    }
    // neighbours of the finite cell follow the vertex order of the ghosts
    let finite_nbr: Vec<usize> = (0..=d)
        .map(|i| {
            ghosts
                .iter()
                .copied()
                .find(|&g| {
                    let mut gv: Vec<usize> = b.cells[g].v.iter().copied().filter(|&x| x != INF).collect();
                    gv.sort_unstable();
                    let mut fv: Vec<usize> = v
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &x)| x)
                        .collect();
                    fv.sort_unstable();
                    gv == fv
                })
                .unwrap()
        })
        .collect();
    b.cells[0].nbr = finite_nbr;

    for &p in &order {
        if first.contains(&p) {
            continue;
        }
        b.insert(p)?;
    }

    let mut cells: Vec<Vec<usize>> = b
        .cells
        .into_iter()
        .filter(|c| c.alive && !c.v.contains(&INF))
        .map(|c| c.v)
        .collect();
    cells.sort_by(|a, b| {
        let mut sa = a.clone();
        let mut sb = b.clone();
        sa.sort_unstable();
        sb.sort_unstable();
        sa.cmp(&sb)
    });
    SimplicialMesh::new(ps.clone(), cells)
}

fn initial_simplex(ps: &PointSet, order: &[usize]) -> Result<Vec<usize>> {
    let d = ps.dim();
    let mut chosen = vec![order[0]];
    for &c in &order[1..] {
        if chosen.len() == d + 1 {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(c);
        if affinely_independent(ps, &trial) {
            chosen = trial;
        }
    }
    if chosen.len() < d + 1 {
        return Err(Error::AffinelyDependent);
    }
    Ok(chosen)
}

/// Affine independence by exact orientation of the points projected onto
/// the best coordinate subspace; exact for the full-dimensional case.
fn affinely_independent(ps: &PointSet, idx: &[usize]) -> bool {
    let d = ps.dim();
    let k = idx.len() - 1;
    if k == 0 {
        return true;
    }
    // a k-subset of coordinates on which the projection is non-degenerate
    // exists iff the points are affinely independent
    let mut axes: Vec<usize> = (0..k).collect();
    loop {
        let pts: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| axes.iter().map(|&a| ps.point(i)[a]).collect())
            .collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        if predicates::orient(&refs) != 0 {
            return true;
        }
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            if axes[i] < d - k + i {
                axes[i] += 1;
                for j in i + 1..k {
                    axes[j] = axes[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Cells whose circumsphere strictly contains some other mesh vertex, as
/// (cell, vertex) pairs. Empty for a Delaunay mesh.
pub fn empty_sphere_violations(m: &SimplicialMesh) -> Vec<(usize, usize)> {
    let ps = m.points();
    (0..m.num_cells())
        .into_par_iter()
        .flat_map_iter(|c| {
            let cell = &m.cells()[c];
            let pts: Vec<&[f64]> = cell.iter().map(|&v| ps.point(v)).collect();
            let o = predicates::orient(&pts);
            (0..ps.len())
                .filter(move |q| !cell.contains(q))
                .filter(move |&q| {
                    o != 0 && predicates::in_sphere_oriented(&pts, o, ps.point(q)) == SpherePosition::Inside
                })
                .map(move |q| (c, q))
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn is_delaunay(m: &SimplicialMesh) -> bool {
    empty_sphere_violations(m).is_empty()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtectionReport {
    /// Mesh protection, the minimum of `per_cell` (+inf with no external point).
    pub delta: f64,
    pub per_cell: Vec<f64>,
    /// Nearest external point per cell.
    pub witness: Vec<Option<usize>>,
}

/// δ(K) = min over vertices q not in K of |q - c_K| - R_K.
pub fn protection_report(m: &SimplicialMesh) -> Result<ProtectionReport> {
    if m.num_cells() == 0 {
        return Err(Error::EmptyMesh);
    }
    let ps = m.points();
    let rows: Vec<(f64, Option<usize>)> = (0..m.num_cells())
        .into_par_iter()
        .map(|c| {
            let ball = m.simplex(c).circumsphere()?;
            let cell = &m.cells()[c];
            let mut best = f64::INFINITY;
            let mut witness = None;
            for q in 0..ps.len() {
                if cell.contains(&q) {
                    continue;
                }
                let gap = geom::dist(ps.point(q), &ball.center) - ball.radius;
                if gap < best {
                    best = gap;
                    witness = Some(q);
                }
            }
            Ok((best, witness))
        })
        .collect::<Result<_>>()?;
    let delta = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    Ok(ProtectionReport {
        delta,
        per_cell: rows.iter().map(|r| r.0).collect(),
        witness: rows.iter().map(|r| r.1).collect(),
    })
}

pub fn is_protected(m: &SimplicialMesh, delta_min: f64) -> Result<(bool, ProtectionReport)> {
    let r = protection_report(m)?;
    Ok((r.delta >= delta_min, r))
}
