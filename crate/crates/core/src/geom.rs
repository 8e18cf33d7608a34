//! Primitives on a single d-simplex: volumes, facet volumes, altitudes,
//! circumsphere, insphere, smallest enclosing ball and diameter.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Thickness below which a simplex counts as numerically void.
pub const DEGENERATE_THICKNESS: f64 = 1e-13;
/// Volume below which a simplex counts as numerically void.
pub const DEGENERATE_VOLUME: f64 = 1e-300;

/// Relative slack used when testing ball containment.
const CONTAINMENT_SLACK: f64 = 1e-12;

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// A closed ball in R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn empty() -> Self {
        Ball {
            center: Vec::new(),
            radius: -1.0,
        }
    }

    /// Containment with a relative slack of `1e-12 * radius`.
    pub fn contains(&self, p: &[f64]) -> bool {
        if self.radius < 0.0 {
            return false;
        }
        dist(&self.center, p) <= self.radius * (1.0 + CONTAINMENT_SLACK)
    }
}

/// A d-simplex given by its d+1 vertices, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    dim: usize,
    coords: Vec<f64>,
}

impl Simplex {
    /// Builds a simplex from d+1 vertices of common dimension d.
    pub fn new<P: AsRef<[f64]>>(vertices: &[P]) -> Result<Self> {
        let dim = vertices.first().map(|v| v.as_ref().len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "simplex needs dimension >= 1".into(),
            ));
        }
        if vertices.len() != dim + 1 {
            return Err(Error::WrongArity {
                expected: dim + 1,
                found: vertices.len(),
            });
        }
        let mut coords = Vec::with_capacity(dim * (dim + 1));
        for v in vertices {
            let v = v.as_ref();
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
            coords.extend_from_slice(v);
        }
        Ok(Simplex { dim, coords })
    }

    /// Builds a simplex from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * (dim + 1) {
            return Err(Error::WrongArity {
                expected: dim * (dim + 1),
                found: coords.len(),
            });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Simplex { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Columns are the edge vectors `v_i - v_0`, i = 1..=d.
    pub fn edge_matrix(&self) -> DMatrix<f64> {
        let d = self.dim;
        let v0 = self.vertex(0);
        DMatrix::from_fn(d, d, |r, c| self.vertex(c + 1)[r] - v0[r])
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = (self.dim + 1) as f64;
        (0..self.dim)
            .map(|m| self.vertices().map(|v| v[m]).sum::<f64>() / n)
            .collect()
    }

    /// d-volume `|det(v_1 - v_0, ..., v_d - v_0)| / d!`.
    pub fn volume(&self) -> f64 {
        self.edge_matrix().determinant().abs() / factorial(self.dim)
    }

    /// (d-1)-volume of each facet; entry r is the facet opposite vertex r.
    pub fn facet_volumes(&self) -> Vec<f64> {
        (0..=self.dim).map(|r| self.facet_volume(r)).collect()
    }

    fn facet_volume(&self, opposite: usize) -> f64 {
        let d = self.dim;
        let idx: Vec<usize> = (0..=d).filter(|&i| i != opposite).collect();
        let base = self.vertex(idx[0]);
        let e = DMatrix::from_fn(d, d - 1, |r, c| self.vertex(idx[c + 1])[r] - base[r]);
        let gram = e.transpose() * &e;
        gram.determinant().max(0.0).sqrt() / factorial(d - 1)
    }

    /// Distance from each vertex to the affine hull of its opposite facet.
    pub fn altitudes(&self) -> Result<Vec<f64>> {
        let vol = self.volume();
        let d = self.dim as f64;
        self.facet_volumes()
            .into_iter()
            .enumerate()
            .map(|(s, f)| {
                if f <= 0.0 {
                    Err(Error::DegenerateFacet(s))
                } else {
                    Ok(d * vol / f)
                }
            })
            .collect()
    }

    /// Longest edge length.
    pub fn diameter(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..=self.dim {
            for j in 0..i {
                best = best.max(dist_sq(self.vertex(i), self.vertex(j)));
            }
        }
        best.sqrt()
    }

    /// Sum of squared edge lengths over all d(d+1)/2 edges.
    pub fn edge_length_sq_sum(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..=self.dim {
            for j in 0..i {
                acc += dist_sq(self.vertex(i), self.vertex(j));
            }
        }
        acc
    }

    /// Edge vectors `p_j - p_i` for j < i, in (i, j) lexicographic order.
    pub fn edges(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..=self.dim {
            for j in 0..i {
                out.push(
                    self.vertex(j)
                        .iter()
                        .zip(self.vertex(i))
                        .map(|(a, b)| a - b)
                        .collect(),
                );
            }
        }
        out
    }

    /// Minimum altitude over `d * diameter`; zero when every facet is void.
    pub fn thickness(&self) -> f64 {
        let max_facet = self.facet_volumes().into_iter().fold(0.0, f64::max);
        let diam = self.diameter();
        if max_facet <= 0.0 || diam <= 0.0 {
            return 0.0;
        }
        // min_s d|K|/|F_s| / (d * diam)
        self.volume() / (max_facet * diam)
    }

    pub fn is_degenerate(&self) -> bool {
        self.volume() < DEGENERATE_VOLUME || self.thickness() < DEGENERATE_THICKNESS
    }

    /// Insphere diameter `2 d |K| / sum_s |F_s|`; zero for degenerate input.
    pub fn insphere_diameter(&self) -> f64 {
        let total: f64 = self.facet_volumes().iter().sum();
        if total <= 0.0 {
            return 0.0;
        }
        2.0 * self.dim as f64 * self.volume() / total
    }

    pub fn circumsphere(&self) -> Result<Ball> {
        self.circumsphere_with_condition().map(|(b, _)| b)
    }

    /// Circumsphere together with the 2-norm condition number of the
    /// bisector system that produced it.
    pub fn circumsphere_with_condition(&self) -> Result<(Ball, f64)> {
        if self.is_degenerate() {
            return Err(Error::DegenerateSimplex);
        }
        let d = self.dim;
        let v0 = self.vertex(0);
        let a = DMatrix::from_fn(d, d, |r, c| self.vertex(r + 1)[c] - v0[c]);
        let b = DVector::from_fn(d, |r, _| 0.5 * dist_sq(self.vertex(r + 1), v0));
        let sol = a
            .clone()
            .lu()
            .solve(&b)
            .ok_or(Error::DegenerateSimplex)?;
        let sv = a.singular_values();
        let cond = sv.max() / sv.min();
        let center: Vec<f64> = (0..d).map(|m| v0[m] + sol[m]).collect();
        let radius = self
            .vertices()
            .map(|v| dist(&center, v))
            .fold(0.0, f64::max);
        Ok((Ball { center, radius }, cond))
    }

    /// Smallest ball containing all vertices.
    pub fn min_containment_ball(&self) -> Ball {
        let pts: Vec<&[f64]> = self.vertices().collect();
        min_enclosing_ball(&pts)
    }
}

/// Smallest enclosing ball of a small point set by Welzl's move-to-front
/// recursion with the input order as the (deterministic) processing order.
pub fn min_enclosing_ball(points: &[&[f64]]) -> Ball {
    if points.is_empty() {
        return Ball::empty();
    }
    let dim = points[0].len();
    let mut order: Vec<usize> = (0..points.len()).collect();
    let mut support = Vec::with_capacity(dim + 1);
    let n = order.len();
    move_to_front(points, &mut order, n, &mut support, dim)
}

fn move_to_front(
    points: &[&[f64]],
    order: &mut Vec<usize>,
    end: usize,
    support: &mut Vec<usize>,
    dim: usize,
) -> Ball {
    let mut ball = ball_through(points, support);
    if support.len() == dim + 1 {
        return ball;
    }
    for i in 0..end {
        let p = order[i];
        if !ball.contains(points[p]) {
            support.push(p);
            ball = move_to_front(points, order, i, support, dim);
            support.pop();
            order[..=i].rotate_right(1);
        }
    }
    ball
}

/// Smallest ball having every listed point on its boundary: the
/// circumcenter within the affine hull of the points.
fn ball_through(points: &[&[f64]], support: &[usize]) -> Ball {
    let Some(&first) = support.first() else {
        return Ball::empty();
    };
    let p0 = points[first];
    let dim = p0.len();
    if support.len() == 1 {
        return Ball {
            center: p0.to_vec(),
            radius: 0.0,
        };
    }
    let k = support.len() - 1;
    let e = DMatrix::from_fn(dim, k, |r, c| points[support[c + 1]][r] - p0[r]);
    let gram = e.transpose() * &e;
    let rhs = DVector::from_fn(k, |r, _| 0.5 * dist_sq(points[support[r + 1]], p0));
    let lambda = match gram.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => gram
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .unwrap_or_else(|_| DVector::zeros(k)),
    };
    let offset = e * lambda;
    let center: Vec<f64> = (0..dim).map(|m| p0[m] + offset[m]).collect();
    let radius = support
        .iter()
        .map(|&s| dist(&center, points[s]))
        .fold(0.0, f64::max);
    Ball { center, radius }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    fn right() -> Simplex {
        Simplex::new(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap()
    }

    fn equilateral() -> Simplex {
        Simplex::new(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]]).unwrap()
    }

    fn unit_tet() -> Simplex {
        Simplex::new(&[
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn volumes() {
        assert!(close(unit_tet().volume(), 1.0 / 6.0, 1e-14));
        assert!(close(right().volume(), 0.5, 1e-14));
        let col = Simplex::new(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert_eq!(col.volume(), 0.0);
    }

    #[test]
    fn facets_and_altitudes() {
        let f = right().facet_volumes();
        assert!(close(f[0], 2f64.sqrt(), 1e-14));
        assert!(close(f[1], 1.0, 1e-14) && close(f[2], 1.0, 1e-14));
        assert!(close(unit_tet().facet_volumes()[0], 3f64.sqrt() / 2.0, 1e-14));

        let a = right().altitudes().unwrap();
        assert!(close(a[0], 1.0 / 2f64.sqrt(), 1e-14));
        assert!(close(a[1], 1.0, 1e-14) && close(a[2], 1.0, 1e-14));
        assert!(close(unit_tet().altitudes().unwrap()[0], 1.0 / 3f64.sqrt(), 1e-14));
        for h in equilateral().altitudes().unwrap() {
            assert!(close(h, 3f64.sqrt() / 2.0, 1e-14));
        }
    }

    #[test]
    fn collinear_facets_positive() {
        let col = Simplex::new(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert!(col.facet_volumes().iter().all(|&f| f > 0.0));
        assert!(col.is_degenerate());
    }

    #[test]
    fn zero_facet_altitude_is_error() {
        let s = Simplex::new(&[[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(s.altitudes(), Err(Error::DegenerateFacet(_))));
    }

    #[test]
    fn circumspheres() {
        let b = right().circumsphere().unwrap();
        assert!(close(b.center[0], 0.5, 1e-14) && close(b.center[1], 0.5, 1e-14));
        assert!(close(b.radius, 2f64.sqrt() / 2.0, 1e-14));
        assert!(close(equilateral().circumsphere().unwrap().radius, 1.0 / 3f64.sqrt(), 1e-14));
        let col = Simplex::new(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert_eq!(col.circumsphere(), Err(Error::DegenerateSimplex));
    }

    #[test]
    fn insphere() {
        assert!(close(right().insphere_diameter(), 2.0 - 2f64.sqrt(), 1e-14));
        assert!(close(equilateral().insphere_diameter(), 3f64.sqrt() / 3.0, 1e-14));
        let col = Simplex::new(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert_eq!(col.insphere_diameter(), 0.0);
    }

    #[test]
    fn containment_balls() {
        let b = right().min_containment_ball();
        assert!(close(b.center[0], 0.5, 1e-14) && close(b.radius, 2f64.sqrt() / 2.0, 1e-14));
        let b = unit_tet().min_containment_ball();
        for c in &b.center {
            assert!(close(*c, 1.0 / 3.0, 1e-13));
        }
        assert!(close(b.radius, 6f64.sqrt() / 3.0, 1e-13));
        let pts: Vec<&[f64]> = vec![&[1.0, 2.0], &[1.0, 2.0]];
        assert_eq!(min_enclosing_ball(&pts).radius, 0.0);
    }

    #[test]
    fn diameters() {
        assert!(close(right().diameter(), 2f64.sqrt(), 1e-15));
        assert!(close(equilateral().diameter(), 1.0, 1e-15));
        assert!(close(unit_tet().diameter(), 2f64.sqrt(), 1e-15));
    }

    #[test]
    fn constructor_errors() {
        let bad = Simplex::new(&[vec![0.0, 0.0], vec![1.0], vec![0.0, 1.0]]);
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
        let bad = Simplex::new(&[[0.0, 0.0], [1.0, 0.0]]);
        assert!(matches!(bad, Err(Error::WrongArity { .. })));
        let bad = Simplex::new(&[[0.0, f64::NAN], [1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(bad, Err(Error::NonFinite));
    }

    #[test]
    fn one_dimensional_segment() {
        let s = Simplex::new(&[[0.0], [2.0]]).unwrap();
        assert_eq!(s.volume(), 2.0);
        assert_eq!(s.facet_volumes(), vec![1.0, 1.0]);
        assert_eq!(s.thickness(), 1.0);
        let b = s.circumsphere().unwrap();
        assert_eq!((b.center[0], b.radius), (1.0, 1.0));
    }
}
