//! Affine map `x = Aξ + b` from the reference simplex onto a cell.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geom::Simplex;

#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    /// Columns are `v_i - v_0`.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub a_inv: DMatrix<f64>,
    pub det: f64,
}

impl AffineMap {
    pub fn new(s: &Simplex) -> Result<Self> {
        if s.is_degenerate() {
            return Err(Error::DegenerateSimplex);
        }
        let d = s.dim();
        let v0 = s.vertex(0);
        let a = DMatrix::from_fn(d, d, |r, c| s.vertex(c + 1)[r] - v0[r]);
        let det = a.determinant();
        let a_inv = a.clone().try_inverse().ok_or(Error::DegenerateSimplex)?;
        Ok(AffineMap {
            a,
            b: DVector::from_column_slice(v0),
            a_inv,
            det,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn map(&self, xi: &[f64]) -> Vec<f64> {
        let x = &self.a * DVector::from_column_slice(xi) + &self.b;
        x.iter().copied().collect()
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        let xi = &self.a_inv * (DVector::from_column_slice(x) - &self.b);
        xi.iter().copied().collect()
    }

    /// `|det A| = d! |K|`.
    pub fn jacobian(&self) -> f64 {
        self.det.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::factorial;

    #[test]
    fn maps_vertices_and_inverts() {
        let s = Simplex::new(&[[0.5, 0.1, 0.0], [2.0, 0.3, 0.1], [0.2, 1.5, 0.4], [0.1, 0.2, 1.9]]).unwrap();
        let m = AffineMap::new(&s).unwrap();
        assert!((m.jacobian() - factorial(3) * s.volume()).abs() < 1e-12);
        let refs = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        for (i, r) in refs.iter().enumerate() {
            let x = m.map(r);
            assert!(x.iter().zip(s.vertex(i)).all(|(a, b)| (a - b).abs() < 1e-14));
        }
        let xi = [0.2, 0.3, 0.1];
        let back = m.inverse(&m.map(&xi));
        assert!(back.iter().zip(&xi).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}
