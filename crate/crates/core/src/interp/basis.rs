//! Lagrange basis on the reference simplex with equispaced lattice nodes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 6;

/// The `N_p = (k+d)!/(k! d!)` Lagrange polynomials of degree `k` on the
/// reference simplex, in the monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceBasis {
    pub dim: usize,
    pub degree: usize,
    /// Nodes `α/k` for multi-indices `|α| <= k`, lexicographic in `α`.
    pub nodes: Vec<Vec<f64>>,
    /// Monomial exponents, same ordering as `nodes`.
    pub exponents: Vec<Vec<usize>>,
    /// Column j holds the monomial coefficients of `L_j`.
    pub coefficients: DMatrix<f64>,
    /// 2-norm condition number of the Vandermonde matrix.
    pub condition: f64,
}

/// Multi-indices in N^d with total degree at most `k`, lexicographic.
pub fn multi_indices(d: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for a in 0..=budget {
            cur.push(a);
            rec(d, budget - a, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, k, &mut Vec::new(), &mut out);
    out
}

fn monomials(exponents: &[Vec<usize>], degree: usize, xi: &[f64]) -> Vec<f64> {
    // powers[i][p] = xi_i^p
    let powers: Vec<Vec<f64>> = xi
        .iter()
        .map(|&x| {
            let mut p = Vec::with_capacity(degree + 1);
            let mut acc = 1.0;
            for _ in 0..=degree {
                p.push(acc);
                acc *= x;
            }
            p
        })
        .collect();
    exponents
        .iter()
        .map(|a| a.iter().enumerate().map(|(i, &e)| powers[i][e]).product())
        .collect()
}

impl ReferenceBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be >= 1".into()));
        }
        if degree == 0 || degree > MAX_DEGREE {
            return Err(Error::Unsupported(format!("Lagrange degree {degree}")));
        }
        let exponents = multi_indices(dim, degree);
        let nodes: Vec<Vec<f64>> = exponents
            .iter()
            .map(|a| a.iter().map(|&ai| ai as f64 / degree as f64).collect())
            .collect();
        let n = nodes.len();
        let rows: Vec<Vec<f64>> = nodes.iter().map(|x| monomials(&exponents, degree, x)).collect();
        let v = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
        let sv = v.clone().singular_values();
        let condition = sv.max() / sv.min();
        log::debug!("Vandermonde d={dim} k={degree} condition {condition:.3e}");
        let coefficients = v.try_inverse().ok_or(Error::Unsupported(format!(
            "singular Vandermonde for d={dim}, k={degree}"
        )))?;
        Ok(ReferenceBasis {
            dim,
            degree,
            nodes,
            exponents,
            coefficients,
            condition,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values of all `L_j` at `xi`.
    pub fn eval(&self, xi: &[f64]) -> Vec<f64> {
        let m = monomials(&self.exponents, self.degree, xi);
        (0..self.len())
            .map(|j| {
                self.coefficients
                    .column(j)
                    .iter()
                    .zip(&m)
                    .map(|(c, x)| c * x)
                    .sum()
            })
            .collect()
    }
}

/// Shared, cached basis for `(d, k)`.
pub fn reference_basis(dim: usize, degree: usize) -> Result<Arc<ReferenceBasis>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<ReferenceBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().expect("basis cache").get(&(dim, degree)) {
        return Ok(b.clone());
    }
    let b = Arc::new(ReferenceBasis::new(dim, degree)?);
    Ok(cache
        .lock()
        .expect("basis cache")
        .entry((dim, degree))
        .or_insert(b)
        .clone())
}
