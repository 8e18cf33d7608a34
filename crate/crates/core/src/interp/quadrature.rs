//! Quadrature on the reference simplex `{ξ >= 0, Σξ <= 1}`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::geom::factorial;

pub const MAX_QUADRATURE_DIM: usize = 5;
pub const MAX_EXACTNESS: usize = 10;

/// Nodes in reference coordinates with weights summing to `1/d!`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    pub exactness: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Integral of `f` over the reference simplex.
    pub fn apply(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Grundmann-Möller rule of odd degree `2s+1 >= exactness`, with repeated
/// nodes merged. Some weights are negative.
pub fn quadrature_rule(dim: usize, exactness: usize) -> Result<Arc<QuadratureRule>> {
    if dim == 0 || dim > MAX_QUADRATURE_DIM || exactness > MAX_EXACTNESS {
        return Err(Error::Unsupported(format!(
            "quadrature for d={dim}, exactness={exactness}"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("quadrature cache");
    Ok(guard
        .entry((dim, exactness))
        .or_insert_with(|| Arc::new(grundmann_moller(dim, exactness)))
        .clone())
}

fn grundmann_moller(d: usize, exactness: usize) -> QuadratureRule {
    let s = exactness.saturating_sub(1).div_ceil(2);
    let mut merged: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut nodes: Vec<Vec<f64>> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for i in 0..=s {
        let denom = (d + 2 * s + 1 - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 2f64.powi(-2 * s as i32) * denom.powi(2 * s as i32 + 1)
            / (factorial(i) * factorial(d + 2 * s + 1 - i));
        for beta in compositions(s - i, d + 1) {
            let xi: Vec<f64> = beta[1..]
                .iter()
                .map(|&b| (2 * b + 1) as f64 / denom)
                .collect();
            let key: Vec<u64> = xi.iter().map(|x| x.to_bits()).collect();
            match merged.get(&key) {
                Some(&k) => weights[k] += w,
                None => {
                    merged.insert(key, nodes.len());
                    nodes.push(xi);
                    weights.push(w);
                }
            }
        }
    }
    QuadratureRule {
        dim: d,
        exactness: 2 * s + 1,
        nodes,
        weights,
    }
}

/// All vectors of `parts` non-negative integers summing to `total`, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Collapsed-coordinate tensor Gauss-Legendre rule with positive weights,
/// exact for polynomials of total degree `exactness`.
pub fn positive_rule(dim: usize, exactness: usize) -> Result<Arc<QuadratureRule>> {
    if dim == 0 || dim > MAX_QUADRATURE_DIM {
        return Err(Error::Unsupported(format!("quadrature for d={dim}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().expect("quadrature cache");
    Ok(guard
        .entry((dim, exactness))
        .or_insert_with(|| Arc::new(collapsed_gauss(dim, exactness)))
        .clone())
}

fn collapsed_gauss(d: usize, exactness: usize) -> QuadratureRule {
    let n = (exactness + d).div_ceil(2).max(1);
    let (t, w) = gauss_legendre01(n);
    let total = n.pow(d as u32);
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for lin in 0..total {
        let mut rest = lin;
        let mut idx = Vec::with_capacity(d);
        for _ in 0..d {
            idx.push(rest % n);
            rest /= n;
        }
        let mut xi = Vec::with_capacity(d);
        let mut remaining = 1.0;
        let mut weight = 1.0;
        for (j, &k) in idx.iter().enumerate() {
            xi.push(remaining * t[k]);
            weight *= w[k];
            // Jacobian factor (1 - t_j)^(d - 1 - j)
            weight *= (1.0 - t[k]).powi((d - 1 - j) as i32);
            remaining *= 1.0 - t[k];
        }
        nodes.push(xi);
        weights.push(weight);
    }
    QuadratureRule {
        dim: d,
        exactness,
        nodes,
        weights,
    }
}

/// Gauss-Legendre nodes and weights on [0, 1].
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * weight;
        w[n - 1 - i] = 0.5 * weight;
    }
    (x, w)
}
