//! Lagrange interpolation on simplicial meshes, quadrature and integral
//! norms.
//!
//! Vector quantities are interpolated component-wise. Vector and matrix
//! `L_p` norms sum `|f_i|^p` over components before integrating; the
//! `L_inf` norm is the largest component magnitude over a sample set made of
//! quadrature nodes, vertices and Lagrange nodes of every cell.

pub mod affine;
pub mod basis;
pub mod field;
pub mod quadrature;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geom::Simplex;
use crate::mesh::SimplicialMesh;

pub use affine::AffineMap;
pub use basis::{reference_basis, ReferenceBasis};
pub use field::{FieldSpec, GradientField, ScalarField, VectorField, VectorFieldSpec};
pub use quadrature::{positive_rule, quadrature_rule, QuadratureRule};

/// Norm exponent in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Exponent> {
        if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinity)
        } else if p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidArgument(format!("norm exponent {p} < 1")))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, zero for infinity.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// The exponent `2p`.
    pub fn doubled(self) -> Exponent {
        match self {
            Exponent::Finite(p) => Exponent::Finite(2.0 * p),
            Exponent::Infinity => Exponent::Infinity,
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Exponent> {
        match s.trim() {
            "inf" | "infinity" | "Infinity" => Ok(Exponent::Infinity),
            t => Exponent::new(
                t.parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad exponent '{t}'")))?,
            ),
        }
    }
}

/// Serialized as a number or the string `"inf"`.
impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Exponent, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let e = match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(t) => t.parse(),
        };
        e.map_err(serde::de::Error::custom)
    }
}

/// Per-cell affine maps of a mesh.
#[derive(Clone, Debug)]
pub struct CellMaps {
    pub maps: Vec<AffineMap>,
}

impl CellMaps {
    pub fn new(m: &SimplicialMesh) -> Result<CellMaps> {
        let maps = (0..m.num_cells())
            .into_par_iter()
            .map(|c| AffineMap::new(&m.simplex(c)))
            .collect::<Result<_>>()?;
        Ok(CellMaps { maps })
    }
}

/// Integration points plus the extra supremum sample points.
#[derive(Clone, Debug)]
pub struct Sampler {
    pub rule: Arc<QuadratureRule>,
    /// Reference points where `L_inf` norms are sampled.
    pub sup_points: Vec<Vec<f64>>,
}

impl Sampler {
    /// Positive-weight rule of the given exactness; the supremum set adds
    /// the vertices and the degree-`lattice_degree` Lagrange nodes.
    pub fn new(dim: usize, exactness: usize, lattice_degree: usize) -> Result<Sampler> {
        let rule = positive_rule(dim, exactness)?;
        let mut sup_points = rule.nodes.clone();
        let k = lattice_degree.max(1);
        sup_points.extend(
            basis::multi_indices(dim, k)
                .into_iter()
                .map(|a| a.into_iter().map(|ai| ai as f64 / k as f64).collect()),
        );
        Ok(Sampler { rule, sup_points })
    }

    pub fn dim(&self) -> usize {
        self.rule.dim
    }
}

/// Σ_K ∫_K g(cell, ξ, x) dx with the sampler's rule, reduced in cell order.
pub fn integrate<G>(maps: &CellMaps, sampler: &Sampler, g: G) -> f64
where
    G: Fn(usize, &[f64], &[f64]) -> f64 + Sync,
{
    let rule = &sampler.rule;
    let per_cell: Vec<f64> = maps
        .maps
        .par_iter()
        .enumerate()
        .map(|(c, map)| {
            let s: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(xi, w)| w * g(c, xi, &map.map(xi)))
                .sum();
            s * map.jacobian()
        })
        .collect();
    per_cell.iter().sum()
}

/// Per-cell integrals `∫_K g`.
pub fn integrate_cells<G>(maps: &CellMaps, sampler: &Sampler, g: G) -> Vec<f64>
where
    G: Fn(usize, &[f64], &[f64]) -> f64 + Sync,
{
    let rule = &sampler.rule;
    maps.maps
        .par_iter()
        .enumerate()
        .map(|(c, map)| {
            let s: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(xi, w)| w * g(c, xi, &map.map(xi)))
                .sum();
            s * map.jacobian()
        })
        .collect()
}

/// Component-wise `L_p` norm of a vector-valued integrand.
pub fn lp_norm<G>(maps: &CellMaps, sampler: &Sampler, p: Exponent, g: G) -> f64
where
    G: Fn(usize, &[f64], &[f64]) -> Vec<f64> + Sync,
{
    match p {
        Exponent::Finite(p) => {
            let total = integrate(maps, sampler, |c, xi, x| {
                g(c, xi, x).iter().map(|v| v.abs().powf(p)).sum()
            });
            total.powf(1.0 / p)
        }
        Exponent::Infinity => {
            let per_cell: Vec<f64> = maps
                .maps
                .par_iter()
                .enumerate()
                .map(|(c, map)| {
                    sampler
                        .sup_points
                        .iter()
                        .flat_map(|xi| g(c, xi, &map.map(xi)))
                        .fold(0.0, |m: f64, v| m.max(v.abs()))
                })
                .collect();
            per_cell.into_iter().fold(0.0, f64::max)
        }
    }
}

/// Degree-k Lagrange interpolant of a vector-valued function on one cell.
#[derive(Clone, Debug)]
pub struct LocalInterpolant {
    pub map: AffineMap,
    pub basis: Arc<ReferenceBasis>,
    /// Nodal values, one vector per Lagrange node.
    pub values: Vec<Vec<f64>>,
}

impl LocalInterpolant {
    /// Value at reference coordinates.
    pub fn eval_ref(&self, xi: &[f64]) -> Vec<f64> {
        let l = self.basis.eval(xi);
        let n = self.values.first().map_or(0, |v| v.len());
        let mut out = vec![0.0; n];
        for (lj, vj) in l.iter().zip(&self.values) {
            for (o, v) in out.iter_mut().zip(vj) {
                *o += lj * v;
            }
        }
        out
    }

    /// Value at physical coordinates.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.eval_ref(&self.map.inverse(x))
    }

    pub fn nodes_physical(&self) -> Vec<Vec<f64>> {
        self.basis.nodes.iter().map(|xi| self.map.map(xi)).collect()
    }
}

pub fn interpolate_local<F>(g: F, s: &Simplex, basis: &Arc<ReferenceBasis>) -> Result<LocalInterpolant>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let map = AffineMap::new(s)?;
    local_from_map(&g, map, basis)
}

fn local_from_map<F>(g: &F, map: AffineMap, basis: &Arc<ReferenceBasis>) -> Result<LocalInterpolant>
where
    F: Fn(&[f64]) -> Vec<f64> + ?Sized,
{
    if map.dim() != basis.dim {
        return Err(Error::DimensionMismatch {
            expected: basis.dim,
            found: map.dim(),
        });
    }
    let values = basis.nodes.iter().map(|xi| g(&map.map(xi))).collect();
    Ok(LocalInterpolant {
        map,
        basis: basis.clone(),
        values,
    })
}

/// Element-wise interpolant `I_h` over a mesh.
#[derive(Clone, Debug)]
pub struct GlobalInterpolant {
    pub locals: Vec<LocalInterpolant>,
}

impl GlobalInterpolant {
    pub fn eval_ref(&self, cell: usize, xi: &[f64]) -> Vec<f64> {
        self.locals[cell].eval_ref(xi)
    }
}

pub fn interpolate_global<F>(g: F, maps: &CellMaps, k: usize) -> Result<GlobalInterpolant>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let dim = maps.maps.first().map_or(1, |m| m.dim());
    let basis = reference_basis(dim, k)?;
    let locals = maps
        .maps
        .par_iter()
        .map(|map| local_from_map(&g, map.clone(), &basis))
        .collect::<Result<_>>()?;
    Ok(GlobalInterpolant { locals })
}

/// Interpolant of the gradient of a scalar field, `I_h(∇v)`.
pub fn interpolate_gradient(v: &dyn ScalarField, maps: &CellMaps, k: usize) -> Result<GlobalInterpolant> {
    interpolate_global(|x| v.gradient(x), maps, k)
}

/// Component-wise interpolant of a vector field.
pub fn interpolate_vector(f: &dyn VectorField, maps: &CellMaps, k: usize) -> Result<GlobalInterpolant> {
    interpolate_global(|x| f.value(x), maps, k)
}
