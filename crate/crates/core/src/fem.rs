//! Piecewise-linear finite elements for `-Δu = f` with Dirichlet data.
//!
//! Boundary vertices are those on facets with a single incident cell.
//! Dirichlet values are eliminated from the system, the reduced SPD system
//! is solved by Jacobi-preconditioned conjugate gradients.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{residual_floor, BoundCheckResult, MeshContext};
use crate::interp::field::{Polynomial, SineProduct};
use crate::interp::{quadrature_rule, AffineMap, Exponent, ScalarField};
use crate::mesh::SimplicialMesh;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
/// Exactness of the load-vector rule.
pub const LOAD_EXACTNESS: usize = 4;

/// Manufactured solutions on the unit cube.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MmsCase {
    /// `u = Π sin(π x_i)`, `f = d π^2 u`.
    SineProduct,
    /// `u = Π x_i (1 - x_i)`.
    QuadraticBubble,
    /// `u = 1 + Σ (i+1) x_i / 2`, `f = 0`, non-homogeneous boundary data.
    Affine,
}

impl MmsCase {
    pub const ALL: [MmsCase; 3] = [MmsCase::SineProduct, MmsCase::QuadraticBubble, MmsCase::Affine];

    pub fn name(self) -> &'static str {
        match self {
            MmsCase::SineProduct => "sine-product",
            MmsCase::QuadraticBubble => "quadratic-bubble",
            MmsCase::Affine => "affine",
        }
    }

    pub fn from_name(name: &str) -> Result<MmsCase> {
        MmsCase::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown MMS case '{name}'")))
    }

    /// Exact solution in dimension `d`.
    pub fn exact(self, d: usize) -> Box<dyn ScalarField> {
        match self {
            MmsCase::SineProduct => Box::new(SineProduct { dim: d, frequency: PI }),
            MmsCase::QuadraticBubble => {
                // expand Π (x_i - x_i^2)
                let mut terms = vec![(1.0, vec![0u32; d])];
                for i in 0..d {
                    let mut next = Vec::with_capacity(terms.len() * 2);
                    for (c, p) in &terms {
                        let mut a = p.clone();
                        a[i] = 1;
                        next.push((*c, a));
                        let mut b = p.clone();
                        b[i] = 2;
                        next.push((-*c, b));
                    }
                    terms = next;
                }
                Box::new(Polynomial { dim: d, terms })
            }
            MmsCase::Affine => {
                let mut terms = vec![(1.0, vec![0u32; d])];
                for i in 0..d {
                    let mut p = vec![0u32; d];
                    p[i] = 1;
                    terms.push(((i + 1) as f64 / 2.0, p));
                }
                Box::new(Polynomial { dim: d, terms })
            }
        }
    }
}

/// `-Δu = f` on a mesh, with `u = g` on the boundary.
pub struct PoissonProblem<'a> {
    pub mesh: &'a SimplicialMesh,
    pub forcing: Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>,
    pub dirichlet: Box<dyn Fn(&[f64]) -> f64 + Sync + 'a>,
    pub exact: Option<Box<dyn ScalarField>>,
    /// Allows d >= 4.
    pub allow_high_dim: bool,
}

impl<'a> PoissonProblem<'a> {
    /// Manufactured problem with forcing `-Δu` and boundary data `u`.
    pub fn manufactured(case: MmsCase, mesh: &'a SimplicialMesh) -> PoissonProblem<'a> {
        let d = mesh.dim();
        let u = case.exact(d);
        let forcing: Box<dyn Fn(&[f64]) -> f64 + Sync> = {
            let lap = case.exact(d);
            Box::new(move |x: &[f64]| {
                let h = lap.hessian(x);
                -(0..d).map(|i| h[i * d + i]).sum::<f64>()
            })
        };
        let g = case.exact(d);
        PoissonProblem {
            mesh,
            forcing,
            dirichlet: Box::new(move |x: &[f64]| g.value(x)),
            exact: Some(u),
            allow_high_dim: false,
        }
    }

    pub fn with_high_dim(mut self, allow: bool) -> Self {
        self.allow_high_dim = allow;
        self
    }
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; the result has sorted columns.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> CsrMatrix {
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::new();
        let mut values: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            n,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.values[k] * x[self.cols[k]])
                    .sum()
            })
            .collect()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        (self.row_ptr[r]..self.row_ptr[r + 1])
            .find(|&k| self.cols[k] == c)
            .map_or(0.0, |k| self.values[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn row_sum(&self, r: usize) -> f64 {
        self.values[self.row_ptr[r]..self.row_ptr[r + 1]].iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    /// Full stiffness matrix over all vertices.
    pub stiffness: CsrMatrix,
    /// Full load vector `∫ f φ_i`.
    pub load: Vec<f64>,
    pub boundary: Vec<bool>,
    /// Dirichlet values at boundary vertices, zero elsewhere.
    pub boundary_values: Vec<f64>,
    /// Interior vertex of each unknown.
    pub dofs: Vec<usize>,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Gradients of the barycentric functions of a cell, vertex order.
pub fn barycentric_gradients(map: &AffineMap) -> Vec<Vec<f64>> {
    let d = map.dim();
    let mut g = Vec::with_capacity(d + 1);
    let rows: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| map.a_inv[(i, j)]).collect())
        .collect();
    g.push((0..d).map(|j| -rows.iter().map(|r| r[j]).sum::<f64>()).collect());
    g.extend(rows);
    g
}

pub fn assemble(problem: &PoissonProblem) -> Result<LinearSystem> {
    let m = problem.mesh;
    let d = m.dim();
    if d < 2 {
        return Err(Error::Unsupported("Poisson solver needs d >= 2".into()));
    }
    if d >= 4 && !problem.allow_high_dim {
        return Err(Error::Unsupported(format!(
            "d={d} Poisson solve is disabled unless explicitly allowed"
        )));
    }
    let n = m.points().len();
    let boundary = m.boundary_vertices();
    let dofs: Vec<usize> = (0..n).filter(|&v| !boundary[v]).collect();
    if dofs.is_empty() {
        return Err(Error::NoInteriorVertex);
    }
    let rule = quadrature_rule(d, LOAD_EXACTNESS)?;
    let local: Vec<(Vec<f64>, Vec<f64>)> = (0..m.num_cells())
        .into_par_iter()
        .map(|c| {
            let map = AffineMap::new(&m.simplex(c))?;
            let grads = barycentric_gradients(&map);
            let vol = map.jacobian() / crate::geom::factorial(d);
            let mut k = vec![0.0; (d + 1) * (d + 1)];
            for i in 0..=d {
                for j in 0..=d {
                    k[i * (d + 1) + j] = vol * crate::geom::dot(&grads[i], &grads[j]);
                }
            }
            let mut f = vec![0.0; d + 1];
            for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
                let fx = (problem.forcing)(&map.map(xi)) * w * map.jacobian();
                f[0] += fx * (1.0 - xi.iter().sum::<f64>());
                for i in 0..d {
                    f[i + 1] += fx * xi[i];
                }
            }
            Ok((k, f))
        })
        .collect::<Result<_>>()?;

    let mut triplets = Vec::with_capacity(m.num_cells() * (d + 1) * (d + 1));
    let mut load = vec![0.0; n];
    for (cell, (k, f)) in m.cells().iter().zip(&local) {
        for i in 0..=d {
            load[cell[i]] += f[i];
            for j in 0..=d {
                triplets.push((cell[i], cell[j], k[i * (d + 1) + j]));
            }
        }
    }
    let stiffness = CsrMatrix::from_triplets(n, triplets);

    let boundary_values: Vec<f64> = (0..n)
        .map(|v| {
            if boundary[v] {
                (problem.dirichlet)(m.points().point(v))
            } else {
                0.0
            }
        })
        .collect();
    let mut index = vec![usize::MAX; n];
    for (k, &v) in dofs.iter().enumerate() {
        index[v] = k;
    }
    let mut reduced = Vec::new();
    let mut rhs: Vec<f64> = dofs.iter().map(|&v| load[v]).collect();
    for (k, &v) in dofs.iter().enumerate() {
        for p in stiffness.row_ptr[v]..stiffness.row_ptr[v + 1] {
            let c = stiffness.cols[p];
            let a = stiffness.values[p];
            if boundary[c] {
                rhs[k] -= a * boundary_values[c];
            } else {
                reduced.push((k, index[c], a));
            }
        }
    }
    Ok(LinearSystem {
        matrix: CsrMatrix::from_triplets(dofs.len(), reduced),
        stiffness,
        load,
        boundary,
        boundary_values,
        dofs,
        rhs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSolution {
    /// Nodal values at every mesh vertex.
    pub values: Vec<f64>,
    /// Relative residual of the reduced system.
    pub residual: f64,
    pub iterations: usize,
    /// Estimate of `‖∇(u_h - u_h*)‖`, the distance to the exact discrete
    /// solution, from `sqrt(rᵀ A⁻¹ r)` with the true residual `r`.
    pub algebraic_error: f64,
}

/// Jacobi-preconditioned CG on `A x = b`; returns (x, relative residual,
/// iterations).
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64, usize)> {
    let n = a.n;
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0.0, 0));
    }
    let diag = a.diagonal();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut rel = 1.0;
    for it in 1..=max_iter {
        let ap = a.mul(&p);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if rel <= tol {
            return Ok((x, rel, it));
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: rel,
    })
}

pub fn solve(system: &LinearSystem, tol: f64) -> Result<DiscreteSolution> {
    let max_iter = 10 * system.dofs.len() + 100;
    let (x, residual, iterations) = conjugate_gradient(&system.matrix, &system.rhs, tol, max_iter)?;
    let mut values = system.boundary_values.clone();
    for (k, &v) in system.dofs.iter().enumerate() {
        values[v] = x[k];
    }
    let ax = system.matrix.mul(&x);
    let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
    let (z, _, _) = conjugate_gradient(&system.matrix, &r, 1e-6, max_iter)?;
    let algebraic_error = r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt();
    Ok(DiscreteSolution {
        values,
        residual,
        iterations,
        algebraic_error,
    })
}

/// `J(v) = a(v, v) - 2 L(v)` for a full nodal vector.
pub fn energy_functional(v: &[f64], system: &LinearSystem) -> f64 {
    let kv = system.stiffness.mul(v);
    let a: f64 = v.iter().zip(&kv).map(|(x, y)| x * y).sum();
    let l: f64 = v.iter().zip(&system.load).map(|(x, y)| x * y).sum();
    a - 2.0 * l
}

/// `a(v, w)` for full nodal vectors.
pub fn bilinear(v: &[f64], w: &[f64], system: &LinearSystem) -> f64 {
    let kw = system.stiffness.mul(w);
    v.iter().zip(&kw).map(|(x, y)| x * y).sum()
}

/// Per-cell constant gradients of a nodal P1 function.
pub fn cell_gradients(ctx: &MeshContext, values: &[f64]) -> Vec<Vec<f64>> {
    ctx.maps
        .maps
        .iter()
        .zip(ctx.mesh.cells())
        .map(|(map, cell)| {
            let g = barycentric_gradients(map);
            let d = map.dim();
            (0..d)
                .map(|j| cell.iter().zip(&g).map(|(&v, gi)| values[v] * gi[j]).sum())
                .collect()
        })
        .collect()
}

/// `‖∇(u - w_h)‖_{L2}` for a P1 function given by nodal values.
pub fn gradient_error_of(ctx: &MeshContext, u: &dyn ScalarField, values: &[f64]) -> f64 {
    let grads = cell_gradients(ctx, values);
    ctx.norm(Exponent::Finite(2.0), |c, _, x| {
        u.gradient(x).iter().zip(&grads[c]).map(|(a, b)| a - b).collect()
    })
}

pub fn gradient_error(problem: &PoissonProblem, solution: &DiscreteSolution, ctx: &MeshContext) -> Result<f64> {
    let u = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("exact solution required".into()))?;
    Ok(gradient_error_of(ctx, u.as_ref(), &solution.values))
}

/// Constants used by the two FEM theorems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FemConstants {
    pub c_int_first: f64,
    pub c_int_second: f64,
}

/// Best-approximation step plus both gradient-approximation theorems.
pub fn approximation_bounds(
    problem: &PoissonProblem,
    solution: &DiscreteSolution,
    ctx: &MeshContext,
    c: FemConstants,
) -> Result<Vec<BoundCheckResult>> {
    let u = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("exact solution required".into()))?;
    let lhs = gradient_error_of(ctx, u.as_ref(), &solution.values);
    let nodal: Vec<f64> = ctx.mesh.points().iter().map(|x| u.value(x)).collect();
    let interp_err = gradient_error_of(ctx, u.as_ref(), &nodal);
    let grad_norm = ctx.gradient_norm(u.as_ref(), Exponent::Finite(2.0));
    let hess_norm = ctx.hessian_norm(u.as_ref(), Exponent::Finite(2.0));
    let r = &ctx.report;
    // the Galerkin solution itself satisfies the bounds; the computed one
    // may differ from it by the algebraic error
    let floor = residual_floor(grad_norm) + 2.0 * solution.algebraic_error;
    let mut consts = std::collections::BTreeMap::new();
    consts.insert("solver_residual".to_string(), solution.residual);
    consts.insert("algebraic_error".to_string(), solution.algebraic_error);
    let cea = BoundCheckResult::with_tolerance("best-approximation", lhs, interp_err, consts, 1e-8, floor);
    let mut k1 = std::collections::BTreeMap::new();
    k1.insert("c_int".to_string(), c.c_int_first);
    k1.insert("c_sigma".to_string(), r.c_sigma);
    k1.insert("grad_norm_l2".to_string(), grad_norm);
    let first = BoundCheckResult::with_tolerance(
        "fem-theorem-first",
        lhs,
        c.c_int_first * r.c_sigma * grad_norm,
        k1,
        crate::functionals::REL_SLACK,
        floor,
    );
    let mut k2 = std::collections::BTreeMap::new();
    k2.insert("c_int".to_string(), c.c_int_second);
    k2.insert("c_sigma".to_string(), r.c_sigma);
    k2.insert("r_max".to_string(), r.r_max);
    k2.insert("hessian_norm_l2".to_string(), hess_norm);
    let second = BoundCheckResult::with_tolerance(
        "fem-theorem-second",
        lhs,
        2.0 * c.c_int_second * r.c_sigma * r.r_max * hess_norm,
        k2,
        crate::functionals::REL_SLACK,
        floor,
    );
    Ok(vec![cea, first, second])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{structured_grid, PointSet};

    fn five_point() -> SimplicialMesh {
        let ps = PointSet::from_rows(
            2,
            &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]],
        )
        .unwrap();
        SimplicialMesh::new(ps, vec![vec![0, 1, 4], vec![1, 2, 4], vec![2, 3, 4], vec![3, 0, 4]]).unwrap()
    }

    #[test]
    fn no_interior_vertex() {
        let ps = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let m = SimplicialMesh::new(ps, vec![vec![0, 1, 2]]).unwrap();
        let p = PoissonProblem::manufactured(MmsCase::SineProduct, &m);
        assert_eq!(assemble(&p).unwrap_err(), Error::NoInteriorVertex);
    }

    #[test]
    fn five_point_assembly() {
        let m = five_point();
        let p = PoissonProblem::manufactured(MmsCase::SineProduct, &m);
        let s = assemble(&p).unwrap();
        assert_eq!(s.matrix.n, 1);
        assert!((s.matrix.get(0, 0) - 4.0).abs() < 1e-14);
        for r in 0..s.stiffness.n {
            assert!(s.stiffness.row_sum(r).abs() < 1e-14);
        }
        let sol = solve(&s, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let m = structured_grid(2, 4).unwrap();
        let p = PoissonProblem {
            mesh: &m,
            forcing: Box::new(|_| 0.0),
            dirichlet: Box::new(|_| 0.0),
            exact: None,
            allow_high_dim: false,
        };
        let sol = solve(&assemble(&p).unwrap(), DEFAULT_TOLERANCE).unwrap();
        assert!(sol.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_identity_and_minimum() {
        let m = structured_grid(2, 6).unwrap();
        let p = PoissonProblem::manufactured(MmsCase::SineProduct, &m);
        let s = assemble(&p).unwrap();
        let sol = solve(&s, 1e-12).unwrap();
        let j = energy_functional(&sol.values, &s);
        let a = bilinear(&sol.values, &sol.values, &s);
        assert!((j + a).abs() < 1e-9 * a);
        assert_eq!(energy_functional(&vec![0.0; sol.values.len()], &s), 0.0);
        let mut v = sol.values.clone();
        v[s.dofs[3]] += 0.01;
        assert!(energy_functional(&v, &s) > j);
    }

    #[test]
    fn affine_is_reproduced() {
        let m = structured_grid(3, 3).unwrap();
        let p = PoissonProblem::manufactured(MmsCase::Affine, &m);
        let s = assemble(&p).unwrap();
        let sol = solve(&s, 1e-13).unwrap();
        let ctx = MeshContext::new(&m, 2, 1).unwrap();
        assert!(gradient_error(&p, &sol, &ctx).unwrap() < 1e-10);
    }

    #[test]
    fn high_dim_gate() {
        let m = structured_grid(4, 2).unwrap();
        let p = PoissonProblem::manufactured(MmsCase::SineProduct, &m);
        assert!(matches!(assemble(&p), Err(Error::Unsupported(_))));
        let p = PoissonProblem::manufactured(MmsCase::SineProduct, &m).with_high_dim(true);
        assert!(assemble(&p).is_ok());
    }

    #[test]
    fn galerkin_orthogonality() {
        let m = structured_grid(2, 5).unwrap();
        let p = PoissonProblem::manufactured(MmsCase::QuadraticBubble, &m);
        let s = assemble(&p).unwrap();
        let sol = solve(&s, 1e-13).unwrap();
        let ctx = MeshContext::new(&m, 4, 1).unwrap();
        let u = p.exact.as_ref().unwrap();
        let ku = s.stiffness.mul(&sol.values);
        for &v in &s.dofs {
            // ∫ ∇u·∇φ_v, φ_v the hat function of v
            let mut hat = vec![0.0; m.points().len()];
            hat[v] = 1.0;
            let grads = cell_gradients(&ctx, &hat);
            let a_u = crate::interp::integrate(&ctx.maps, &ctx.sampler, |c, _, x| {
                crate::geom::dot(&u.gradient(x), &grads[c])
            });
            assert!((a_u - ku[v]).abs() < 1e-10, "{a_u} vs {}", ku[v]);
        }
    }

    #[test]
    fn sine_first_order_and_bounds() {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [4, 8, 16] {
            let m = structured_grid(2, n).unwrap();
            let p = PoissonProblem::manufactured(MmsCase::SineProduct, &m);
            let sol = solve(&assemble(&p).unwrap(), 1e-12).unwrap();
            let ctx = MeshContext::new(&m, 6, 1).unwrap();
            errs.push(gradient_error(&p, &sol, &ctx).unwrap());
            hs.push(ctx.report.h);
            let c = FemConstants {
                c_int_first: 1.0,
                c_int_second: 1.0,
            };
            let checks = approximation_bounds(&p, &sol, &ctx, c).unwrap();
            assert!(checks[0].pass, "{:?}", checks[0]);
        }
        for i in 0..2 {
            let order = (errs[i] / errs[i + 1]).ln() / (hs[i] / hs[i + 1]).ln();
            assert!((0.9..=1.1).contains(&order), "order {order}");
        }
    }

    #[test]
    fn affine_best_approximation_passes() {
        let m = structured_grid(2, 6).unwrap();
        let p = PoissonProblem::manufactured(MmsCase::Affine, &m);
        let sol = solve(&assemble(&p).unwrap(), DEFAULT_TOLERANCE).unwrap();
        let ctx = MeshContext::new(&m, 2, 1).unwrap();
        let c = FemConstants {
            c_int_first: 1.0,
            c_int_second: 1.0,
        };
        let checks = approximation_bounds(&p, &sol, &ctx, c).unwrap();
        for r in &checks {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn case_names() {
        for c in MmsCase::ALL {
            assert_eq!(MmsCase::from_name(c.name()).unwrap(), c);
        }
        assert!(MmsCase::from_name("nope").is_err());
    }
}
