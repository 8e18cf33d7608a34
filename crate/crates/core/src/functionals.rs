//! The edge functional Ψ, gradient/Hessian norms, the constants `C_d` and
//! `C_ϱ`, and evaluators for every interpolation bound.
//!
//! All integrals of one [`MeshContext`] share a single positive-weight rule,
//! so inequalities that hold pointwise also hold for the computed values.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use rayon::prelude::*;

use crate::interp::{interpolate_global, CellMaps, Exponent, GlobalInterpolant, Sampler, ScalarField, VectorField};
use crate::mesh::SimplicialMesh;
use crate::quality::{quality_report, theta_upper_bound, QualityReport};

/// Default relative slack of a bound check.
pub const REL_SLACK: f64 = 1e-9;

/// `sqrt(d(d+1)/2)`.
pub fn c_d(d: usize) -> f64 {
    ((d * (d + 1)) as f64 / 2.0).sqrt()
}

/// `sqrt(d (2(d+1))^{1/ϱ})`; `sqrt(d)` for ϱ = ∞.
pub fn c_rho(d: usize, rho: Exponent) -> f64 {
    (d as f64 * (2.0 * (d + 1) as f64).powf(rho.recip())).sqrt()
}

/// `(ϱ-1)/(2ϱ)`, the Θ exponent, with limit 1/2.
pub fn theta_exponent(rho: Exponent) -> f64 {
    match rho {
        Exponent::Finite(p) => (p - 1.0) / (2.0 * p),
        Exponent::Infinity => 0.5,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c_d: f64,
    pub c_rho: Option<f64>,
    pub c_int: Option<f64>,
    pub lambda: Option<Exponent>,
    pub rho_exponent: Option<Exponent>,
}

/// One evaluated inequality `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckResult {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constants: BTreeMap<String, f64>,
    /// Margin `rhs - lhs`.
    pub slack: f64,
    /// Relative tolerance applied to `rhs`.
    pub rel_tol: f64,
    /// Absolute allowance for rounding when `lhs` is a cancellation residual.
    pub abs_tol: f64,
    pub pass: bool,
}

impl BoundCheckResult {
    pub fn new(name: &str, lhs: f64, rhs: f64, constants: BTreeMap<String, f64>) -> Self {
        Self::with_tolerance(name, lhs, rhs, constants, REL_SLACK, 0.0)
    }

    pub fn with_tolerance(
        name: &str,
        lhs: f64,
        rhs: f64,
        constants: BTreeMap<String, f64>,
        rel: f64,
        abs_tol: f64,
    ) -> Self {
        BoundCheckResult {
            name: name.to_string(),
            lhs,
            rhs,
            constants,
            slack: rhs - lhs,
            rel_tol: rel,
            abs_tol,
            pass: lhs <= rhs * (1.0 + rel) + abs_tol,
        }
    }
}

fn constants(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Rounding allowance for an interpolation residual whose operands have
/// magnitude `scale`.
pub fn residual_floor(scale: f64) -> f64 {
    1e3 * f64::EPSILON * scale
}

/// Field values at every supremum sample point of every cell; the first
/// `rule.len()` points of a cell are the integration nodes.
pub struct Samples {
    pub comps: usize,
    pub per_cell: Vec<Vec<f64>>,
}

/// Everything the bound evaluators need about one mesh.
pub struct MeshContext<'a> {
    pub mesh: &'a SimplicialMesh,
    pub report: QualityReport,
    pub maps: CellMaps,
    pub sampler: Sampler,
    edges: Vec<Vec<Vec<f64>>>,
    /// Physical coordinates of the sample points, flattened per cell.
    points: Vec<Vec<f64>>,
}

impl<'a> MeshContext<'a> {
    /// `exactness` sets the integration rule; `lattice_degree` adds the
    /// Lagrange nodes of that degree to the supremum samples.
    pub fn new(mesh: &'a SimplicialMesh, exactness: usize, lattice_degree: usize) -> Result<Self> {
        let report = quality_report(mesh)?;
        let maps = CellMaps::new(mesh)?;
        let sampler = Sampler::new(mesh.dim(), exactness, lattice_degree)?;
        let edges = mesh.simplices().map(|s| s.edges()).collect();
        let points = maps
            .maps
            .par_iter()
            .map(|m| sampler.sup_points.iter().flat_map(|xi| m.map(xi)).collect())
            .collect();
        Ok(MeshContext {
            mesh,
            report,
            maps,
            sampler,
            edges,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n,
            });
        }
        Ok(())
    }

    /// Evaluates `w(cell, ξ, x)` at every sample point.
    pub fn sample<W>(&self, w: W) -> Samples
    where
        W: Fn(usize, &[f64], &[f64]) -> Vec<f64> + Sync,
    {
        let d = self.dim();
        let per_cell: Vec<Vec<f64>> = (0..self.points.len())
            .into_par_iter()
            .map(|c| {
                self.sampler
                    .sup_points
                    .iter()
                    .zip(self.points[c].chunks_exact(d))
                    .flat_map(|(xi, x)| w(c, xi, x))
                    .collect()
            })
            .collect();
        let n = self.sampler.sup_points.len();
        let comps = per_cell.first().map_or(0, |v| v.len() / n);
        Samples { comps, per_cell }
    }

    /// Ψ of sampled values, `h_K = Δ(K)`.
    pub fn roughness_of(&self, s: &Samples) -> f64 {
        let rule = &self.sampler.rule;
        let m = s.comps;
        let total: f64 = (0..self.points.len())
            .map(|c| {
                let integral: f64 = rule
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(q, wq)| {
                        let wv = &s.per_cell[c][q * m..(q + 1) * m];
                        let sum: f64 = self.edges[c]
                            .iter()
                            .map(|e| {
                                let t: f64 = wv.iter().zip(e).map(|(a, b)| a.abs() * b.abs()).sum();
                                t * t
                            })
                            .sum();
                        wq * sum
                    })
                    .sum();
                let delta = self.report.per_element[c].delta;
                integral * self.maps.maps[c].jacobian() / (delta * delta)
            })
            .sum();
        total.sqrt()
    }

    /// Component-wise `L_p` norm of sampled values.
    pub fn norm_of(&self, s: &Samples, p: Exponent) -> f64 {
        let rule = &self.sampler.rule;
        let m = s.comps;
        match p {
            Exponent::Finite(p) => {
                let total: f64 = (0..self.points.len())
                    .map(|c| {
                        let integral: f64 = rule
                            .weights
                            .iter()
                            .enumerate()
                            .map(|(q, wq)| {
                                wq * s.per_cell[c][q * m..(q + 1) * m]
                                    .iter()
                                    .map(|v| v.abs().powf(p))
                                    .sum::<f64>()
                            })
                            .sum();
                        integral * self.maps.maps[c].jacobian()
                    })
                    .sum();
                total.powf(1.0 / p)
            }
            Exponent::Infinity => s
                .per_cell
                .iter()
                .flatten()
                .fold(0.0, |a: f64, v| a.max(v.abs())),
        }
    }

    /// Ψ(w) with `h_K = Δ(K)`.
    pub fn roughness<W>(&self, w: W) -> f64
    where
        W: Fn(usize, &[f64], &[f64]) -> Vec<f64> + Sync,
    {
        self.roughness_of(&self.sample(w))
    }

    pub fn norm<G>(&self, p: Exponent, g: G) -> f64
    where
        G: Fn(usize, &[f64], &[f64]) -> Vec<f64> + Sync,
    {
        self.norm_of(&self.sample(g), p)
    }

    pub fn gradient_norm(&self, v: &dyn ScalarField, p: Exponent) -> f64 {
        self.norm(p, |_, _, x| v.gradient(x))
    }

    pub fn hessian_norm(&self, v: &dyn ScalarField, p: Exponent) -> f64 {
        self.norm(p, |_, _, x| v.hessian(x))
    }

    pub fn roughness_of_gradient(&self, v: &dyn ScalarField) -> Result<f64> {
        self.check_dim(v.dim())?;
        Ok(self.roughness(|_, _, x| v.gradient(x)))
    }

    /// Two-sided bound `C_d C_Ξ ‖w‖ <= Ψ(w) <= C_Υ ‖w‖` for a vector field
    /// given pointwise.
    pub fn equivalence<W>(&self, w: W) -> (BoundCheckResult, BoundCheckResult)
    where
        W: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        self.equivalence_of(&self.sample(|_, _, x| w(x)))
    }

    fn equivalence_of(&self, s: &Samples) -> (BoundCheckResult, BoundCheckResult) {
        let d = self.dim();
        let psi = self.roughness_of(s);
        let norm = self.norm_of(s, Exponent::Finite(2.0));
        let r = &self.report;
        let lower = BoundCheckResult::new(
            "edge-functional-lower",
            c_d(d) * r.c_xi * norm,
            psi,
            constants(&[("c_d", c_d(d)), ("c_xi", r.c_xi), ("grad_norm_l2", norm)]),
        );
        let upper = BoundCheckResult::new(
            "edge-functional-upper",
            psi,
            r.c_upsilon * norm,
            constants(&[("c_upsilon", r.c_upsilon), ("grad_norm_l2", norm)]),
        );
        (lower, upper)
    }

    pub fn equivalence_bounds(&self, v: &dyn ScalarField) -> Result<(BoundCheckResult, BoundCheckResult)> {
        self.check_dim(v.dim())?;
        Ok(self.equivalence(|x| v.gradient(x)))
    }

    /// Isotropic upper bound `Ψ(w) <= C_ϱ Θ^{(ϱ-1)/2ϱ} R_max^{1/ϱ} / min Δ ‖w‖_{L_2ϱ}`.
    pub fn upper_bound<W>(&self, w: W, rho: Exponent) -> Result<BoundCheckResult>
    where
        W: Fn(&[f64]) -> Vec<f64> + Sync,
    {
        self.upper_bound_of(&self.sample(|_, _, x| w(x)), rho)
    }

    fn upper_bound_of(&self, s: &Samples, rho: Exponent) -> Result<BoundCheckResult> {
        if rho.value() <= 1.0 {
            return Err(Error::InvalidArgument("isotropic bound needs rho > 1".into()));
        }
        let d = self.dim();
        let r = &self.report;
        let psi = self.roughness_of(s);
        let norm = self.norm_of(s, rho.doubled());
        let cr = c_rho(d, rho);
        let rhs = cr * r.theta.powf(theta_exponent(rho)) * r.r_max.powf(rho.recip()) / r.min_delta * norm;
        Ok(BoundCheckResult::new(
            "edge-functional-isotropic",
            psi,
            rhs,
            constants(&[
                ("c_rho", cr),
                ("rho", rho.value()),
                ("theta", r.theta),
                ("r_max", r.r_max),
                ("min_delta", r.min_delta),
                ("grad_norm_l2rho", norm),
            ]),
        ))
    }

    /// Both sides of the two-sided bound followed by the isotropic bound for each ϱ, from a single
    /// evaluation of `∇v`.
    pub fn lemma_bounds(&self, v: &dyn ScalarField, rhos: &[Exponent]) -> Result<Vec<BoundCheckResult>> {
        self.check_dim(v.dim())?;
        let s = self.sample(|_, _, x| v.gradient(x));
        let (lo, hi) = self.equivalence_of(&s);
        let mut out = vec![lo, hi];
        for &rho in rhos {
            out.push(self.upper_bound_of(&s, rho)?);
        }
        Ok(out)
    }

    pub fn isotropic_bound(&self, v: &dyn ScalarField, rho: Exponent) -> Result<BoundCheckResult> {
        self.check_dim(v.dim())?;
        self.upper_bound(|x| v.gradient(x), rho)
    }

    /// Θ against its `R_max` upper bound.
    pub fn theta_bound(&self) -> Result<BoundCheckResult> {
        let bound = theta_upper_bound(&self.report, self.dim())?;
        Ok(BoundCheckResult::new(
            "theta-upper-bound",
            self.report.theta,
            bound,
            constants(&[("r_max", self.report.r_max), ("card", self.report.card as f64)]),
        ))
    }

    fn interpolation_residual(
        &self,
        w: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
        ih: &GlobalInterpolant,
        p: Exponent,
    ) -> (f64, f64) {
        let lhs = self.norm(p, |c, xi, x| {
            w(x).iter().zip(ih.eval_ref(c, xi)).map(|(a, b)| a - b).collect()
        });
        let scale = self.norm(p, |_, _, x| w(x));
        (lhs, residual_floor(scale))
    }

    /// `‖w - I_h w‖_{L2} <= (c_int C_ϱ / C_d)(C_Δ R^{1/ϱ} Θ^{..} / C_Ξ) ‖∇w‖_{L_2ϱ}`.
    pub fn l2_interpolation_bound(
        &self,
        name: &str,
        w: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
        dw: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
        k: usize,
        rho: Exponent,
        c_int: f64,
    ) -> Result<BoundCheckResult> {
        if rho.value() <= 1.0 {
            return Err(Error::InvalidArgument("rho must exceed 1".into()));
        }
        let d = self.dim();
        let r = &self.report;
        let ih = interpolate_global(w, &self.maps, k)?;
        let (lhs, floor) = self.interpolation_residual(w, &ih, Exponent::Finite(2.0));
        let dnorm = self.norm(rho.doubled(), |_, _, x| dw(x));
        let shape = r.c_delta * r.r_max.powf(rho.recip()) * r.theta.powf(theta_exponent(rho)) / r.c_xi;
        let cr = c_rho(d, rho);
        let rhs = c_int * cr / c_d(d) * shape * dnorm;
        Ok(BoundCheckResult::with_tolerance(
            name,
            lhs,
            rhs,
            constants(&[
                ("c_int", c_int),
                ("c_rho", cr),
                ("c_d", c_d(d)),
                ("rho", rho.value()),
                ("k", k as f64),
                ("c_delta", r.c_delta),
                ("c_xi", r.c_xi),
                ("r_max", r.r_max),
                ("theta", r.theta),
                ("deriv_norm", dnorm),
            ]),
            REL_SLACK,
            floor,
        ))
    }

    /// `‖w - I_h w‖_{L_λ} <= 2 c_int R_max ‖∇w‖_{L_λ}`.
    pub fn llambda_interpolation_bound(
        &self,
        name: &str,
        w: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
        dw: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
        k: usize,
        lambda: Exponent,
        c_int: f64,
    ) -> Result<BoundCheckResult> {
        let r = &self.report;
        let ih = interpolate_global(w, &self.maps, k)?;
        let (lhs, floor) = self.interpolation_residual(w, &ih, lambda);
        let dnorm = self.norm(lambda, |_, _, x| dw(x));
        let rhs = 2.0 * c_int * r.r_max * dnorm;
        Ok(BoundCheckResult::with_tolerance(
            name,
            lhs,
            rhs,
            constants(&[
                ("c_int", c_int),
                ("lambda", lambda.value()),
                ("k", k as f64),
                ("r_max", r.r_max),
                ("deriv_norm", dnorm),
            ]),
            REL_SLACK,
            floor,
        ))
    }

    pub fn interp_bound_l2(&self, v: &dyn ScalarField, k: usize, rho: Exponent, c_int: f64) -> Result<BoundCheckResult> {
        self.check_dim(v.dim())?;
        self.l2_interpolation_bound("theorem-l2", &|x| v.gradient(x), &|x| v.hessian(x), k, rho, c_int)
    }

    pub fn interp_bound_llambda(
        &self,
        v: &dyn ScalarField,
        k: usize,
        lambda: Exponent,
        c_int: f64,
    ) -> Result<BoundCheckResult> {
        self.check_dim(v.dim())?;
        self.llambda_interpolation_bound("theorem-llambda", &|x| v.gradient(x), &|x| v.hessian(x), k, lambda, c_int)
    }

    pub fn vector_bound_l2(&self, f: &dyn VectorField, k: usize, rho: Exponent, c_int: f64) -> Result<BoundCheckResult> {
        self.check_dim(f.dim())?;
        self.l2_interpolation_bound("vector-theorem-l2", &|x| f.value(x), &|x| f.jacobian(x), k, rho, c_int)
    }

    pub fn vector_bound_llambda(
        &self,
        f: &dyn VectorField,
        k: usize,
        lambda: Exponent,
        c_int: f64,
    ) -> Result<BoundCheckResult> {
        self.check_dim(f.dim())?;
        self.llambda_interpolation_bound(
            "vector-theorem-llambda",
            &|x| f.value(x),
            &|x| f.jacobian(x),
            k,
            lambda,
            c_int,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::field::{Polynomial, Quadratic, Rotational};
    use crate::mesh::PointSet;

    fn single_triangle() -> SimplicialMesh {
        let ps = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        SimplicialMesh::new(ps, vec![vec![0, 1, 2]]).unwrap()
    }

    fn square() -> SimplicialMesh {
        let ps = PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        SimplicialMesh::new(ps, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap()
    }

    fn x_field() -> Polynomial {
        Polynomial {
            dim: 2,
            terms: vec![(1.0, vec![1, 0])],
        }
    }

    #[test]
    fn constants_closed_form() {
        assert_eq!(c_d(3), 6f64.sqrt());
        assert!((c_rho(2, Exponent::Finite(2.0)) - (2.0 * 6f64.sqrt()).sqrt()).abs() < 1e-14);
        assert!((c_rho(2, Exponent::Finite(2.0)) - 2.2133638).abs() < 1e-7);
        assert_eq!(c_rho(3, Exponent::Infinity), 3f64.sqrt());
        let mut prev = f64::INFINITY;
        for p in [1.5, 2.0, 4.0, 16.0] {
            let c = c_rho(3, Exponent::Finite(p));
            assert!(c < prev && c > 3f64.sqrt());
            prev = c;
        }
    }

    #[test]
    fn roughness_of_x_on_triangle() {
        let m = single_triangle();
        let ctx = MeshContext::new(&m, 2, 1).unwrap();
        let psi = ctx.roughness_of_gradient(&x_field()).unwrap();
        assert!((psi - 0.5f64.sqrt()).abs() < 1e-14);
        let zero = Polynomial { dim: 2, terms: vec![] };
        assert_eq!(ctx.roughness_of_gradient(&zero).unwrap(), 0.0);
        let scaled = m.scaled(2.0);
        let ctx2 = MeshContext::new(&scaled, 2, 1).unwrap();
        assert!((ctx2.roughness_of_gradient(&x_field()).unwrap() - 2.0 * psi).abs() < 1e-13);
    }

    #[test]
    fn sandwich_on_triangle() {
        let m = single_triangle();
        let ctx = MeshContext::new(&m, 2, 1).unwrap();
        let (lo, hi) = ctx.equivalence_bounds(&x_field()).unwrap();
        assert!((lo.lhs - 0.3061862).abs() < 1e-7);
        assert!((hi.rhs - 1.0).abs() < 1e-14);
        assert!(lo.pass && hi.pass);
    }

    #[test]
    fn isotropic_on_triangle() {
        let m = single_triangle();
        let ctx = MeshContext::new(&m, 4, 1).unwrap();
        for rho in [Exponent::Finite(2.0), Exponent::Infinity] {
            assert!(ctx.isotropic_bound(&x_field(), rho).unwrap().pass);
        }
        assert!(ctx.isotropic_bound(&x_field(), Exponent::Finite(1.0)).is_err());
        assert!(ctx.theta_bound().unwrap().pass);
    }

    #[test]
    fn norms_on_square() {
        let m = square();
        let ctx = MeshContext::new(&m, 4, 1).unwrap();
        let half_x2 = Polynomial {
            dim: 2,
            terms: vec![(0.5, vec![2, 0])],
        };
        let l2 = Exponent::Finite(2.0);
        assert!((ctx.gradient_norm(&x_field(), l2) - 1.0).abs() < 1e-14);
        assert!((ctx.gradient_norm(&half_x2, l2) - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        let q = Quadratic {
            a: vec![0.0, 0.0],
            b: 0.0,
        };
        // Hessian of |x|^2/2 is the identity
        assert!((0.5 * ctx.hessian_norm(&q, l2) - 2f64.sqrt()).abs() < 1e-14);
        let xy = Polynomial {
            dim: 2,
            terms: vec![(1.0, vec![1, 1])],
        };
        assert!((ctx.hessian_norm(&xy, l2) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(ctx.hessian_norm(&x_field(), l2), 0.0);
    }

    #[test]
    fn reproduction_gives_zero_lhs() {
        let m = square();
        let ctx = MeshContext::new(&m, 4, 1).unwrap();
        let q = Quadratic {
            a: vec![0.3, -0.2],
            b: 1.0,
        };
        let r = ctx.interp_bound_l2(&q, 1, Exponent::Finite(2.0), 1.0).unwrap();
        assert!(r.lhs < 1e-14 && r.pass);
        let f = Rotational { dim: 2 };
        for lambda in [Exponent::Finite(1.0), Exponent::Infinity] {
            let r = ctx.vector_bound_llambda(&f, 1, lambda, 1.0).unwrap();
            assert!(r.lhs < 1e-14 && r.pass);
        }
    }
}
