//! Experiment harness: inequality sweeps, interpolation-constant
//! calibration, convergence studies, 2D Delaunay optimality and
//! protection-vs-thickness checks.
//!
//! Every instance derives its randomness from the configured seed and its
//! own index, and instances are collected in index order, so a fixed
//! configuration always yields the same report.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coxeter::{generate_coxeter, trend_box_side, CoxeterSpec};
use crate::delaunay::{delaunay_triangulate, protection_report};
use crate::error::{Error, Result};
use crate::fem::{
    approximation_bounds, assemble, energy_functional, gradient_error, solve, FemConstants, MmsCase,
    PoissonProblem,
};
use crate::functionals::{BoundCheckResult, MeshContext, REL_SLACK};
use crate::interp::field::{Gaussian, PlaneWave, Polynomial, Rotational, SineProduct, TrigVector};
use crate::interp::{Exponent, GradientField, ScalarField, VectorField};
use crate::interp::basis::multi_indices;
use crate::mesh::{fmt_real, net_parameters, structured_grid, PointSet, SimplicialMesh};
use crate::predicates::orient;
use crate::quality::quality_report;

/// Largest error still treated as exact reproduction, relative to the
/// field magnitude.
pub const EXACT_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshFamily {
    RandomDelaunay,
    Coxeter,
    StructuredGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    Lemmas,
    Theorems,
    Fem,
    Protection,
    Optimality,
    Convergence,
}

impl Section {
    pub const ALL: [Section; 6] = [
        Section::Lemmas,
        Section::Theorems,
        Section::Fem,
        Section::Protection,
        Section::Optimality,
        Section::Convergence,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub sections: Vec<Section>,
    /// Dimensions of the theorem, FEM and convergence studies.
    pub dims: Vec<usize>,
    pub family: MeshFamily,
    /// Random points per mesh, on top of the box corners.
    pub points: usize,
    /// Meshes per dimension for the theorem studies; even indices calibrate,
    /// odd indices are held out.
    pub instances: usize,
    /// Scalar fields; `random-polynomial` draws a random cubic.
    pub fields: Vec<String>,
    pub vector_fields: Vec<String>,
    pub degrees: Vec<usize>,
    pub lambdas: Vec<Exponent>,
    pub rhos: Vec<Exponent>,
    pub lemma_dims: Vec<usize>,
    /// (mesh, field) pairs per dimension in the lemma sweep.
    pub lemma_pairs: usize,
    pub lemma_fields: Vec<String>,
    pub slivers: bool,
    pub safety_factor: f64,
    /// Fixed interpolation constant, bypassing calibration.
    pub c_int: Option<f64>,
    pub fem_cases: Vec<MmsCase>,
    /// FEM runs per dimension.
    pub fem_instances: usize,
    pub fem_perturbations: usize,
    pub solver_tolerance: f64,
    pub protection_dims: Vec<usize>,
    pub optimality_sets: usize,
    pub optimality_points: usize,
    pub optimality_alternatives: usize,
    /// Grid refinements per dimension for the convergence study, keyed by d.
    pub levels: BTreeMap<usize, Vec<usize>>,
    pub fem_levels: BTreeMap<usize, Vec<usize>>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let inf = Exponent::Infinity;
        ExperimentConfig {
            seed: 20240611,
            sections: Section::ALL.to_vec(),
            dims: vec![2, 3],
            family: MeshFamily::RandomDelaunay,
            points: 24,
            instances: 40,
            fields: vec!["sine-product".into(), "plane-wave".into(), "gaussian".into()],
            vector_fields: vec!["trig-vector".into(), "rotational".into()],
            degrees: vec![1, 2],
            lambdas: vec![Exponent::Finite(1.0), Exponent::Finite(2.0), inf],
            rhos: vec![Exponent::Finite(1.5), Exponent::Finite(2.0), Exponent::Finite(4.0), inf],
            lemma_dims: vec![2, 3, 4],
            lemma_pairs: 100,
            lemma_fields: vec!["random-polynomial".into()],
            slivers: true,
            safety_factor: 2.0,
            c_int: None,
            fem_cases: vec![MmsCase::SineProduct, MmsCase::QuadraticBubble, MmsCase::Affine],
            fem_instances: 60,
            fem_perturbations: 20,
            solver_tolerance: 1e-12,
            protection_dims: vec![2, 3, 4],
            optimality_sets: 50,
            optimality_points: 20,
            optimality_alternatives: 20,
            levels: BTreeMap::from([(2, vec![4, 8, 16]), (3, vec![4, 8, 16])]),
            fem_levels: BTreeMap::from([(2, vec![4, 8, 16, 32]), (3, vec![4, 8, 12])]),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        for &d in self.dims.iter().chain(&self.lemma_dims).chain(&self.protection_dims) {
            if !(2..=5).contains(&d) {
                return bad("dimensions must lie in 2..=5");
            }
        }
        if self.safety_factor < 1.0 {
            return bad("safety_factor must be at least 1");
        }
        if let Some(c) = self.c_int {
            if !(c > 0.0 && c.is_finite()) {
                return bad("c_int must be positive and finite");
            }
        }
        if self.degrees.iter().any(|&k| k == 0 || k > crate::interp::basis::MAX_DEGREE) {
            return bad("degrees must lie in 1..=6");
        }
        if self.rhos.iter().any(|r| r.value() <= 1.0) {
            return bad("rho exponents must exceed 1");
        }
        if !(self.solver_tolerance > 0.0) {
            return bad("solver_tolerance must be positive");
        }
        Ok(())
    }

    fn runs(&self, s: Section) -> bool {
        self.sections.contains(&s)
    }
}

/// SplitMix64 finalizer, used to derive independent instance seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn instance_seed(seed: u64, tag: &str, d: usize, i: usize) -> u64 {
    let t = tag.bytes().fold(0u64, |a, b| mix(a ^ b as u64));
    mix(mix(mix(seed ^ t) ^ d as u64) ^ i as u64)
}

pub fn rng_for(seed: u64, tag: &str, d: usize, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(instance_seed(seed, tag, d, i))
}

/// Delaunay mesh of the unit-cube corners plus `n` uniform points.
pub fn random_delaunay(d: usize, n: usize, rng: &mut ChaCha8Rng) -> Result<SimplicialMesh> {
    let mut coords = Vec::with_capacity((n + (1 << d)) * d);
    for c in 0..1usize << d {
        coords.extend((0..d).map(|j| ((c >> j) & 1) as f64));
    }
    for _ in 0..n * d {
        coords.push(rng.gen::<f64>());
    }
    delaunay_triangulate(&PointSet::new(d, coords)?)
}

/// Kuhn grid of the unit cube with interior vertices moved by up to
/// `amplitude / n` per coordinate, halving the amplitude until no cell flips.
pub fn jittered_grid(d: usize, n: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> Result<SimplicialMesh> {
    let grid = structured_grid(d, n)?;
    let boundary = grid.boundary_vertices();
    let offsets: Vec<f64> = (0..grid.points().len() * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let signs: Vec<i8> = grid.simplices().map(|s| orient(&s.vertices().collect::<Vec<_>>())).collect();
    let mut amp = amplitude / n as f64;
    for _ in 0..20 {
        let coords: Vec<f64> = grid
            .points()
            .coords()
            .iter()
            .enumerate()
            .map(|(i, &x)| if boundary[i / d] { x } else { x + amp * offsets[i] })
            .collect();
        let m = SimplicialMesh::new(PointSet::new(d, coords)?, grid.cells().to_vec())?;
        let same = m
            .simplices()
            .zip(&signs)
            .all(|(s, &o)| orient(&s.vertices().collect::<Vec<_>>()) == o);
        if same {
            return Ok(m);
        }
        amp /= 2.0;
    }
    Ok(grid)
}

fn family_mesh(cfg: &ExperimentConfig, d: usize, rng: &mut ChaCha8Rng) -> Result<(SimplicialMesh, String)> {
    match cfg.family {
        MeshFamily::RandomDelaunay => Ok((random_delaunay(d, cfg.points, rng)?, "random-delaunay".into())),
        MeshFamily::Coxeter => {
            let scale = rng.gen_range(0.3..0.5);
            let m = generate_coxeter(&CoxeterSpec::cube(d, scale, 0.0, 1.0))?;
            Ok((m, format!("coxeter(scale={})", fmt_real(scale))))
        }
        MeshFamily::StructuredGrid => {
            let n = rng.gen_range(2..=if d == 2 { 6 } else { 3 });
            Ok((jittered_grid(d, n, 0.2, rng)?, format!("jittered-grid(n={n})")))
        }
    }
}

/// Cubic polynomial with coefficients uniform in [-1, 1].
pub fn random_polynomial(d: usize, degree: usize, rng: &mut ChaCha8Rng) -> Polynomial {
    let terms = multi_indices(d, degree)
        .into_iter()
        .map(|p| (rng.gen_range(-1.0..1.0), p.into_iter().map(|e| e as u32).collect()))
        .collect();
    Polynomial { dim: d, terms }
}

/// Registry field with randomized parameters.
pub fn random_field(name: &str, d: usize, rng: &mut ChaCha8Rng) -> Result<Box<dyn ScalarField>> {
    Ok(match name {
        "random-polynomial" => Box::new(random_polynomial(d, 3, rng)),
        "sine-product" => Box::new(SineProduct {
            dim: d,
            frequency: rng.gen_range(1.5..4.0),
        }),
        "plane-wave" => Box::new(PlaneWave {
            wave: (0..d).map(|_| rng.gen_range(-4.0..4.0)).collect(),
            phase: rng.gen_range(0.0..2.0 * PI),
        }),
        "gaussian" => Box::new(Gaussian {
            center: (0..d).map(|_| rng.gen_range(0.2..0.8)).collect(),
            width: rng.gen_range(0.2..0.5),
        }),
        "quadratic" => Box::new(crate::interp::field::Quadratic {
            a: (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            b: rng.gen_range(-1.0..1.0),
        }),
        other => return Err(Error::InvalidArgument(format!("unknown field '{other}'"))),
    })
}

pub fn random_vector_field(name: &str, d: usize, rng: &mut ChaCha8Rng) -> Result<Box<dyn VectorField>> {
    Ok(match name {
        "trig-vector" => Box::new(TrigVector {
            dim: d,
            frequency: rng.gen_range(1.5..4.0),
        }),
        "rotational" => Box::new(Rotational { dim: d }),
        other => return Err(Error::InvalidArgument(format!("unknown vector field '{other}'"))),
    })
}

/// 4-point (d=2) or 5-point (d=3) configuration whose Delaunay mesh
/// contains a nearly flat cell of thickness about `xi`.
pub fn sliver_gadget(d: usize, xi: f64) -> Result<SimplicialMesh> {
    let rows: Vec<Vec<f64>> = match d {
        2 => {
            let t = 4.0 * xi;
            vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, t], vec![0.0, 1.0]]
        }
        3 => {
            // four near-co-circular equator points and an apex outside their sphere
            let t = 3.0 * xi;
            vec![
                vec![1.0, 0.0, 0.0],
                vec![-1.0, 0.0, 0.0],
                vec![0.0, 1.0, t],
                vec![0.0, -1.0, t],
                vec![0.0, 0.0, -1.0],
            ]
        }
        _ => return Err(Error::Unsupported(format!("sliver gadget in d={d}"))),
    };
    delaunay_triangulate(&PointSet::from_rows(d, &rows)?)
}

/// One row of a suite report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteCheck {
    pub section: Section,
    pub d: usize,
    pub instance: usize,
    pub mesh: String,
    pub field: String,
    #[serde(flatten)]
    pub result: BoundCheckResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn row(section: Section, d: usize, instance: usize, mesh: &str, field: &str, result: BoundCheckResult) -> SuiteCheck {
    SuiteCheck {
        section,
        d,
        instance,
        mesh: mesh.to_string(),
        field: field.to_string(),
        result,
        note: None,
    }
}

/// Twice the degree of the gradient of a random cubic.
const LEMMA_EXACTNESS: usize = 4;
const SMOOTH_EXACTNESS: usize = 7;
const LATTICE: usize = 2;

pub fn lemma_sweep(cfg: &ExperimentConfig) -> Result<Vec<SuiteCheck>> {
    if cfg.lemma_fields.is_empty() {
        return Ok(Vec::new());
    }
    let mut jobs = Vec::new();
    for &d in &cfg.lemma_dims {
        for i in 0..cfg.lemma_pairs {
            jobs.push((d, i));
        }
    }
    let rows: Vec<Vec<SuiteCheck>> = jobs
        .into_par_iter()
        .map(|(d, i)| {
            let mut rng = rng_for(cfg.seed, "lemma", d, i);
            let n = if d >= 4 { cfg.points / 2 } else { cfg.points };
            let m = random_delaunay(d, n, &mut rng)?;
            let name = &cfg.lemma_fields[i % cfg.lemma_fields.len()];
            let v = random_field(name, d, &mut rng)?;
            let ctx = MeshContext::new(&m, LEMMA_EXACTNESS, LATTICE)?;
            let mut out: Vec<SuiteCheck> = ctx.lemma_bounds(v.as_ref(), &cfg.rhos)?
                .into_iter()
                .map(|r| row(Section::Lemmas, d, i, "random-delaunay", name, r))
                .collect();
            out.push(row(Section::Lemmas, d, i, "random-delaunay", "", ctx.theta_bound()?));
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<SuiteCheck> = rows.into_iter().flatten().collect();
    if cfg.slivers {
        for &d in cfg.lemma_dims.iter().filter(|&&d| d <= 3) {
            let m = sliver_gadget(d, 1e-3)?;
            let ctx = MeshContext::new(&m, LEMMA_EXACTNESS, LATTICE)?;
            let label = format!("sliver-gadget(c_xi={})", fmt_real(ctx.report.c_xi));
            for i in 0..10 {
                let mut rng = rng_for(cfg.seed, "sliver", d, i);
                let name = &cfg.lemma_fields[i % cfg.lemma_fields.len()];
                let v = random_field(name, d, &mut rng)?;
                for r in ctx.lemma_bounds(v.as_ref(), &cfg.rhos)? {
                    out.push(row(Section::Lemmas, d, i, &label, name, r));
                }
            }
            out.push(row(Section::Lemmas, d, 0, &label, "", ctx.theta_bound()?));
        }
    }
    Ok(out)
}

/// A bound evaluated with `c_int = 1`, before calibration.
#[derive(Clone, Debug)]
struct Measurement {
    group: GroupKey,
    d: usize,
    instance: usize,
    mesh: String,
    field: String,
    /// Excluded from calibration: exactly reproduced by the interpolant.
    exact: bool,
    unit: BoundCheckResult,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub kind: String,
    pub k: usize,
    pub d: usize,
    pub exponent: String,
}

/// Measured interpolation constant for one group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    #[serde(flatten)]
    pub group: GroupKey,
    pub calibration_pairs: usize,
    pub held_out_pairs: usize,
    pub excluded_pairs: usize,
    /// Max of LHS/RHS(c_int = 1) over the calibration split.
    pub c_int_empirical: f64,
    /// Same statistic over the held-out split.
    pub c_int_held_out: f64,
    pub safety_factor: f64,
    pub c_int_used: f64,
    pub held_out_pass_rate: f64,
    /// `max/min` of the two split statistics.
    pub stability_ratio: f64,
}

pub const MIN_CALIBRATION_PAIRS: usize = 20;

fn theorem_measurements(cfg: &ExperimentConfig) -> Result<Vec<Measurement>> {
    let mut jobs = Vec::new();
    for &d in &cfg.dims {
        for i in 0..cfg.instances {
            jobs.push((d, i));
        }
    }
    let all: Vec<Vec<Measurement>> = jobs
        .into_par_iter()
        .map(|(d, i)| {
            let mut out = Vec::new();
            let mut rng = rng_for(cfg.seed, "theorem", d, i);
            let (m, mesh_name) = family_mesh(cfg, d, &mut rng)?;
            let ctx = MeshContext::new(&m, SMOOTH_EXACTNESS, LATTICE)?;
            let mut push = |kind: &str, k: usize, e: Exponent, field: &str, exact: bool, r: BoundCheckResult| {
                out.push(Measurement {
                    group: GroupKey {
                        kind: kind.to_string(),
                        k,
                        d,
                        exponent: e.to_string(),
                    },
                    d,
                    instance: i,
                    mesh: mesh_name.clone(),
                    field: field.to_string(),
                    exact,
                    unit: r,
                });
            };
            if !cfg.fields.is_empty() {
                let name = &cfg.fields[i % cfg.fields.len()];
                let v = random_field(name, d, &mut rng)?;
                let deg = v.poly_degree().map(|p| p.saturating_sub(1));
                for &k in &cfg.degrees {
                    let exact = deg.is_some_and(|p| p <= k);
                    for &rho in &cfg.rhos {
                        push("theorem-l2", k, rho, name, exact, ctx.interp_bound_l2(v.as_ref(), k, rho, 1.0)?);
                    }
                    for &lambda in &cfg.lambdas {
                        let r = ctx.interp_bound_llambda(v.as_ref(), k, lambda, 1.0)?;
                        push("theorem-llambda", k, lambda, name, exact, r);
                    }
                }
            }
            for name in &cfg.vector_fields {
                let f = random_vector_field(name, d, &mut rng)?;
                let deg = f.poly_degree();
                for &k in &cfg.degrees {
                    let exact = deg.is_some_and(|p| p <= k);
                    for &rho in &cfg.rhos {
                        let r = ctx.vector_bound_l2(f.as_ref(), k, rho, 1.0)?;
                        push("vector-theorem-l2", k, rho, name, exact, r);
                    }
                    for &lambda in &cfg.lambdas {
                        let r = ctx.vector_bound_llambda(f.as_ref(), k, lambda, 1.0)?;
                        push("vector-theorem-llambda", k, lambda, name, exact, r);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(all.into_iter().flatten().collect())
}

/// Outcome of one FEM run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FemRun {
    pub d: usize,
    pub instance: usize,
    pub case: MmsCase,
    pub mesh: String,
    pub h: f64,
    pub gradient_error: f64,
    pub residual: f64,
    pub iterations: usize,
    pub energy: f64,
}

fn fem_measurements(cfg: &ExperimentConfig) -> Result<(Vec<Measurement>, Vec<SuiteCheck>, Vec<FemRun>)> {
    if cfg.fem_cases.is_empty() {
        return Ok((Vec::new(), Vec::new(), Vec::new()));
    }
    let mut jobs = Vec::new();
    for &d in &cfg.dims {
        for i in 0..cfg.fem_instances {
            jobs.push((d, i));
        }
    }
    let all: Vec<(Vec<Measurement>, Vec<SuiteCheck>, FemRun)> = jobs
        .into_par_iter()
        .map(|(d, i)| {
            let mut rng = rng_for(cfg.seed, "fem", d, i);
            let case = cfg.fem_cases[i % cfg.fem_cases.len()];
            let n = match d {
                2 => 4 + (i / cfg.fem_cases.len()) % 5,
                3 => 3 + (i / cfg.fem_cases.len()) % 3,
                _ => 2 + (i / cfg.fem_cases.len()) % 2,
            };
            let m = jittered_grid(d, n, 0.2, &mut rng)?;
            let mesh_name = format!("jittered-grid(n={n})");
            let problem = PoissonProblem::manufactured(case, &m).with_high_dim(true);
            let system = assemble(&problem)?;
            let sol = solve(&system, cfg.solver_tolerance)?;
            let ctx = MeshContext::new(&m, SMOOTH_EXACTNESS, 1)?;
            let err = gradient_error(&problem, &sol, &ctx)?;
            let unit = FemConstants {
                c_int_first: 1.0,
                c_int_second: 1.0,
            };
            let bounds = approximation_bounds(&problem, &sol, &ctx, unit)?;
            let exact = case == MmsCase::Affine;
            let field = case.name();
            let mut checks = vec![row(Section::Fem, d, i, &mesh_name, field, bounds[0].clone())];
            let j = energy_functional(&sol.values, &system);
            for p in 0..cfg.fem_perturbations {
                let mut v = sol.values.clone();
                let scale = sol.values.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
                let amp = scale * 10f64.powi(-(1 + (p % 4) as i32));
                for &dof in &system.dofs {
                    v[dof] += amp * rng.gen_range(-1.0..1.0);
                }
                let jv = energy_functional(&v, &system);
                let floor = crate::functionals::residual_floor(j.abs() + jv.abs());
                let mut consts = BTreeMap::new();
                consts.insert("amplitude".to_string(), amp);
                let r = BoundCheckResult::with_tolerance("energy-minimum", j, jv, consts, 0.0, floor);
                checks.push(row(Section::Fem, d, i, &mesh_name, field, r));
            }
            let meas = bounds[1..]
                .iter()
                .map(|r| Measurement {
                    group: GroupKey {
                        kind: r.name.clone(),
                        k: 1,
                        d,
                        exponent: "2".into(),
                    },
                    d,
                    instance: i,
                    mesh: mesh_name.clone(),
                    field: field.to_string(),
                    exact,
                    unit: r.clone(),
                })
                .collect();
            let run = FemRun {
                d,
                instance: i,
                case,
                mesh: mesh_name,
                h: ctx.report.h,
                gradient_error: err,
                residual: sol.residual,
                iterations: sol.iterations,
                energy: j,
            };
            Ok((meas, checks, run))
        })
        .collect::<Result<_>>()?;
    let mut meas = Vec::new();
    let mut checks = Vec::new();
    let mut runs = Vec::new();
    for (m, c, r) in all {
        meas.extend(m);
        checks.extend(c);
        runs.push(r);
    }
    Ok((meas, checks, runs))
}

fn scaled(unit: &BoundCheckResult, c: f64) -> BoundCheckResult {
    let mut consts = unit.constants.clone();
    consts.insert("c_int".to_string(), c);
    BoundCheckResult::with_tolerance(&unit.name, unit.lhs, unit.rhs * c, consts, unit.rel_tol, unit.abs_tol)
}

/// Calibrates one constant per group on even instances and checks every
/// odd instance against it.
fn calibrate(
    cfg: &ExperimentConfig,
    meas: &[Measurement],
    section: Section,
) -> Result<(Vec<CalibrationRecord>, Vec<SuiteCheck>)> {
    let mut groups: BTreeMap<&GroupKey, Vec<&Measurement>> = BTreeMap::new();
    for m in meas {
        groups.entry(&m.group).or_default().push(m);
    }
    let mut records = Vec::new();
    let mut checks = Vec::new();
    for (key, ms) in groups {
        let ratio = |m: &&Measurement| m.unit.lhs / m.unit.rhs;
        let usable = |m: &&Measurement| !m.exact && m.unit.lhs > m.unit.abs_tol && m.unit.rhs > 0.0;
        let held: Vec<&Measurement> = ms.iter().copied().filter(|m| m.instance % 2 == 1).collect();
        let cal_used: Vec<&Measurement> = ms.iter().copied().filter(|m| m.instance % 2 == 0).filter(usable).collect();
        let held_used: Vec<&Measurement> = held.iter().copied().filter(usable).collect();
        if cfg.c_int.is_none() && cal_used.len() < MIN_CALIBRATION_PAIRS {
            return Err(Error::InvalidArgument(format!(
                "group {}/k={}/d={}/{} has {} calibration pairs, need {MIN_CALIBRATION_PAIRS}",
                key.kind,
                key.k,
                key.d,
                key.exponent,
                cal_used.len()
            )));
        }
        let emp = cal_used.iter().map(ratio).fold(0.0, f64::max);
        let emp_held = held_used.iter().map(ratio).fold(0.0, f64::max);
        let used = cfg.c_int.unwrap_or(cfg.safety_factor * emp);
        let mut passed = 0;
        for m in &held {
            let r = scaled(&m.unit, used);
            passed += r.pass as usize;
            checks.push(row(section, m.d, m.instance, &m.mesh, &m.field, r));
        }
        let (lo, hi) = (emp.min(emp_held), emp.max(emp_held));
        records.push(CalibrationRecord {
            group: key.clone(),
            calibration_pairs: cal_used.len(),
            held_out_pairs: held.len(),
            excluded_pairs: ms.len() - cal_used.len() - held_used.len(),
            c_int_empirical: emp,
            c_int_held_out: emp_held,
            safety_factor: cfg.safety_factor,
            c_int_used: used,
            held_out_pass_rate: if held.is_empty() { 1.0 } else { passed as f64 / held.len() as f64 },
            stability_ratio: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }
    Ok((records, checks))
}

/// Stability of every calibrated constant across the two disjoint splits.
fn stability_checks(records: &[CalibrationRecord], section: Section) -> Vec<SuiteCheck> {
    records
        .iter()
        .filter(|r| r.c_int_held_out > 0.0)
        .map(|r| {
            let mut consts = BTreeMap::new();
            consts.insert("c_int_empirical".to_string(), r.c_int_empirical);
            consts.insert("c_int_held_out".to_string(), r.c_int_held_out);
            let res = BoundCheckResult::with_tolerance("c-int-stability", r.stability_ratio, 2.0, consts, 0.0, 0.0);
            let label = format!("k={},{}={}", r.group.k, r.group.kind, r.group.exponent);
            row(section, r.group.d, 0, "splits", &label, res)
        })
        .collect()
}

/// Calibration records for the interpolation theorems.
pub fn calibrate_c_int(cfg: &ExperimentConfig) -> Result<Vec<CalibrationRecord>> {
    let meas = theorem_measurements(cfg)?;
    if meas.is_empty() {
        return Err(Error::InvalidArgument("empty calibration split".into()));
    }
    Ok(calibrate(cfg, &meas, Section::Theorems)?.0)
}

/// Thickness and ratio bounds implied by protection: `C_Ξ >= δ²/(8dε²)` and `C_σ <= 4(d+1)ε²/δ²`.
pub fn protection_thickness_check(m: &SimplicialMesh) -> Result<(BoundCheckResult, BoundCheckResult)> {
    let d = m.dim();
    let report = quality_report(m)?;
    let delta = protection_report(m)?.delta.max(0.0);
    let eps = net_parameters(m.points(), m)?.epsilon;
    let consts = |extra: (&str, f64)| {
        BTreeMap::from([
            ("delta".to_string(), delta),
            ("epsilon".to_string(), eps),
            (extra.0.to_string(), extra.1),
        ])
    };
    let r1 = BoundCheckResult::new(
        "protection-thickness",
        delta * delta / (8.0 * d as f64 * eps * eps),
        report.c_xi,
        consts(("c_xi", report.c_xi)),
    );
    let rhs2 = if delta > 0.0 {
        4.0 * (d + 1) as f64 * eps * eps / (delta * delta)
    } else {
        f64::INFINITY
    };
    let r2 = BoundCheckResult::new("protection-ratio", report.c_sigma, rhs2, consts(("c_sigma", report.c_sigma)));
    Ok((r1, r2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtectionRow {
    pub mesh: String,
    pub d: usize,
    pub delta: f64,
    pub h: f64,
    pub delta_over_h: f64,
    pub epsilon: f64,
    pub vacuous: bool,
}

fn square_corners() -> Result<SimplicialMesh> {
    delaunay_triangulate(&PointSet::from_rows(2, &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])?)
}

pub fn protection_suite(cfg: &ExperimentConfig) -> Result<(Vec<ProtectionRow>, Vec<SuiteCheck>)> {
    let mut meshes = vec![("square-corners".to_string(), square_corners()?)];
    for &d in &cfg.protection_dims {
        let spec = CoxeterSpec::cube(d, 1.0, 0.0, trend_box_side(d));
        meshes.push((format!("coxeter-a{d}"), generate_coxeter(&spec)?));
    }
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (name, m) in &meshes {
        let d = m.dim();
        let (r1, r2) = protection_thickness_check(m)?;
        let delta = r1.constants["delta"];
        let h = quality_report(m)?.h;
        let vacuous = delta <= 0.0;
        for r in [r1, r2] {
            let mut c = row(Section::Protection, d, 0, name, "", r);
            if vacuous {
                c.note = Some("vacuous: mesh is not protected".into());
            }
            checks.push(c);
        }
        rows.push(ProtectionRow {
            mesh: name.clone(),
            d,
            delta,
            h,
            delta_over_h: delta / h,
            epsilon: net_parameters(m.points(), m)?.epsilon,
            vacuous,
        });
    }
    Ok((rows, checks))
}

/// Diagonal flip of the edge shared by two triangles, if the quadrilateral
/// is strictly convex.
pub fn flip_edge(m: &SimplicialMesh, a: usize, b: usize) -> Option<SimplicialMesh> {
    let cells = m.cells();
    let shared: Vec<usize> = (0..cells.len())
        .filter(|&c| cells[c].contains(&a) && cells[c].contains(&b))
        .collect();
    if shared.len() != 2 {
        return None;
    }
    let opp = |c: usize| *cells[c].iter().find(|&&v| v != a && v != b).unwrap();
    let (p, q) = (opp(shared[0]), opp(shared[1]));
    let pt = |v: usize| m.points().point(v);
    // the new diagonal p-q must separate a and b, and the old one p and q
    let s1 = orient(&[pt(p), pt(q), pt(a)]);
    let s2 = orient(&[pt(p), pt(q), pt(b)]);
    if s1 == 0 || s1 == s2 {
        return None;
    }
    let mut next: Vec<Vec<usize>> = cells.to_vec();
    next[shared[0]] = vec![p, q, a];
    next[shared[1]] = vec![p, q, b];
    m.with_cells(next).ok()
}

fn interior_edges(m: &SimplicialMesh) -> Vec<(usize, usize)> {
    m.facet_adjacency()
        .iter()
        .filter(|(_, cs)| cs.len() == 2)
        .map(|(f, _)| (f[0], f[1]))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityRow {
    pub set: usize,
    pub theta_delaunay: f64,
    pub r_max_delaunay: f64,
    pub theta_alternative_min: f64,
    pub r_max_alternative_min: f64,
    pub alternatives: usize,
    pub theta_violations: usize,
    pub r_max_violations: usize,
}

/// Θ and R_max of one Delaunay triangulation against triangulations
/// reached by 1 to 10 random flips.
pub fn delaunay_optimality_2d(seed: u64, set: usize, n_points: usize, n_alternatives: usize) -> Result<OptimalityRow> {
    if n_points < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            found: n_points,
        });
    }
    let mut rng = rng_for(seed, "optimality", 2, set);
    let coords: Vec<f64> = (0..2 * n_points).map(|_| rng.gen::<f64>()).collect();
    let dt = delaunay_triangulate(&PointSet::new(2, coords)?)?;
    let base = quality_report(&dt)?;
    let mut row = OptimalityRow {
        set,
        theta_delaunay: base.theta,
        r_max_delaunay: base.r_max,
        theta_alternative_min: f64::INFINITY,
        r_max_alternative_min: f64::INFINITY,
        alternatives: n_alternatives,
        theta_violations: 0,
        r_max_violations: 0,
    };
    for _ in 0..n_alternatives {
        let flips = rng.gen_range(1..=10);
        let mut alt = dt.clone();
        let mut done = 0;
        let mut attempts = 0;
        while done < flips && attempts < 100 {
            attempts += 1;
            let edges = interior_edges(&alt);
            let &(a, b) = edges.choose(&mut rng).ok_or(Error::EmptyMesh)?;
            if let Some(next) = flip_edge(&alt, a, b) {
                alt = next;
                done += 1;
            }
        }
        let q = quality_report(&alt)?;
        row.theta_alternative_min = row.theta_alternative_min.min(q.theta);
        row.r_max_alternative_min = row.r_max_alternative_min.min(q.r_max);
        row.theta_violations += (base.theta > q.theta * (1.0 + REL_SLACK)) as usize;
        row.r_max_violations += (base.r_max > q.r_max * (1.0 + REL_SLACK)) as usize;
    }
    Ok(row)
}

pub fn optimality_suite(cfg: &ExperimentConfig) -> Result<(Vec<OptimalityRow>, Vec<SuiteCheck>)> {
    let rows: Vec<OptimalityRow> = (0..cfg.optimality_sets)
        .into_par_iter()
        .map(|s| delaunay_optimality_2d(cfg.seed, s, cfg.optimality_points, cfg.optimality_alternatives))
        .collect::<Result<_>>()?;
    let mut checks = Vec::new();
    for r in &rows {
        for (name, lhs, rhs) in [
            ("delaunay-theta-minimal", r.theta_delaunay, r.theta_alternative_min),
            ("delaunay-rmax-minimal", r.r_max_delaunay, r.r_max_alternative_min),
        ] {
            let res = BoundCheckResult::new(name, lhs, rhs, BTreeMap::new());
            checks.push(row(Section::Optimality, 2, r.set, "random-delaunay", "", res));
        }
    }
    Ok((rows, checks))
}

/// Least-squares slope of `ln e` against `ln h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub quantity: String,
    pub field: String,
    pub k: usize,
    pub d: usize,
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: Option<f64>,
    pub r_squared: Option<f64>,
    /// Errors at the rounding floor on every level.
    pub exact: bool,
}

pub fn fit_slope(h: &[f64], e: &[f64]) -> (f64, f64) {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

fn convergence_row(quantity: &str, field: &str, k: usize, d: usize, h: Vec<f64>, errors: Vec<f64>, scale: &[f64]) -> ConvergenceRow {
    let exact = errors.iter().zip(scale).all(|(e, s)| *e <= EXACT_FLOOR * s.max(1.0));
    let (slope, r_squared) = if exact {
        (None, None)
    } else {
        let (s, r) = fit_slope(&h, &errors);
        (Some(s), Some(r))
    };
    ConvergenceRow {
        quantity: quantity.into(),
        field: field.into(),
        k,
        d,
        h,
        errors,
        slope,
        r_squared,
        exact,
    }
}

/// Gradient-interpolation and FEM error decay on uniform refinements.
pub fn convergence_study(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    let mut jobs = Vec::new();
    for &d in &cfg.dims {
        let levels = cfg.levels.get(&d).cloned().unwrap_or_default();
        if levels.len() < 3 {
            return Err(Error::InvalidArgument(format!("convergence study needs >= 3 levels for d={d}")));
        }
        for &k in &cfg.degrees {
            jobs.push(("grad-interp-l2", "sine-product", k, d, levels.clone()));
        }
        jobs.push(("grad-interp-l2", "quadratic", 1, d, levels.clone()));
        jobs.push(("grad-interp-l2", "quadratic", 2, d, levels.clone()));
        if cfg.fem_cases.contains(&MmsCase::SineProduct) {
            let fl = cfg.fem_levels.get(&d).cloned().unwrap_or_default();
            if fl.len() < 3 {
                return Err(Error::InvalidArgument(format!("FEM study needs >= 3 levels for d={d}")));
            }
            jobs.push(("fem-h1", "sine-product", 1, d, fl));
        }
    }
    jobs.into_par_iter()
        .map(|(quantity, field, k, d, levels)| {
            let mut hs = Vec::new();
            let mut errs = Vec::new();
            let mut scales = Vec::new();
            for &n in &levels {
                let m = structured_grid(d, n)?;
                let ctx = MeshContext::new(&m, SMOOTH_EXACTNESS, 1)?;
                let e = if quantity == "fem-h1" {
                    let p = PoissonProblem::manufactured(MmsCase::SineProduct, &m);
                    let sol = solve(&assemble(&p)?, cfg.solver_tolerance)?;
                    scales.push(1.0);
                    gradient_error(&p, &sol, &ctx)?
                } else {
                    let v: Box<dyn ScalarField> = if field == "quadratic" {
                        Box::new(crate::interp::field::Quadratic {
                            a: (0..d).map(|i| 0.5 - 0.25 * i as f64).collect(),
                            b: 0.5,
                        })
                    } else {
                        Box::new(SineProduct { dim: d, frequency: PI })
                    };
                    let g = GradientField(v.as_ref());
                    scales.push(ctx.gradient_norm(v.as_ref(), Exponent::Finite(2.0)));
                    ctx.vector_bound_l2(&g, k, Exponent::Finite(2.0), 1.0)?.lhs
                };
                hs.push(ctx.report.h);
                errs.push(e);
            }
            Ok(convergence_row(quantity, field, k, d, hs, errs, &scales))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub checks: usize,
    pub failed: usize,
    pub failed_names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub summary: SuiteSummary,
    pub calibration: Vec<CalibrationRecord>,
    pub protection: Vec<ProtectionRow>,
    pub optimality: Vec<OptimalityRow>,
    pub convergence: Vec<ConvergenceRow>,
    pub fem_runs: Vec<FemRun>,
    pub checks: Vec<SuiteCheck>,
}

/// Runs every configured section. Failed inequalities are reported, not
/// returned as errors.
pub fn run_inequality_suite(cfg: &ExperimentConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let mut checks = Vec::new();
    let mut calibration = Vec::new();
    let mut protection = Vec::new();
    let mut optimality = Vec::new();
    let mut convergence = Vec::new();
    let mut fem_runs = Vec::new();
    let no_fields = cfg.fields.is_empty() && cfg.vector_fields.is_empty() && cfg.lemma_fields.is_empty();
    if cfg.runs(Section::Lemmas) && !no_fields {
        checks.extend(lemma_sweep(cfg)?);
    }
    if cfg.runs(Section::Theorems) && !(cfg.fields.is_empty() && cfg.vector_fields.is_empty()) {
        let meas = theorem_measurements(cfg)?;
        let (records, held) = calibrate(cfg, &meas, Section::Theorems)?;
        checks.extend(held);
        checks.extend(stability_checks(&records, Section::Theorems));
        calibration.extend(records);
    }
    if cfg.runs(Section::Fem) {
        let (meas, fem_checks, runs) = fem_measurements(cfg)?;
        checks.extend(fem_checks);
        if !meas.is_empty() {
            let (records, held) = calibrate(cfg, &meas, Section::Fem)?;
            checks.extend(held);
            calibration.extend(records);
        }
        fem_runs = runs;
    }
    if cfg.runs(Section::Protection) {
        let (rows, c) = protection_suite(cfg)?;
        protection = rows;
        checks.extend(c);
    }
    if cfg.runs(Section::Optimality) {
        let (rows, c) = optimality_suite(cfg)?;
        optimality = rows;
        checks.extend(c);
    }
    if cfg.runs(Section::Convergence) {
        convergence = convergence_study(cfg)?;
    }
    let mut failed_names: Vec<String> = checks.iter().filter(|c| !c.result.pass).map(|c| c.result.name.clone()).collect();
    failed_names.sort();
    failed_names.dedup();
    let failed = checks.iter().filter(|c| !c.result.pass).count();
    let calibration_ok = calibration.iter().all(|r| r.held_out_pass_rate == 1.0);
    Ok(SuiteReport {
        seed: cfg.seed,
        pass: failed == 0 && calibration_ok,
        summary: SuiteSummary {
            checks: checks.len(),
            failed,
            failed_names,
        },
        calibration,
        protection,
        optimality,
        convergence,
        fem_runs,
        checks,
    })
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per check.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["section", "d", "instance", "mesh", "field", "name", "lhs", "rhs", "slack", "pass"])
            .expect("in-memory csv");
        for c in &self.checks {
            let section = serde_json::to_value(c.section).expect("section serializes");
            w.write_record([
                section.as_str().unwrap_or_default(),
                &c.d.to_string(),
                &c.instance.to_string(),
                &c.mesh,
                &c.field,
                &c.result.name,
                &fmt_real(c.result.lhs),
                &fmt_real(c.result.rhs),
                &fmt_real(c.result.slack),
                &c.result.pass.to_string(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            sections: vec![],
            dims: vec![2],
            points: 10,
            lemma_dims: vec![2, 3],
            lemma_pairs: 6,
            ..Default::default()
        }
    }

    #[test]
    fn config_defaults_roundtrip() {
        let c = ExperimentConfig::default();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), c);
        assert!(ExperimentConfig::from_json("{\"seed\": ").is_err());
        assert!(ExperimentConfig::from_json("{\"dims\": [7]}").is_err());
        assert!(ExperimentConfig::from_json("{\"bogus\": 1}").is_err());
    }

    #[test]
    fn seeds_are_distinct() {
        assert_ne!(instance_seed(1, "a", 2, 0), instance_seed(1, "a", 2, 1));
        assert_ne!(instance_seed(1, "a", 2, 0), instance_seed(1, "b", 2, 0));
        assert_eq!(instance_seed(1, "a", 2, 0), instance_seed(1, "a", 2, 0));
    }

    #[test]
    fn sliver_gadgets_are_thin() {
        for d in [2, 3] {
            let m = sliver_gadget(d, 1e-3).unwrap();
            let c = quality_report(&m).unwrap().c_xi;
            assert!((c / 1e-3 - 1.0).abs() < 0.1, "d={d} c_xi={c}");
        }
    }

    #[test]
    fn lemma_sweep_passes() {
        let cfg = small();
        let rows = lemma_sweep(&cfg).unwrap();
        assert!(!rows.is_empty());
        for r in &rows {
            assert!(r.result.pass, "{r:?}");
        }
    }

    #[test]
    fn empty_field_list() {
        let cfg = ExperimentConfig {
            sections: vec![Section::Lemmas, Section::Theorems],
            fields: vec![],
            vector_fields: vec![],
            lemma_fields: vec![],
            ..small()
        };
        assert!(run_inequality_suite(&cfg).unwrap().checks.is_empty());
    }

    #[test]
    fn jitter_keeps_orientation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = jittered_grid(3, 3, 0.3, &mut rng).unwrap();
        assert!(crate::mesh::validate_manifold(&m).pass);
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn protection_examples() {
        let (r1, r2) = protection_thickness_check(&square_corners().unwrap()).unwrap();
        assert!(r1.pass && r2.pass);
        assert!(r1.constants["delta"] <= 1e-12);
        for d in [2, 3] {
            let m = generate_coxeter(&CoxeterSpec::cube(d, 1.0, 0.0, trend_box_side(d))).unwrap();
            let (r1, r2) = protection_thickness_check(&m).unwrap();
            assert!(r1.pass && r2.pass, "{r1:?} {r2:?}");
            assert!(r1.constants["delta"] > 0.0);
        }
    }

    #[test]
    fn flips_and_optimality() {
        let sq = square_corners().unwrap();
        let (a, b) = interior_edges(&sq)[0];
        let flipped = flip_edge(&sq, a, b).unwrap();
        let (q0, q1) = (quality_report(&sq).unwrap(), quality_report(&flipped).unwrap());
        assert!((q0.theta - q1.theta).abs() < 1e-14 && (q0.r_max - q1.r_max).abs() < 1e-14);
        let row = delaunay_optimality_2d(5, 0, 20, 20).unwrap();
        assert_eq!(row.theta_violations + row.r_max_violations, 0);
        assert!(delaunay_optimality_2d(5, 0, 3, 1).is_err());
    }

    #[test]
    fn slope_fit() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        let (s, r2) = fit_slope(&h, &e);
        assert!((s - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
