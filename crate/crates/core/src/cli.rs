//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a checked inequality fails, 2 on usage,
//! input or IO errors. Summary lines go to standard output as `key=value`
//! pairs; files use the 17-digit format of the mesh module.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::coxeter::{coxeter_protection_trend, generate_coxeter, CoxeterSpec};
use crate::delaunay::{delaunay_triangulate, is_delaunay, protection_report};
use crate::error::Error;
use crate::fem::{approximation_bounds, assemble, energy_functional, solve, FemConstants, MmsCase, PoissonProblem};
use crate::functionals::{BoundCheckResult, MeshContext};
use crate::interp::{Exponent, FieldSpec, GradientField, VectorFieldSpec};
use crate::mesh::{load_mesh, load_points, save_mesh, structured_grid, Format, SimplicialMesh};
use crate::quality::quality_report;
use crate::verify::{run_inequality_suite, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "protmesh", version, about = "Simplicial mesh quality, protected Delaunay meshes and interpolation bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Quality report of a mesh.
    Analyze(AnalyzeArgs),
    /// Delaunay triangulation of a point file.
    Delaunay(DelaunayArgs),
    /// Coxeter A~_d mesh of a box, or the protection trend over dimensions.
    Coxeter(CoxeterArgs),
    /// Gradient interpolation error and edge functional of a field.
    Interp(InterpArgs),
    /// P1 Poisson solve of a manufactured problem.
    Fem(FemArgs),
    /// Runs the verification suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Mesh file (`.json` or text).
    pub mesh: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DelaunayArgs {
    /// Points file: `d N` header, then N rows.
    pub points: PathBuf,
    /// Output mesh (`.json` or text).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Measures the protection δ.
    #[arg(long)]
    pub protection: bool,
    /// Protection report output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoxeterArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 3.0)]
    pub hi: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub protection: bool,
    /// Prints δ/h for each listed dimension instead of building one mesh.
    #[arg(long, value_delimiter = ',')]
    pub trend: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct MeshSource {
    /// Mesh file.
    #[arg(long, conflicts_with = "grid")]
    pub mesh: Option<PathBuf>,
    /// Structured unit-cube grid `d,n`.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
pub struct InterpArgs {
    #[command(flatten)]
    pub source: MeshSource,
    /// Scalar field name or JSON spec.
    #[arg(long, default_value = "sine-product")]
    pub field: String,
    /// Vector field name; replaces the gradient of `--field`.
    #[arg(long)]
    pub vector: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub degree: usize,
    /// Norm exponent, a number >= 1 or `inf`.
    #[arg(long, default_value = "2")]
    pub norm: Exponent,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FemArgs {
    #[command(flatten)]
    pub source: MeshSource,
    /// sine-product, quadratic-bubble or affine.
    #[arg(long, default_value = "sine-product")]
    pub case: String,
    #[arg(long, default_value_t = crate::fem::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Allows d >= 4.
    #[arg(long)]
    pub allow_high_dim: bool,
    /// Interpolation constants for the two approximation theorems.
    #[arg(long)]
    pub c_int_first: Option<f64>,
    #[arg(long)]
    pub c_int_second: Option<f64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Configuration JSON; defaults apply when omitted.
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// A failure that maps to exit code 2.
#[derive(Debug)]
pub struct CliError(pub String);

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError(e.to_string())
    }
}

type CliResult = std::result::Result<i32, CliError>;

/// Twelve significant digits, shortest form.
pub fn fmt_summary(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    let a = rounded.abs();
    if a != 0.0 && !(1e-4..1e12).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn read(path: &Path) -> std::result::Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &str, inputs: &[&Path]) -> std::result::Result<(), CliError> {
    for input in inputs {
        let same = match (std::fs::canonicalize(path), std::fs::canonicalize(input)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        if same {
            return Err(CliError(format!("refusing to overwrite input {}", input.display())));
        }
    }
    std::fs::write(path, text).map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))
}

fn load_mesh_file(path: &Path) -> std::result::Result<SimplicialMesh, CliError> {
    Ok(load_mesh(&read(path)?, Format::from_path(path))?)
}

fn mesh_from(source: &MeshSource) -> std::result::Result<(SimplicialMesh, Vec<&Path>), CliError> {
    match (&source.mesh, &source.grid) {
        (Some(p), _) => Ok((load_mesh_file(p)?, vec![p.as_path()])),
        (None, Some(g)) if g.len() == 2 => Ok((structured_grid(g[0], g[1])?, vec![])),
        (None, Some(_)) => Err(CliError("--grid expects 'd,n'".into())),
        (None, None) => Ok((structured_grid(2, 8)?, vec![])),
    }
}

fn kv(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
}

fn print_check(r: &BoundCheckResult) {
    println!(
        "{}",
        kv(&[
            ("check", r.name.clone()),
            ("lhs", fmt_summary(r.lhs)),
            ("rhs", fmt_summary(r.rhs)),
            ("pass", r.pass.to_string()),
        ])
    );
}

fn analyze(a: &AnalyzeArgs) -> CliResult {
    let m = load_mesh_file(&a.mesh)?;
    let r = quality_report(&m)?;
    let inputs = [a.mesh.as_path()];
    if let Some(p) = &a.json {
        write(p, &r.to_json(), &inputs)?;
    }
    if let Some(p) = &a.csv {
        write(p, &r.to_csv(), &inputs)?;
    }
    println!(
        "{}",
        kv(&[
            ("dim", r.dim.to_string()),
            ("cells", r.card.to_string()),
            ("h", fmt_summary(r.h)),
            ("C_Delta", fmt_summary(r.c_delta)),
            ("C_Xi", fmt_summary(r.c_xi)),
            ("C_sigma", fmt_summary(r.c_sigma)),
            ("C_Upsilon", fmt_summary(r.c_upsilon)),
            ("Theta", fmt_summary(r.theta)),
            ("R_max", fmt_summary(r.r_max)),
        ])
    );
    Ok(EXIT_OK)
}

fn delaunay(a: &DelaunayArgs) -> CliResult {
    let text = String::from_utf8(read(&a.points)?).map_err(|e| CliError(format!("invalid utf-8: {e}")))?;
    let ps = load_points(&text)?;
    let m = delaunay_triangulate(&ps)?;
    let inputs = [a.points.as_path()];
    if let Some(p) = &a.out {
        write(p, &save_mesh(&m, Format::from_path(p)), &inputs)?;
    }
    let mut pairs = vec![
        ("points", ps.len().to_string()),
        ("cells", m.num_cells().to_string()),
        ("delaunay", is_delaunay(&m).to_string()),
    ];
    if a.protection || a.json.is_some() {
        let pr = protection_report(&m)?;
        let h = quality_report(&m)?.h;
        pairs.push(("delta", fmt_summary(pr.delta)));
        pairs.push(("delta_over_h", fmt_summary(pr.delta / h)));
        if let Some(p) = &a.json {
            let text = serde_json::to_string_pretty(&pr).map_err(|e| CliError(e.to_string()))?;
            write(p, &text, &inputs)?;
        }
    }
    println!("{}", kv(&pairs));
    Ok(EXIT_OK)
}

fn coxeter(a: &CoxeterArgs) -> CliResult {
    if let Some(dims) = &a.trend {
        for row in coxeter_protection_trend(dims, a.scale)? {
            println!(
                "{}",
                kv(&[
                    ("dim", row.dim.to_string()),
                    ("cells", row.cells.to_string()),
                    ("delta", fmt_summary(row.delta)),
                    ("h", fmt_summary(row.h)),
                    ("delta_over_h", fmt_summary(row.delta_over_h)),
                ])
            );
        }
        return Ok(EXIT_OK);
    }
    let m = generate_coxeter(&CoxeterSpec::cube(a.dim, a.scale, a.lo, a.hi))?;
    if let Some(p) = &a.out {
        write(p, &save_mesh(&m, Format::from_path(p)), &[])?;
    }
    let r = quality_report(&m)?;
    let mut pairs = vec![
        ("dim", a.dim.to_string()),
        ("cells", m.num_cells().to_string()),
        ("h", fmt_summary(r.h)),
        ("C_Xi", fmt_summary(r.c_xi)),
    ];
    if a.protection {
        let delta = protection_report(&m)?.delta;
        pairs.push(("delta", fmt_summary(delta)));
        pairs.push(("delta_over_h", fmt_summary(delta / r.h)));
    }
    println!("{}", kv(&pairs));
    Ok(EXIT_OK)
}

fn interp(a: &InterpArgs) -> CliResult {
    let (m, inputs) = mesh_from(&a.source)?;
    let d = m.dim();
    let ctx = MeshContext::new(&m, 7, a.degree.max(2))?;
    let (label, residual, psi) = match &a.vector {
        Some(name) => {
            let f = VectorFieldSpec::by_name(name)?.build(d)?;
            let r = ctx.vector_bound_llambda(f.as_ref(), a.degree, a.norm, 1.0)?;
            (name.clone(), r, ctx.roughness(|_, _, x| f.value(x)))
        }
        None => {
            let v = FieldSpec::parse(&a.field, d)?.build(d)?;
            let g = GradientField(v.as_ref());
            let r = ctx.vector_bound_llambda(&g, a.degree, a.norm, 1.0)?;
            (a.field.clone(), r, ctx.roughness_of_gradient(v.as_ref())?)
        }
    };
    let record = serde_json::json!({
        "field": label,
        "degree": a.degree,
        "norm": a.norm,
        "h": ctx.report.h,
        "error": residual.lhs,
        "edge_functional": psi,
        "derivative_norm": residual.constants["deriv_norm"],
    });
    if let Some(p) = &a.json {
        let text = serde_json::to_string_pretty(&record).map_err(|e| CliError(e.to_string()))?;
        write(p, &text, &inputs)?;
    }
    println!(
        "{}",
        kv(&[
            ("field", label),
            ("k", a.degree.to_string()),
            ("p", a.norm.to_string()),
            ("cells", m.num_cells().to_string()),
            ("h", fmt_summary(ctx.report.h)),
            ("error", fmt_summary(residual.lhs)),
            ("psi", fmt_summary(psi)),
        ])
    );
    Ok(EXIT_OK)
}

fn fem(a: &FemArgs) -> CliResult {
    let (m, inputs) = mesh_from(&a.source)?;
    let case = MmsCase::from_name(&a.case)?;
    let problem = PoissonProblem::manufactured(case, &m).with_high_dim(a.allow_high_dim);
    let system = assemble(&problem)?;
    let sol = solve(&system, a.tol)?;
    let ctx = MeshContext::new(&m, 7, 1)?;
    let consts = FemConstants {
        c_int_first: a.c_int_first.unwrap_or(f64::INFINITY),
        c_int_second: a.c_int_second.unwrap_or(f64::INFINITY),
    };
    let mut checks = approximation_bounds(&problem, &sol, &ctx, consts)?;
    if a.c_int_second.is_none() {
        checks.remove(2);
    }
    if a.c_int_first.is_none() {
        checks.remove(1);
    }
    let err = checks[0].lhs;
    let energy = energy_functional(&sol.values, &system);
    if let Some(p) = &a.json {
        let record = serde_json::json!({
            "case": case,
            "dim": m.dim(),
            "cells": m.num_cells(),
            "dofs": system.dofs.len(),
            "h": ctx.report.h,
            "solution": sol,
            "gradient_error": err,
            "energy": energy,
            "checks": checks,
        });
        let text = serde_json::to_string_pretty(&record).map_err(|e| CliError(e.to_string()))?;
        write(p, &text, &inputs)?;
    }
    println!(
        "{}",
        kv(&[
            ("case", case.name().to_string()),
            ("cells", m.num_cells().to_string()),
            ("dofs", system.dofs.len().to_string()),
            ("iterations", sol.iterations.to_string()),
            ("residual", fmt_summary(sol.residual)),
            ("grad_error", fmt_summary(err)),
            ("energy", fmt_summary(energy)),
        ])
    );
    for c in &checks {
        print_check(c);
    }
    Ok(if checks.iter().all(|c| c.pass) { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn verify(a: &VerifyArgs) -> CliResult {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = String::from_utf8(read(p)?).map_err(|e| CliError(format!("invalid utf-8: {e}")))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let report = run_inequality_suite(&cfg)?;
    let inputs: Vec<&Path> = a.config.iter().map(|p| p.as_path()).collect();
    if let Some(p) = &a.json {
        write(p, &report.to_json(), &inputs)?;
    }
    if let Some(p) = &a.csv {
        write(p, &report.to_csv(), &inputs)?;
    }
    for r in &report.calibration {
        log::info!(
            "c_int {} k={} d={} exponent={} used={} held_out_pass_rate={}",
            r.group.kind,
            r.group.k,
            r.group.d,
            r.group.exponent,
            fmt_summary(r.c_int_used),
            r.held_out_pass_rate
        );
    }
    println!(
        "{}",
        kv(&[
            ("seed", cfg.seed.to_string()),
            ("checks", report.summary.checks.to_string()),
            ("failed", report.summary.failed.to_string()),
            ("pass", report.pass.to_string()),
        ])
    );
    if !report.summary.failed_names.is_empty() {
        println!("failed_checks={}", report.summary.failed_names.join(","));
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn configure_threads() {
    if let Some(n) = std::env::var("THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // a pool that already exists keeps its size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args` (including the program name) and runs the verb.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let outcome = match &cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Delaunay(a) => delaunay(a),
        Command::Coxeter(a) => coxeter(a),
        Command::Interp(a) => interp(a),
        Command::Fem(a) => fem(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}
