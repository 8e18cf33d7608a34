//! Per-element and mesh-wide quality quantities.
//!
//! The characteristic element length is the diameter, `h_K = Δ(K)`.
//! Θ is the unscaled volume-weighted sum of squared edge lengths.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{factorial, Simplex};
use crate::mesh::SimplicialMesh;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementMetrics {
    /// Diameter Δ(K).
    pub delta: f64,
    /// Insphere diameter ρ(K).
    pub rho: f64,
    /// Thickness Ξ(K).
    pub xi: f64,
    /// Regularity σ(K) = Δ/ρ.
    pub sigma: f64,
    /// Min-containment radius.
    pub r_min: f64,
    pub theta_local: f64,
    pub upsilon: f64,
    pub volume: f64,
}

pub fn element_metrics(s: &Simplex) -> Result<ElementMetrics> {
    if s.is_degenerate() {
        return Err(Error::DegenerateSimplex);
    }
    let delta = s.diameter();
    let rho = s.insphere_diameter();
    let volume = s.volume();
    let sum_sq = s.edge_length_sq_sum();
    Ok(ElementMetrics {
        delta,
        rho,
        xi: s.thickness(),
        sigma: delta / rho,
        r_min: s.min_containment_ball().radius,
        theta_local: sum_sq * volume,
        upsilon: sum_sq.sqrt() / delta,
        volume,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub dim: usize,
    /// Largest element diameter.
    pub h: f64,
    pub c_delta: f64,
    pub c_xi: f64,
    pub c_sigma: f64,
    pub c_upsilon: f64,
    pub theta: f64,
    pub r_max: f64,
    pub min_delta: f64,
    pub card: usize,
    /// Characteristic element length used by the bound evaluators.
    pub h_k: String,
    pub per_element: Vec<ElementMetrics>,
}

pub fn quality_report(m: &SimplicialMesh) -> Result<QualityReport> {
    if m.num_cells() == 0 {
        return Err(Error::EmptyMesh);
    }
    let per_element: Vec<ElementMetrics> = (0..m.num_cells())
        .into_par_iter()
        .map(|c| element_metrics(&m.simplex(c)))
        .collect::<Result<_>>()?;
    let mut h: f64 = 0.0;
    let mut min_delta = f64::INFINITY;
    let mut c_xi = f64::INFINITY;
    let mut c_sigma: f64 = 0.0;
    let mut c_upsilon: f64 = 0.0;
    let mut r_max: f64 = 0.0;
    let mut theta = 0.0;
    for e in &per_element {
        h = h.max(e.delta);
        min_delta = min_delta.min(e.delta);
        c_xi = c_xi.min(e.xi);
        c_sigma = c_sigma.max(e.sigma);
        c_upsilon = c_upsilon.max(e.upsilon);
        r_max = r_max.max(e.r_min);
        theta += e.theta_local;
    }
    Ok(QualityReport {
        dim: m.dim(),
        h,
        c_delta: h / min_delta,
        c_xi,
        c_sigma,
        c_upsilon,
        theta,
        r_max,
        min_delta,
        card: m.num_cells(),
        h_k: "diameter".into(),
        per_element,
    })
}

/// `2^{d+1} (d+1) / (d-1)! * R_max^{d+2} * card`, an upper bound for Θ.
pub fn theta_upper_bound(report: &QualityReport, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidArgument("theta bound needs d >= 2".into()));
    }
    Ok(2f64.powi(d as i32 + 1) * (d + 1) as f64 / factorial(d - 1)
        * report.r_max.powi(d as i32 + 2)
        * report.card as f64)
}

impl QualityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// One row per element followed by a `summary` row.
    pub fn to_csv(&self) -> String {
        use crate::mesh::fmt_real;
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record([
            "cell", "delta", "rho", "xi", "sigma", "r_min", "theta", "upsilon", "volume",
        ]);
        for (i, e) in self.per_element.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(
                [e.delta, e.rho, e.xi, e.sigma, e.r_min, e.theta_local, e.upsilon, e.volume]
                    .iter()
                    .map(|&x| fmt_real(x)),
            );
            let _ = w.write_record(&row);
        }
        let total_volume: f64 = self.per_element.iter().map(|e| e.volume).sum();
        let mut row = vec!["summary".to_string()];
        row.extend(
            [
                self.h,
                f64::NAN,
                self.c_xi,
                self.c_sigma,
                self.r_max,
                self.theta,
                self.c_upsilon,
                total_volume,
            ]
            .iter()
            .map(|&x| if x.is_nan() { String::new() } else { fmt_real(x) }),
        );
        let _ = w.write_record(&row);
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii output")
    }
}
