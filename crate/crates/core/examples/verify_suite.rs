//! Runs the default verification suite and prints calibration constants,
//! convergence slopes and any failed checks.
//!
//! `cargo run --release --example verify_suite [config.json]`

use std::time::Instant;

use protmesh::verify::{run_inequality_suite, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    let start = Instant::now();
    let report = run_inequality_suite(&cfg)?;
    println!("checks={} failed={} pass={} ({:.1?})", report.summary.checks, report.summary.failed, report.pass, start.elapsed());
    for r in &report.calibration {
        println!(
            "c_int {:<24} k={} d={} exp={:<4} cal={:>3} emp={:.4e} held={:.4e} used={:.4e} pass_rate={} stability={:.3}",
            r.group.kind, r.group.k, r.group.d, r.group.exponent, r.calibration_pairs, r.c_int_empirical,
            r.c_int_held_out, r.c_int_used, r.held_out_pass_rate, r.stability_ratio
        );
    }
    for r in &report.convergence {
        let slope = r.slope.map_or("exact".to_string(), |s| format!("{s:.4}"));
        println!("slope {:<15} {:<13} k={} d={} {slope}", r.quantity, r.field, r.k, r.d);
    }
    for r in &report.protection {
        println!("protection {:<15} delta/h={:.5} vacuous={}", r.mesh, r.delta_over_h, r.vacuous);
    }
    for c in report.checks.iter().filter(|c| !c.result.pass) {
        println!("FAILED {} d={} #{} {} {}: lhs={:e} rhs={:e}", c.result.name, c.d, c.instance, c.mesh, c.field, c.result.lhs, c.result.rhs);
    }
    Ok(())
}
