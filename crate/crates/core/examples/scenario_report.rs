//! Runs a scenario file and prints a short digest of its report.
//!
//! `cargo run --release --example scenario_report -- crates/core/scenarios/linked-twists.json`

use std::path::PathBuf;

use burnside_lab::lab::{run_scenario, RunOptions};
use burnside_lab::scenario::load_scenario;

fn main() -> burnside_lab::error::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/linked-twists.json")
        });
    let scenario = load_scenario(&path)?;
    let report = run_scenario(&scenario, RunOptions { timing: true })?;
    println!(
        "{} (seed {}), {:.2}s",
        scenario.name,
        report.seed,
        report.wall_clock_seconds.unwrap_or(0.0)
    );
    if let Some(g) = &report.results.growth {
        println!("  growth: counts {:?}, {:?}", g.counts, g.classification);
    }
    if let Some(d) = &report.results.derivs {
        println!("  derivative exponent {:.4}", d.exponent);
    }
    if let Some(l) = &report.results.lyapunov {
        println!("  lyapunov {} -> {:.4}", l.report.word, l.report.lambda1);
    }
    if let Some(r) = &report.results.recur {
        for p in &r.fixed_points {
            println!(
                "  fixed point of {} at {:.3?}: {:?}",
                p.word, p.point, p.classification
            );
        }
    }
    for (block, message) in &report.errors {
        println!("  error in {block}: {message}");
    }
    Ok(())
}
