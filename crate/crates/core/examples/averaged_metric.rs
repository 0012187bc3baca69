//! Exponentially averaged metric for commuting twists: shell tail decay,
//! Lipschitz inequalities, and the negative control with growing weights.
//!
//! `cargo run --release --example averaged_metric`

use burnside_lab::diffeo::Primitive;
use burnside_lab::pesin::{build_averaged_metric, lipschitz_check_with, tail_report, Weighting};
use burnside_lab::words::{GeneratorSet, NamedPrimitive};

fn main() -> burnside_lab::error::Result<()> {
    let set = GeneratorSet::new(
        vec![
            NamedPrimitive::new("ta", Primitive::twist([0.0, 0.0, 1.0], 1.0)?),
            NamedPrimitive::new("tb", Primitive::twist([0.0, 0.0, 1.0], 2f64.sqrt())?),
        ],
        true,
    )?;
    let field = build_averaged_metric(&set, 0.5, 10)?;
    println!(
        "metric at {} samples, positive definite: {}",
        field.matrices.len(),
        field.is_spd()
    );
    let tail = tail_report(&set, 0.5, 14)?;
    println!(
        "tail slope {:.4}, predicted {:.4}",
        tail.slope.unwrap_or(f64::NAN),
        tail.predicted_slope.unwrap_or(f64::NAN)
    );
    for weighting in [Weighting::Decaying, Weighting::Growing] {
        let r = lipschitz_check_with(&set, 0.5, 8, weighting, 500)?;
        println!(
            "{weighting:?}: violations {:.1e}/{:.1e}, tail rate {:+.3}, passed {}",
            r.upper_violation,
            r.lower_violation,
            r.tail_rate.unwrap_or(f64::NAN),
            r.passed
        );
    }
    Ok(())
}
