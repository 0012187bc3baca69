//! Derivative growth of linked twists against commuting twists, and the
//! second-order norm rate compared with twice the first-order rate.
//!
//! `cargo run --release --example derivative_growth`

use burnside_lab::diffeo::Primitive;
use burnside_lab::words::{cr_growth_report, derivative_growth, GeneratorSet, NamedPrimitive};

fn twists(axes: [[f64; 3]; 2], strengths: [f64; 2]) -> burnside_lab::error::Result<GeneratorSet> {
    GeneratorSet::new(
        vec![
            NamedPrimitive::new("s", Primitive::twist(axes[0], strengths[0])?),
            NamedPrimitive::new("t", Primitive::twist(axes[1], strengths[1])?),
        ],
        true,
    )
}

fn main() -> burnside_lab::error::Result<()> {
    let linked = twists([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], [2.0, 2.0])?;
    let commuting = twists([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]], [1.0, 2f64.sqrt()])?;
    println!("  n   linked   commuting");
    for n in [2, 4, 6, 8] {
        let a = derivative_growth(&linked, n, 512, 1);
        let b = derivative_growth(&commuting, n, 512, 1);
        println!(
            "{n:>3}   {:.4}   {:.4}   (argmax {})",
            a.exponent, b.exponent, a.argmax
        );
    }
    let cr = cr_growth_report(&linked, 6, 2, 128, 1)?;
    println!(
        "second-order rate {:.3} vs 2 x first-order rate {:.3} (+{}): {}",
        cr.rate_c2,
        2.0 * cr.rate_c1,
        cr.slack,
        if cr.bound_holds { "holds" } else { "violated" }
    );
    Ok(())
}
