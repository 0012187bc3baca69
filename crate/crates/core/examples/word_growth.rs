//! Ball sizes of two rotation groups: a free one and a finite one.
//!
//! `cargo run --release --example word_growth`

use burnside_lab::diffeo::Primitive;
use burnside_lab::words::{enumerate_ball, growth_exponent, GeneratorSet, NamedPrimitive};

fn main() -> burnside_lab::error::Result<()> {
    let angle = (1.0f64 / 3.0).acos();
    let free = GeneratorSet::new(
        vec![
            NamedPrimitive::new("a", Primitive::rotation([1.0, 0.0, 0.0], angle)?),
            NamedPrimitive::new("b", Primitive::rotation([0.0, 0.0, 1.0], angle)?),
        ],
        true,
    )?;
    let ball = enumerate_ball(&free, 7);
    let report = growth_exponent(&ball)?;
    println!("free rotations");
    for (n, count) in report.counts.iter().enumerate() {
        println!(
            "  |B_{n}| = {count:>5}   (2*3^n - 1 = {})",
            2 * 3usize.pow(n as u32) - 1
        );
    }
    println!(
        "  exponent {:.4} vs log 3 = {:.4}: {:?}",
        report.exponent,
        3f64.ln(),
        report.classification
    );

    let cube = GeneratorSet::new(
        vec![
            NamedPrimitive::new(
                "rz",
                Primitive::rotation([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2)?,
            ),
            NamedPrimitive::new(
                "rx",
                Primitive::rotation([1.0, 0.0, 0.0], std::f64::consts::FRAC_PI_2)?,
            ),
        ],
        true,
    )?;
    let report = growth_exponent(&enumerate_ball(&cube, 8))?;
    println!(
        "quarter turns: counts {:?}, {:?}",
        report.counts, report.classification
    );
    Ok(())
}
