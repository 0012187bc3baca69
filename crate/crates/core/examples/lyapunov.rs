//! Lyapunov exponents along a periodic word at its hyperbolic fixed point
//! and along a random word.
//!
//! `cargo run --release --example lyapunov`

use burnside_lab::cocycle::{classify_periodic_point, lyapunov_pair, SymbolicWord};
use burnside_lab::diffeo::Primitive;
use burnside_lab::sphere::SpherePoint;
use burnside_lab::words::{GeneratorSet, NamedPrimitive};

fn main() -> burnside_lab::error::Result<()> {
    let set = GeneratorSet::new(
        vec![
            NamedPrimitive::new("tz", Primitive::twist([0.0, 0.0, 1.0], 2.0)?),
            NamedPrimitive::new("tx", Primitive::twist([1.0, 0.0, 0.0], 2.0)?),
        ],
        true,
    )?;
    let core = vec![set.parse_letter("tz")?, set.parse_letter("tx^-1")?];
    let word = SymbolicWord::periodic(core)?;
    let start = SpherePoint::new([0.0, 1.0, 0.0])?;
    let report = lyapunov_pair(&set, &word, &start, 2000, 0)?;
    let record = classify_periodic_point(&set, &word.composite(&set, 2), &start)?;
    let rho = record.eigenvalues[0][0].hypot(record.eigenvalues[0][1]);
    println!(
        "periodic {}: lambda1 {:.6}, lambda2 {:.6}",
        report.word, report.lambda1, report.lambda2
    );
    println!(
        "  half log spectral radius {:.6}, point is {:?}",
        rho.ln() / 2.0,
        record.classification
    );

    let random = SymbolicWord::random(42, set.letters())?;
    let x = SpherePoint::normalized([0.3, -0.5, 0.8])?;
    let report = lyapunov_pair(&set, &random, &x, 5000, 42)?;
    println!(
        "random word: lambda1 {:.4}, lambda1 + lambda2 = {:.2e}",
        report.lambda1,
        report.sum()
    );
    Ok(())
}
