//! Quasiconformal dilatation of a twist against the round metric and
//! against averaged metrics of the group it generates.
//!
//! `cargo run --release --example dilatation`

use burnside_lab::diffeo::{operator_norm_d, Diffeomorphism, Primitive};
use burnside_lab::pesin::{build_averaged_metric, qc_dilatation};
use burnside_lab::words::{GeneratorSet, NamedPrimitive};

fn main() -> burnside_lab::error::Result<()> {
    let set = GeneratorSet::new(
        vec![NamedPrimitive::new(
            "t",
            Primitive::twist([0.0, 0.0, 1.0], 2.0)?,
        )],
        true,
    )?;
    let t: Diffeomorphism = set.generator(0);
    println!(
        "operator norm {:.8} (1 + sqrt 2 = {:.8})",
        operator_norm_d(&t),
        1.0 + 2f64.sqrt()
    );
    println!(
        "round dilatation {:.6} (3 + 2 sqrt 2 = {:.6})",
        qc_dilatation(&t, None)?,
        3.0 + 8f64.sqrt()
    );
    for eps in [1.0, 0.5] {
        let field = build_averaged_metric(&set, eps, 12)?;
        println!(
            "eps {eps}: averaged dilatation {:.4} (e^2eps = {:.4})",
            qc_dilatation(&t, Some(&field))?,
            (2.0 * eps).exp()
        );
    }
    Ok(())
}
