//! Conjugating a fifth turn by ever weaker twists: dilatation tends to 1,
//! the maps converge to the rotation, and the order stays 5.
//!
//! `cargo run --release --example conjugated_family`

use burnside_lab::diffeo::Primitive;
use burnside_lab::recurrence::conjugated_rotation_family;

fn main() -> burnside_lab::error::Result<()> {
    let rotation = Primitive::rotation([0.0, 0.0, 1.0], std::f64::consts::TAU / 5.0)?;
    let table =
        conjugated_rotation_family(&rotation, [1.0, 0.0, 0.0], &[1.6, 0.8, 0.4, 0.2, 0.1], 32)?;
    println!("strength  dilatation  dist to R   order");
    for row in &table.rows {
        println!(
            "{:>8}  {:>10.5}  {:>9.5}  {:?}",
            row.strength, row.dilatation, row.distance_to_rotation, row.order
        );
    }
    println!(
        "converging {}, order preserved {}, away from identity {}",
        table.converging, table.order_preserved, table.stays_away_from_identity
    );
    Ok(())
}
