//! Pigeonhole recurrence in a free rotation group: the closest pair of
//! elements on a point triple, the recurrence element, and its orbit hull.
//!
//! `cargo run --release --example recurrence`

use burnside_lab::diffeo::Primitive;
use burnside_lab::recurrence::{
    element_order, find_fixed_point, orbit_hull_diameter, pigeonhole_pair, TripleConfig,
};
use burnside_lab::sphere::fibonacci_sphere;
use burnside_lab::words::{enumerate_ball, GeneratorSet, NamedPrimitive};

fn main() -> burnside_lab::error::Result<()> {
    let angle = (1.0f64 / 3.0).acos();
    let set = GeneratorSet::new(
        vec![
            NamedPrimitive::new("a", Primitive::rotation([1.0, 0.0, 0.0], angle)?),
            NamedPrimitive::new("b", Primitive::rotation([0.0, 0.0, 1.0], angle)?),
        ],
        true,
    )?;
    let triple = TripleConfig::default();
    let ball = enumerate_ball(&set, 6);
    let pair = pigeonhole_pair(&ball, &triple)?;
    println!("|B_6| = {}", pair.ball_size);
    println!(
        "closest pair {} / {} at distance {:.4}",
        pair.g_word, pair.h_word, pair.triple_distance
    );
    println!(
        "  bounds: 2 pi |B|^(-1/6) = {:.4}, volume {:.4}",
        pair.pigeonhole_bound, pair.volume_bound
    );
    println!(
        "f = {}, order up to 64: {:?}",
        pair.f_word,
        element_order(&pair.f, 64)
    );
    let hull = orbit_hull_diameter(&set, &pair.f, &triple.points[0], 5)?;
    println!(
        "orbit hull diameter {:.4} <= {:.4}",
        hull.diameter, hull.chain_bound
    );
    let seed = fibonacci_sphere(500)
        .into_iter()
        .min_by(|p, q| {
            let dp = burnside_lab::sphere::geodesic_distance(&pair.f.evaluate(p), p);
            let dq = burnside_lab::sphere::geodesic_distance(&pair.f.evaluate(q), q);
            dp.total_cmp(&dq)
        })
        .expect("nonempty sample");
    let fixed = find_fixed_point(&set, &pair.f, &seed, 0.5)?;
    println!("fixed point {:?}: {:?}", fixed.point, fixed.classification);
    Ok(())
}
