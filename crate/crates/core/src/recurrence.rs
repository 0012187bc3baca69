//! Near-recurrence of triples, fixed points of the resulting elements,
//! element orders, and conjugated rotation families.

use std::collections::HashMap;

use nalgebra::{Matrix2, Vector2};
use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{classify_periodic_point, FixedPointMethod, FixedPointRecord};
use crate::diffeo::{c0_distance, operator_norm_d, standard_sample_set, Diffeomorphism, Primitive};
use crate::error::{Error, Result};
use crate::jet::Jet1;
use crate::pesin::qc_dilatation;
use crate::sphere::{
    geodesic_distance, lift_raw, preferred_chart, project_raw, Chart, SpherePoint,
};
use crate::words::{GeneratorSet, WordBall};

/// Minimal pairwise separation of a triple.
pub const TRIPLE_MIN_SEPARATION: f64 = 0.1;
/// Volume constant `c` in `min distance ≤ c·|B|^{−1/6}` on `(S²)³` with the sup metric.
pub const PIGEONHOLE_CONSTANT: f64 = 2.0 * std::f64::consts::PI;
pub const NEWTON_MAX_ITERATIONS: usize = 50;
pub const NEWTON_TOLERANCE: f64 = 1e-10;
pub const NEWTON_DAMPING: f64 = 0.5;
pub const ORDER_TOLERANCE: f64 = 1e-8;
pub const HULL_SEGMENT_SAMPLES: usize = 64;
/// Allowed relative increase between consecutive rows of a convergence table.
pub const RIPPLE_ALLOWANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleConfig {
    pub points: [SpherePoint; 3],
}

impl TripleConfig {
    pub fn new(points: [SpherePoint; 3]) -> Result<Self> {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let d = geodesic_distance(&points[a], &points[b]);
            if d < TRIPLE_MIN_SEPARATION {
                return Err(Error::Validation(format!(
                    "triple points {a} and {b} are {d:.3e} apart; need at least {TRIPLE_MIN_SEPARATION}"
                )));
            }
        }
        Ok(Self { points })
    }
}

impl Default for TripleConfig {
    fn default() -> Self {
        Self {
            points: [
                SpherePoint::new([1.0, 0.0, 0.0]).expect("unit"),
                SpherePoint::new([0.0, 1.0, 0.0]).expect("unit"),
                SpherePoint::NORTH,
            ],
        }
    }
}

/// Sup over the three factors of the geodesic distance.
pub fn triple_distance(a: &[SpherePoint], b: &[SpherePoint]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| geodesic_distance(p, q))
        .fold(0.0, f64::max)
}

/// Largest `r` compatible with `n` disjoint sup-balls of radius `r/2` in `(S²)³`.
pub fn pigeonhole_volume_bound(n: usize) -> f64 {
    let t = (2.0 * (n as f64).powf(-1.0 / 3.0)).min(2.0);
    2.0 * (1.0 - t).acos()
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrencePair {
    pub g_index: usize,
    pub h_index: usize,
    pub g_word: String,
    pub h_word: String,
    pub triple_distance: f64,
    pub f_word: String,
    #[serde(skip)]
    pub f: Diffeomorphism,
    /// `d(f(x_i), x_i)` for the three triple points.
    pub displacements: [f64; 3],
    pub ball_size: usize,
    /// `c·|B|^{−1/6}`.
    pub pigeonhole_bound: f64,
    pub volume_bound: f64,
    /// Two distinct elements agree on the triple within the fingerprint cell.
    pub degenerate: bool,
}

/// Closest pair of distinct ball elements in the sup product metric on the
/// triple images. Ties go to the smallest `(g, h)` index pair, i.e. the
/// shortlex-first words.
pub fn pigeonhole_pair(ball: &WordBall, triple: &TripleConfig) -> Result<RecurrencePair> {
    if ball.len() < 2 {
        return Err(Error::Validation(
            "pigeonhole search needs at least two elements".into(),
        ));
    }
    let images = ball.orbit_images(&triple.points);
    let (dist, i, j) = closest_pair(&images);
    let generators = ball.generators();
    let g = ball.word(i);
    let h = ball.word(j);
    let f = h.inverse().compose(&g);
    let displacements = std::array::from_fn(|k| {
        geodesic_distance(&f.evaluate(&triple.points[k]), &triple.points[k])
    });
    Ok(RecurrencePair {
        g_index: i,
        h_index: j,
        g_word: generators.describe(&g),
        h_word: generators.describe(&h),
        triple_distance: dist,
        f_word: generators.describe(&f),
        f,
        displacements,
        ball_size: ball.len(),
        pigeonhole_bound: PIGEONHOLE_CONSTANT * (ball.len() as f64).powf(-1.0 / 6.0),
        volume_bound: pigeonhole_volume_bound(ball.len()),
        degenerate: dist < ball.config().cell_size,
    })
}

/// Exact nearest pair in the sup product metric.
///
/// An upper bound `r` comes from pairs sharing a cell of coarse grids on
/// all nine coordinates; the exact pass then compares only pairs whose first
/// image points lie in adjacent cells of a 3-D grid of size `r`, which is
/// complete because the sup distance dominates every coordinate difference.
pub fn closest_pair(images: &[Vec<SpherePoint>]) -> (f64, usize, usize) {
    let n = images.len();
    let bound = closest_pair_upper_bound(images);
    let cell = (bound * (1.0 + 1e-12) + 1e-15).max(1e-12);
    let key = |p: &SpherePoint| -> [i64; 3] { p.coords().map(|c| (c / cell).floor() as i64) };
    let mut grid: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
    for (i, img) in images.iter().enumerate() {
        grid.entry(key(&img[0])).or_default().push(i as u32);
    }
    let none = (f64::INFINITY, usize::MAX, usize::MAX);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let k = key(&images[i][0]);
            let mut local = none;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        let Some(bucket) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else {
                            continue;
                        };
                        for &j in bucket {
                            let j = j as usize;
                            if j <= i {
                                continue;
                            }
                            let d = triple_distance(&images[i], &images[j]);
                            if (d, i, j) < local {
                                local = (d, i, j);
                            }
                        }
                    }
                }
            }
            local
        })
        .reduce(|| none, |x, y| if y < x { y } else { x })
}

/// Distance of some actual pair, found cheaply: pairs sharing a cell of
/// nine-dimensional grids at successively finer scales.
fn closest_pair_upper_bound(images: &[Vec<SpherePoint>]) -> f64 {
    let mut bound = triple_distance(&images[0], &images[1]);
    let mut scale = pigeonhole_volume_bound(images.len()).max(1e-6);
    for _ in 0..40 {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, img) in images.iter().enumerate() {
            let key = img
                .iter()
                .flat_map(|p| p.coords())
                .map(|c| (c / scale).floor() as i64)
                .collect();
            cells.entry(key).or_default().push(i);
        }
        let mut shared = false;
        for members in cells.values().filter(|m| m.len() > 1) {
            shared = true;
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    bound = bound.min(triple_distance(&images[i], &images[j]));
                }
            }
        }
        if !shared || bound < scale * 0.25 {
            break;
        }
        scale *= 0.5;
    }
    bound
}

/// Newton on the chart displacement `u ↦ chart(f(lift(u))) − u`.
pub fn find_fixed_point(
    generators: &GeneratorSet,
    f: &Diffeomorphism,
    seed: &SpherePoint,
    search_radius: f64,
) -> Result<FixedPointRecord> {
    let start_residual = geodesic_distance(&f.evaluate(seed), seed);
    if start_residual >= search_radius {
        return Err(Error::Validation(format!(
            "seed moves by {start_residual:.3e}, outside the search radius {search_radius:.3e}"
        )));
    }
    let chart = preferred_chart(seed);
    let c = project_raw(seed.coords(), chart);
    let mut u = Vector2::new(c[0], c[1]);
    let mut residual = start_residual;
    let mut best = (residual, u);
    let mut iterations = 0;
    let mut method = FixedPointMethod::Newton;
    let inside = |u: &Vector2<f64>| geodesic_distance(&at(u, chart), seed) <= 2.0 * search_radius;
    while residual >= NEWTON_TOLERANCE && iterations < NEWTON_MAX_ITERATIONS {
        iterations += 1;
        let (disp, jac) = displacement(f, &u, chart);
        let Some(inv) = jac
            .try_inverse()
            .filter(|_| jac.determinant().abs() > 1e-12)
        else {
            method = FixedPointMethod::PatternSearch;
            break;
        };
        let mut step = -(inv * disp);
        let mut accepted = false;
        for _ in 0..30 {
            let trial = u + step;
            let r = residual_at(f, &trial, chart);
            if r < residual {
                u = trial;
                residual = r;
                accepted = true;
                break;
            }
            step *= NEWTON_DAMPING;
        }
        if !accepted {
            break;
        }
        if residual < best.0 && inside(&u) {
            best = (residual, u);
        }
    }
    if method == FixedPointMethod::PatternSearch {
        let (r, v, evals) = pattern_search(f, u, chart, search_radius, residual);
        iterations += evals;
        residual = r;
        u = v;
        if residual < best.0 && inside(&u) {
            best = (residual, u);
        }
    }
    if residual >= NEWTON_TOLERANCE || !inside(&u) {
        return Err(Error::NotFound {
            best_residual: best.0,
        });
    }
    let p = at(&u, chart);
    let mut record = classify_periodic_point(generators, f, &p)?;
    record.method = method;
    record.iterations = iterations;
    Ok(record)
}

fn at(u: &Vector2<f64>, chart: Chart) -> SpherePoint {
    SpherePoint::normalized(lift_raw([u[0], u[1]], chart)).expect("chart lift is on the sphere")
}

fn residual_at(f: &Diffeomorphism, u: &Vector2<f64>, chart: Chart) -> f64 {
    let p = at(u, chart);
    geodesic_distance(&f.evaluate(&p), &p)
}

fn displacement(
    f: &Diffeomorphism,
    u: &Vector2<f64>,
    chart: Chart,
) -> (Vector2<f64>, Matrix2<f64>) {
    let w = [Jet1::variable(u[0], 0), Jet1::variable(u[1], 1)];
    let image = project_raw(f.apply(lift_raw(w, chart)), chart);
    let disp = Vector2::new(image[0].v - u[0], image[1].v - u[1]);
    let jac = Matrix2::new(
        image[0].d[0] - 1.0,
        image[0].d[1],
        image[1].d[0],
        image[1].d[1] - 1.0,
    );
    (disp, jac)
}

/// Compass search on the residual for degenerate displacement Jacobians.
fn pattern_search(
    f: &Diffeomorphism,
    mut u: Vector2<f64>,
    chart: Chart,
    radius: f64,
    mut residual: f64,
) -> (f64, Vector2<f64>, usize) {
    let mut h = radius / 4.0;
    let mut evals = 0;
    let dirs = [
        Vector2::new(1.0, 0.0),
        Vector2::new(-1.0, 0.0),
        Vector2::new(0.0, 1.0),
        Vector2::new(0.0, -1.0),
    ];
    while residual >= NEWTON_TOLERANCE && h > 1e-15 && evals < 20_000 {
        let mut improved = false;
        for d in &dirs {
            let trial = u + d * h;
            let r = residual_at(f, &trial, chart);
            evals += 1;
            if r < residual {
                residual = r;
                u = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (residual, u, evals)
}

/// Smallest `k ≤ k_max` with `c0(f^k, Id) < 1e-8`; `None` if there is none.
pub fn element_order(f: &Diffeomorphism, k_max: usize) -> Option<usize> {
    let base = standard_sample_set();
    let mut current = base.clone();
    for k in 1..=k_max {
        current = current.iter().map(|p| f.evaluate(p)).collect();
        let d = current
            .iter()
            .zip(&base)
            .map(|(a, b)| geodesic_distance(a, b))
            .fold(0.0, f64::max);
        if d < ORDER_TOLERANCE {
            return Some(k);
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitHull {
    pub word: String,
    pub base: [f64; 3],
    pub order: usize,
    pub diameter: f64,
    /// `d(f(x), x)`.
    pub displacement: f64,
    /// `‖D f‖` used in the bounds.
    pub step_norm: f64,
    /// `d·Σ_{j=1..k} ‖Df‖^j`, the length of the image chain.
    pub chain_bound: f64,
    /// `d·‖Df‖^{k+1}`.
    pub power_bound: f64,
    pub ratio: f64,
    pub segments: usize,
}

fn slerp(a: &SpherePoint, b: &SpherePoint, t: f64) -> SpherePoint {
    let theta = geodesic_distance(a, b);
    let (pa, pb) = (a.coords(), b.coords());
    if theta < 1e-12 {
        return *a;
    }
    let s = theta.sin();
    let wa = ((1.0 - t) * theta).sin() / s;
    let wb = (t * theta).sin() / s;
    SpherePoint::normalized([
        wa * pa[0] + wb * pb[0],
        wa * pa[1] + wb * pb[1],
        wa * pa[2] + wb * pb[2],
    ])
    .expect("slerp of unit vectors")
}

/// Diameter of `∪_{j=1..k} f^j(s)` with `s` the geodesic segment from `x` to `f(x)`.
pub fn orbit_hull_diameter(
    generators: &GeneratorSet,
    f: &Diffeomorphism,
    x: &SpherePoint,
    k: usize,
) -> Result<OrbitHull> {
    if k < 1 {
        return Err(Error::Validation("orbit hull needs k ≥ 1".into()));
    }
    let fx = f.evaluate(x);
    let segment: Vec<SpherePoint> = (0..HULL_SEGMENT_SAMPLES)
        .map(|i| slerp(x, &fx, i as f64 / (HULL_SEGMENT_SAMPLES - 1) as f64))
        .collect();
    let mut hull = Vec::with_capacity(k * segment.len());
    let mut current = segment;
    for _ in 0..k {
        current = current.iter().map(|p| f.evaluate(p)).collect();
        hull.extend_from_slice(&current);
    }
    let diameter = hull
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            hull[i + 1..]
                .iter()
                .map(|q| geodesic_distance(p, q))
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let displacement = geodesic_distance(&fx, x);
    let step_norm = operator_norm_d(f);
    let chain_bound = displacement * (1..=k).map(|j| step_norm.powi(j as i32)).sum::<f64>();
    let power_bound = displacement * step_norm.powi(k as i32 + 1);
    Ok(OrbitHull {
        word: generators.describe(f),
        base: x.coords(),
        order: k,
        diameter,
        displacement,
        step_norm,
        chain_bound,
        power_bound,
        ratio: if power_bound > 0.0 {
            diameter / power_bound
        } else {
            0.0
        },
        segments: k,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationRow {
    pub strength: f64,
    pub dilatation: f64,
    pub distance_to_rotation: f64,
    pub distance_to_identity: f64,
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationTable {
    pub rotation_order: Option<usize>,
    pub rotation_displacement: f64,
    pub rows: Vec<ConjugationRow>,
    /// `K_t − 1` and the distance to the rotation shrink along the table.
    pub converging: bool,
    pub order_preserved: bool,
    /// `c0(s_t, Id) ≥ c0(R, Id) − c0(s_t, R)` on every row.
    pub stays_away_from_identity: bool,
}

/// `s_t = g_t⁻¹ ∘ R ∘ g_t` with `g_t` a twist of strength `t` about `twist_axis`.
pub fn conjugated_rotation_family(
    rotation: &Primitive,
    twist_axis: [f64; 3],
    strengths: &[f64],
    k_max: usize,
) -> Result<ConjugationTable> {
    if !matches!(rotation, Primitive::Rotation { .. }) {
        return Err(Error::Validation(
            "conjugated family needs a rotation".into(),
        ));
    }
    if strengths.windows(2).any(|w| w[1] >= w[0]) || strengths.iter().any(|t| *t < 0.0) {
        return Err(Error::Validation(
            "strengths must be nonnegative and strictly descending".into(),
        ));
    }
    let r = Diffeomorphism::primitive(*rotation);
    let rotation_order = element_order(&r, k_max);
    if rotation_order.is_none_or(|k| k < 2) {
        return Err(Error::Validation(
            "rotation must be nontrivial of finite order".into(),
        ));
    }
    let identity = Diffeomorphism::identity(r.table().clone());
    let rotation_displacement = c0_distance(&r, &identity);
    let rows: Vec<ConjugationRow> = strengths
        .iter()
        .map(|&t| {
            let twist = Primitive::twist(twist_axis, t)?;
            let set = GeneratorSet::new(
                vec![
                    crate::words::NamedPrimitive::new("R", *rotation),
                    crate::words::NamedPrimitive::new("g", twist),
                ],
                true,
            )?;
            let g = set.generator(1);
            let s = g.inverse().compose(&set.generator(0)).compose(&g);
            let r_here = set.generator(0);
            let id = set.identity();
            Ok(ConjugationRow {
                strength: t,
                dilatation: qc_dilatation(&s, None)?,
                distance_to_rotation: c0_distance(&s, &r_here),
                distance_to_identity: c0_distance(&s, &id),
                order: element_order(&s, k_max),
            })
        })
        .collect::<Result<_>>()?;
    let shrinking = |f: &dyn Fn(&ConjugationRow) -> f64| {
        rows.windows(2)
            .all(|w| f(&w[1]) <= f(&w[0]) * (1.0 + RIPPLE_ALLOWANCE) + 1e-12)
            && rows.len() < 2
            || f(rows.last().unwrap()) < f(&rows[0])
    };
    let converging =
        shrinking(&|row| row.dilatation - 1.0) && shrinking(&|row| row.distance_to_rotation);
    let order_preserved = rows.iter().all(|row| row.order == rotation_order);
    let stays_away_from_identity = rows.iter().all(|row| {
        row.distance_to_identity >= rotation_displacement - row.distance_to_rotation - 1e-12
    });
    Ok(ConjugationTable {
        rotation_order,
        rotation_displacement,
        rows,
        converging,
        order_preserved,
        stays_away_from_identity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::PointClass;
    use crate::diffeo::Letter;
    use crate::words::{enumerate_ball, NamedPrimitive};
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn single(p: Primitive) -> GeneratorSet {
        GeneratorSet::new(vec![NamedPrimitive::new("f", p)], true).unwrap()
    }

    #[test]
    fn rotation_fixed_point_is_elliptic() {
        let s = single(Primitive::rotation([0.0, 0.0, 1.0], 0.3).unwrap());
        let seed = SpherePoint::normalized([0.1, 0.0, 0.995]).unwrap();
        let rec = find_fixed_point(&s, &s.generator(0), &seed, 0.2).unwrap();
        assert!(
            geodesic_distance(&SpherePoint::new(rec.point).unwrap(), &SpherePoint::NORTH) < 1e-10
        );
        assert_eq!(rec.classification, PointClass::Elliptic);
        let again = find_fixed_point(
            &s,
            &s.generator(0),
            &SpherePoint::new(rec.point).unwrap(),
            0.2,
        )
        .unwrap();
        assert_eq!(again.point, rec.point);
    }

    #[test]
    fn no_fixed_point_near_equator() {
        let s = single(Primitive::rotation([0.0, 0.0, 1.0], 0.005).unwrap());
        let seed = SpherePoint::new([1.0, 0.0, 0.0]).unwrap();
        let err = find_fixed_point(&s, &s.generator(0), &seed, 0.01).unwrap_err();
        assert!(matches!(err, Error::NotFound { .. }));
    }

    #[test]
    fn twist_equator_uses_pattern_search() {
        let s = single(Primitive::twist([0.0, 0.0, 1.0], 2.0).unwrap());
        let seed = SpherePoint::normalized([1.0, 0.0, 0.01]).unwrap();
        let rec = find_fixed_point(&s, &s.generator(0), &seed, 0.1).unwrap();
        assert!(rec.residual < 1e-10);
        assert_eq!(rec.classification, PointClass::Parabolic);
    }

    #[test]
    fn orders() {
        let r = Diffeomorphism::primitive(Primitive::rotation([0.0, 0.0, 1.0], TAU / 5.0).unwrap());
        assert_eq!(element_order(&r, 64), Some(5));
        let t = Diffeomorphism::primitive(Primitive::twist([0.0, 0.0, 1.0], 2.0).unwrap());
        assert_eq!(element_order(&t, 64), None);
        let set = GeneratorSet::new(
            vec![
                NamedPrimitive::new(
                    "r",
                    Primitive::rotation([0.0, 0.0, 1.0], TAU / 5.0).unwrap(),
                ),
                NamedPrimitive::new("g", Primitive::twist([1.0, 0.0, 0.0], 0.7).unwrap()),
            ],
            true,
        )
        .unwrap();
        let conj = set
            .word(vec![
                Letter::new(1, true),
                Letter::new(0, false),
                Letter::new(1, false),
            ])
            .unwrap();
        assert_eq!(element_order(&conj, 64), Some(5));
    }

    #[test]
    fn hull_examples() {
        let s = single(Primitive::rotation([0.0, 0.0, 1.0], FRAC_PI_2).unwrap());
        let id = s.identity();
        let x = SpherePoint::normalized([0.1, 0.0, 0.99]).unwrap();
        assert_eq!(orbit_hull_diameter(&s, &id, &x, 3).unwrap().diameter, 0.0);
        let hull = orbit_hull_diameter(&s, &s.generator(0), &x, 4).unwrap();
        assert!(hull.diameter <= 4.0 * hull.displacement);
        assert!(hull.diameter <= hull.chain_bound + 1e-12);
    }

    #[test]
    fn cyclic_pair_matches_brute_force() {
        let s = single(Primitive::rotation([0.0, 0.0, 1.0], TAU / 7.0).unwrap());
        let ball = enumerate_ball(&s, 4);
        let triple = TripleConfig::new([
            SpherePoint::normalized([1.0, 0.0, 0.2]).unwrap(),
            SpherePoint::normalized([0.0, 1.0, -0.3]).unwrap(),
            SpherePoint::normalized([-1.0, 0.5, 0.1]).unwrap(),
        ])
        .unwrap();
        let pair = pigeonhole_pair(&ball, &triple).unwrap();
        let images = ball.orbit_images(&triple.points);
        let mut best = (f64::INFINITY, 0, 0);
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                let d = triple_distance(&images[i], &images[j]);
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        assert_eq!((pair.triple_distance, pair.g_index, pair.h_index), best);
        let two = enumerate_ball(
            &single(Primitive::rotation([0.0, 0.0, 1.0], std::f64::consts::PI).unwrap()),
            3,
        );
        let pair = pigeonhole_pair(&two, &TripleConfig::default()).unwrap();
        assert_eq!((pair.g_index, pair.h_index), (0, 1));
    }

    #[test]
    fn degenerate_triples_are_rejected() {
        let p = SpherePoint::NORTH;
        assert!(TripleConfig::new([p, p, SpherePoint::SOUTH]).is_err());
    }
}
