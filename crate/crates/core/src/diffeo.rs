//! Closed-form diffeomorphisms of the sphere as words over primitives.
//!
//! A [`Diffeomorphism`] is a list of letters over a shared primitive table.
//! The letter list `[l0, l1, …, lk]` denotes the composition
//! `l0 ∘ l1 ∘ … ∘ lk`, so the last letter acts first. Evaluation is exact
//! composition of the primitive formulas; Jacobians and second derivatives
//! come from pushing [`Jet1`]/[`Jet2`] values through the same formulas.

use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet1, Jet2, Scalar};
use crate::sphere::{
    axis_points, fibonacci_sphere, frame_at, geodesic_distance, lift_raw, preferred_chart,
    project_raw, Frame, SpherePoint,
};

/// Base points used for the first stage of every supremum search.
pub const NORM_SAMPLE_POINTS: usize = 200;
/// Tangent directions per base point in the bundle sampling.
pub const NORM_SAMPLE_DIRECTIONS: usize = 16;
/// Number of best candidates refined by golden-section ascent.
pub const NORM_REFINE_CANDIDATES: usize = 5;
/// Golden-section iterations per coordinate sweep.
pub const NORM_REFINE_ITERATIONS: usize = 30;
const NORM_REFINE_SWEEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Rotation {
        axis: [f64; 3],
        angle: f64,
    },
    /// `z ↦ (az + b)/(cz + d)` in the north chart, with `ad − bc = 1`.
    Mobius {
        a: Complex<f64>,
        b: Complex<f64>,
        c: Complex<f64>,
        d: Complex<f64>,
    },
    /// `(θ, h) ↦ (θ + strength·h, h)` in cylindrical coordinates about `axis`.
    Twist {
        axis: [f64; 3],
        strength: f64,
    },
}

impl Primitive {
    pub const IDENTITY: Primitive = Primitive::Rotation {
        axis: [0.0, 0.0, 1.0],
        angle: 0.0,
    };

    pub fn rotation(axis: [f64; 3], angle: f64) -> Result<Self> {
        Ok(Primitive::Rotation {
            axis: unit_axis(axis)?,
            angle,
        })
    }

    pub fn twist(axis: [f64; 3], strength: f64) -> Result<Self> {
        Ok(Primitive::Twist {
            axis: unit_axis(axis)?,
            strength,
        })
    }

    pub fn mobius(
        a: Complex<f64>,
        b: Complex<f64>,
        c: Complex<f64>,
        d: Complex<f64>,
    ) -> Result<Self> {
        let det = a * d - b * c;
        if (det - Complex::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::Validation(format!(
                "Möbius determinant is {det}, expected 1"
            )));
        }
        Ok(Primitive::Mobius { a, b, c, d })
    }

    /// Re-checks the constructor invariants, for values built by deserialization.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Primitive::Rotation { axis, angle } => {
                Self::rotation(axis, angle)?;
                check_unit(axis)
            }
            Primitive::Twist { axis, strength } => {
                Self::twist(axis, strength)?;
                check_unit(axis)
            }
            Primitive::Mobius { a, b, c, d } => Self::mobius(a, b, c, d).map(|_| ()),
        }
    }

    pub fn is_area_preserving(&self) -> bool {
        !matches!(self, Primitive::Mobius { .. })
    }

    pub fn is_isometry(&self) -> bool {
        matches!(self, Primitive::Rotation { .. })
    }

    pub fn inverse(&self) -> Primitive {
        match *self {
            Primitive::Rotation { axis, angle } => Primitive::Rotation {
                axis,
                angle: -angle,
            },
            Primitive::Twist { axis, strength } => Primitive::Twist {
                axis,
                strength: -strength,
            },
            Primitive::Mobius { a, b, c, d } => Primitive::Mobius {
                a: d,
                b: -b,
                c: -c,
                d: a,
            },
        }
    }

    /// Applies the primitive (or its inverse) to ambient coordinates.
    pub fn apply<T: Scalar>(&self, p: [T; 3], inverse: bool) -> [T; 3] {
        let sign = if inverse { -1.0 } else { 1.0 };
        match *self {
            Primitive::Rotation { axis, angle } => {
                let (s, c) = (sign * angle).sin_cos();
                rodrigues(axis, p, T::from_f64(c), T::from_f64(s))
            }
            Primitive::Twist { axis, strength } => {
                let height = p[0] * axis[0] + p[1] * axis[1] + p[2] * axis[2];
                let turn = height * (sign * strength);
                rodrigues(axis, p, turn.cos(), turn.sin())
            }
            Primitive::Mobius { a, b, c, d } => {
                let m = if inverse {
                    [d, -b, -c, a]
                } else {
                    [a, b, c, d]
                };
                mobius_apply(m, p)
            }
        }
    }

    pub fn apply_point(&self, p: &SpherePoint, inverse: bool) -> SpherePoint {
        SpherePoint::renormalize(self.apply(p.coords(), inverse))
    }
}

fn unit_axis(axis: [f64; 3]) -> Result<[f64; 3]> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if !n.is_finite() || n == 0.0 {
        return Err(Error::Validation(format!("axis {axis:?} must be nonzero")));
    }
    Ok([axis[0] / n, axis[1] / n, axis[2] / n])
}

fn check_unit(axis: [f64; 3]) -> Result<()> {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::Validation(format!(
            "axis {axis:?} is not a unit vector"
        )));
    }
    Ok(())
}

/// Rotation of `p` about the unit `axis` with the given cosine and sine.
fn rodrigues<T: Scalar>(k: [f64; 3], p: [T; 3], c: T, s: T) -> [T; 3] {
    let kp = p[0] * k[0] + p[1] * k[1] + p[2] * k[2];
    let cross = [
        p[2] * k[1] - p[1] * k[2],
        p[0] * k[2] - p[2] * k[0],
        p[1] * k[0] - p[0] * k[1],
    ];
    let one_minus_c = -c + 1.0;
    let mut out = [p[0]; 3];
    for i in 0..3 {
        out[i] = p[i] * c + cross[i] * s + kp * one_minus_c * k[i];
    }
    out
}

type Cx<T> = (T, T);

fn cmul_const<T: Scalar>(c: Complex<f64>, z: Cx<T>) -> Cx<T> {
    (z.0 * c.re - z.1 * c.im, z.0 * c.im + z.1 * c.re)
}

fn mobius_apply<T: Scalar>(m: [Complex<f64>; 4], p: [T; 3]) -> [T; 3] {
    // Homogeneous coordinates of the north-chart value (x + iy)/(1 − z).
    let (z1, z2): (Cx<T>, Cx<T>) = if p[2].value() <= 0.0 {
        ((p[0], p[1]), (-p[2] + 1.0, T::from_f64(0.0)))
    } else {
        ((p[2] + 1.0, T::from_f64(0.0)), (p[0], -p[1]))
    };
    let [a, b, c, d] = m;
    let w1 = add(cmul_const(a, z1), cmul_const(b, z2));
    let w2 = add(cmul_const(c, z1), cmul_const(d, z2));
    // Hopf map back to the sphere.
    let n1 = w1.0 * w1.0 + w1.1 * w1.1;
    let n2 = w2.0 * w2.0 + w2.1 * w2.1;
    let re = w1.0 * w2.0 + w1.1 * w2.1;
    let im = w1.1 * w2.0 - w1.0 * w2.1;
    let inv = (n1 + n2).recip();
    [re * inv * 2.0, im * inv * 2.0, (n1 - n2) * inv]
}

fn add<T: Scalar>(a: Cx<T>, b: Cx<T>) -> Cx<T> {
    (a.0 + b.0, a.1 + b.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub index: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        Self { index, inverse }
    }

    pub fn exponent(&self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inverted(&self) -> Self {
        Self {
            index: self.index,
            inverse: !self.inverse,
        }
    }
}

#[derive(Clone)]
pub struct Diffeomorphism {
    table: Arc<Vec<Primitive>>,
    letters: Vec<Letter>,
}

impl fmt::Debug for Diffeomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diffeomorphism{:?}", self.letters)
    }
}

impl PartialEq for Diffeomorphism {
    /// Letter-list equality; no algebraic simplification.
    fn eq(&self, other: &Self) -> bool {
        self.letters == other.letters && same_table(&self.table, &other.table)
    }
}

fn same_table(a: &Arc<Vec<Primitive>>, b: &Arc<Vec<Primitive>>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl Diffeomorphism {
    pub fn identity(table: Arc<Vec<Primitive>>) -> Self {
        Self {
            table,
            letters: Vec::new(),
        }
    }

    pub fn from_letters(table: Arc<Vec<Primitive>>, letters: Vec<Letter>) -> Result<Self> {
        if let Some(bad) = letters.iter().find(|l| l.index >= table.len()) {
            return Err(Error::Validation(format!(
                "letter index {} outside table of {} primitives",
                bad.index,
                table.len()
            )));
        }
        Ok(Self { table, letters })
    }

    /// Single-primitive word.
    pub fn primitive(p: Primitive) -> Self {
        Self {
            table: Arc::new(vec![p]),
            letters: vec![Letter::new(0, false)],
        }
    }

    pub fn table(&self) -> &Arc<Vec<Primitive>> {
        &self.table
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// `self ∘ other`. Both words must share the primitive table.
    pub fn compose(&self, other: &Diffeomorphism) -> Diffeomorphism {
        assert!(
            same_table(&self.table, &other.table),
            "composing words over different primitive tables"
        );
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Diffeomorphism {
            table: self.table.clone(),
            letters,
        }
    }

    pub fn inverse(&self) -> Diffeomorphism {
        Diffeomorphism {
            table: self.table.clone(),
            letters: self.letters.iter().rev().map(Letter::inverted).collect(),
        }
    }

    /// `self^k` for `k ≥ 0` as a repeated letter list.
    pub fn power(&self, k: usize) -> Diffeomorphism {
        let mut letters = Vec::with_capacity(self.letters.len() * k);
        for _ in 0..k {
            letters.extend_from_slice(&self.letters);
        }
        Diffeomorphism {
            table: self.table.clone(),
            letters,
        }
    }

    pub fn is_area_preserving(&self) -> bool {
        self.letters
            .iter()
            .all(|l| self.table[l.index].is_area_preserving())
    }

    pub fn is_isometry(&self) -> bool {
        self.letters
            .iter()
            .all(|l| self.table[l.index].is_isometry())
    }

    /// Raw evaluation through all letters (last letter first).
    pub fn apply<T: Scalar>(&self, p: [T; 3]) -> [T; 3] {
        self.letters
            .iter()
            .rev()
            .fold(p, |acc, l| self.table[l.index].apply(acc, l.inverse))
    }

    pub fn evaluate(&self, p: &SpherePoint) -> SpherePoint {
        SpherePoint::renormalize(self.apply(p.coords()))
    }

    /// Frame-relative Jacobian, from `frame_at(p)` to `frame_at(f(p))`.
    pub fn jacobian(&self, p: &SpherePoint) -> Matrix2<f64> {
        self.image_and_jacobian(p).1
    }

    pub fn image_and_jacobian(&self, p: &SpherePoint) -> (SpherePoint, Matrix2<f64>) {
        let frame = frame_at(p);
        let out = self.apply(local_chart_jet1(&frame));
        let image = SpherePoint::renormalize([out[0].v, out[1].v, out[2].v]);
        let target = frame_at(&image);
        (image, frame_jacobian(&out, &target))
    }

    /// Second-derivative tensor `∂²y_i/∂x_j∂x_k` between gnomonic charts
    /// centred at `p` and `f(p)` (aligned with their canonical frames).
    pub fn second_derivatives(&self, p: &SpherePoint) -> [[[f64; 2]; 2]; 2] {
        let frame = frame_at(p);
        let out = self.apply(local_chart_jet2(&frame));
        let image = SpherePoint::renormalize([out[0].v, out[1].v, out[2].v]);
        let target = frame_at(&image);
        let q = image.coords();
        let radial = out[0] * q[0] + out[1] * q[1] + out[2] * q[2];
        let inv = radial.recip();
        let mut tensor = [[[0.0; 2]; 2]; 2];
        for (i, e) in [target.e1, target.e2].iter().enumerate() {
            let coord = (out[0] * e[0] + out[1] * e[1] + out[2] * e[2]) * inv;
            tensor[i] = coord.hessian();
        }
        tensor
    }

    /// Frobenius norm of [`Self::second_derivatives`].
    pub fn second_derivative_norm(&self, p: &SpherePoint) -> f64 {
        let t = self.second_derivatives(p);
        t.iter()
            .flat_map(|m| m.iter().flat_map(|r| r.iter()))
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn describe(&self, names: &[String]) -> String {
        if self.letters.is_empty() {
            return "id".to_string();
        }
        self.letters
            .iter()
            .map(|l| {
                let name = names
                    .get(l.index)
                    .cloned()
                    .unwrap_or_else(|| format!("p{}", l.index));
                if l.inverse {
                    format!("{name}^-1")
                } else {
                    name
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Point-and-Jacobian step for a single letter, used by the chained walkers.
pub fn letter_step(
    primitive: &Primitive,
    inverse: bool,
    p: &SpherePoint,
) -> (SpherePoint, Matrix2<f64>) {
    let frame = frame_at(p);
    let out = primitive.apply(local_chart_jet1(&frame), inverse);
    let image = SpherePoint::renormalize([out[0].v, out[1].v, out[2].v]);
    let target = frame_at(&image);
    (image, frame_jacobian(&out, &target))
}

/// `normalize(p + s·e1 + t·e2)` as jets in `(s, t)` at the origin.
fn local_chart_jet1(frame: &Frame) -> [Jet1; 3] {
    let s = Jet1::variable(0.0, 0);
    let t = Jet1::variable(0.0, 1);
    normalize_local(frame, s, t)
}

fn local_chart_jet2(frame: &Frame) -> [Jet2; 3] {
    let s = Jet2::variable(0.0, 0);
    let t = Jet2::variable(0.0, 1);
    normalize_local(frame, s, t)
}

fn normalize_local<T: Scalar>(frame: &Frame, s: T, t: T) -> [T; 3] {
    let p = frame.base.coords();
    let q: [T; 3] = std::array::from_fn(|i| s * frame.e1[i] + t * frame.e2[i] + p[i]);
    let inv = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt().recip();
    [q[0] * inv, q[1] * inv, q[2] * inv]
}

fn frame_jacobian(out: &[Jet1; 3], target: &Frame) -> Matrix2<f64> {
    let col = |j: usize| [out[0].d[j], out[1].d[j], out[2].d[j]];
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let (c0, c1) = (col(0), col(1));
    Matrix2::new(
        dot(&target.e1, &c0),
        dot(&target.e1, &c1),
        dot(&target.e2, &c0),
        dot(&target.e2, &c1),
    )
}

/// Singular values `(σ1, σ2)` of a 2×2 matrix, `σ1 ≥ σ2 ≥ 0`.
pub fn singular_values(m: &Matrix2<f64>) -> (f64, f64) {
    // Closed form: σ1,2 = (√((a+d)²+(c−b)²) ± √((a−d)²+(b+c)²)) / 2.
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let p = (a + d).hypot(c - b);
    let q = (a - d).hypot(b + c);
    let s1 = 0.5 * (p + q);
    let s2 = 0.5 * (p - q).abs();
    (s1, s2)
}

/// The standard sample set: 200 Fibonacci points plus the six axis points.
pub fn standard_sample_set() -> Vec<SpherePoint> {
    let mut pts = fibonacci_sphere(NORM_SAMPLE_POINTS);
    pts.extend(axis_points());
    pts
}

/// Two-stage supremum search over the sphere for a continuous objective.
///
/// Stage one evaluates `objective` at the Fibonacci base points; stage two
/// refines the best candidates by coordinate-wise golden-section ascent in
/// the stereographic chart containing each candidate.
pub fn sup_over_sphere<F>(objective: F, base_points: usize) -> (f64, SpherePoint)
where
    F: Fn(&SpherePoint) -> f64,
{
    let samples = fibonacci_sphere(base_points);
    let mut scored: Vec<(f64, usize)> = samples
        .iter()
        .enumerate()
        .map(|(i, p)| (objective(p), i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let spacing = (4.0 * std::f64::consts::PI / base_points as f64).sqrt();
    let mut best = (scored[0].0, samples[scored[0].1]);
    for &(value, idx) in scored.iter().take(NORM_REFINE_CANDIDATES) {
        let (v, p) = refine_candidate(&objective, samples[idx], value, spacing);
        if v > best.0 {
            best = (v, p);
        }
    }
    best
}

fn refine_candidate<F>(
    objective: &F,
    start: SpherePoint,
    start_value: f64,
    spacing: f64,
) -> (f64, SpherePoint)
where
    F: Fn(&SpherePoint) -> f64,
{
    let chart = preferred_chart(&start);
    let c = project_raw(start.coords(), chart);
    let mut uv = [c[0], c[1]];
    let at = |w: [f64; 2]| SpherePoint::renormalize(lift_raw(w, chart));
    let mut best = (start_value, start);
    let mut half_width = spacing * (1.0 + uv[0] * uv[0] + uv[1] * uv[1]) / 2.0;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..NORM_REFINE_SWEEPS {
        for axis in 0..2 {
            let eval = |x: f64| {
                let mut w = uv;
                w[axis] = x;
                let p = at(w);
                (objective(&p), p)
            };
            let (mut lo, mut hi) = (uv[axis] - half_width, uv[axis] + half_width);
            let mut x1 = hi - inv_phi * (hi - lo);
            let mut x2 = lo + inv_phi * (hi - lo);
            let mut f1 = eval(x1);
            let mut f2 = eval(x2);
            for _ in 0..NORM_REFINE_ITERATIONS {
                if f1.0 >= f2.0 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = eval(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = eval(x2);
                }
            }
            let cand = if f1.0 >= f2.0 { (x1, f1) } else { (x2, f2) };
            if cand.1 .0 > best.0 {
                best = cand.1;
                uv[axis] = cand.0;
            }
        }
        half_width *= 0.25;
    }
    best
}

/// `sup_{v ∈ UTM} |D f(v)|`, the largest first singular value of the Jacobian.
pub fn operator_norm_plus(f: &Diffeomorphism) -> f64 {
    if f.is_empty() {
        return 1.0;
    }
    sup_over_sphere(|p| singular_values(&f.jacobian(p)).0, NORM_SAMPLE_POINTS).0
}

/// `max(‖Df‖⁺, ‖Df⁻¹‖⁺)`: the largest expansion or contraction of `f`.
pub fn operator_norm_d(f: &Diffeomorphism) -> f64 {
    let forward = operator_norm_plus(f);
    let backward = operator_norm_plus(&f.inverse());
    forward.max(backward)
}

/// `C^r` norm for `r ∈ {1, 2}` in orthonormal frames / gnomonic charts.
pub fn cr_norm(f: &Diffeomorphism, r: u32) -> Result<f64> {
    match r {
        1 => Ok(operator_norm_d(f).max(1.0)),
        2 => {
            let first = operator_norm_d(f).max(1.0);
            if f.is_empty() {
                return Ok(first);
            }
            let second = sup_over_sphere(|p| f.second_derivative_norm(p), NORM_SAMPLE_POINTS).0;
            Ok(first.max(second))
        }
        other => Err(Error::UnsupportedOrder(other)),
    }
}

/// `max_x d(f(x), g(x))` over [`standard_sample_set`].
pub fn c0_distance(f: &Diffeomorphism, g: &Diffeomorphism) -> f64 {
    standard_sample_set()
        .iter()
        .map(|p| geodesic_distance(&f.evaluate(p), &g.evaluate(p)))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn x_axis() -> [f64; 3] {
        [1.0, 0.0, 0.0]
    }

    fn z_axis() -> [f64; 3] {
        [0.0, 0.0, 1.0]
    }

    fn random_point(rng: &mut ChaCha8Rng) -> SpherePoint {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n > 0.1 && n < 1.0 {
                return SpherePoint::normalized(v).unwrap();
            }
        }
    }

    fn mixed_table() -> Arc<Vec<Primitive>> {
        Arc::new(vec![
            Primitive::rotation([1.0, 2.0, 0.5], 0.7).unwrap(),
            Primitive::twist(z_axis(), 2.0).unwrap(),
            Primitive::twist([0.3, -1.0, 0.2], -1.3).unwrap(),
            unimodular_mobius(
                Complex::new(1.5, 0.2),
                Complex::new(0.3, 0.2),
                Complex::new(0.1, -0.4),
            ),
        ])
    }

    fn unimodular_mobius(a: Complex<f64>, b: Complex<f64>, c: Complex<f64>) -> Primitive {
        let d = (Complex::new(1.0, 0.0) + b * c) / a;
        Primitive::mobius(a, b, c, d).unwrap()
    }

    fn random_word(
        rng: &mut ChaCha8Rng,
        table: &Arc<Vec<Primitive>>,
        max_len: usize,
        kinds: usize,
    ) -> Diffeomorphism {
        let len = rng.gen_range(1..=max_len);
        let letters = (0..len)
            .map(|_| Letter::new(rng.gen_range(0..kinds), rng.gen_bool(0.5)))
            .collect();
        Diffeomorphism::from_letters(table.clone(), letters).unwrap()
    }

    #[test]
    fn rotation_examples() {
        let r = Diffeomorphism::primitive(Primitive::rotation(z_axis(), FRAC_PI_2).unwrap());
        let image = r.evaluate(&SpherePoint::new([1.0, 0.0, 0.0]).unwrap());
        assert!((image.x()).abs() < 1e-15 && (image.y() - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r4 = r.power(4);
        for _ in 0..100 {
            let p = random_point(&mut rng);
            let q = r4.evaluate(&p);
            for k in 0..3 {
                assert!((p.coords()[k] - q.coords()[k]).abs() < 1e-12);
            }
            let (s1, s2) = singular_values(&r.jacobian(&p));
            assert!((s1 - 1.0).abs() < 1e-12 && (s2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn twist_fixes_its_equator() {
        let t = Diffeomorphism::primitive(Primitive::twist(z_axis(), 1.7).unwrap());
        for k in 0..16 {
            let a = k as f64 * 0.4;
            let p = SpherePoint::new([a.cos(), a.sin(), 0.0]).unwrap();
            assert!(geodesic_distance(&t.evaluate(&p), &p) < 1e-15);
        }
    }

    #[test]
    fn twist_jacobian_is_latitude_shear() {
        let t = Diffeomorphism::primitive(Primitive::twist(z_axis(), 2.0).unwrap());
        for z in [-0.7, -0.2, 0.0, 0.3, 0.8] {
            let r: f64 = (1.0 - z * z).sqrt();
            let p = SpherePoint::new([r * 0.6, r * 0.8, z]).unwrap();
            let j = t.jacobian(&p);
            let expected = Matrix2::new(1.0, 2.0 * (1.0 - z * z), 0.0, 1.0);
            assert!((j - expected).norm() < 1e-12, "{j} vs {expected}");
        }
        let (s1, s2) = singular_values(&t.jacobian(&SpherePoint::new([1.0, 0.0, 0.0]).unwrap()));
        assert!((s1 - (1.0 + SQRT_2)).abs() < 1e-12);
        assert!((s2 - (SQRT_2 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let table = mixed_table();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = 1e-5;
        for _ in 0..100 {
            let f = random_word(&mut rng, &table, 8, table.len());
            let p = random_point(&mut rng);
            let (image, j) = f.image_and_jacobian(&p);
            let frame = frame_at(&p);
            let target = frame_at(&image);
            let mut fd = Matrix2::zeros();
            for (col, e) in [frame.e1, frame.e2].iter().enumerate() {
                let shift = |sign: f64| {
                    let v: [f64; 3] = std::array::from_fn(|i| p.coords()[i] + sign * h * e[i]);
                    f.evaluate(&SpherePoint::normalized(v).unwrap()).coords()
                };
                let (plus, minus) = (shift(1.0), shift(-1.0));
                let diff: [f64; 3] = std::array::from_fn(|i| (plus[i] - minus[i]) / (2.0 * h));
                for (row, t) in [target.e1, target.e2].iter().enumerate() {
                    fd[(row, col)] = t[0] * diff[0] + t[1] * diff[1] + t[2] * diff[2];
                }
            }
            let rel = (fd - j).norm() / j.norm().max(1.0);
            assert!(rel < 1e-5, "relative error {rel} for {f:?}");
        }
    }

    #[test]
    fn area_preserving_words_have_unit_determinant() {
        let table = mixed_table();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let f = random_word(&mut rng, &table, 12, 3);
            for _ in 0..20 {
                let det = f.jacobian(&random_point(&mut rng)).determinant();
                assert!((det - 1.0).abs() < 1e-10, "{det}");
            }
        }
    }

    #[test]
    fn determinant_is_multiplicative_for_mobius_words() {
        let table = mixed_table();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let f = random_word(&mut rng, &table, 4, 4);
            let g = random_word(&mut rng, &table, 4, 4);
            let p = random_point(&mut rng);
            let (gp, jg) = g.image_and_jacobian(&p);
            let jf = f.jacobian(&gp);
            let jfg = f.compose(&g).jacobian(&p);
            let rel = (jfg.determinant() - jf.determinant() * jg.determinant()).abs()
                / jfg.determinant().abs();
            assert!(rel < 1e-10);
        }
    }

    #[test]
    fn mobius_evaluates_at_both_poles() {
        let m = Diffeomorphism::primitive(
            Primitive::mobius(
                Complex::new(2.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.5, 0.0),
            )
            .unwrap(),
        );
        assert_eq!(m.evaluate(&SpherePoint::NORTH), SpherePoint::NORTH);
        assert_eq!(m.evaluate(&SpherePoint::SOUTH), SpherePoint::SOUTH);
        // z = 1 maps to z = 4: the point with north-chart value 4.
        let image = m.evaluate(&SpherePoint::new([1.0, 0.0, 0.0]).unwrap());
        let expected = [8.0 / 17.0, 0.0, 15.0 / 17.0];
        for (got, want) in image.coords().iter().zip(expected) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(Primitive::mobius(
            Complex::new(2.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0)
        )
        .is_err());
    }

    #[test]
    fn inverse_word_undoes_word() {
        let table = mixed_table();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples = standard_sample_set();
        for _ in 0..20 {
            let f = random_word(&mut rng, &table, 10, 4);
            let id = f.compose(&f.inverse());
            for p in &samples {
                assert!(geodesic_distance(&id.evaluate(p), p) < 1e-9);
            }
            let g = random_word(&mut rng, &table, 5, 4);
            assert_eq!(f.compose(&g).inverse(), g.inverse().compose(&f.inverse()));
        }
    }

    #[test]
    fn operator_norm_closed_forms() {
        let r = Diffeomorphism::primitive(Primitive::rotation([0.2, 0.4, 1.0], 1.1).unwrap());
        assert!((operator_norm_d(&r) - 1.0).abs() < 1e-12);
        let t = Diffeomorphism::primitive(Primitive::twist(z_axis(), 2.0).unwrap());
        assert!((operator_norm_d(&t) - (1.0 + SQRT_2)).abs() < 1e-6);
        let m = Diffeomorphism::primitive(
            Primitive::mobius(
                Complex::new(2.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.0, 0.0),
                Complex::new(0.5, 0.0),
            )
            .unwrap(),
        );
        let n = operator_norm_d(&m);
        assert!((n - 4.0).abs() < 1e-6, "{n}");
        assert_eq!(operator_norm_d(&t), operator_norm_d(&t.inverse()));
    }

    #[test]
    fn cr_norms() {
        let table = Arc::new(vec![Primitive::twist(z_axis(), 0.8).unwrap()]);
        let id = Diffeomorphism::identity(table.clone());
        assert_eq!(cr_norm(&id, 1).unwrap(), 1.0);
        assert!(matches!(cr_norm(&id, 3), Err(Error::UnsupportedOrder(3))));
        // Shear powers: ‖T^n‖₁ = (na + √(n²a² + 4))/2 at the equator.
        let t = Diffeomorphism::from_letters(table, vec![Letter::new(0, false)]).unwrap();
        for n in [1usize, 2, 4, 8] {
            let c = 0.8 * n as f64;
            let expected = (c + (c * c + 4.0).sqrt()) / 2.0;
            let got = cr_norm(&t.power(n), 1).unwrap();
            assert!(
                (got - expected).abs() < 1e-6 * expected,
                "{n}: {got} vs {expected}"
            );
        }
        // Rotations have vanishing second derivatives between gnomonic charts.
        let mut worst: f64 = 0.0;
        for k in 0..12 {
            let r = Diffeomorphism::primitive(
                Primitive::rotation([0.3, -0.5, 0.8], k as f64 * PI / 6.0).unwrap(),
            );
            worst = worst.max(cr_norm(&r, 2).unwrap());
        }
        assert!(worst < 1.0 + 1e-9, "{worst}");
    }

    #[test]
    fn c0_distance_examples() {
        let r = Diffeomorphism::primitive(Primitive::rotation(z_axis(), FRAC_PI_2).unwrap());
        let id = Diffeomorphism::identity(r.table().clone());
        assert_eq!(c0_distance(&r, &r), 0.0);
        assert!((c0_distance(&r, &id) - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn rotation_and_twist_inverses() {
        let p = SpherePoint::normalized([0.3, 0.4, 0.5]).unwrap();
        for prim in [
            Primitive::rotation(x_axis(), 0.9).unwrap(),
            Primitive::twist([1.0, 1.0, 0.0], 1.4).unwrap(),
        ] {
            let q = prim.apply_point(&prim.apply_point(&p, false), true);
            assert!(geodesic_distance(&p, &q) < 1e-14);
            let q = prim
                .inverse()
                .apply_point(&prim.apply_point(&p, false), false);
            assert!(geodesic_distance(&p, &q) < 1e-14);
        }
    }
}
