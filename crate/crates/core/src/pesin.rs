//! Truncated averaged metrics `m_N = Σ_{|g| ≤ N} w(|g|)·g*m` and the
//! dilatation of maps measured against them.
//!
//! Matrices are stored in `frame_at(x)` as `[m11, m12, m22]`. The round
//! metric is the identity in these frames, so the pullback of the round metric
//! by `g` at `x` is `JᵀJ` with `J = D_x g`.

use nalgebra::{Matrix2, Matrix3, Matrix3x2, SMatrix, SVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::diffeo::{letter_step, singular_values, sup_over_sphere, Diffeomorphism};
use crate::error::{Error, Result};
use crate::sphere::{
    fibonacci_sphere, frame_at, geodesic_distance, transport_rotation, SpherePoint,
};
use crate::words::{enumerate_ball, least_squares_slope, GeneratorSet, WordBall};

pub const METRIC_SAMPLE_COUNT: usize = 2000;
pub const LIPSCHITZ_DIRECTIONS: usize = 16;
pub const LIPSCHITZ_TOLERANCE: f64 = 1e-9;
/// Nearest samples used when interpolating the field at an arbitrary point.
pub const INTERPOLATION_NEIGHBORS: usize = 12;
/// Terms of the local quadratic fit `1, u, v, u², uv, v²`.
const LOCAL_FIT_TERMS: usize = 6;
/// Interpolation radius in units of the mean sample spacing.
pub const INTERPOLATION_RADIUS_FACTOR: f64 = 3.0;
/// Base points of the sup search for round-metric dilatation.
pub const ROUND_DILATATION_SAMPLES: usize = 2000;

/// Symmetric 2×2 matrix as `[m11, m12, m22]`.
pub type Sym2 = [f64; 3];

fn sym_to_matrix(m: &Sym2) -> Matrix2<f64> {
    Matrix2::new(m[0], m[1], m[1], m[2])
}

fn pullback_round(j: &Matrix2<f64>) -> Sym2 {
    let (a, b, c, d) = (j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
    [a * a + c * c, a * b + c * d, b * b + d * d]
}

fn quad(m: &Sym2, v: [f64; 2]) -> f64 {
    m[0] * v[0] * v[0] + 2.0 * m[1] * v[0] * v[1] + m[2] * v[1] * v[1]
}

fn max_eigenvalue(m: &Sym2) -> f64 {
    let mean = 0.5 * (m[0] + m[2]);
    let r = (0.5 * (m[0] - m[2])).hypot(m[1]);
    mean + r
}

fn min_eigenvalue(m: &Sym2) -> f64 {
    let mean = 0.5 * (m[0] + m[2]);
    let r = (0.5 * (m[0] - m[2])).hypot(m[1]);
    mean - r
}

/// Shell weights `w(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `e^{−εk}`, the averaging weights.
    Decaying,
    /// `e^{+εk}`, a deliberately wrong control.
    Growing,
}

impl Weighting {
    pub fn weight(self, epsilon: f64, k: usize) -> f64 {
        match self {
            Self::Decaying => (-epsilon * k as f64).exp(),
            Self::Growing => (epsilon * k as f64).exp(),
        }
    }
}

/// Unweighted per-shell sums `Σ_{|g| = k} (g*m)_x` at each point.
#[derive(Debug, Clone)]
pub struct ShellSums {
    pub points: Vec<SpherePoint>,
    /// `sums[i][k]` for point `i` and word length `k`.
    pub sums: Vec<Vec<Sym2>>,
    /// Number of elements of each word length.
    pub shell_sizes: Vec<usize>,
    /// `max_{x, |g| = k} ‖D_x g‖²` over the points.
    pub max_pullback: Vec<f64>,
}

impl ShellSums {
    pub fn radius(&self) -> usize {
        self.shell_sizes.len() - 1
    }

    /// `m_N` at point `i`.
    pub fn metric(&self, i: usize, epsilon: f64, n: usize, weighting: Weighting) -> Sym2 {
        let mut acc = [0.0; 3];
        for (k, s) in self.sums[i].iter().enumerate().take(n + 1) {
            let w = weighting.weight(epsilon, k);
            acc[0] += w * s[0];
            acc[1] += w * s[1];
            acc[2] += w * s[2];
        }
        acc
    }
}

/// Walks `ball` at each point, accumulating shells up to `radius`.
pub fn shell_sums(ball: &WordBall, points: &[SpherePoint], radius: usize) -> Result<ShellSums> {
    if ball.is_truncated() {
        return Err(Error::Truncated {
            cap: ball.config().element_cap,
        });
    }
    if radius > ball.radius() {
        return Err(Error::Validation(format!(
            "metric radius {radius} exceeds ball radius {}",
            ball.radius()
        )));
    }
    let limit = ball.counts()[radius];
    let per_point: Vec<(Vec<Sym2>, Vec<f64>)> = points
        .par_iter()
        .map(|x| {
            let mut sums = vec![[0.0; 3]; radius + 1];
            let mut peak = vec![0.0f64; radius + 1];
            for (i, (_, j)) in ball.images_and_jacobians(x).iter().take(limit).enumerate() {
                let k = ball.word_length(i);
                let m = pullback_round(j);
                sums[k][0] += m[0];
                sums[k][1] += m[1];
                sums[k][2] += m[2];
                peak[k] = peak[k].max(max_eigenvalue(&m));
            }
            (sums, peak)
        })
        .collect();
    let shell_sizes = (0..=radius).map(|k| ball.shell(k).len()).collect();
    let mut max_pullback = vec![0.0f64; radius + 1];
    for (_, peak) in &per_point {
        for (m, p) in max_pullback.iter_mut().zip(peak) {
            *m = m.max(*p);
        }
    }
    Ok(ShellSums {
        points: points.to_vec(),
        sums: per_point.into_iter().map(|(s, _)| s).collect(),
        shell_sizes,
        max_pullback,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricField {
    pub epsilon: f64,
    pub truncation: usize,
    pub weighting: Weighting,
    pub provenance: String,
    #[serde(skip)]
    pub points: Vec<SpherePoint>,
    pub matrices: Vec<Sym2>,
}

impl MetricField {
    pub fn from_shells(
        shells: &ShellSums,
        epsilon: f64,
        n: usize,
        weighting: Weighting,
        provenance: String,
    ) -> Self {
        Self {
            epsilon,
            truncation: n,
            weighting,
            provenance,
            points: shells.points.clone(),
            matrices: (0..shells.points.len())
                .map(|i| shells.metric(i, epsilon, n, weighting))
                .collect(),
        }
    }

    /// The round metric on `points`.
    pub fn round(points: Vec<SpherePoint>) -> Self {
        let matrices = vec![[1.0, 0.0, 1.0]; points.len()];
        Self {
            epsilon: 0.0,
            truncation: 0,
            weighting: Weighting::Decaying,
            provenance: "round".into(),
            points,
            matrices,
        }
    }

    pub fn is_spd(&self) -> bool {
        self.matrices
            .iter()
            .all(|m| m[0] > 0.0 && min_eigenvalue(m) > 0.0)
    }

    pub fn mean_spacing(&self) -> f64 {
        (4.0 * std::f64::consts::PI / self.points.len() as f64).sqrt()
    }

    /// Field value at an arbitrary point. Sample matrices near `y` are
    /// carried along the minimal rotation onto `y`, then fitted by a quadratic
    /// polynomial in the tangent coordinates of their base points; the fit's
    /// value at `y` is returned. Falls back to inverse-distance weighting of
    /// the nearest three when the fit is ill-posed or not positive definite.
    pub fn interpolate(&self, y: &SpherePoint) -> Result<Sym2> {
        let mut nearest: Vec<(f64, usize)> = Vec::with_capacity(INTERPOLATION_NEIGHBORS + 1);
        for (i, p) in self.points.iter().enumerate() {
            let d = geodesic_distance(p, y);
            if nearest.len() < INTERPOLATION_NEIGHBORS || d < nearest[nearest.len() - 1].0 {
                let pos = nearest.partition_point(|e| e.0 <= d);
                nearest.insert(pos, (d, i));
                nearest.truncate(INTERPOLATION_NEIGHBORS);
            }
        }
        let radius = INTERPOLATION_RADIUS_FACTOR * self.mean_spacing();
        if nearest[0].0 > radius {
            return Err(Error::Density {
                distance: nearest[0].0,
                radius,
            });
        }
        let target = frame_basis(y);
        if nearest[0].0 == 0.0 {
            return Ok(self.transported(nearest[0].1, y, &target));
        }
        let near: Vec<(f64, usize, Sym2)> = nearest
            .iter()
            .filter(|e| e.0 <= radius)
            .map(|&(d, i)| (d, i, self.transported(i, y, &target)))
            .collect();
        if let Some(m) = self.local_fit(&near, &target) {
            return Ok(m);
        }
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for (d, _, m) in near.iter().take(3) {
            let w = 1.0 / d;
            acc[0] += w * m[0];
            acc[1] += w * m[1];
            acc[2] += w * m[2];
            total += w;
        }
        Ok([acc[0] / total, acc[1] / total, acc[2] / total])
    }

    fn local_fit(&self, near: &[(f64, usize, Sym2)], target: &Matrix3x2<f64>) -> Option<Sym2> {
        if near.len() < 2 * LOCAL_FIT_TERMS {
            return None;
        }
        let mut ata = SMatrix::<f64, LOCAL_FIT_TERMS, LOCAL_FIT_TERMS>::zeros();
        let mut atb = SMatrix::<f64, LOCAL_FIT_TERMS, 3>::zeros();
        for (_, i, m) in near {
            let uv = target.transpose() * self.points[*i].vector();
            let (u, v) = (uv[0], uv[1]);
            let r = SVector::<f64, LOCAL_FIT_TERMS>::from([1.0, u, v, u * u, u * v, v * v]);
            ata += r * r.transpose();
            atb += r * nalgebra::RowVector3::new(m[0], m[1], m[2]);
        }
        let sol = ata.lu().solve(&atb)?;
        let fit = [sol[(0, 0)], sol[(0, 1)], sol[(0, 2)]];
        (fit[0] > 0.0 && min_eigenvalue(&fit) > 0.0).then_some(fit)
    }

    fn transported(&self, i: usize, y: &SpherePoint, target: &Matrix3x2<f64>) -> Sym2 {
        let source = frame_basis(&self.points[i]);
        let r: Matrix3<f64> = transport_rotation(&self.points[i], y);
        let carry = target.transpose() * r * source;
        let m = carry * sym_to_matrix(&self.matrices[i]) * carry.transpose();
        [m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]]
    }
}

fn frame_basis(p: &SpherePoint) -> Matrix3x2<f64> {
    let f = frame_at(p);
    Matrix3x2::new(f.e1[0], f.e2[0], f.e1[1], f.e2[1], f.e1[2], f.e2[2])
}

/// `m_N` on the fixed 2000-point sample set.
pub fn build_averaged_metric(
    generators: &GeneratorSet,
    epsilon: f64,
    n: usize,
) -> Result<MetricField> {
    check_epsilon(epsilon)?;
    let ball = enumerate_ball(generators, n);
    let shells = shell_sums(&ball, &fibonacci_sphere(METRIC_SAMPLE_COUNT), n)?;
    Ok(MetricField::from_shells(
        &shells,
        epsilon,
        n,
        Weighting::Decaying,
        generators.names().join(","),
    ))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Validation("epsilon must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub epsilon: f64,
    /// `‖m_N − m_{N−1}‖∞` for `N = 1..=N_max`.
    pub increments: Vec<f64>,
    /// Fitted log-slope over the top half; absent once the increments vanish.
    pub slope: Option<f64>,
    /// Slope of `|shell_N|·w(N)·max‖D g‖²` over the same range.
    pub predicted_slope: Option<f64>,
}

pub fn tail_from_shells(shells: &ShellSums, epsilon: f64, weighting: Weighting) -> TailReport {
    let n_max = shells.radius();
    let increments: Vec<f64> = (1..=n_max)
        .map(|k| {
            let w = weighting.weight(epsilon, k);
            shells
                .sums
                .iter()
                .map(|s| w * max_eigenvalue(&s[k]))
                .fold(0.0, f64::max)
        })
        .collect();
    let predicted: Vec<f64> = (1..=n_max)
        .map(|k| {
            shells.shell_sizes[k] as f64 * weighting.weight(epsilon, k) * shells.max_pullback[k]
        })
        .collect();
    let lo = n_max.div_ceil(2).max(1);
    let fit = |values: &[f64]| -> Option<f64> {
        let range = &values[lo - 1..];
        if range.len() < 2 || range.iter().any(|v| *v <= 0.0) {
            return None;
        }
        let xs: Vec<f64> = (lo..=n_max).map(|k| k as f64).collect();
        let ys: Vec<f64> = range.iter().map(|v| v.ln()).collect();
        Some(least_squares_slope(&xs, &ys))
    };
    TailReport {
        epsilon,
        slope: fit(&increments),
        predicted_slope: fit(&predicted),
        increments,
    }
}

pub fn tail_report(generators: &GeneratorSet, epsilon: f64, n_max: usize) -> Result<TailReport> {
    check_epsilon(epsilon)?;
    let ball = enumerate_ball(generators, n_max);
    let shells = shell_sums(&ball, &fibonacci_sphere(METRIC_SAMPLE_COUNT), n_max)?;
    Ok(tail_from_shells(&shells, epsilon, Weighting::Decaying))
}

#[derive(Debug, Clone, Serialize)]
pub struct LipschitzReport {
    pub epsilon: f64,
    pub truncation: usize,
    pub weighting: Weighting,
    /// `max (s*m_N)(v,v) / (e^ε·m_{N+1}(v,v)) − 1`, clamped at 0.
    pub upper_violation: f64,
    /// `max 1 − (s*m_N)(v,v) / (e^{−ε}·m_{N−1}(v,v))`, clamped at 0.
    pub lower_violation: f64,
    pub tail_slope: Option<f64>,
    /// Exponential rate `b` of the fit `log inc_k ≈ a + b·k + c·log k`.
    pub tail_rate: Option<f64>,
    pub tail_converges: bool,
    pub passed: bool,
}

pub fn lipschitz_check(
    generators: &GeneratorSet,
    epsilon: f64,
    n: usize,
) -> Result<LipschitzReport> {
    lipschitz_check_with(
        generators,
        epsilon,
        n,
        Weighting::Decaying,
        METRIC_SAMPLE_COUNT,
    )
}

/// Checks `e^{−ε}·m_{N−1} ≤ s*m_N ≤ e^ε·m_{N+1}` for every letter `s`,
/// sample point and test direction, plus convergence of the series tail.
pub fn lipschitz_check_with(
    generators: &GeneratorSet,
    epsilon: f64,
    n: usize,
    weighting: Weighting,
    samples: usize,
) -> Result<LipschitzReport> {
    check_epsilon(epsilon)?;
    if !generators.is_symmetric() {
        return Err(Error::NotSymmetric("the Lipschitz lower bound"));
    }
    if n < 1 {
        return Err(Error::Validation("Lipschitz check needs N ≥ 1".into()));
    }
    let ball = enumerate_ball(generators, n + 1);
    let points = fibonacci_sphere(samples);
    let shells = shell_sums(&ball, &points, n + 1)?;
    let letters = generators.letters();
    let lift = epsilon.exp();
    let violations: Vec<(f64, f64)> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let upper_m = shells.metric(i, epsilon, n + 1, weighting);
            let lower_m = shells.metric(i, epsilon, n - 1, weighting);
            let mut worst = (0.0f64, 0.0f64);
            for letter in &letters {
                let (y, j) = letter_step(generators.primitive(*letter), letter.inverse, x);
                let at_y = shell_sums_serial(&ball, &y, n);
                let m_y = weighted(&at_y, epsilon, n, weighting);
                for d in 0..LIPSCHITZ_DIRECTIONS {
                    let t = std::f64::consts::PI * d as f64 / LIPSCHITZ_DIRECTIONS as f64;
                    let v = [t.cos(), t.sin()];
                    let jv = j * nalgebra::Vector2::from(v);
                    let lhs = quad(&m_y, [jv[0], jv[1]]);
                    worst.0 = worst.0.max(lhs / (lift * quad(&upper_m, v)) - 1.0);
                    worst.1 = worst.1.max(1.0 - lhs / (quad(&lower_m, v) / lift));
                }
            }
            worst
        })
        .collect();
    let upper_violation = violations.iter().map(|v| v.0).fold(0.0, f64::max);
    let lower_violation = violations.iter().map(|v| v.1).fold(0.0, f64::max);
    let tail = tail_from_shells(&shells, epsilon, weighting);
    let tail_rate = exponential_rate(&tail.increments);
    let tail_converges = match tail_rate {
        Some(b) => b < 0.0,
        None => tail.increments.last().is_some_and(|v| *v == 0.0),
    };
    Ok(LipschitzReport {
        epsilon,
        truncation: n,
        weighting,
        upper_violation,
        lower_violation,
        tail_slope: tail.slope,
        tail_rate,
        tail_converges,
        passed: upper_violation <= LIPSCHITZ_TOLERANCE
            && lower_violation <= LIPSCHITZ_TOLERANCE
            && tail_converges,
    })
}

/// Exponential rate of a polynomial-times-exponential sequence: the `b` of
/// the least-squares fit `log v_k ≈ a + b·k + c·log k` over `k = 1, 2, …`.
/// `None` when fewer than four terms are positive.
pub fn exponential_rate(values: &[f64]) -> Option<f64> {
    let rows: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| ((i + 1) as f64, v.ln()))
        .collect();
    if rows.len() < 4 {
        return None;
    }
    let mut ata = Matrix3::zeros();
    let mut atb = nalgebra::Vector3::zeros();
    for (k, y) in rows {
        let r = nalgebra::Vector3::new(1.0, k, k.ln());
        ata += r * r.transpose();
        atb += r * y;
    }
    ata.lu().solve(&atb).map(|sol| sol[1])
}

fn shell_sums_serial(ball: &WordBall, y: &SpherePoint, radius: usize) -> Vec<Sym2> {
    let limit = ball.counts()[radius];
    let mut sums = vec![[0.0; 3]; radius + 1];
    for (i, (_, j)) in ball.images_and_jacobians(y).iter().take(limit).enumerate() {
        let m = pullback_round(j);
        let s = &mut sums[ball.word_length(i)];
        s[0] += m[0];
        s[1] += m[1];
        s[2] += m[2];
    }
    sums
}

fn weighted(sums: &[Sym2], epsilon: f64, n: usize, weighting: Weighting) -> Sym2 {
    let mut acc = [0.0; 3];
    for (k, s) in sums.iter().enumerate().take(n + 1) {
        let w = weighting.weight(epsilon, k);
        acc[0] += w * s[0];
        acc[1] += w * s[1];
        acc[2] += w * s[2];
    }
    acc
}

/// Ratio of the largest to the smallest stretch of `j` measured with
/// `source` at the base point and `target` at the image.
pub fn dilatation_between(j: &Matrix2<f64>, source: &Sym2, target: &Sym2) -> f64 {
    let a = cholesky_upper(target) * j * cholesky_upper(source).try_inverse().expect("SPD source");
    let (s1, s2) = singular_values(&a);
    s1 / s2
}

/// Upper factor `R` with `m = RᵀR`, so `‖v‖_m = |Rv|`.
fn cholesky_upper(m: &Sym2) -> Matrix2<f64> {
    let r11 = m[0].sqrt();
    let r12 = m[1] / r11;
    let r22 = (m[2] - r12 * r12).sqrt();
    Matrix2::new(r11, r12, 0.0, r22)
}

/// Dilatation of `f` against `m_N` with the target metric evaluated exactly
/// by walking `ball` at each image point instead of interpolating.
pub fn qc_dilatation_exact(
    f: &Diffeomorphism,
    ball: &WordBall,
    epsilon: f64,
    n: usize,
    weighting: Weighting,
    points: &[SpherePoint],
) -> Result<f64> {
    let shells = shell_sums(ball, points, n)?;
    let ks: Vec<f64> = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let (y, j) = f.image_and_jacobian(x);
            let target = weighted(&shell_sums_serial(ball, &y, n), epsilon, n, weighting);
            dilatation_between(&j, &shells.metric(i, epsilon, n, weighting), &target)
        })
        .collect();
    Ok(ks.into_iter().fold(1.0, f64::max))
}

/// Maximal infinitesimal dilatation of `f`: against the round metric when
/// `field` is `None` (sup search), else over the field's sample points.
pub fn qc_dilatation(f: &Diffeomorphism, field: Option<&MetricField>) -> Result<f64> {
    match field {
        None => {
            if f.is_empty() {
                return Ok(1.0);
            }
            let (k, _) = sup_over_sphere(
                |p| {
                    let (s1, s2) = singular_values(&f.jacobian(p));
                    s1 / s2
                },
                ROUND_DILATATION_SAMPLES,
            );
            Ok(k)
        }
        Some(field) => {
            let ks: Vec<Result<f64>> = field
                .points
                .par_iter()
                .zip(&field.matrices)
                .map(|(x, m)| {
                    let (y, j) = f.image_and_jacobian(x);
                    let target = field.interpolate(&y)?;
                    Ok(dilatation_between(&j, m, &target))
                })
                .collect();
            let mut worst: f64 = 1.0;
            for k in ks {
                worst = worst.max(k?);
            }
            Ok(worst)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffeo::Primitive;
    use crate::words::{enumerate_ball, NamedPrimitive};
    use std::f64::consts::FRAC_PI_2;

    fn cyclic4() -> GeneratorSet {
        GeneratorSet::new(
            vec![NamedPrimitive::new(
                "r",
                Primitive::rotation([0.0, 0.0, 1.0], FRAC_PI_2).unwrap(),
            )],
            true,
        )
        .unwrap()
    }

    #[test]
    fn trivial_group_gives_round_metric() {
        let field = build_averaged_metric(&GeneratorSet::trivial(), 0.7, 3).unwrap();
        // Identity words of every length collapse onto the single element.
        assert!(field.matrices.iter().all(|m| *m == [1.0, 0.0, 1.0]));
    }

    #[test]
    fn cyclic_group_scales_round_metric() {
        let eps = 0.5;
        let field = build_averaged_metric(&cyclic4(), eps, 3).unwrap();
        let c = 1.0 + 2.0 * (-eps).exp() + (-2.0 * eps).exp();
        for m in &field.matrices {
            assert!((m[0] - c).abs() < 1e-10 && m[1].abs() < 1e-10 && (m[2] - c).abs() < 1e-10);
        }
        assert!(field.is_spd());
        let k = qc_dilatation(&cyclic4().generator(0), Some(&field)).unwrap();
        assert!((k - 1.0).abs() < 1e-9);
        let tail = tail_report(&cyclic4(), eps, 5).unwrap();
        assert_eq!(&tail.increments[2..], &[0.0, 0.0, 0.0]);
        assert_eq!(tail.slope, None);
    }

    #[test]
    fn twist_dilatation_vs_round() {
        let t = Diffeomorphism::primitive(Primitive::twist([0.0, 0.0, 1.0], 2.0).unwrap());
        let k = qc_dilatation(&t, None).unwrap();
        assert!((k - (3.0 + 8f64.sqrt())).abs() < 1e-5, "{k}");
        let r = Diffeomorphism::primitive(Primitive::rotation([1.0, 2.0, 3.0], 0.4).unwrap());
        assert!((qc_dilatation(&r, None).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn interpolation_reproduces_round_and_rejects_sparse_fields() {
        let field = MetricField::round(fibonacci_sphere(500));
        let y = SpherePoint::normalized([0.3, -0.2, 0.7]).unwrap();
        let m = field.interpolate(&y).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-12 && m[1].abs() < 1e-12 && (m[2] - 1.0).abs() < 1e-12);
        let cap: Vec<SpherePoint> = fibonacci_sphere(2000)
            .into_iter()
            .filter(|p| p.z() > 0.9)
            .collect();
        let sparse = MetricField::round(cap);
        assert!(matches!(
            sparse.interpolate(&SpherePoint::SOUTH),
            Err(Error::Density { .. })
        ));
    }

    #[test]
    fn monotone_truncation_and_refusals() {
        let s = cyclic4();
        let ball = enumerate_ball(&s, 3);
        let shells = shell_sums(&ball, &fibonacci_sphere(50), 3).unwrap();
        for i in 0..50 {
            let a = shells.metric(i, 0.3, 1, Weighting::Decaying);
            let b = shells.metric(i, 0.3, 2, Weighting::Decaying);
            assert!(a[0] <= b[0] && a[2] <= b[2]);
        }
        assert!(build_averaged_metric(&s, -1.0, 2).is_err());
        let asym = GeneratorSet::new(
            vec![NamedPrimitive::new(
                "r",
                Primitive::rotation([0.0, 0.0, 1.0], FRAC_PI_2).unwrap(),
            )],
            false,
        )
        .unwrap();
        assert!(matches!(
            lipschitz_check(&asym, 0.5, 2),
            Err(Error::NotSymmetric(_))
        ));
    }
}
