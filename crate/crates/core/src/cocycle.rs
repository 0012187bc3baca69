//! The derivative cocycle over the shift on letter sequences.
//!
//! A [`SymbolicWord`] supplies letters `s_0, s_1, …`; the fiber orbit is
//! `x_{i+1} = s_i(x_i)` and the tangent dynamics multiply the per-letter
//! frame Jacobians. After `n` steps the accumulated map is
//! `w_n = s_{n−1} ∘ … ∘ s_0`.

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diffeo::{letter_step, Diffeomorphism, Letter};
use crate::error::{Error, Result};
use crate::sphere::{geodesic_distance, SpherePoint, TangentVector};
use crate::words::GeneratorSet;

/// Distance of an eigenvalue modulus from 1 that counts as off the circle.
pub const HYPERBOLICITY_THRESHOLD: f64 = 1e-4;
/// A point counts as fixed when it moves less than this.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-8;
pub const LYAPUNOV_MIN_STEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SymbolicWord {
    /// `letter_at(i) = core[i mod |core|]`.
    Periodic { core: Vec<Letter> },
    /// Letters drawn i.i.d. uniformly from `alphabet`.
    Random { seed: u64, alphabet: Vec<Letter> },
}

impl SymbolicWord {
    pub fn periodic(core: Vec<Letter>) -> Result<Self> {
        if core.is_empty() {
            return Err(Error::Validation(
                "periodic word needs at least one letter".into(),
            ));
        }
        Ok(Self::Periodic { core })
    }

    pub fn random(seed: u64, alphabet: Vec<Letter>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::Validation(
                "random word needs a nonempty alphabet".into(),
            ));
        }
        Ok(Self::Random { seed, alphabet })
    }

    /// The first `n` letters.
    pub fn prefix(&self, n: usize) -> Vec<Letter> {
        match self {
            Self::Periodic { core } => (0..n).map(|i| core[i % core.len()]).collect(),
            Self::Random { seed, alphabet } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n)
                    .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                    .collect()
            }
        }
    }

    pub fn letter_at(&self, i: usize) -> Letter {
        match self {
            Self::Periodic { core } => core[i % core.len()],
            Self::Random { .. } => self.prefix(i + 1)[i],
        }
    }

    /// `w_n = s_{n−1} ∘ … ∘ s_0` as a word over `generators`.
    pub fn composite(&self, generators: &GeneratorSet, n: usize) -> Diffeomorphism {
        let mut letters = self.prefix(n);
        letters.reverse();
        generators
            .word(letters)
            .expect("word letters come from the generator set")
    }

    pub fn describe(&self, generators: &GeneratorSet) -> String {
        match self {
            Self::Periodic { core } => format!(
                "periodic:{}",
                core.iter()
                    .map(|l| generators.letter_name(*l))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            Self::Random { seed, .. } => format!("random:{seed}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CocycleState {
    pub position: SpherePoint,
    /// Unit vector in `frame_at(position)`.
    pub vector: Vector2<f64>,
    pub log_norm: f64,
}

impl CocycleState {
    pub fn new(v: &TangentVector) -> Result<Self> {
        let c = Vector2::from(v.frame_components());
        let n = c.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Validation("tangent vector must be nonzero".into()));
        }
        Ok(Self {
            position: v.base(),
            vector: c / n,
            log_norm: 0.0,
        })
    }

    /// Applies one letter, renormalizing the vector; returns ψ of the step.
    pub fn step(&mut self, generators: &GeneratorSet, letter: Letter) -> f64 {
        let (y, j) = letter_step(generators.primitive(letter), letter.inverse, &self.position);
        let w = j * self.vector;
        let n = w.norm();
        let psi = n.ln();
        self.position = y;
        self.vector = w / n;
        self.log_norm += psi;
        psi
    }
}

/// Log stretch of `v` under one letter, in orthonormal frames.
pub fn psi(generators: &GeneratorSet, letter: Letter, v: &TangentVector) -> Result<f64> {
    let mut state = CocycleState::new(v)?;
    Ok(state.step(generators, letter))
}

/// `(1/n)·Σ_{i<n} ψ` along the orbit, computed step by step.
pub fn birkhoff_derivative_sum(
    generators: &GeneratorSet,
    word: &SymbolicWord,
    v: &TangentVector,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Validation("Birkhoff sum needs n ≥ 1".into()));
    }
    let mut state = CocycleState::new(v)?;
    let mut total = 0.0;
    for letter in word.prefix(n) {
        total += state.step(generators, letter);
    }
    Ok(total / n as f64)
}

/// `(1/n)·log(‖D_x w_n(v)‖ / ‖v‖)` from a single Jacobian of the whole word.
pub fn full_word_log_stretch(
    generators: &GeneratorSet,
    word: &SymbolicWord,
    v: &TangentVector,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Validation("stretch needs n ≥ 1".into()));
    }
    let c = Vector2::from(v.frame_components());
    if !(c.norm() > 0.0) {
        return Err(Error::Validation("tangent vector must be nonzero".into()));
    }
    let j = word.composite(generators, n).jacobian(&v.base());
    Ok(((j * c).norm() / c.norm()).ln() / n as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub steps: usize,
    pub word: String,
    pub start: [f64; 3],
    /// `(1/n)·Σ log|det|` along the orbit.
    pub mean_log_det: f64,
}

impl LyapunovReport {
    pub fn sum(&self) -> f64 {
        self.lambda1 + self.lambda2
    }
}

/// Top exponent by renormalized vector iteration from a seeded direction;
/// the second from the exact running sum of log-determinants.
pub fn lyapunov_pair(
    generators: &GeneratorSet,
    word: &SymbolicWord,
    x: &SpherePoint,
    n: usize,
    seed: u64,
) -> Result<LyapunovReport> {
    if n < LYAPUNOV_MIN_STEPS {
        return Err(Error::Validation(format!(
            "Lyapunov estimate needs at least {LYAPUNOV_MIN_STEPS} steps, got {n}"
        )));
    }
    let angle = ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..std::f64::consts::TAU);
    let v = TangentVector::from_frame(*x, [angle.cos(), angle.sin()]);
    let mut state = CocycleState::new(&v)?;
    let mut log_det = 0.0;
    for letter in word.prefix(n) {
        let (_, j) = letter_step(
            generators.primitive(letter),
            letter.inverse,
            &state.position,
        );
        log_det += j.determinant().abs().ln();
        state.step(generators, letter);
        if !state.log_norm.is_finite() {
            return Err(Error::Validation(
                "orbit left the numerically valid range".into(),
            ));
        }
    }
    let lambda1 = state.log_norm / n as f64;
    let mean_log_det = log_det / n as f64;
    let lambda2 = mean_log_det - lambda1;
    Ok(LyapunovReport {
        lambda1,
        lambda2,
        steps: n,
        word: word.describe(generators),
        start: x.coords(),
        mean_log_det,
    })
}

/// Uniform empirical measure on the first `n` orbit points.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<(usize, SpherePoint)>,
    pub weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn from_orbit(
        generators: &GeneratorSet,
        word: &SymbolicWord,
        x: &SpherePoint,
        n: usize,
    ) -> Self {
        let mut atoms = Vec::with_capacity(n);
        let mut p = *x;
        for (i, letter) in word.prefix(n).into_iter().enumerate() {
            atoms.push((i, p));
            p = generators.primitive(letter).apply_point(&p, letter.inverse);
        }
        Self {
            atoms,
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn integrate(&self, phi: &dyn Fn(&SpherePoint) -> f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|((_, p), w)| w * phi(p))
            .sum()
    }
}

/// `max_φ |∫φ d(F_*μ_n) − ∫φ dμ_n|` over the given test functions.
pub fn empirical_invariance_defect(
    generators: &GeneratorSet,
    word: &SymbolicWord,
    x: &SpherePoint,
    n: usize,
    test_functions: &[&dyn Fn(&SpherePoint) -> f64],
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Validation("empirical measure needs n ≥ 1".into()));
    }
    let mu = EmpiricalMeasure::from_orbit(generators, word, x, n);
    let letters = word.prefix(n);
    // The skew product moves the i-th atom by the i-th letter.
    let pushed = EmpiricalMeasure {
        atoms: mu
            .atoms
            .iter()
            .zip(&letters)
            .map(|((i, p), l)| (i + 1, generators.primitive(*l).apply_point(p, l.inverse)))
            .collect(),
        weights: mu.weights.clone(),
    };
    let mut worst: f64 = 0.0;
    for phi in test_functions {
        for (_, p) in mu.atoms.iter().chain(&pushed.atoms) {
            if phi(p).abs() > 1.0 {
                return Err(Error::Validation(
                    "test functions must be bounded by 1".into(),
                ));
            }
        }
        worst = worst.max((pushed.integrate(phi) - mu.integrate(phi)).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointClass {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    Given,
    Newton,
    PatternSearch,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointRecord {
    pub point: [f64; 3],
    pub residual: f64,
    /// `[re, im]` pairs.
    pub eigenvalues: [[f64; 2]; 2],
    pub classification: PointClass,
    pub word: String,
    pub method: FixedPointMethod,
    pub iterations: usize,
}

/// Eigenvalues of a real 2×2 matrix as `[re, im]` pairs, larger modulus first.
pub fn eigenvalues(j: &Matrix2<f64>) -> [[f64; 2]; 2] {
    let half_tr = 0.5 * j.trace();
    let disc = half_tr * half_tr - j.determinant();
    if disc >= 0.0 {
        let r = disc.sqrt();
        let (a, b) = (half_tr + r, half_tr - r);
        if a.abs() >= b.abs() {
            [[a, 0.0], [b, 0.0]]
        } else {
            [[b, 0.0], [a, 0.0]]
        }
    } else {
        let r = (-disc).sqrt();
        [[half_tr, r], [half_tr, -r]]
    }
}

/// Classifies a fixed-point Jacobian by its eigenvalue moduli.
pub fn classify_jacobian(j: &Matrix2<f64>, threshold: f64) -> PointClass {
    let eig = eigenvalues(j);
    let m: Vec<f64> = eig.iter().map(|e| e[0].hypot(e[1])).collect();
    let off = |x: f64| (x - 1.0).abs() > threshold;
    if off(m[0]) && off(m[1]) {
        return PointClass::Hyperbolic;
    }
    // A complex pair this close to the real axis is a perturbed Jordan block.
    if eig[0][1].abs() > threshold && !off(m[0]) {
        return PointClass::Elliptic;
    }
    let identity_like = (j - Matrix2::identity()).abs().max() <= threshold
        || (j + Matrix2::identity()).abs().max() <= threshold;
    if identity_like {
        PointClass::Elliptic
    } else {
        PointClass::Parabolic
    }
}

pub fn classify_periodic_point(
    generators: &GeneratorSet,
    core: &Diffeomorphism,
    p: &SpherePoint,
) -> Result<FixedPointRecord> {
    let (image, j) = core.image_and_jacobian(p);
    let residual = geodesic_distance(&image, p);
    if residual >= FIXED_POINT_TOLERANCE {
        return Err(Error::NotFixed { residual });
    }
    Ok(FixedPointRecord {
        point: p.coords(),
        residual,
        eigenvalues: eigenvalues(&j),
        classification: classify_jacobian(&j, HYPERBOLICITY_THRESHOLD),
        word: generators.describe(core),
        method: FixedPointMethod::Given,
        iterations: 0,
    })
}
