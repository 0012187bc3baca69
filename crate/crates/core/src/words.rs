//! Generator sets, word balls and growth measurements.
//!
//! Elements of the group generated by a [`GeneratorSet`] are identified
//! numerically: two words are the same element when their images of a fixed
//! set of probe points agree within the fingerprint cell size. Balls are
//! enumerated breadth first, so every element is stored with its shortlex
//! minimal word and the element order is the shortlex order of those words.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffeo::{
    cr_norm, letter_step, operator_norm_d, operator_norm_plus, Diffeomorphism, Letter, Primitive,
};
use crate::error::{Error, Result};
use crate::sphere::{fibonacci_sphere, SpherePoint};

pub const DEFAULT_PROBE_COUNT: usize = 24;
pub const DEFAULT_CELL_SIZE: f64 = 1e-8;
pub const DEFAULT_ELEMENT_CAP: usize = 2_000_000;
/// Slope of `log B_k` above which a ball is classified as exponential.
pub const EXPONENTIAL_SLOPE_THRESHOLD: f64 = 0.1;
/// Slack in the rate inequality `rate(‖·‖₂) ≤ 2·rate(‖·‖₁) + slack`.
pub const CR_RATE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPrimitive {
    pub name: String,
    pub primitive: Primitive,
}

impl NamedPrimitive {
    pub fn new(name: impl Into<String>, primitive: Primitive) -> Self {
        Self {
            name: name.into(),
            primitive,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    names: Vec<String>,
    table: Arc<Vec<Primitive>>,
    symmetric: bool,
}

impl GeneratorSet {
    pub fn new(generators: Vec<NamedPrimitive>, symmetric: bool) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::Validation("generator set is empty".into()));
        }
        let mut names = Vec::with_capacity(generators.len());
        for g in &generators {
            if names.contains(&g.name) {
                return Err(Error::Validation(format!(
                    "duplicate generator name `{}`",
                    g.name
                )));
            }
            g.primitive.validate()?;
            names.push(g.name.clone());
        }
        let table = Arc::new(generators.into_iter().map(|g| g.primitive).collect());
        Ok(Self {
            names,
            table,
            symmetric,
        })
    }

    /// `{Id}` as a one-letter symmetric set.
    pub fn trivial() -> Self {
        Self::new(vec![NamedPrimitive::new("id", Primitive::IDENTITY)], true)
            .expect("identity generator is valid")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn table(&self) -> &Arc<Vec<Primitive>> {
        &self.table
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// The alphabet in letter-index order: `g0, g0⁻¹, g1, g1⁻¹, …` when
    /// symmetric, `g0, g1, …` otherwise.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.table.len())
            .flat_map(|i| {
                let mut v = vec![Letter::new(i, false)];
                if self.symmetric {
                    v.push(Letter::new(i, true));
                }
                v
            })
            .collect()
    }

    pub fn primitive(&self, letter: Letter) -> &Primitive {
        &self.table[letter.index]
    }

    pub fn identity(&self) -> Diffeomorphism {
        Diffeomorphism::identity(self.table.clone())
    }

    pub fn word(&self, letters: Vec<Letter>) -> Result<Diffeomorphism> {
        Diffeomorphism::from_letters(self.table.clone(), letters)
    }

    pub fn generator(&self, index: usize) -> Diffeomorphism {
        Diffeomorphism::from_letters(self.table.clone(), vec![Letter::new(index, false)])
            .expect("index within table")
    }

    /// Parses `name` or `name^-1`.
    pub fn parse_letter(&self, token: &str) -> Result<Letter> {
        let token = token.trim();
        let (name, inverse) = match token.strip_suffix("^-1") {
            Some(n) => (n, true),
            None => (token, false),
        };
        let index = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Validation(format!("unknown generator `{name}`")))?;
        if inverse && !self.symmetric {
            return Err(Error::NotSymmetric("inverse letters"));
        }
        Ok(Letter::new(index, inverse))
    }

    pub fn letter_name(&self, letter: Letter) -> String {
        if letter.inverse {
            format!("{}^-1", self.names[letter.index])
        } else {
            self.names[letter.index].clone()
        }
    }

    pub fn describe(&self, word: &Diffeomorphism) -> String {
        word.describe(&self.names)
    }

    pub fn all_isometries(&self) -> bool {
        self.table.iter().all(Primitive::is_isometry)
    }

    pub fn all_area_preserving(&self) -> bool {
        self.table.iter().all(Primitive::is_area_preserving)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallConfig {
    pub probes: usize,
    pub cell_size: f64,
    pub element_cap: usize,
}

impl Default for BallConfig {
    fn default() -> Self {
        Self {
            probes: DEFAULT_PROBE_COUNT,
            cell_size: DEFAULT_CELL_SIZE,
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }
}

/// Images of the probe points under one element, flattened.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint(pub Vec<f64>);

impl Fingerprint {
    pub fn matches(&self, other: &Fingerprint, cell_size: f64) -> bool {
        images_match(&self.0, &other.0, cell_size)
    }

    /// Grid-cell indices of the probe images.
    pub fn cells(&self, cell_size: f64) -> Vec<i64> {
        self.0
            .iter()
            .map(|v| (v / cell_size).floor() as i64)
            .collect()
    }
}

fn images_match(a: &[f64], b: &[f64], cell_size: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() < cell_size)
}

#[derive(Debug, Clone, Copy)]
struct Node {
    parent: u32,
    letter: Letter,
    length: u32,
}

const ROOT: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct WordBall {
    generators: GeneratorSet,
    config: BallConfig,
    radius: usize,
    probes: Vec<SpherePoint>,
    nodes: Vec<Node>,
    images: Vec<f64>,
    buckets: HashMap<i64, Vec<u32>>,
    weights: Vec<f64>,
    counts: Vec<usize>,
    truncated: bool,
}

impl WordBall {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn config(&self) -> &BallConfig {
        &self.config
    }

    /// `B_0, …, B_n`.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Word length `|g|_S` of element `i`.
    pub fn word_length(&self, i: usize) -> usize {
        self.nodes[i].length as usize
    }

    /// Stored shortlex word of element `i`.
    pub fn word(&self, i: usize) -> Diffeomorphism {
        let mut letters = Vec::with_capacity(self.nodes[i].length as usize);
        let mut cur = i as u32;
        while cur != ROOT {
            let node = self.nodes[cur as usize];
            if node.parent == ROOT {
                break;
            }
            letters.push(node.letter);
            cur = node.parent;
        }
        self.generators
            .word(letters)
            .expect("ball letters index the generator table")
    }

    pub fn fingerprint_of(&self, i: usize) -> Fingerprint {
        let k = self.probes.len() * 3;
        Fingerprint(self.images[i * k..(i + 1) * k].to_vec())
    }

    pub fn fingerprint(&self, word: &Diffeomorphism) -> Fingerprint {
        Fingerprint(
            self.probes
                .iter()
                .flat_map(|p| word.evaluate(p).coords())
                .collect(),
        )
    }

    /// Index of the stored element equal to `word`, if it lies in the ball.
    pub fn lookup(&self, word: &Diffeomorphism) -> Option<usize> {
        let fp = self.fingerprint(word);
        self.find(&fp.0).map(|i| i as usize)
    }

    fn key(&self, images: &[f64]) -> i64 {
        let s: f64 = images.iter().zip(&self.weights).map(|(x, w)| x * w).sum();
        (s / self.config.cell_size).floor() as i64
    }

    fn find(&self, images: &[f64]) -> Option<u32> {
        let key = self.key(images);
        let k = images.len();
        let cell = self.config.cell_size;
        for probe_key in [key - 1, key, key + 1] {
            if let Some(bucket) = self.buckets.get(&probe_key) {
                for &idx in bucket {
                    let start = idx as usize * k;
                    if images_match(images, &self.images[start..start + k], cell) {
                        return Some(idx);
                    }
                }
            }
        }
        None
    }

    fn insert(&mut self, node: Node, images: &[f64]) -> u32 {
        let idx = self.nodes.len() as u32;
        let key = self.key(images);
        self.nodes.push(node);
        self.images.extend_from_slice(images);
        self.buckets.entry(key).or_default().push(idx);
        idx
    }

    /// Indices of elements with word length exactly `k`.
    pub fn shell(&self, k: usize) -> std::ops::Range<usize> {
        let start = if k == 0 { 0 } else { self.counts[k - 1] };
        start..self.counts[k]
    }

    /// Walks the ball at `x`, yielding `(g(x), D_x g)` for every element in
    /// index order. Each element is obtained from its parent by one letter.
    pub fn images_and_jacobians(
        &self,
        x: &SpherePoint,
    ) -> Vec<(SpherePoint, nalgebra::Matrix2<f64>)> {
        let mut out: Vec<(SpherePoint, nalgebra::Matrix2<f64>)> =
            Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            if node.parent == ROOT {
                out.push((*x, nalgebra::Matrix2::identity()));
                continue;
            }
            let (py, pj) = out[node.parent as usize];
            let prim = self.generators.primitive(node.letter);
            let (y, j) = letter_step(prim, node.letter.inverse, &py);
            out.push((y, j * pj));
        }
        out
    }

    /// Images of `points` under every element, in index order.
    pub fn orbit_images(&self, points: &[SpherePoint]) -> Vec<Vec<SpherePoint>> {
        let mut out: Vec<Vec<SpherePoint>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            if node.parent == ROOT {
                out.push(points.to_vec());
                continue;
            }
            let prim = self.generators.primitive(node.letter);
            let next = out[node.parent as usize]
                .iter()
                .map(|p| prim.apply_point(p, node.letter.inverse))
                .collect();
            out.push(next);
        }
        out
    }
}

/// Breadth-first enumeration of the ball of radius `n`.
///
/// Candidates at depth `d` are `s ∘ g` for letters `s` in index order and
/// parents `g` of depth `d − 1` in index order; the first candidate hitting
/// a new element keeps it, which yields shortlex minimal words.
pub fn enumerate_ball(generators: &GeneratorSet, n: usize) -> WordBall {
    enumerate_ball_with(generators, n, BallConfig::default())
}

pub fn enumerate_ball_with(generators: &GeneratorSet, n: usize, config: BallConfig) -> WordBall {
    let probes = fibonacci_sphere(config.probes);
    let width = probes.len() * 3;
    let mut weights: Vec<f64> = (0..width)
        .map(|i| {
            // Fixed irrational-ish weights; only their spread matters.
            let t = ((i as f64 + 1.0) * 0.618_033_988_749_894_9).fract();
            0.5 + t
        })
        .collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut ball = WordBall {
        generators: generators.clone(),
        config,
        radius: n,
        probes: probes.clone(),
        nodes: Vec::new(),
        images: Vec::new(),
        buckets: HashMap::new(),
        weights,
        counts: Vec::new(),
        truncated: false,
    };
    let root_images: Vec<f64> = probes.iter().flat_map(|p| p.coords()).collect();
    ball.insert(
        Node {
            parent: ROOT,
            letter: Letter::new(0, false),
            length: 0,
        },
        &root_images,
    );
    ball.counts.push(1);
    let letters = generators.letters();
    let mut frontier: Vec<u32> = vec![0];
    'depth: for depth in 1..=n {
        let mut next = Vec::new();
        for &letter in &letters {
            let prim = *generators.primitive(letter);
            let candidates: Vec<Vec<f64>> = frontier
                .par_iter()
                .map(|&parent| {
                    let start = parent as usize * width;
                    ball.images[start..start + width]
                        .chunks_exact(3)
                        .flat_map(|c| {
                            let p = SpherePoint::renormalize([c[0], c[1], c[2]]);
                            prim.apply_point(&p, letter.inverse).coords()
                        })
                        .collect()
                })
                .collect();
            for (&parent, images) in frontier.iter().zip(&candidates) {
                if ball.find(images).is_some() {
                    continue;
                }
                if ball.nodes.len() >= config.element_cap {
                    ball.truncated = true;
                    ball.radius = depth;
                    ball.counts.push(ball.nodes.len());
                    break 'depth;
                }
                let idx = ball.insert(
                    Node {
                        parent,
                        letter,
                        length: depth as u32,
                    },
                    images,
                );
                next.push(idx);
            }
        }
        ball.counts.push(ball.nodes.len());
        frontier = next;
    }
    ball
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GrowthClass {
    Finite,
    Subexponential,
    Exponential,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub counts: Vec<usize>,
    pub log_counts: Vec<f64>,
    pub exponent: f64,
    pub classification: GrowthClass,
    pub truncated: bool,
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Slope of `log B_k` over the top half of radii.
pub fn growth_exponent(ball: &WordBall) -> Result<GrowthReport> {
    let counts = ball.counts().to_vec();
    let n = counts.len() - 1;
    if n < 4 {
        return Err(Error::Validation(format!(
            "growth exponent needs radius ≥ 4, got {n}"
        )));
    }
    let log_counts: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let finite = !ball.is_truncated() && counts[n] == counts[n - 1];
    let lo = n.div_ceil(2);
    let xs: Vec<f64> = (lo..=n).map(|k| k as f64).collect();
    let slope = least_squares_slope(&xs, &log_counts[lo..=n]).max(0.0);
    let (exponent, classification) = if finite {
        (0.0, GrowthClass::Finite)
    } else if slope > EXPONENTIAL_SLOPE_THRESHOLD {
        (slope, GrowthClass::Exponential)
    } else {
        (slope, GrowthClass::Subexponential)
    };
    Ok(GrowthReport {
        counts,
        log_counts,
        exponent,
        classification,
        truncated: ball.is_truncated(),
    })
}

/// Letter sequences of length exactly `n`: all of them when the alphabet
/// allows at most `budget`, otherwise `budget` uniform samples.
pub fn length_n_words(
    generators: &GeneratorSet,
    n: usize,
    budget: usize,
    seed: u64,
) -> (Vec<Diffeomorphism>, bool) {
    let letters = generators.letters();
    let total = (letters.len() as f64).powi(n as i32);
    if total <= budget as f64 {
        let count = total as usize;
        let words = (0..count)
            .map(|mut code| {
                let seq = (0..n)
                    .map(|_| {
                        let l = letters[code % letters.len()];
                        code /= letters.len();
                        l
                    })
                    .collect();
                generators.word(seq).expect("valid letters")
            })
            .collect();
        (words, true)
    } else {
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let words = (0..budget)
            .map(|_| {
                let seq = (0..n)
                    .map(|_| letters[rng.gen_range(0..letters.len())])
                    .collect();
                generators.word(seq).expect("valid letters")
            })
            .collect();
        (words, false)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivativeGrowth {
    pub length: usize,
    pub exponent: f64,
    pub max_log_norm: f64,
    pub words_examined: usize,
    pub exhaustive: bool,
    pub argmax: String,
}

/// `max_{|w| = n} (1/n)·log ‖D(w)‖` over enumerated or sampled words.
pub fn derivative_growth_exponent(
    generators: &GeneratorSet,
    n: usize,
    budget: usize,
    seed: u64,
) -> f64 {
    derivative_growth(generators, n, budget, seed).exponent
}

pub fn derivative_growth(
    generators: &GeneratorSet,
    n: usize,
    budget: usize,
    seed: u64,
) -> DerivativeGrowth {
    let n = n.max(1);
    let (words, exhaustive) = length_n_words(generators, n, budget, seed);
    // With unit Jacobian determinant the inverse has the same pointwise
    // operator norm, so the forward supremum already is ‖·‖_D.
    let area_preserving = generators.all_area_preserving();
    let logs: Vec<f64> = words
        .par_iter()
        .map(|w| {
            if area_preserving {
                operator_norm_plus(w)
            } else {
                operator_norm_d(w)
            }
            .ln()
        })
        .collect();
    let (best, idx) =
        logs.iter().enumerate().fold(
            (f64::NEG_INFINITY, 0),
            |acc, (i, &v)| if v > acc.0 { (v, i) } else { acc },
        );
    DerivativeGrowth {
        length: n,
        exponent: best / n as f64,
        max_log_norm: best,
        words_examined: words.len(),
        exhaustive,
        argmax: generators.describe(&words[idx]),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CrGrowthRow {
    pub length: usize,
    pub max_c1: f64,
    pub max_c2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrGrowthReport {
    pub order: u32,
    pub rows: Vec<CrGrowthRow>,
    pub rate_c1: f64,
    pub rate_c2: f64,
    pub slack: f64,
    pub bound_holds: bool,
}

/// Per-length maxima of `‖w‖₁` and `‖w‖₂`, their fitted exponential rates,
/// and the check `rate₂ ≤ 2·rate₁ + slack`.
pub fn cr_growth_report(
    generators: &GeneratorSet,
    n: usize,
    r: u32,
    budget: usize,
    seed: u64,
) -> Result<CrGrowthReport> {
    if r != 2 {
        return Err(Error::UnsupportedOrder(r));
    }
    if n < 2 {
        return Err(Error::Validation("cr growth needs n ≥ 2".into()));
    }
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let (words, _) = length_n_words(generators, k, budget, seed);
        let norms: Vec<(f64, f64)> = words
            .par_iter()
            .map(|w| {
                (
                    cr_norm(w, 1).unwrap_or(f64::NAN),
                    cr_norm(w, 2).unwrap_or(f64::NAN),
                )
            })
            .collect();
        let max_c1 = norms.iter().map(|v| v.0).fold(1.0, f64::max);
        let max_c2 = norms.iter().map(|v| v.1).fold(1.0, f64::max);
        rows.push(CrGrowthRow {
            length: k,
            max_c1,
            max_c2,
        });
    }
    let lo = n.div_ceil(2);
    let xs: Vec<f64> = (lo..=n).map(|k| k as f64).collect();
    let fit = |f: &dyn Fn(&CrGrowthRow) -> f64| {
        let ys: Vec<f64> = rows[lo - 1..].iter().map(|row| f(row).ln()).collect();
        least_squares_slope(&xs, &ys).max(0.0)
    };
    let rate_c1 = fit(&|row| row.max_c1);
    let rate_c2 = fit(&|row| row.max_c2);
    Ok(CrGrowthReport {
        order: r,
        rows,
        rate_c1,
        rate_c2,
        slack: CR_RATE_SLACK,
        bound_holds: rate_c2 <= r as f64 * rate_c1 + CR_RATE_SLACK,
    })
}
