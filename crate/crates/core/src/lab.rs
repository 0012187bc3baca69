//! Runs a scenario's experiments and renders the report.
//!
//! Experiments run sequentially in a fixed order and share one cache of word
//! balls keyed by radius. A failing block is recorded under `errors` and the
//! run moves on. Nothing in the report depends on thread count or timing
//! unless timing is explicitly requested.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::cocycle::{
    birkhoff_derivative_sum, classify_periodic_point, eigenvalues, empirical_invariance_defect,
    full_word_log_stretch, lyapunov_pair, FixedPointRecord, LyapunovReport, SymbolicWord,
};
use crate::diffeo::{singular_values, standard_sample_set, Diffeomorphism, Primitive};
use crate::error::{Error, Result};
use crate::pesin::{
    lipschitz_check_with, qc_dilatation, shell_sums, tail_from_shells, LipschitzReport,
    MetricField, ShellSums, Weighting,
};
use crate::recurrence::{
    conjugated_rotation_family, element_order, find_fixed_point, orbit_hull_diameter,
    pigeonhole_pair, ConjugationTable, OrbitHull, TripleConfig,
};
use crate::scenario::{Experiment, GeneratorSpec, OutputFormat, Scenario};
use crate::sphere::{fibonacci_sphere, geodesic_distance, SpherePoint, TangentVector};
use crate::words::{
    cr_growth_report, derivative_growth, enumerate_ball_with, growth_exponent, BallConfig,
    CrGrowthReport, DerivativeGrowth, GeneratorSet, GrowthClass, WordBall,
};

pub const LIBRARY_VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_DERIV_BUDGET: usize = 4096;
const DEFAULT_CR_BUDGET: usize = 1024;
const DEFAULT_CR_RADIUS: usize = 6;
/// Search radius for the fixed point of the recurrence element.
const RECURRENCE_FIXED_POINT_RADIUS: f64 = 0.5;

pub const GROWTH_CSV_HEADER: &str = "radius,count,log_count,max_log_Dnorm";
pub const METRIC_CSV_HEADER: &str = "sample_index,x,y,z,m11,m12,m22";

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Adds `wall_clock_seconds`, which makes reports non-reproducible.
    pub timing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub radius: usize,
    pub count: usize,
    pub log_count: f64,
    #[serde(rename = "max_log_Dnorm")]
    pub max_log_dnorm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthBlock {
    pub radius: usize,
    pub counts: Vec<usize>,
    pub exponent: Option<f64>,
    pub classification: Option<GrowthClass>,
    pub truncated: bool,
    /// `max_log_Dnorm` is the largest log operator norm over the standard
    /// sample set among elements of the ball.
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DerivsBlock {
    pub budget: usize,
    /// Exponent at the largest length.
    pub exponent: f64,
    pub lengths: Vec<DerivativeGrowth>,
    /// `count` is the number of words examined at each length.
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LyapunovBlock {
    #[serde(flatten)]
    pub report: LyapunovReport,
    pub sum: f64,
    pub period: Option<usize>,
    /// `(1/p)·log ρ(D w_p)` at the start point, for periodic words.
    pub period_log_spectral_radius: Option<f64>,
    /// Present when the start point is fixed by the period word.
    pub start_fixed_point: Option<FixedPointRecord>,
    pub birkhoff_steps: usize,
    /// Stepwise cocycle sum minus the whole-word stretch.
    pub birkhoff_defect: f64,
    /// Worst `|μ(φ∘f) − μ(φ)|` over coordinate test functions and generators.
    pub invariance_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PesinSummary {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub samples: usize,
    pub spd: bool,
    pub max_dilatation_per_generator: BTreeMap<String, f64>,
    /// `e^{2ε}`.
    pub dilatation_bound: f64,
    pub tail_slope: Option<f64>,
    pub predicted_slope: Option<f64>,
    pub shell_increments: Vec<f64>,
    pub lipschitz: Option<LipschitzReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PesinBlock {
    pub runs: Vec<PesinSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QcAveraged {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub dilatation: BTreeMap<String, f64>,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct QcBlock {
    pub round: BTreeMap<String, f64>,
    pub averaged: Vec<QcAveraged>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurBlock {
    pub radius: usize,
    pub ball_size: usize,
    pub min_pair_distance: f64,
    pub pigeonhole_bound: f64,
    pub volume_bound: f64,
    pub g_word: String,
    pub h_word: String,
    pub f_word: String,
    pub displacements: [f64; 3],
    pub degenerate: bool,
    pub f_order: Option<usize>,
    pub hull: Option<OrbitHull>,
    pub fixed_points: Vec<FixedPointRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderRow {
    pub word: String,
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderBlock {
    pub kmax: usize,
    pub rows: Vec<OrderRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjfamilyBlock {
    pub rotation: String,
    pub twist_axis: [f64; 3],
    #[serde(flatten)]
    pub table: ConjugationTable,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Results {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivs: Option<DerivsBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub crgrowth: Option<CrGrowthReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<LyapunovBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pesin: Option<PesinBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qc: Option<QcBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recur: Option<RecurBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<OrderBlock>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conjfamily: Option<ConjfamilyBlock>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub library_version: String,
    pub scenario: Scenario,
    pub seed: u64,
    pub truncated: bool,
    pub experiments: Vec<Experiment>,
    pub results: Results,
    pub errors: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
    /// Averaged metrics per epsilon, for CSV output.
    #[serde(skip)]
    pub metric_fields: Vec<MetricField>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// JSON for one result block, as emitted by the single-experiment commands.
    pub fn block_json(&self, experiment: Experiment) -> Option<String> {
        let value = serde_json::to_value(&self.results).expect("results serialize");
        value.get(experiment.name()).map(|v| {
            let mut s = serde_json::to_string_pretty(v).expect("value serializes");
            s.push('\n');
            s
        })
    }

    /// CSV tables this report can produce, as `(file stem, contents)`.
    pub fn csv_tables(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if let Some(g) = &self.results.growth {
            out.push(("growth".to_string(), table_csv(&g.rows)));
        }
        if let Some(d) = &self.results.derivs {
            out.push(("derivs".to_string(), table_csv(&d.rows)));
        }
        if self.results.pesin.is_some() {
            for (i, field) in self.metric_fields.iter().enumerate() {
                out.push((format!("pesin-{i}"), metric_csv(field)));
            }
        }
        out
    }

    /// Writes the JSON report and, for CSV output, every table next to it.
    pub fn write_to(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join(format!("{}.json", self.scenario.name));
        std::fs::write(&path, self.to_json())?;
        written.push(path);
        if format == OutputFormat::Csv {
            for (stem, body) in self.csv_tables() {
                let path = dir.join(format!("{}-{stem}.csv", self.scenario.name));
                std::fs::write(&path, body)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

pub fn table_csv(rows: &[TableRow]) -> String {
    let mut s = String::from(GROWTH_CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.radius, r.count, r.log_count, r.max_log_dnorm
        );
    }
    s
}

pub fn metric_csv(field: &MetricField) -> String {
    let mut s = String::from(METRIC_CSV_HEADER);
    s.push('\n');
    for (i, (p, m)) in field.points.iter().zip(&field.matrices).enumerate() {
        let [x, y, z] = p.coords();
        let _ = writeln!(s, "{i},{x},{y},{z},{},{},{}", m[0], m[1], m[2]);
    }
    s
}

struct Runner<'a> {
    scenario: &'a Scenario,
    set: GeneratorSet,
    balls: BTreeMap<usize, WordBall>,
    shells: Option<ShellSums>,
    fields: Vec<MetricField>,
    truncated: bool,
}

impl<'a> Runner<'a> {
    fn ball(&mut self, radius: usize) -> &WordBall {
        let config = BallConfig {
            element_cap: self.scenario.element_cap,
            ..BallConfig::default()
        };
        let set = &self.set;
        let ball = self
            .balls
            .entry(radius)
            .or_insert_with(|| enumerate_ball_with(set, radius, config));
        self.truncated |= ball.is_truncated();
        ball
    }

    /// A ball that must be complete for the experiment to mean anything.
    fn full_ball(&mut self, radius: usize) -> Result<&WordBall> {
        let cap = self.scenario.element_cap;
        let ball = self.ball(radius);
        if ball.is_truncated() {
            return Err(Error::Truncated { cap });
        }
        Ok(ball)
    }

    fn generator_words(&self) -> Vec<(String, Diffeomorphism)> {
        (0..self.set.len())
            .map(|i| (self.set.names()[i].clone(), self.set.generator(i)))
            .collect()
    }

    fn pesin_radius(&self) -> usize {
        self.scenario
            .options
            .pesin
            .radius
            .unwrap_or(self.scenario.max_radius)
    }

    /// Averaged metrics for every epsilon, built once and shared by pesin and qc.
    fn ensure_fields(&mut self) -> Result<()> {
        if !self.fields.is_empty() {
            return Ok(());
        }
        let n = self.pesin_radius();
        let points = fibonacci_sphere(self.scenario.samples);
        let shells = shell_sums(self.full_ball(n)?, &points, n)?;
        self.fields = self
            .scenario
            .epsilon
            .values()
            .into_iter()
            .map(|eps| {
                MetricField::from_shells(
                    &shells,
                    eps,
                    n,
                    Weighting::Decaying,
                    format!("{} samples, ball radius {n}", points.len()),
                )
            })
            .collect();
        self.shells = Some(shells);
        Ok(())
    }

    fn growth(&mut self) -> Result<GrowthBlock> {
        let radius = self
            .scenario
            .options
            .growth
            .radius
            .unwrap_or(self.scenario.max_radius);
        let ball = self.ball(radius);
        let (exponent, classification) = match growth_exponent(ball) {
            Ok(g) => (Some(g.exponent), Some(g.classification)),
            Err(Error::Validation(_)) => (None, None),
            Err(e) => return Err(e),
        };
        let radius = ball.radius();
        let max_logs = shell_log_norm_maxima(ball);
        let mut running = f64::NEG_INFINITY;
        let rows = ball
            .counts()
            .iter()
            .enumerate()
            .map(|(k, &count)| {
                running = running.max(max_logs[k]);
                TableRow {
                    radius: k,
                    count,
                    log_count: (count as f64).ln(),
                    max_log_dnorm: running,
                }
            })
            .collect();
        Ok(GrowthBlock {
            radius,
            counts: ball.counts().to_vec(),
            exponent,
            classification,
            truncated: ball.is_truncated(),
            rows,
        })
    }

    fn derivs(&self) -> Result<DerivsBlock> {
        let o = &self.scenario.options.derivs;
        let radius = o.radius.unwrap_or(self.scenario.max_radius).max(1);
        let budget = o.budget.unwrap_or(DEFAULT_DERIV_BUDGET);
        let lengths: Vec<DerivativeGrowth> = (1..=radius)
            .map(|n| derivative_growth(&self.set, n, budget, self.scenario.seed))
            .collect();
        let rows = lengths
            .iter()
            .map(|d| TableRow {
                radius: d.length,
                count: d.words_examined,
                log_count: (d.words_examined as f64).ln(),
                max_log_dnorm: d.max_log_norm,
            })
            .collect();
        Ok(DerivsBlock {
            budget,
            exponent: lengths.last().map_or(0.0, |d| d.exponent),
            lengths,
            rows,
        })
    }

    fn crgrowth(&self) -> Result<CrGrowthReport> {
        let o = &self.scenario.options.crgrowth;
        let radius = o
            .radius
            .unwrap_or(self.scenario.max_radius.min(DEFAULT_CR_RADIUS));
        let budget = o.budget.unwrap_or(DEFAULT_CR_BUDGET);
        cr_growth_report(&self.set, radius, 2, budget, self.scenario.seed)
    }

    fn lyapunov(&self) -> Result<LyapunovBlock> {
        let o = &self.scenario.options.lyapunov;
        let start = SpherePoint::normalized(o.start)?;
        let word = match &o.word {
            Some(tokens) => {
                SymbolicWord::periodic(self.scenario.letters(&self.set, tokens, "word")?)?
            }
            None => SymbolicWord::random(self.scenario.seed, self.set.letters())?,
        };
        let report = lyapunov_pair(&self.set, &word, &start, o.steps, self.scenario.seed)?;
        let (period, period_log_spectral_radius, start_fixed_point) = match &word {
            SymbolicWord::Periodic { core } => {
                let p = core.len();
                let composite = word.composite(&self.set, p);
                let ev = eigenvalues(&composite.jacobian(&start));
                let rho = ev.iter().map(|[re, im]| re.hypot(*im)).fold(0.0, f64::max);
                let fixed = classify_periodic_point(&self.set, &composite, &start).ok();
                (Some(p), Some(rho.ln() / p as f64), fixed)
            }
            SymbolicWord::Random { .. } => (None, None, None),
        };
        let v = TangentVector::from_frame(start, [0.6, 0.8]);
        let birkhoff_defect = birkhoff_derivative_sum(&self.set, &word, &v, o.birkhoff_steps)?
            - full_word_log_stretch(&self.set, &word, &v, o.birkhoff_steps)?;
        let px = |p: &SpherePoint| p.x();
        let py = |p: &SpherePoint| p.y();
        let pz = |p: &SpherePoint| p.z();
        let invariance_defect =
            empirical_invariance_defect(&self.set, &word, &start, o.steps, &[&px, &py, &pz])?;
        Ok(LyapunovBlock {
            sum: report.sum(),
            report,
            period,
            period_log_spectral_radius,
            start_fixed_point,
            birkhoff_steps: o.birkhoff_steps,
            birkhoff_defect,
            invariance_defect,
        })
    }

    fn pesin(&mut self, errors: &mut BTreeMap<String, String>) -> Result<PesinBlock> {
        self.ensure_fields()?;
        let n = self.pesin_radius();
        let lip_n = self.scenario.options.pesin.lipschitz_radius.unwrap_or(n);
        let generators = self.generator_words();
        let shells = self.shells.as_ref().expect("shells built with the fields");
        let mut runs = Vec::with_capacity(self.fields.len());
        for field in &self.fields {
            let eps = field.epsilon;
            let mut dil = BTreeMap::new();
            for (name, g) in &generators {
                dil.insert(name.clone(), qc_dilatation(g, Some(field))?);
            }
            let tail = tail_from_shells(shells, eps, Weighting::Decaying);
            let lipschitz = match lipschitz_check_with(
                &self.set,
                eps,
                lip_n,
                Weighting::Decaying,
                self.scenario.samples,
            ) {
                Ok(r) => Some(r),
                Err(e) => {
                    errors.insert(format!("pesin.lipschitz[{eps}]"), e.to_string());
                    None
                }
            };
            runs.push(PesinSummary {
                epsilon: eps,
                truncation: n,
                samples: field.matrices.len(),
                spd: field.is_spd(),
                max_dilatation_per_generator: dil,
                dilatation_bound: (2.0 * eps).exp(),
                tail_slope: tail.slope,
                predicted_slope: tail.predicted_slope,
                shell_increments: tail.increments,
                lipschitz,
            });
        }
        Ok(PesinBlock { runs })
    }

    fn qc(&mut self, errors: &mut BTreeMap<String, String>) -> Result<QcBlock> {
        let generators = self.generator_words();
        let mut round = BTreeMap::new();
        for (name, g) in &generators {
            round.insert(name.clone(), qc_dilatation(g, None)?);
        }
        let mut averaged = Vec::new();
        match self.ensure_fields() {
            Ok(()) => {
                for field in &self.fields {
                    let mut dilatation = BTreeMap::new();
                    for (name, g) in &generators {
                        dilatation.insert(name.clone(), qc_dilatation(g, Some(field))?);
                    }
                    averaged.push(QcAveraged {
                        epsilon: field.epsilon,
                        truncation: field.truncation,
                        dilatation,
                        bound: (2.0 * field.epsilon).exp(),
                    });
                }
            }
            Err(e) => {
                errors.insert("qc.averaged".into(), e.to_string());
            }
        }
        Ok(QcBlock { round, averaged })
    }

    fn recur(&mut self, errors: &mut BTreeMap<String, String>) -> Result<RecurBlock> {
        let o = self.scenario.options.recur.clone();
        let radius = o.radius.unwrap_or(self.scenario.max_radius);
        let triple = match o.triple {
            Some(t) => TripleConfig::new([
                SpherePoint::normalized(t[0])?,
                SpherePoint::normalized(t[1])?,
                SpherePoint::normalized(t[2])?,
            ])?,
            None => TripleConfig::default(),
        };
        let samples = self.scenario.samples;
        let ball = self.full_ball(radius)?;
        let pair = pigeonhole_pair(ball, &triple)?;
        let set = self.set.clone();
        let f_order = element_order(&pair.f, o.kmax);
        let hull = match orbit_hull_diameter(&set, &pair.f, &triple.points[0], o.hull_steps) {
            Ok(h) => Some(h),
            Err(e) => {
                errors.insert("recur.hull".into(), e.to_string());
                None
            }
        };
        let mut fixed_points = Vec::new();
        if !pair.degenerate {
            if let Some(record) = fixed_point_near_minimum(&set, &pair.f, samples) {
                fixed_points.push(record);
            }
        }
        for (i, seed) in o.fixed_points.iter().enumerate() {
            let attempt = self
                .scenario
                .letters(&set, &seed.word, "word")
                .and_then(|letters| set.word(letters))
                .and_then(|w| {
                    find_fixed_point(&set, &w, &SpherePoint::normalized(seed.seed)?, seed.radius)
                });
            match attempt {
                Ok(record) => fixed_points.push(record),
                Err(e) => {
                    errors.insert(format!("recur.fixed_points[{i}]"), e.to_string());
                }
            }
        }
        Ok(RecurBlock {
            radius,
            ball_size: pair.ball_size,
            min_pair_distance: pair.triple_distance,
            pigeonhole_bound: pair.pigeonhole_bound,
            volume_bound: pair.volume_bound,
            g_word: pair.g_word,
            h_word: pair.h_word,
            f_word: pair.f_word,
            displacements: pair.displacements,
            degenerate: pair.degenerate,
            f_order,
            hull,
            fixed_points,
        })
    }

    fn order(&self) -> Result<OrderBlock> {
        let o = &self.scenario.options.order;
        let words: Vec<Diffeomorphism> = if o.words.is_empty() {
            self.generator_words().into_iter().map(|(_, w)| w).collect()
        } else {
            o.words
                .iter()
                .map(|t| self.set.word(self.scenario.letters(&self.set, t, "word")?))
                .collect::<Result<_>>()?
        };
        let rows = words
            .iter()
            .map(|w| OrderRow {
                word: self.set.describe(w),
                order: element_order(w, o.kmax),
            })
            .collect();
        Ok(OrderBlock { kmax: o.kmax, rows })
    }

    fn conjfamily(&self) -> Result<ConjfamilyBlock> {
        let o = &self.scenario.options.conjfamily;
        let spec = self
            .scenario
            .generators
            .iter()
            .find(|g| match &o.rotation {
                Some(name) => g.name() == name,
                None => matches!(g, GeneratorSpec::Rotation { .. }),
            })
            .ok_or_else(|| {
                Error::Validation("conjugated family needs a rotation generator".into())
            })?;
        let rotation = spec.primitive()?;
        let twist_axis = o
            .twist_axis
            .unwrap_or_else(|| default_twist_axis(&rotation));
        let table = conjugated_rotation_family(&rotation, twist_axis, &o.strengths, o.kmax)?;
        Ok(ConjfamilyBlock {
            rotation: spec.name().to_string(),
            twist_axis,
            table,
        })
    }
}

/// Twist axis for conjugation: `x`, unless the rotation axis is close to it.
fn default_twist_axis(rotation: &Primitive) -> [f64; 3] {
    match rotation {
        Primitive::Rotation { axis, .. }
            if axis[0].abs()
                > 0.9 * (axis[0].powi(2) + axis[1].powi(2) + axis[2].powi(2)).sqrt() =>
        {
            [0.0, 0.0, 1.0]
        }
        _ => [1.0, 0.0, 0.0],
    }
}

/// Per-shell maxima of `log ‖D_x g‖` over the standard sample set.
fn shell_log_norm_maxima(ball: &WordBall) -> Vec<f64> {
    let radius = ball.radius();
    let per_point: Vec<Vec<f64>> = standard_sample_set()
        .par_iter()
        .map(|x| {
            let walked = ball.images_and_jacobians(x);
            (0..=radius)
                .map(|k| {
                    ball.shell(k)
                        .map(|i| singular_values(&walked[i].1).0.ln())
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .collect()
        })
        .collect();
    (0..=radius)
        .map(|k| {
            per_point
                .iter()
                .map(|v| v[k])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Newton from the sample point `f` moves least, if it lands.
fn fixed_point_near_minimum(
    set: &GeneratorSet,
    f: &Diffeomorphism,
    samples: usize,
) -> Option<FixedPointRecord> {
    let best = fibonacci_sphere(samples)
        .into_iter()
        .map(|p| (geodesic_distance(&f.evaluate(&p), &p), p))
        .min_by(|a, b| a.0.total_cmp(&b.0))?;
    if best.0 >= RECURRENCE_FIXED_POINT_RADIUS {
        return None;
    }
    find_fixed_point(set, f, &best.1, RECURRENCE_FIXED_POINT_RADIUS).ok()
}

/// Runs the scenario's experiments in the fixed order.
pub fn run_scenario(scenario: &Scenario, options: RunOptions) -> Result<Report> {
    scenario.validate()?;
    let started = Instant::now();
    let mut runner = Runner {
        scenario,
        set: scenario.generator_set()?,
        balls: BTreeMap::new(),
        shells: None,
        fields: Vec::new(),
        truncated: false,
    };
    let mut results = Results::default();
    let mut errors = BTreeMap::new();
    let mut experiments = Vec::new();
    for exp in Experiment::ALL {
        if !scenario.runs(exp) {
            continue;
        }
        experiments.push(exp);
        let outcome: Result<()> = match exp {
            Experiment::Growth => runner.growth().map(|b| results.growth = Some(b)),
            Experiment::Derivs => runner.derivs().map(|b| results.derivs = Some(b)),
            Experiment::Crgrowth => runner.crgrowth().map(|b| results.crgrowth = Some(b)),
            Experiment::Lyapunov => runner.lyapunov().map(|b| results.lyapunov = Some(b)),
            Experiment::Pesin => runner.pesin(&mut errors).map(|b| results.pesin = Some(b)),
            Experiment::Qc => runner.qc(&mut errors).map(|b| results.qc = Some(b)),
            Experiment::Recur => runner.recur(&mut errors).map(|b| results.recur = Some(b)),
            Experiment::Order => runner.order().map(|b| results.order = Some(b)),
            Experiment::Conjfamily => runner.conjfamily().map(|b| results.conjfamily = Some(b)),
        };
        if let Err(e) = outcome {
            errors.insert(exp.name().to_string(), e.to_string());
        }
    }
    Ok(Report {
        library_version: LIBRARY_VERSION.to_string(),
        scenario: scenario.clone(),
        seed: scenario.seed,
        truncated: runner.truncated,
        experiments,
        results,
        errors,
        wall_clock_seconds: options.timing.then(|| started.elapsed().as_secs_f64()),
        metric_fields: runner.fields,
    })
}
