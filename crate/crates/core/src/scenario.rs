//! Scenario files: a generator set plus the experiments to run on it.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::diffeo::{Letter, Primitive};
use crate::error::{Error, Result};
use crate::sphere::SpherePoint;
use crate::words::{GeneratorSet, NamedPrimitive};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Growth,
    Derivs,
    Crgrowth,
    Lyapunov,
    Pesin,
    Qc,
    Recur,
    Order,
    Conjfamily,
}

impl Experiment {
    /// Execution order.
    pub const ALL: [Experiment; 9] = [
        Experiment::Growth,
        Experiment::Derivs,
        Experiment::Crgrowth,
        Experiment::Lyapunov,
        Experiment::Pesin,
        Experiment::Qc,
        Experiment::Recur,
        Experiment::Order,
        Experiment::Conjfamily,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Growth => "growth",
            Experiment::Derivs => "derivs",
            Experiment::Crgrowth => "crgrowth",
            Experiment::Lyapunov => "lyapunov",
            Experiment::Pesin => "pesin",
            Experiment::Qc => "qc",
            Experiment::Recur => "recur",
            Experiment::Order => "order",
            Experiment::Conjfamily => "conjfamily",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorSpec {
    Rotation {
        name: String,
        axis: [f64; 3],
        angle: f64,
    },
    Twist {
        name: String,
        axis: [f64; 3],
        strength: f64,
    },
    /// Coefficients as `[re, im]`, determinant 1.
    Mobius {
        name: String,
        a: [f64; 2],
        b: [f64; 2],
        c: [f64; 2],
        d: [f64; 2],
    },
}

impl GeneratorSpec {
    pub fn name(&self) -> &str {
        match self {
            Self::Rotation { name, .. } | Self::Twist { name, .. } | Self::Mobius { name, .. } => {
                name
            }
        }
    }

    pub fn primitive(&self) -> Result<Primitive> {
        let cx = |v: &[f64; 2]| Complex::new(v[0], v[1]);
        match self {
            Self::Rotation { axis, angle, .. } => Primitive::rotation(*axis, *angle),
            Self::Twist { axis, strength, .. } => Primitive::twist(*axis, *strength),
            Self::Mobius { a, b, c, d, .. } => Primitive::mobius(cx(a), cx(b), cx(c), cx(d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonSpec {
    One(f64),
    Many(Vec<f64>),
}

impl EpsilonSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::One(e) => vec![*e],
            Self::Many(v) => v.clone(),
        }
    }
}

impl Default for EpsilonSpec {
    fn default() -> Self {
        Self::One(0.5)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthOptions {
    pub radius: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivsOptions {
    pub radius: Option<usize>,
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovOptions {
    /// Periodic core letters; random i.i.d. letters when absent.
    pub word: Option<Vec<String>>,
    pub start: [f64; 3],
    pub steps: usize,
    /// Word length for the Birkhoff identity check.
    pub birkhoff_steps: usize,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self {
            word: None,
            start: [0.3, -0.5, 0.8],
            steps: 2000,
            birkhoff_steps: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PesinOptions {
    pub radius: Option<usize>,
    /// Truncation used by the Lipschitz check; defaults to the radius.
    pub lipschitz_radius: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointSeed {
    pub word: Vec<String>,
    pub seed: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecurOptions {
    pub radius: Option<usize>,
    pub triple: Option<[[f64; 3]; 3]>,
    pub kmax: usize,
    /// Orbit-hull length when the recurrence element has no finite order.
    pub hull_steps: usize,
    pub fixed_points: Vec<FixedPointSeed>,
}

impl Default for RecurOptions {
    fn default() -> Self {
        Self {
            radius: None,
            triple: None,
            kmax: 64,
            hull_steps: 5,
            fixed_points: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderOptions {
    pub kmax: usize,
    /// Words to test; every generator when empty.
    pub words: Vec<Vec<String>>,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self {
            kmax: 64,
            words: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConjfamilyOptions {
    /// Rotation generator to conjugate; the first rotation when absent.
    pub rotation: Option<String>,
    pub twist_axis: Option<[f64; 3]>,
    pub strengths: Vec<f64>,
    pub kmax: usize,
}

impl Default for ConjfamilyOptions {
    fn default() -> Self {
        Self {
            rotation: None,
            twist_axis: None,
            strengths: vec![1.6, 0.8, 0.4, 0.2, 0.1],
            kmax: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentOptions {
    pub growth: GrowthOptions,
    pub derivs: DerivsOptions,
    pub crgrowth: DerivsOptions,
    pub lyapunov: LyapunovOptions,
    pub pesin: PesinOptions,
    pub recur: RecurOptions,
    pub order: OrderOptions,
    pub conjfamily: ConjfamilyOptions,
}

fn default_true() -> bool {
    true
}

fn default_element_cap() -> usize {
    crate::words::DEFAULT_ELEMENT_CAP
}

fn default_samples() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default = "default_true")]
    pub symmetric: bool,
    #[serde(default)]
    pub epsilon: EpsilonSpec,
    pub max_radius: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub output_format: OutputFormat,
    /// Resource cap on word-ball enumeration.
    #[serde(default = "default_element_cap")]
    pub element_cap: usize,
    #[serde(default)]
    pub options: ExperimentOptions,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Scenario {
        path: path.into(),
        message: message.into(),
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "name must be nonempty"));
        }
        if self.generators.is_empty() {
            return Err(invalid("generators", "at least one generator is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, g) in self.generators.iter().enumerate() {
            if g.name().is_empty()
                || g.name().contains(char::is_whitespace)
                || g.name().contains('^')
            {
                return Err(invalid(
                    format!("generators[{i}].name"),
                    "generator names must be nonempty, without whitespace or `^`",
                ));
            }
            if !seen.insert(g.name()) {
                return Err(invalid(
                    format!("generators[{i}].name"),
                    format!("duplicate generator name `{}`", g.name()),
                ));
            }
            g.primitive()
                .map_err(|e| invalid(format!("generators[{i}]"), e.to_string()))?;
        }
        let eps = self.epsilon.values();
        if eps.is_empty() {
            return Err(invalid("epsilon", "epsilon list must be nonempty"));
        }
        for (i, e) in eps.iter().enumerate() {
            if !(*e > 0.0) || !e.is_finite() {
                let path = match self.epsilon {
                    EpsilonSpec::One(_) => "epsilon".to_string(),
                    EpsilonSpec::Many(_) => format!("epsilon[{i}]"),
                };
                return Err(invalid(path, "epsilon must be positive"));
            }
        }
        if self.max_radius < 1 {
            return Err(invalid("max_radius", "max_radius must be at least 1"));
        }
        if self.samples < 10 {
            return Err(invalid("samples", "samples must be at least 10"));
        }
        if self.element_cap < 1 {
            return Err(invalid("element_cap", "element_cap must be at least 1"));
        }
        let mut exps = BTreeSet::new();
        for (i, e) in self.experiments.iter().enumerate() {
            if !exps.insert(*e) {
                return Err(invalid(
                    format!("experiments[{i}]"),
                    format!("duplicate experiment `{}`", e.name()),
                ));
            }
        }
        let set = self.generator_set()?;
        let o = &self.options;
        if let Some(word) = &o.lyapunov.word {
            if word.is_empty() {
                return Err(invalid("options.lyapunov.word", "word must be nonempty"));
            }
            self.letters(&set, word, "options.lyapunov.word")?;
        }
        SpherePoint::normalized(o.lyapunov.start)
            .map_err(|e| invalid("options.lyapunov.start", e.to_string()))?;
        if o.lyapunov.steps < crate::cocycle::LYAPUNOV_MIN_STEPS {
            return Err(invalid(
                "options.lyapunov.steps",
                "steps must be at least 100",
            ));
        }
        if o.lyapunov.birkhoff_steps < 1 {
            return Err(invalid(
                "options.lyapunov.birkhoff_steps",
                "must be at least 1",
            ));
        }
        for (i, fp) in o.recur.fixed_points.iter().enumerate() {
            let path = format!("options.recur.fixed_points[{i}]");
            self.letters(&set, &fp.word, &format!("{path}.word"))?;
            SpherePoint::normalized(fp.seed)
                .map_err(|e| invalid(format!("{path}.seed"), e.to_string()))?;
            if !(fp.radius > 0.0) {
                return Err(invalid(format!("{path}.radius"), "radius must be positive"));
            }
        }
        if let Some(triple) = o.recur.triple {
            let pts = triple
                .iter()
                .map(|c| SpherePoint::normalized(*c))
                .collect::<Result<Vec<_>>>()
                .and_then(|p| crate::recurrence::TripleConfig::new([p[0], p[1], p[2]]));
            pts.map_err(|e| invalid("options.recur.triple", e.to_string()))?;
        }
        for (k, kmax) in [
            ("recur", o.recur.kmax),
            ("order", o.order.kmax),
            ("conjfamily", o.conjfamily.kmax),
        ] {
            if kmax < 1 {
                return Err(invalid(
                    format!("options.{k}.kmax"),
                    "kmax must be at least 1",
                ));
            }
        }
        for (i, w) in o.order.words.iter().enumerate() {
            self.letters(&set, w, &format!("options.order.words[{i}]"))?;
        }
        if let Some(r) = &o.conjfamily.rotation {
            match self.generators.iter().find(|g| g.name() == r) {
                Some(GeneratorSpec::Rotation { .. }) => {}
                _ => {
                    return Err(invalid(
                        "options.conjfamily.rotation",
                        format!("`{r}` is not a rotation generator"),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn generator_set(&self) -> Result<GeneratorSet> {
        let prims = self
            .generators
            .iter()
            .map(|g| Ok(NamedPrimitive::new(g.name(), g.primitive()?)))
            .collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(prims, self.symmetric)
    }

    pub fn letters(
        &self,
        set: &GeneratorSet,
        tokens: &[String],
        path: &str,
    ) -> Result<Vec<Letter>> {
        tokens
            .iter()
            .enumerate()
            .map(|(i, t)| {
                set.parse_letter(t)
                    .map_err(|e| invalid(format!("{path}[{i}]"), e.to_string()))
            })
            .collect()
    }

    pub fn runs(&self, e: Experiment) -> bool {
        self.experiments.contains(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "name": "mini",
        "generators": [{"kind": "rotation", "name": "r", "axis": [0, 0, 1], "angle": 1.5707963267948966}],
        "max_radius": 4,
        "experiments": ["growth"]
    }"#;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.seed, 0);
        assert!(s.symmetric);
        assert_eq!(s.output_format, OutputFormat::Json);
        assert_eq!(s.experiments, vec![Experiment::Growth]);
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = MINIMAL.replace("\"max_radius\"", "\"colour\": 1, \"max_radius\"");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(err.to_string().contains("colour"));
    }

    #[test]
    fn duplicate_names_and_bad_epsilon() {
        let dup = MINIMAL.replace(
            "\"max_radius\"",
            "\"max_radius\": 3, \"ignored\": 0, \"max_radius2\"",
        );
        assert!(parse_scenario(&dup).is_err());
        let dup = r#"{"name": "d", "generators": [
            {"kind": "twist", "name": "a", "axis": [0,0,1], "strength": 1},
            {"kind": "twist", "name": "a", "axis": [1,0,0], "strength": 1}],
            "max_radius": 3, "experiments": []}"#;
        let err = parse_scenario(dup).unwrap_err();
        assert!(
            err.to_string().contains("duplicate generator name `a`"),
            "{err}"
        );
        assert!(err.to_string().contains("generators[1].name"));
        let neg = MINIMAL.replace("\"max_radius\"", "\"epsilon\": -1, \"max_radius\"");
        let err = parse_scenario(&neg).unwrap_err();
        assert!(
            err.to_string().contains("epsilon must be positive"),
            "{err}"
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_scenario("{\n  \"name\": \"x\",\n  oops\n}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
