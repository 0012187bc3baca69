//! Shared helpers: generator sets, a reduced-word oracle and a small JSON
//! schema validator covering the keywords the report schema uses.

#![allow(dead_code)]

use std::path::PathBuf;

use burnside_lab::diffeo::{Letter, Primitive};
use burnside_lab::words::{GeneratorSet, NamedPrimitive};
use serde_json::Value;

pub const FREE_ANGLE: f64 = 1.230_959_417_340_774_7;

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn scenario_path(name: &str) -> PathBuf {
    manifest_dir()
        .join("scenarios")
        .join(format!("{name}.json"))
}

pub const SCENARIOS: [&str; 5] = [
    "so3-baseline",
    "cyclic4",
    "commuting-twists",
    "free-rotations",
    "linked-twists",
];

fn set(prims: Vec<(&str, Primitive)>) -> GeneratorSet {
    GeneratorSet::new(
        prims
            .into_iter()
            .map(|(n, p)| NamedPrimitive::new(n, p))
            .collect(),
        true,
    )
    .unwrap()
}

pub fn free_rotations() -> GeneratorSet {
    set(vec![
        (
            "a",
            Primitive::rotation([1.0, 0.0, 0.0], FREE_ANGLE).unwrap(),
        ),
        (
            "b",
            Primitive::rotation([0.0, 0.0, 1.0], FREE_ANGLE).unwrap(),
        ),
    ])
}

pub fn quarter_turns() -> GeneratorSet {
    set(vec![
        (
            "rz",
            Primitive::rotation([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2).unwrap(),
        ),
        (
            "rx",
            Primitive::rotation([1.0, 0.0, 0.0], std::f64::consts::FRAC_PI_2).unwrap(),
        ),
    ])
}

pub fn cyclic4() -> GeneratorSet {
    set(vec![(
        "r",
        Primitive::rotation([0.0, 0.0, 1.0], std::f64::consts::FRAC_PI_2).unwrap(),
    )])
}

pub fn commuting_twists() -> GeneratorSet {
    set(vec![
        ("ta", Primitive::twist([0.0, 0.0, 1.0], 1.0).unwrap()),
        (
            "tb",
            Primitive::twist([0.0, 0.0, 1.0], 2f64.sqrt()).unwrap(),
        ),
    ])
}

pub fn linked_twists() -> GeneratorSet {
    set(vec![
        ("tz", Primitive::twist([0.0, 0.0, 1.0], 2.0).unwrap()),
        ("tx", Primitive::twist([1.0, 0.0, 0.0], 2.0).unwrap()),
    ])
}

pub fn all_sets() -> Vec<(&'static str, GeneratorSet)> {
    vec![
        ("so3-baseline", quarter_turns()),
        ("cyclic4", cyclic4()),
        ("commuting-twists", commuting_twists()),
        ("free-rotations", free_rotations()),
        ("linked-twists", linked_twists()),
    ]
}

/// Cancels adjacent inverse pairs.
pub fn freely_reduce(word: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for &l in word {
        match out.last() {
            Some(&prev) if prev.index == l.index && prev.inverse != l.inverse => {
                out.pop();
            }
            _ => out.push(l),
        }
    }
    out
}

/// Every freely reduced word of length at most `n`.
pub fn reduced_words(letters: &[Letter], n: usize) -> Vec<Vec<Letter>> {
    let mut all = vec![Vec::new()];
    let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in letters {
                if let Some(last) = w.last() {
                    if last.index == l.index && last.inverse != l.inverse {
                        continue;
                    }
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

pub fn load_schema() -> Value {
    let text = std::fs::read_to_string(manifest_dir().join("schema/report.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Errors as `path: message`; empty when `value` conforms.
pub fn validate(schema: &Value, value: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(schema, schema, value, "$", &mut errors);
    errors
}

fn resolve<'a>(root: &'a Value, reference: &str) -> &'a Value {
    let pointer = reference.strip_prefix('#').expect("local reference");
    root.pointer(pointer)
        .unwrap_or_else(|| panic!("dangling reference {reference}"))
}

fn type_matches(name: &str, v: &Value) -> bool {
    match name {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64() || v.as_f64().is_some_and(|f| f.fract() == 0.0),
        other => panic!("unsupported type keyword {other}"),
    }
}

const KNOWN: [&str; 15] = [
    "$schema",
    "title",
    "description",
    "$defs",
    "$ref",
    "type",
    "properties",
    "required",
    "additionalProperties",
    "items",
    "minItems",
    "maxItems",
    "enum",
    "anyOf",
    "minimum",
];

fn check(root: &Value, schema: &Value, v: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(s) = schema.as_object() else {
        if schema == &Value::Bool(false) {
            errors.push(format!("{path}: not allowed"));
        }
        return;
    };
    for key in s.keys() {
        assert!(
            KNOWN.contains(&key.as_str()),
            "validator does not support `{key}`"
        );
    }
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        check(root, resolve(root, r), v, path, errors);
    }
    if let Some(t) = s.get("type") {
        let ok = match t {
            Value::String(name) => type_matches(name, v),
            Value::Array(names) => names.iter().any(|n| type_matches(n.as_str().unwrap(), v)),
            _ => panic!("bad type keyword"),
        };
        if !ok {
            errors.push(format!("{path}: expected type {t}, got {v}"));
            return;
        }
    }
    if let Some(Value::Array(options)) = s.get("enum") {
        if !options.contains(v) {
            errors.push(format!("{path}: {v} not in {options:?}"));
        }
    }
    if let Some(Value::Array(options)) = s.get("anyOf") {
        if !options.iter().any(|o| validate_sub(root, o, v)) {
            errors.push(format!("{path}: matches no alternative"));
        }
    }
    if let (Some(min), Some(x)) = (s.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            errors.push(format!("{path}: {x} below minimum {min}"));
        }
    }
    if let Value::Object(map) = v {
        if let Some(Value::Array(req)) = s.get("required") {
            for r in req {
                if !map.contains_key(r.as_str().unwrap()) {
                    errors.push(format!("{path}: missing `{}`", r.as_str().unwrap()));
                }
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, child) in map {
            let sub = format!("{path}.{k}");
            match props.and_then(|p| p.get(k)) {
                Some(ps) => check(root, ps, child, &sub, errors),
                None => match s.get("additionalProperties") {
                    Some(Value::Bool(false)) => errors.push(format!("{sub}: unexpected property")),
                    Some(extra @ Value::Object(_)) => check(root, extra, child, &sub, errors),
                    _ => {}
                },
            }
        }
    }
    if let Value::Array(items) = v {
        if let Some(n) = s.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < n {
                errors.push(format!("{path}: fewer than {n} items"));
            }
        }
        if let Some(n) = s.get("maxItems").and_then(Value::as_u64) {
            if (items.len() as u64) > n {
                errors.push(format!("{path}: more than {n} items"));
            }
        }
        if let Some(item_schema) = s.get("items") {
            for (i, item) in items.iter().enumerate() {
                check(root, item_schema, item, &format!("{path}[{i}]"), errors);
            }
        }
    }
}

fn validate_sub(root: &Value, schema: &Value, v: &Value) -> bool {
    let mut e = Vec::new();
    check(root, schema, v, "", &mut e);
    e.is_empty()
}
