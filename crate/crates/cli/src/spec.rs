//! Experiment configuration: a TOML document with `[sweep]`, `[de]` and
//! `[sim]` sections, plus per-key overrides.

use std::fmt;
use std::path::PathBuf;

use markov_aloha::density::{LlrGrid, Projection, DEFAULT_MAX_ITER, DEFAULT_POINTS, DEFAULT_TOL};
use markov_aloha::estimators::LLR_MAX;
use markov_aloha::sim::{EstimatorChoice, DEFAULT_BURN_IN, DEFAULT_HORIZON, DEFAULT_REPLICATIONS};
use markov_aloha::SourceParams;
use serde::Deserialize;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("malformed document: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown override key `{0}`")]
    UnknownKey(String),
}

fn invalid(key: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Random,
    Reactive,
}

impl StrategyKind {
    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Random => "random",
            StrategyKind::Reactive => "reactive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Analytic,
    De,
    Simulate,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Analytic => "analytic",
            Route::De => "de",
            Route::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Activation probability of the random strategy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaRule {
    /// `1 / M`, the throughput-optimal choice.
    InverseNodes,
    Fixed(f64),
}

impl AlphaRule {
    pub fn value(self, nodes: usize) -> f64 {
        match self {
            AlphaRule::InverseNodes => 1.0 / nodes as f64,
            AlphaRule::Fixed(a) => a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeSettings {
    pub grid: LlrGrid,
    pub tol: f64,
    pub max_iter: usize,
    pub projection: Projection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimSettings {
    pub horizon: u64,
    pub burn_in: u64,
    pub replications: usize,
    pub seed: u64,
    pub estimators: EstimatorChoice,
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub nodes: Vec<usize>,
    pub sources: Vec<SourceParams>,
    pub strategies: Vec<StrategyKind>,
    pub alpha: AlphaRule,
    pub routes: Vec<Route>,
    pub de: DeSettings,
    pub sim: SimSettings,
    pub out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawSpec {
    name: String,
    out: Option<PathBuf>,
    sweep: RawSweep,
    #[serde(default)]
    de: RawDe,
    #[serde(default)]
    sim: RawSim,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawSweep {
    nodes: Vec<i64>,
    sources: Vec<(f64, f64)>,
    strategies: Vec<StrategyKind>,
    alpha: Option<Value>,
    routes: Vec<Route>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawDe {
    llr_max: Option<f64>,
    points: Option<i64>,
    tol: Option<f64>,
    max_iter: Option<i64>,
    projection: Option<String>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct RawSim {
    horizon: Option<i64>,
    burn_in: Option<i64>,
    replications: Option<i64>,
    seed: Option<i64>,
    estimators: Option<String>,
}

/// Kind of value an override key expects on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyKind {
    Str,
    Int,
    Float,
    IntList,
    StrList,
    PairList,
    /// `"1/M"` or a number.
    Alpha,
}

/// Every configurable key as `(section, key, kind)`; the empty section is
/// the top level.
pub const KEYS: &[(&str, &str, KeyKind)] = &[
    ("", "name", KeyKind::Str),
    ("", "out", KeyKind::Str),
    ("sweep", "nodes", KeyKind::IntList),
    ("sweep", "sources", KeyKind::PairList),
    ("sweep", "strategies", KeyKind::StrList),
    ("sweep", "alpha", KeyKind::Alpha),
    ("sweep", "routes", KeyKind::StrList),
    ("de", "llr-max", KeyKind::Float),
    ("de", "points", KeyKind::Int),
    ("de", "tol", KeyKind::Float),
    ("de", "max-iter", KeyKind::Int),
    ("de", "projection", KeyKind::Str),
    ("sim", "horizon", KeyKind::Int),
    ("sim", "burn-in", KeyKind::Int),
    ("sim", "replications", KeyKind::Int),
    ("sim", "seed", KeyKind::Int),
    ("sim", "estimators", KeyKind::Str),
];

fn key_path(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn parse_number(key: &str, raw: &str) -> Result<Value, SpecError> {
    if let Ok(i) = raw.parse::<i64>() {
        return Ok(Value::Integer(i));
    }
    raw.parse::<f64>()
        .map(Value::Float)
        .map_err(|_| invalid(key, format!("`{raw}` is not a number")))
}

/// Converts a command-line value into the TOML value of `kind`. Lists are
/// comma separated; source pairs are written `q01:q10`.
pub fn override_value(key: &str, kind: KeyKind, raw: &str) -> Result<Value, SpecError> {
    let items = || raw.split(',').map(str::trim).filter(|s| !s.is_empty());
    Ok(match kind {
        KeyKind::Str => Value::String(raw.to_string()),
        KeyKind::Int => Value::Integer(
            raw.trim()
                .parse()
                .map_err(|_| invalid(key, format!("`{raw}` is not an integer")))?,
        ),
        KeyKind::Float => parse_number(key, raw.trim())?,
        KeyKind::Alpha => {
            let t = raw.trim();
            if t.contains('/') {
                Value::String(t.to_string())
            } else {
                parse_number(key, t)?
            }
        }
        KeyKind::IntList => Value::Array(
            items()
                .map(|s| {
                    s.parse()
                        .map(Value::Integer)
                        .map_err(|_| invalid(key, format!("`{s}` is not an integer")))
                })
                .collect::<Result<_, _>>()?,
        ),
        KeyKind::StrList => Value::Array(items().map(|s| Value::String(s.to_string())).collect()),
        KeyKind::PairList => Value::Array(
            items()
                .map(|s| {
                    let (a, b) = s
                        .split_once(':')
                        .ok_or_else(|| invalid(key, format!("`{s}` is not of the form q01:q10")))?;
                    Ok(Value::Array(vec![
                        parse_number(key, a.trim())?,
                        parse_number(key, b.trim())?,
                    ]))
                })
                .collect::<Result<_, SpecError>>()?,
        ),
    })
}

/// Sets `key` (a bare key such as `nodes` or a dotted `sweep.nodes`) in the
/// document from its command-line form.
pub fn apply_override(doc: &mut Table, key: &str, raw: &str) -> Result<(), SpecError> {
    let (section, name, kind) = KEYS
        .iter()
        .find(|(s, k, _)| *k == key || key_path(s, k) == key)
        .copied()
        .ok_or_else(|| SpecError::UnknownKey(key.to_string()))?;
    let path = key_path(section, name);
    let value = override_value(&path, kind, raw)?;
    let table = if section.is_empty() {
        doc
    } else {
        doc.entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| invalid(section, "must be a table"))?
    };
    table.insert(name.to_string(), value);
    Ok(())
}

/// Parses a document into its raw table, without validation.
pub fn parse_table(text: &str) -> Result<Table, SpecError> {
    Ok(text.parse::<Table>()?)
}

/// Parses and validates a configuration document.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, SpecError> {
    parse_spec_with(text, &[])
}

/// Parses a document, applies `(key, value)` overrides, then validates.
pub fn parse_spec_with(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ExperimentSpec, SpecError> {
    let mut doc = parse_table(text)?;
    for (k, v) in overrides {
        apply_override(&mut doc, k, v)?;
    }
    from_table(doc)
}

/// Validates an already assembled document.
pub fn from_table(doc: Table) -> Result<ExperimentSpec, SpecError> {
    let raw: RawSpec = RawSpec::deserialize(doc)?;
    validate(raw)
}

fn positive(key: &str, v: i64) -> Result<u64, SpecError> {
    u64::try_from(v)
        .ok()
        .filter(|&v| v > 0)
        .ok_or_else(|| invalid(key, format!("must be a positive integer, got {v}")))
}

fn non_empty<T>(key: &str, v: &[T]) -> Result<(), SpecError> {
    if v.is_empty() {
        Err(invalid(key, "must not be empty"))
    } else {
        Ok(())
    }
}

fn sorted_unique<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v.dedup();
    v
}

fn validate(raw: RawSpec) -> Result<ExperimentSpec, SpecError> {
    if raw.name.trim().is_empty() {
        return Err(invalid("name", "must not be empty"));
    }
    let sweep = raw.sweep;
    non_empty("sweep.nodes", &sweep.nodes)?;
    non_empty("sweep.sources", &sweep.sources)?;
    non_empty("sweep.strategies", &sweep.strategies)?;
    non_empty("sweep.routes", &sweep.routes)?;

    let nodes = sweep
        .nodes
        .iter()
        .map(|&m| positive("sweep.nodes", m).map(|m| m as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sources = Vec::with_capacity(sweep.sources.len());
    for (i, &(q01, q10)) in sweep.sources.iter().enumerate() {
        for (name, v) in [("q01", q01), ("q10", q10)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(
                    format!("sweep.sources[{i}].{name}"),
                    format!("{v} is outside (0, 1)"),
                ));
            }
        }
        sources.push(
            SourceParams::new(q01, q10)
                .map_err(|e| invalid(format!("sweep.sources[{i}]"), e.to_string()))?,
        );
    }
    let alpha = match sweep.alpha {
        None => AlphaRule::InverseNodes,
        Some(Value::String(s)) if s.replace(' ', "") == "1/M" => AlphaRule::InverseNodes,
        Some(Value::Float(a)) if a > 0.0 && a <= 1.0 => AlphaRule::Fixed(a),
        Some(Value::Integer(1)) => AlphaRule::Fixed(1.0),
        Some(v) => {
            return Err(invalid(
                "sweep.alpha",
                format!("expected \"1/M\" or a probability in (0, 1], got {v}"),
            ))
        }
    };

    let de = raw.de;
    let llr_max = de.llr_max.unwrap_or(LLR_MAX);
    let points = match de.points {
        Some(p) => positive("de.points", p)? as usize,
        None => DEFAULT_POINTS,
    };
    let grid = LlrGrid::new(llr_max, points).map_err(|e| invalid("de.points", e.to_string()))?;
    let tol = de.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0) {
        return Err(invalid("de.tol", format!("must be positive, got {tol}")));
    }
    let max_iter = match de.max_iter {
        Some(n) => positive("de.max-iter", n)? as usize,
        None => DEFAULT_MAX_ITER,
    };
    let projection = match de.projection.as_deref() {
        None | Some("split") => Projection::SignPreservingSplit,
        Some("nearest") => Projection::Nearest,
        Some(other) => {
            return Err(invalid(
                "de.projection",
                format!("expected \"split\" or \"nearest\", got \"{other}\""),
            ))
        }
    };

    let sim = raw.sim;
    let burn_in = match sim.burn_in {
        Some(b) => u64::try_from(b)
            .map_err(|_| invalid("sim.burn-in", format!("must be non-negative, got {b}")))?,
        None => DEFAULT_BURN_IN,
    };
    let horizon = match sim.horizon {
        Some(h) => positive("sim.horizon", h)?,
        None => DEFAULT_HORIZON.max(burn_in + 1),
    };
    if burn_in >= horizon {
        return Err(invalid(
            "sim.burn-in",
            format!("must be smaller than sim.horizon ({horizon}), got {burn_in}"),
        ));
    }
    let replications = match sim.replications {
        Some(r) => positive("sim.replications", r)? as usize,
        None => DEFAULT_REPLICATIONS,
    };
    let seed = match sim.seed {
        Some(s) => u64::try_from(s)
            .map_err(|_| invalid("sim.seed", format!("must be non-negative, got {s}")))?,
        None => 0,
    };
    let estimators = match sim.estimators.as_deref() {
        None | Some("both") => EstimatorChoice::Both,
        Some("map") => EstimatorChoice::Map,
        Some("dh") => EstimatorChoice::Dh,
        Some(other) => {
            return Err(invalid(
                "sim.estimators",
                format!("expected \"map\", \"dh\" or \"both\", got \"{other}\""),
            ))
        }
    };

    Ok(ExperimentSpec {
        name: raw.name,
        nodes: sorted_unique(nodes),
        sources,
        strategies: sorted_unique(sweep.strategies),
        alpha,
        routes: sorted_unique(sweep.routes),
        de: DeSettings {
            grid,
            tol,
            max_iter,
            projection,
        },
        sim: SimSettings {
            horizon,
            burn_in,
            replications,
            seed,
            estimators,
        },
        out: raw.out,
    })
}
