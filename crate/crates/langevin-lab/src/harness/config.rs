//! Experiment configuration: a JSON document with unknown-key rejection,
//! whole-config validation and a canonical content digest.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, Result};
use crate::geometry::{ConvexBody, Halfspace};
use crate::target::{GaussianOracle, Potential, TailParams};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSpec {
    Gaussian { mean: Vec<f64>, variances: Vec<f64> },
    Uniform { dim: usize },
}

impl TargetSpec {
    pub fn dim(&self) -> usize {
        match self {
            TargetSpec::Gaussian { mean, .. } => mean.len(),
            TargetSpec::Uniform { dim } => *dim,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub a: Vec<f64>,
    pub b: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        radius: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Simplex {},
    Polytope {
        halfspaces: Vec<HalfspaceSpec>,
        inner_radius: f64,
        outer_radius: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleSpec {
    #[serde(default = "one")]
    pub n_mult: f64,
    #[serde(default = "one")]
    pub gamma_mult: f64,
    #[serde(default)]
    pub n_cap: Option<u64>,
}

fn one() -> f64 {
    1.0
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec {
            n_mult: 1.0,
            gamma_mult: 1.0,
            n_cap: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    DlUla,
    DlMyula,
    Polynomial,
    Constant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: ScheduleKind,
    #[serde(default)]
    pub scale: ScaleSpec,
    /// Base step size for the single-loop kinds.
    #[serde(default)]
    pub gamma0: Option<f64>,
    /// Decay exponent for the polynomial kind.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Total steps for the single-loop kinds.
    #[serde(default)]
    pub steps: Option<u64>,
    /// Thinning stride for the single-loop kinds.
    #[serde(default)]
    pub snapshot_every: Option<u64>,
    /// Fixed penalty for single-loop runs on a constrained target.
    #[serde(default)]
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub bins_per_dim: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub eta: f64,
    pub m_eta: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Tv,
    TvRadial,
    W2Sliced,
    #[serde(rename = "w2-1d")]
    W21d,
    Moments,
}

fn default_metrics() -> Vec<MetricKind> {
    vec![MetricKind::Tv, MetricKind::W2Sliced, MetricKind::Moments]
}

fn default_reference_samples() -> u64 {
    100_000
}

fn default_n_proj() -> usize {
    128
}

fn default_emit_records() -> bool {
    true
}

/// A full experiment description. Field order fixes the canonical
/// serialization, so the digest does not depend on key order in the
/// source document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub target: TargetSpec,
    #[serde(default)]
    pub body: Option<BodySpec>,
    pub schedule: ScheduleSpec,
    /// Outer iterations for double-loop runs (ignored by single-loop kinds).
    #[serde(default)]
    pub outer_iterations: Option<u32>,
    pub n_chains: u64,
    pub seed: u64,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<MetricKind>,
    #[serde(default)]
    pub histogram: Option<HistogramConfig>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_emit_records")]
    pub emit_records: bool,
    #[serde(default)]
    pub initial_point: Option<Vec<f64>>,
    #[serde(default = "default_reference_samples")]
    pub reference_samples: u64,
    #[serde(default = "default_n_proj")]
    pub n_proj: usize,
    #[serde(default)]
    pub tail: Option<TailSpec>,
}

impl ExperimentConfig {
    /// Content digest of the experiment identity. Operational fields
    /// (output location, record emission) do not change what is computed,
    /// so they are canonicalized away before hashing.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        canonical.emit_records = true;
        crate::digest::digest_json(&canonical)
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// Builds the target potential, applying the optional tail override.
    pub fn build_target(&self) -> Result<Potential> {
        let tail = match &self.tail {
            Some(t) => Some(TailParams::new(t.eta, t.m_eta)?),
            None => None,
        };
        match &self.target {
            TargetSpec::Gaussian { mean, variances } => {
                let oracle = GaussianOracle::new(mean.clone(), variances.clone())?;
                let mut p = Potential::gaussian(&oracle);
                if let Some(t) = tail {
                    p = p.with_tail(t);
                }
                Ok(p)
            }
            TargetSpec::Uniform { dim } => {
                let tail = match tail {
                    Some(t) => t,
                    // constrained uniform targets satisfy the light-tail
                    // assumption with arbitrary eta and m_eta = diam(body)
                    None => TailParams::new(
                        1.0,
                        self.build_body()
                            .map(|b| 2.0 * b.outer_radius())
                            .unwrap_or(1.0),
                    )?,
                };
                Ok(Potential::uniform(*dim, tail))
            }
        }
    }

    pub fn build_body(&self) -> Result<ConvexBody> {
        let dim = self.dim();
        match self.body.as_ref() {
            None => Err(LabError::InvalidParameter(
                "experiment has no constraint body".into(),
            )),
            Some(BodySpec::Ball { radius }) => ConvexBody::ball(dim, *radius),
            Some(BodySpec::Box { lo, hi }) => ConvexBody::axis_box(lo.clone(), hi.clone()),
            Some(BodySpec::Simplex {}) => ConvexBody::simplex(dim),
            Some(BodySpec::Polytope {
                halfspaces,
                inner_radius,
                outer_radius,
            }) => ConvexBody::polytope(
                dim,
                halfspaces
                    .iter()
                    .map(|h| Halfspace {
                        normal: h.a.clone(),
                        offset: h.b,
                    })
                    .collect(),
                *inner_radius,
                *outer_radius,
            ),
        }
    }
}

/// Recursively collects keys not present in the schema, so a config error
/// names every offending key at once.
fn collect_unknown_keys(value: &Value, path: &str, violations: &mut Vec<String>) {
    let allowed: &[(&str, &[&str])] = &[
        (
            "",
            &[
                "target",
                "body",
                "schedule",
                "outer_iterations",
                "n_chains",
                "seed",
                "metrics",
                "histogram",
                "output",
                "emit_records",
                "initial_point",
                "reference_samples",
                "n_proj",
                "tail",
            ],
        ),
        ("target", &["kind", "mean", "variances", "dim"]),
        (
            "body",
            &[
                "kind",
                "radius",
                "lo",
                "hi",
                "halfspaces",
                "inner_radius",
                "outer_radius",
            ],
        ),
        ("body.halfspaces", &["a", "b"]),
        (
            "schedule",
            &[
                "kind",
                "scale",
                "gamma0",
                "alpha",
                "steps",
                "snapshot_every",
                "lambda",
            ],
        ),
        ("schedule.scale", &["n_mult", "gamma_mult", "n_cap"]),
        ("histogram", &["lo", "hi", "bins_per_dim"]),
        ("tail", &["eta", "m_eta"]),
    ];
    let table: std::collections::HashMap<&str, BTreeSet<&str>> = allowed
        .iter()
        .map(|(k, v)| (*k, v.iter().cloned().collect()))
        .collect();

    fn walk(
        value: &Value,
        path: &str,
        table: &std::collections::HashMap<&str, BTreeSet<&str>>,
        violations: &mut Vec<String>,
    ) {
        match value {
            Value::Object(map) => {
                if let Some(keys) = table.get(path) {
                    for key in map.keys() {
                        if !keys.contains(key.as_str()) {
                            let shown = if path.is_empty() {
                                key.clone()
                            } else {
                                format!("{path}.{key}")
                            };
                            violations.push(format!("unknown key \"{shown}\""));
                        }
                    }
                }
                for (key, child) in map {
                    let child_path = if path.is_empty() {
                        key.clone()
                    } else {
                        format!("{path}.{key}")
                    };
                    // arrays of objects share their parent's element schema
                    let lookup = child_path.clone();
                    match child {
                        Value::Array(items) => {
                            for item in items {
                                walk(item, &lookup, table, violations);
                            }
                        }
                        Value::Object(_) => walk(child, &lookup, table, violations),
                        _ => {}
                    }
                }
            }
            Value::Array(items) => {
                for item in items {
                    walk(item, path, table, violations);
                }
            }
            _ => {}
        }
    }
    walk(value, path, &table, violations);
}

/// Parses and validates a config document, reporting every violation.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text)?;
    let mut violations = Vec::new();
    collect_unknown_keys(&value, "", &mut violations);

    if let Value::Object(map) = &value {
        for required in ["target", "schedule", "n_chains", "seed"] {
            if !map.contains_key(required) {
                violations.push(format!("missing required field \"{required}\""));
            }
        }
    } else {
        violations.push("config must be a JSON object".to_string());
    }
    if !violations.is_empty() {
        return Err(LabError::Config(violations));
    }

    let cfg: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| LabError::Config(vec![e.to_string()]))?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<()> {
    let mut violations = Vec::new();
    let dim = cfg.dim();
    if dim == 0 {
        violations.push("target dimension must be >= 1".to_string());
    }
    if let TargetSpec::Gaussian { mean, variances } = &cfg.target {
        if mean.len() != variances.len() {
            violations.push(format!(
                "target mean ({}) and variances ({}) lengths differ",
                mean.len(),
                variances.len()
            ));
        }
        if variances.iter().any(|v| !(*v > 0.0)) {
            violations.push("target variances must be positive".to_string());
        }
    }
    if cfg.n_chains < 1 {
        violations.push("n_chains must be >= 1".to_string());
    }
    match cfg.schedule.kind {
        ScheduleKind::DlUla | ScheduleKind::DlMyula => {
            match cfg.outer_iterations {
                None | Some(0) => {
                    violations.push("double-loop runs need outer_iterations >= 1".to_string())
                }
                Some(_) => {}
            }
            if cfg.schedule.kind == ScheduleKind::DlMyula && cfg.body.is_none() {
                violations.push("dl-myula needs a constraint body".to_string());
            }
            if cfg.schedule.kind == ScheduleKind::DlUla && cfg.body.is_some() {
                violations.push("dl-ula does not accept a constraint body".to_string());
            }
            if cfg.schedule.lambda.is_some() {
                violations.push(
                    "double-loop schedules derive lambda internally; drop schedule.lambda"
                        .to_string(),
                );
            }
        }
        ScheduleKind::Polynomial | ScheduleKind::Constant => {
            if cfg.schedule.gamma0.map_or(true, |g| !(g > 0.0)) {
                violations.push("single-loop schedules need gamma0 > 0".to_string());
            }
            if cfg.schedule.steps.map_or(true, |s| s == 0) {
                violations.push("single-loop schedules need steps >= 1".to_string());
            }
            if cfg.schedule.kind == ScheduleKind::Polynomial
                && cfg
                    .schedule
                    .alpha
                    .map_or(true, |a| !(0.0..=1.0).contains(&a))
            {
                violations.push("polynomial schedules need alpha in [0, 1]".to_string());
            }
            if cfg.body.is_some() && cfg.schedule.lambda.map_or(true, |l| !(l > 0.0)) {
                violations
                    .push("single-loop runs on a body need schedule.lambda > 0".to_string());
            }
            if cfg.body.is_none() && cfg.schedule.lambda.is_some() {
                violations.push("schedule.lambda requires a constraint body".to_string());
            }
        }
    }
    let scale = &cfg.schedule.scale;
    if !(scale.n_mult > 0.0 && scale.n_mult <= 1.0) {
        violations.push(format!("scale.n_mult must lie in (0, 1], got {}", scale.n_mult));
    }
    if !(scale.gamma_mult > 0.0) {
        violations.push(format!(
            "scale.gamma_mult must be positive, got {}",
            scale.gamma_mult
        ));
    }
    if let Some(h) = &cfg.histogram {
        if h.lo.len() != h.hi.len() {
            violations.push("histogram lo/hi lengths differ".to_string());
        }
        if h.lo.iter().zip(&h.hi).any(|(l, u)| !(l < u)) {
            violations.push("histogram needs lo < hi componentwise".to_string());
        }
        if h.bins_per_dim < 2 {
            violations.push("histogram needs bins_per_dim >= 2".to_string());
        }
        if cfg.metrics.contains(&MetricKind::Tv) && h.lo.len() != dim {
            violations.push(format!(
                "histogram dimension {} does not match target dimension {dim}",
                h.lo.len()
            ));
        }
    }
    if let Some(x0) = &cfg.initial_point {
        if x0.len() != dim {
            violations.push(format!(
                "initial_point has dimension {}, target has {}",
                x0.len(),
                dim
            ));
        }
    }
    if let Some(body) = &cfg.body {
        let body_dim = match body {
            BodySpec::Ball { .. } | BodySpec::Simplex {} => dim,
            BodySpec::Box { lo, .. } => lo.len(),
            BodySpec::Polytope { halfspaces, .. } => {
                halfspaces.first().map(|h| h.a.len()).unwrap_or(dim)
            }
        };
        if body_dim != dim {
            violations.push(format!(
                "body dimension {body_dim} does not match target dimension {dim}"
            ));
        }
    }
    if let Some(t) = &cfg.tail {
        if !(t.eta > 0.0) {
            violations.push("tail.eta must be positive".to_string());
        }
        if !(t.m_eta >= 0.0) {
            violations.push("tail.m_eta must be nonnegative".to_string());
        }
    }
    if cfg.metrics.is_empty() {
        violations.push("metrics list cannot be empty".to_string());
    }
    if cfg.metrics.contains(&MetricKind::TvRadial) && cfg.body.is_none() {
        violations.push("tv-radial requires a constraint body".to_string());
    }
    if cfg.reference_samples < 1 {
        violations.push("reference_samples must be >= 1".to_string());
    }
    if cfg.n_proj < 1 {
        violations.push("n_proj must be >= 1".to_string());
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(LabError::Config(violations))
    }
}
