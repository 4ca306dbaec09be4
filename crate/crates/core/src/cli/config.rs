//! Run configuration: a TOML document with `[model]`, `[solver]`, `[task]`
//! and `[output]` tables. Unknown keys are rejected; every default is filled
//! in so the resolved config can be echoed verbatim in reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernels::ParamSet;
use crate::model::{BoundaryMode, ModelSpec, Rational};
use crate::solver::SolveConfig;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid `{key}`: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation { key: key.to_string(), message: message.into() }
    }
}

/// A complex number written as a plain number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> Scalar {
        match self {
            ComplexValue::Real(x) => Scalar::new(x, 0.0),
            ComplexValue::Pair([re, im]) => Scalar::new(re, im),
        }
    }
}

impl From<Scalar> for ComplexValue {
    fn from(z: Scalar) -> Self {
        ComplexValue::Pair([z.re, z.im])
    }
}

fn values(v: &[ComplexValue]) -> Vec<Scalar> {
    v.iter().map(|z| z.value()).collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RationalConfig {
    /// Ascending numerator coefficients.
    pub num: Vec<ComplexValue>,
    /// Ascending denominator coefficients; `[1]` when omitted.
    #[serde(default = "unit_den")]
    pub den: Vec<ComplexValue>,
}

fn unit_den() -> Vec<ComplexValue> {
    vec![ComplexValue::Real(1.0)]
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub c: ComplexValue,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub theta: Option<Vec<ComplexValue>>,
    #[serde(default)]
    pub lambda1: Option<RationalConfig>,
    #[serde(default)]
    pub lambda2: Option<RationalConfig>,
    #[serde(default)]
    pub xi_minus: Option<ComplexValue>,
    #[serde(default)]
    pub xi_plus: Option<ComplexValue>,
    #[serde(default = "default_collision_tol")]
    pub collision_tol: f64,
}

fn default_mode() -> String {
    "periodic".into()
}

fn default_collision_tol() -> f64 {
    crate::kernels::DEFAULT_COLLISION_TOL
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_seed_box")]
    pub seed_box: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_dedup_tol")]
    pub dedup_tol: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_n() -> usize {
    1
}
fn default_seeds() -> usize {
    64
}
fn default_seed_box() -> f64 {
    2.0
}
fn default_newton_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    100
}
fn default_dedup_tol() -> f64 {
    1e-6
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: default_n(),
            seeds: default_seeds(),
            seed_box: default_seed_box(),
            newton_tol: default_newton_tol(),
            max_iter: default_max_iter(),
            dedup_tol: default_dedup_tol(),
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    /// Methods for `scalar`: `det`, `hny:<m>`, `sum`, `action`, `oracle`.
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    /// Off-shell set for `scalar`; drawn from `rng_seed` when omitted.
    #[serde(default)]
    pub u: Option<Vec<ComplexValue>>,
    /// Which solver root set to use as the on-shell argument.
    #[serde(default)]
    pub root_index: usize,
    #[serde(default)]
    pub unchecked: bool,
    /// Tolerance on cross-method relative deltas.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Off-shell samples per on-shell set in `verify`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Random parameter draws for the algebra checks in `verify`.
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Largest periodic magnon number for the action and oracle checks in `verify`.
    #[serde(default = "default_verify_periodic_n")]
    pub verify_periodic_n: usize,
    /// Largest magnon number for the symmetrized-form identities in `verify`.
    #[serde(default = "default_verify_symmetrized_n")]
    pub verify_symmetrized_n: usize,
    /// Largest reflection magnon number in `verify`.
    #[serde(default = "default_verify_reflection_n")]
    pub verify_reflection_n: usize,
    #[serde(default = "default_bench_max_n")]
    pub bench_max_n: usize,
    /// Extrapolation directions for `norm`.
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_methods() -> Vec<String> {
    ["det", "sum", "action", "oracle"].map(String::from).to_vec()
}
fn default_tol() -> f64 {
    1e-8
}
fn default_samples() -> usize {
    5
}
fn default_draws() -> usize {
    20
}
fn default_verify_periodic_n() -> usize {
    3
}
fn default_verify_symmetrized_n() -> usize {
    4
}
fn default_verify_reflection_n() -> usize {
    2
}
fn default_bench_max_n() -> usize {
    6
}
fn default_directions() -> usize {
    3
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            methods: default_methods(),
            u: None,
            root_index: 0,
            unchecked: false,
            tol: default_tol(),
            samples: default_samples(),
            draws: default_draws(),
            verify_periodic_n: default_verify_periodic_n(),
            verify_symmetrized_n: default_verify_symmetrized_n(),
            verify_reflection_n: default_verify_reflection_n(),
            bench_max_n: default_bench_max_n(),
            directions: default_directions(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Table,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_format")]
    pub format: OutputFormat,
    #[serde(default)]
    pub path: Option<String>,
}

fn default_format() -> OutputFormat {
    OutputFormat::Json
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { format: OutputFormat::Json, path: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A requested scalar-product method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Det,
    Hny(usize),
    Sum,
    Action,
    Oracle,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let bad = || ConfigError::invalid("task.methods", format!("unknown method `{s}`"));
        match s.trim() {
            "det" => Ok(Method::Det),
            "sum" => Ok(Method::Sum),
            "action" => Ok(Method::Action),
            "oracle" => Ok(Method::Oracle),
            other => {
                let m = other.strip_prefix("hny:").ok_or_else(bad)?;
                m.parse().map(Method::Hny).map_err(|_| bad())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Method::Det => "det".into(),
            Method::Hny(m) => format!("hny:{m}"),
            Method::Sum => "sum".into(),
            Method::Action => "action".into(),
            Method::Oracle => "oracle".into(),
        }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Parse { line, column, message: e.message().to_string() }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn mode(&self) -> BoundaryMode {
        if self.model.mode == "reflection" {
            BoundaryMode::Reflection
        } else {
            BoundaryMode::Periodic
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        let c = m.c.value();
        if c.norm() == 0.0 || !c.re.is_finite() || !c.im.is_finite() {
            return Err(ConfigError::invalid("model.c", "coupling must be finite and nonzero"));
        }
        match m.mode.as_str() {
            "periodic" => {}
            "reflection" => {
                if m.xi_minus.is_none() {
                    return Err(ConfigError::invalid("model.xi_minus", "xi_minus required in reflection mode"));
                }
                if m.xi_plus.is_none() {
                    return Err(ConfigError::invalid("model.xi_plus", "xi_plus required in reflection mode"));
                }
            }
            other => return Err(ConfigError::invalid("model.mode", format!("expected periodic or reflection, got `{other}`"))),
        }
        match (&m.theta, &m.lambda1, &m.lambda2) {
            (Some(_), None, None) | (None, Some(_), Some(_)) => {}
            (Some(_), _, _) => return Err(ConfigError::invalid("model.theta", "give either theta or lambda1/lambda2, not both")),
            _ => return Err(ConfigError::invalid("model.theta", "theta, or both lambda1 and lambda2, required")),
        }
        if !(m.collision_tol > 0.0) {
            return Err(ConfigError::invalid("model.collision_tol", "must be positive"));
        }
        let s = &self.solver;
        if !(s.newton_tol > 0.0 && s.newton_tol < s.dedup_tol) {
            return Err(ConfigError::invalid("solver.newton_tol", "must be positive and smaller than dedup_tol"));
        }
        if s.seeds == 0 {
            return Err(ConfigError::invalid("solver.seeds", "must be at least 1"));
        }
        if !(s.seed_box > 0.0) {
            return Err(ConfigError::invalid("solver.seed_box", "must be positive"));
        }
        for method in &self.task.methods {
            if let Method::Hny(k) = Method::parse(method)? {
                if k == 0 || k > s.n {
                    return Err(ConfigError::invalid("task.methods", format!("hny:{k} needs 1 <= m <= n = {}", s.n)));
                }
            }
        }
        if let Some(u) = &self.task.u {
            if u.len() != s.n {
                return Err(ConfigError::invalid("task.u", format!("expected {} values, got {}", s.n, u.len())));
            }
        }
        if self.task.samples == 0 || self.task.draws == 0 {
            return Err(ConfigError::invalid("task.samples", "samples and draws must be at least 1"));
        }
        if !(self.task.tol > 0.0) {
            return Err(ConfigError::invalid("task.tol", "must be positive"));
        }
        // Verify uses chains of 2n sites, which the dense oracle must hold.
        let cap = crate::oracle::MAX_SITES / 2;
        let t = &self.task;
        for (key, n, limit) in [
            ("task.verify_periodic_n", t.verify_periodic_n, cap),
            ("task.verify_reflection_n", t.verify_reflection_n, cap),
            ("task.verify_symmetrized_n", t.verify_symmetrized_n, crate::scalar_product::MAX_SYMMETRIZE.min(cap)),
        ] {
            if n == 0 || n > limit {
                return Err(ConfigError::invalid(key, format!("must be between 1 and {limit}")));
            }
        }
        if t.bench_max_n == 0 || t.bench_max_n > crate::scalar_product::MAX_SYMMETRIZE {
            let msg = format!("must be between 1 and {}", crate::scalar_product::MAX_SYMMETRIZE);
            return Err(ConfigError::invalid("task.bench_max_n", msg));
        }
        Ok(())
    }

    pub fn methods(&self) -> Result<Vec<Method>, ConfigError> {
        self.task.methods.iter().map(|m| Method::parse(m)).collect()
    }

    pub fn model_spec(&self) -> ModelSpec<f64> {
        let m = &self.model;
        let c = m.c.value();
        let rational = |r: &RationalConfig| Rational { num: values(&r.num), den: values(&r.den) };
        let spec = match (&m.theta, &m.lambda1, &m.lambda2) {
            (Some(theta), _, _) => ModelSpec::xxx(c, ParamSet::new(values(theta))),
            (None, Some(l1), Some(l2)) => ModelSpec::custom(c, rational(l1), rational(l2)),
            _ => unreachable!("validated"),
        }
        .with_collision_tol(m.collision_tol);
        match (self.mode(), m.xi_minus, m.xi_plus) {
            (BoundaryMode::Reflection, Some(xm), Some(xp)) => spec.with_reflection(xm.value(), xp.value()),
            _ => spec,
        }
    }

    pub fn solve_config(&self) -> SolveConfig<f64> {
        let s = &self.solver;
        SolveConfig {
            n_roots: s.n,
            seeds: s.seeds,
            seed_box: s.seed_box,
            newton_tol: s.newton_tol,
            max_iter: s.max_iter,
            dedup_tol: s.dedup_tol,
            rng_seed: s.rng_seed,
        }
    }
}
