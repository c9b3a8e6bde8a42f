//! TOML experiment configuration.
//!
//! ```toml
//! example = "ex2-h2"
//! alpha = 0.4
//! beta = 0.2
//! iterations = 30
//! lambda = 1e-6
//!
//! [optimizers.qnggc]
//! method = "qnggc"
//! eta = 0.05
//! b = "eta^2"
//!
//! [init]
//! theta0 = [-0.2, -0.2, 0.0]
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use qnggc_core::optimizer::{ChristoffelSource, Method, MetricSource, OptimizerConfig};
use serde::Deserialize;

use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Example {
    /// σx on the single-qubit ansatz.
    Ex1,
    H2 {
        alpha: f64,
        beta: f64,
    },
    Tfim {
        n_qubits: usize,
        h: f64,
    },
}

impl Example {
    pub fn n_params(&self) -> usize {
        match self {
            Example::Ex1 => 2,
            Example::H2 { .. } => 3,
            Example::Tfim { n_qubits, .. } => 4 * n_qubits,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Example::Ex1 => "ex1",
            Example::H2 { .. } => "ex2-h2",
            Example::Tfim { .. } => "ex3-tfim",
        }
    }

    fn default_sources(&self) -> (MetricSource, ChristoffelSource) {
        match self {
            Example::Ex1 => (MetricSource::Analytic, ChristoffelSource::Analytic),
            Example::H2 { .. } => (MetricSource::Analytic, ChristoffelSource::FiniteDifference),
            Example::Tfim { .. } => (MetricSource::Diagonal, ChristoffelSource::ShiftRule),
        }
    }
}

/// `b` as a number or tied to the learning rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BValue {
    Fixed(f64),
    EtaSquared,
}

impl BValue {
    pub fn resolve(self, eta: f64) -> f64 {
        match self {
            BValue::Fixed(b) => b,
            BValue::EtaSquared => eta * eta,
        }
    }
}

impl FromStr for BValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "eta^2" | "eta2" | "eta**2" => Ok(BValue::EtaSquared),
            _ => s.parse::<f64>().map(BValue::Fixed).map_err(|_| format!("expected a number or `eta^2`, got `{s}`")),
        }
    }
}

impl fmt::Display for BValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BValue::Fixed(b) => write!(f, "{b}"),
            BValue::EtaSquared => f.write_str("eta^2"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    Explicit(Vec<f64>),
    Random { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedOptimizer {
    pub name: String,
    pub b: BValue,
    /// `b` resolved against `eta`; `max_iters` and `lambda` filled from the experiment.
    pub config: OptimizerConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub example: Example,
    pub iterations: usize,
    pub lambda: f64,
    pub optimizers: Vec<NamedOptimizer>,
    pub init: Init,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    example: String,
    n_qubits: Option<usize>,
    alpha: Option<f64>,
    beta: Option<f64>,
    h: Option<f64>,
    iterations: usize,
    #[serde(default)]
    lambda: f64,
    optimizers: IndexMap<String, RawOptimizer>,
    init: RawInit,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawB {
    Number(f64),
    Token(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    method: String,
    eta: f64,
    b: Option<RawB>,
    metric_mode: Option<String>,
    christoffel_source: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandom {
    count: usize,
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInit {
    theta0: Option<Vec<f64>>,
    random: Option<RawRandom>,
}

fn parse_method(field: &str, s: &str) -> Result<Method> {
    match s {
        "gd" => Ok(Method::Gd),
        "qng" => Ok(Method::Qng),
        "qnggc" => Ok(Method::Qnggc),
        _ => Err(BenchError::config(field, format!("unknown method `{s}` (gd | qng | qnggc)"))),
    }
}

fn parse_metric(field: &str, s: &str) -> Result<MetricSource> {
    match s {
        "full" => Ok(MetricSource::Full),
        "diagonal" => Ok(MetricSource::Diagonal),
        "analytic" => Ok(MetricSource::Analytic),
        _ => Err(BenchError::config(field, format!("unknown metric mode `{s}` (full | diagonal | analytic)"))),
    }
}

fn parse_christoffel(field: &str, s: &str) -> Result<ChristoffelSource> {
    match s {
        "shift-rule" => Ok(ChristoffelSource::ShiftRule),
        "finite-difference" => Ok(ChristoffelSource::FiniteDifference),
        "analytic" => Ok(ChristoffelSource::Analytic),
        _ => Err(BenchError::config(
            field,
            format!("unknown Christoffel source `{s}` (shift-rule | finite-difference | analytic)"),
        )),
    }
}

fn require<T>(value: Option<T>, field: &str, example: &str) -> Result<T> {
    value.ok_or_else(|| BenchError::config(field, format!("required for example `{example}`")))
}

fn forbid<T>(value: &Option<T>, field: &str, example: &str) -> Result<()> {
    if value.is_some() {
        return Err(BenchError::config(field, format!("not used by example `{example}`")));
    }
    Ok(())
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, ConfigSource> {
        let raw: RawSpec = toml::from_str(text).map_err(ConfigSource::Toml)?;
        Self::from_raw(raw).map_err(ConfigSource::Invalid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|source| BenchError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ConfigSource::Toml(source) => BenchError::Parse { path: path.to_path_buf(), source },
            ConfigSource::Invalid(err) => err,
        })
    }

    fn from_raw(raw: RawSpec) -> Result<Self> {
        let ex = raw.example.as_str();
        let example = match ex {
            "ex1" => {
                forbid(&raw.n_qubits, "n_qubits", ex)?;
                forbid(&raw.alpha, "alpha", ex)?;
                forbid(&raw.beta, "beta", ex)?;
                forbid(&raw.h, "h", ex)?;
                Example::Ex1
            }
            "ex2-h2" => {
                forbid(&raw.n_qubits, "n_qubits", ex)?;
                forbid(&raw.h, "h", ex)?;
                Example::H2 { alpha: require(raw.alpha, "alpha", ex)?, beta: require(raw.beta, "beta", ex)? }
            }
            "ex3-tfim" => {
                forbid(&raw.alpha, "alpha", ex)?;
                forbid(&raw.beta, "beta", ex)?;
                let n_qubits = require(raw.n_qubits, "n_qubits", ex)?;
                if !(2..=qnggc_core::statevector::MAX_DENSE_QUBITS).contains(&n_qubits) {
                    return Err(BenchError::config(
                        "n_qubits",
                        format!("must lie in 2..={}", qnggc_core::statevector::MAX_DENSE_QUBITS),
                    ));
                }
                Example::Tfim { n_qubits, h: require(raw.h, "h", ex)? }
            }
            other => {
                return Err(BenchError::config(
                    "example",
                    format!("unknown example `{other}` (ex1 | ex2-h2 | ex3-tfim)"),
                ))
            }
        };
        for (field, v) in [("alpha", raw.alpha), ("beta", raw.beta), ("h", raw.h)] {
            if v.is_some_and(|x| !x.is_finite()) {
                return Err(BenchError::config(field, "must be finite"));
            }
        }
        if !(raw.lambda >= 0.0) || !raw.lambda.is_finite() {
            return Err(BenchError::config("lambda", "must be finite and ≥ 0"));
        }
        if raw.optimizers.is_empty() {
            return Err(BenchError::config("optimizers", "at least one optimizer table is required"));
        }

        let (default_metric, default_christoffel) = example.default_sources();
        let mut optimizers = Vec::with_capacity(raw.optimizers.len());
        for (name, o) in raw.optimizers {
            let field = |key: &str| format!("optimizers.{name}.{key}");
            let method = parse_method(&field("method"), &o.method)?;
            let b = match o.b {
                None => BValue::Fixed(0.0),
                Some(RawB::Number(x)) => BValue::Fixed(x),
                Some(RawB::Token(s)) => s.parse().map_err(|m| BenchError::config(field("b"), m))?,
            };
            let metric_mode = match &o.metric_mode {
                Some(s) => parse_metric(&field("metric_mode"), s)?,
                None => default_metric,
            };
            let christoffel_source = match &o.christoffel_source {
                Some(s) => parse_christoffel(&field("christoffel_source"), s)?,
                None => default_christoffel,
            };
            match (example, metric_mode, christoffel_source) {
                (Example::Tfim { .. }, MetricSource::Analytic, _) => {
                    return Err(BenchError::config(field("metric_mode"), "no analytic metric for ex3-tfim"))
                }
                (Example::Tfim { .. }, _, ChristoffelSource::Analytic) => {
                    return Err(BenchError::config(
                        field("christoffel_source"),
                        "no analytic Christoffels for ex3-tfim",
                    ))
                }
                (Example::Tfim { .. }, MetricSource::Full, ChristoffelSource::ShiftRule) if method == Method::Qnggc => {
                    return Err(BenchError::config(
                        field("christoffel_source"),
                        "shift-rule Christoffels need metric_mode = \"diagonal\"",
                    ))
                }
                (Example::Ex1 | Example::H2 { .. }, _, ChristoffelSource::ShiftRule) => {
                    return Err(BenchError::config(
                        field("christoffel_source"),
                        "shift-rule Christoffels need a circuit (ex3-tfim)",
                    ))
                }
                _ => {}
            }
            let config = OptimizerConfig {
                method,
                eta: o.eta,
                b: b.resolve(o.eta),
                lambda: raw.lambda,
                metric_mode,
                christoffel_source,
                max_iters: raw.iterations,
                record_fidelity_target: None,
            };
            config.validate().map_err(|e| BenchError::config(format!("optimizers.{name}"), e.to_string()))?;
            optimizers.push(NamedOptimizer { name, b, config });
        }

        let init = match (raw.init.theta0, raw.init.random) {
            (Some(theta0), None) => {
                if theta0.len() != example.n_params() {
                    return Err(BenchError::config(
                        "init.theta0",
                        format!("expected {} parameters, got {}", example.n_params(), theta0.len()),
                    ));
                }
                if theta0.iter().any(|x| !x.is_finite()) {
                    return Err(BenchError::config("init.theta0", "entries must be finite"));
                }
                Init::Explicit(theta0)
            }
            (None, Some(r)) => {
                if r.count == 0 {
                    return Err(BenchError::config("init.random.count", "must be ≥ 1"));
                }
                Init::Random { count: r.count, seed: r.seed }
            }
            _ => return Err(BenchError::config("init", "set exactly one of `theta0` or `random`")),
        };

        Ok(Self { example, iterations: raw.iterations, lambda: raw.lambda, optimizers, init })
    }

    /// Number of runs per optimizer.
    pub fn run_count(&self) -> usize {
        match self.init {
            Init::Explicit(_) => 1,
            Init::Random { count, .. } => count,
        }
    }

    /// Replaces the random-init count (no effect on explicit θ₀).
    pub fn with_seed_count(mut self, count: usize) -> Result<Self> {
        if let Init::Random { seed, .. } = self.init {
            if count == 0 {
                return Err(BenchError::config("--seeds", "must be ≥ 1"));
            }
            self.init = Init::Random { count, seed };
        }
        Ok(self)
    }
}

/// Distinguishes TOML syntax errors from semantic validation errors.
#[derive(Debug)]
pub enum ConfigSource {
    Toml(toml::de::Error),
    Invalid(BenchError),
}

impl fmt::Display for ConfigSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigSource::Toml(e) => e.fmt(f),
            ConfigSource::Invalid(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for ConfigSource {}

#[cfg(test)]
mod tests {
    use super::*;

    const EX2: &str = r#"
example = "ex2-h2"
alpha = 0.4
beta = 0.2
iterations = 30
lambda = 1e-6

[optimizers.gd]
method = "gd"
eta = 0.05

[optimizers.qnggc]
method = "qnggc"
eta = 0.05
b = "eta^2"

[optimizers.qng]
method = "qng"
eta = 0.05

[init]
theta0 = [-0.2, -0.2, 0.0]
"#;

    #[test]
    fn parses_ex2_and_keeps_optimizer_order() {
        let spec = ExperimentSpec::from_toml_str(EX2).unwrap();
        assert_eq!(spec.example, Example::H2 { alpha: 0.4, beta: 0.2 });
        let names: Vec<_> = spec.optimizers.iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, ["gd", "qnggc", "qng"]);
        assert_eq!(spec.optimizers[1].config.b, 0.05 * 0.05);
        assert_eq!(spec.optimizers[1].config.christoffel_source, ChristoffelSource::FiniteDifference);
        assert_eq!(spec.optimizers[1].config.max_iters, 30);
        assert_eq!(spec.run_count(), 1);
    }

    fn field_of(text: &str) -> String {
        match ExperimentSpec::from_toml_str(text).unwrap_err() {
            ConfigSource::Invalid(BenchError::Config { field, .. }) => field,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn field_level_errors() {
        assert_eq!(field_of(&EX2.replace("[-0.2, -0.2, 0.0]", "[0.0, 0.0]")), "init.theta0");
        assert_eq!(field_of(&EX2.replace("\"eta^2\"", "\"eta^3\"")), "optimizers.qnggc.b");
        assert_eq!(field_of(&EX2.replace("method = \"qng\"", "method = \"adam\"")), "optimizers.qng.method");
        assert_eq!(field_of(&EX2.replace("beta = 0.2\n", "")), "beta");
        assert_eq!(field_of(&EX2.replace("lambda = 1e-6", "lambda = -1.0")), "lambda");
        assert_eq!(field_of(&EX2.replace("ex2-h2", "ex9")), "example");
        assert_eq!(field_of(&EX2.replace("eta = 0.05\nb", "eta = 0.0\nb")), "optimizers.qnggc");
        let both = EX2.replace("[init]\n", "[init]\nrandom = { count = 3, seed = 1 }\n");
        assert_eq!(field_of(&both), "init");
    }

    #[test]
    fn unknown_keys_are_syntax_errors() {
        let bad = EX2.replace("iterations = 30", "iterations = 30\nepochs = 3");
        assert!(matches!(ExperimentSpec::from_toml_str(&bad), Err(ConfigSource::Toml(_))));
    }

    #[test]
    fn tfim_defaults_and_seed_override() {
        let text = r#"
example = "ex3-tfim"
n_qubits = 4
h = 10.0
iterations = 30
lambda = 1e-6
[optimizers.qnggc]
method = "qnggc"
eta = 0.05
b = 0.2
[init]
random = { count = 50, seed = 7 }
"#;
        let spec = ExperimentSpec::from_toml_str(text).unwrap();
        assert_eq!(spec.optimizers[0].config.metric_mode, MetricSource::Diagonal);
        assert_eq!(spec.example.n_params(), 16);
        assert_eq!(spec.clone().with_seed_count(5).unwrap().run_count(), 5);
        let bad = text.replace("b = 0.2", "b = 0.2\nmetric_mode = \"analytic\"");
        assert_eq!(field_of(&bad), "optimizers.qnggc.metric_mode");
    }

    #[test]
    fn b_tokens() {
        assert_eq!("eta^2".parse::<BValue>().unwrap().resolve(0.1), 0.1 * 0.1);
        assert_eq!(" 0.4 ".parse::<BValue>().unwrap(), BValue::Fixed(0.4));
        assert!("x".parse::<BValue>().is_err());
    }
}
