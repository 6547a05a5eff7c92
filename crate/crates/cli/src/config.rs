//! `key = value` experiment files.
//!
//! ```text
//! # three-level ladder from the ground state
//! n          = 3
//! lambda     = 0, 1, 2
//! controller = fractional
//! k          = 1.5, 1
//! alpha      = 1/3, 2/3
//! initial    = basis:1
//! t_max      = 20
//! ```
//!
//! Lists are comma separated and may be wrapped in brackets. Numbers accept
//! simple fractions (`2/3`). `initial` is either `basis:<j>` or a flat list
//! of `re, im` pairs; parentheses around pairs are ignored.

use std::collections::HashMap;
use std::path::PathBuf;

use ladder_core::{
    build_ladder, Complex, ComplexState, ComplexState64, ControllerKind, ControllerParams,
    ControllerParams64, ConvergenceCriteria, IntegratorConfig, IntegratorConfig64, LadderSystem64,
    TargetState,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { key: String, line: usize },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
}

const KEYS: &[&str] = &[
    "n",
    "lambda",
    "controller",
    "k",
    "alpha",
    "initial",
    "target",
    "dt",
    "t_max",
    "epsilon",
    "beta",
    "sample_stride",
    "renormalize",
    "norm_tol",
    "output",
    "probe_time",
];

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub system: LadderSystem64,
    pub params: ControllerParams64,
    pub initial: ComplexState64,
    pub target: TargetState,
    pub integrator: IntegratorConfig64,
    pub criteria: ConvergenceCriteria<f64>,
    /// Trajectory CSV destination, if any.
    pub output: Option<PathBuf>,
    /// Extra time at which the summary reports the target population.
    pub probe_time: Option<f64>,
}

impl ExperimentConfig {
    pub fn n(&self) -> usize {
        self.system.dim()
    }
}

fn invalid(key: &'static str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.to_string(),
    }
}

/// Parses a real, allowing `a/b`.
fn number(key: &'static str, raw: &str) -> Result<f64, ConfigError> {
    let raw = raw.trim();
    let value = match raw.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| invalid(key, format!("`{raw}` is not a number")))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| invalid(key, format!("`{raw}` is not a number")))?;
            a / b
        }
        None => raw
            .parse()
            .map_err(|_| invalid(key, format!("`{raw}` is not a number")))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(key, format!("`{raw}` is not finite")))
    }
}

fn list(key: &'static str, raw: &str) -> Result<Vec<f64>, ConfigError> {
    let cleaned: String = raw
        .chars()
        .filter(|c| !matches!(c, '[' | ']' | '(' | ')'))
        .collect();
    if cleaned.trim().is_empty() {
        return Ok(Vec::new());
    }
    cleaned.split(',').map(|x| number(key, x)).collect()
}

fn integer(key: &'static str, raw: &str) -> Result<usize, ConfigError> {
    raw.trim().parse().map_err(|_| {
        invalid(
            key,
            format!("`{}` is not a non-negative integer", raw.trim()),
        )
    })
}

fn boolean(key: &'static str, raw: &str) -> Result<bool, ConfigError> {
    match raw.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(invalid(key, format!("`{other}` is not a boolean"))),
    }
}

fn initial_state(raw: &str, n: usize, tol: f64) -> Result<ComplexState64, ConfigError> {
    const KEY: &str = "initial";
    if let Some(level) = raw.trim().strip_prefix("basis:") {
        let level = integer(KEY, level)?;
        return ComplexState::basis(n, level).map_err(|e| invalid(KEY, e));
    }
    let values = list(KEY, raw)?;
    if values.len() != 2 * n {
        return Err(invalid(
            KEY,
            format!(
                "expected {n} re,im pairs ({} numbers), got {}",
                2 * n,
                values.len()
            ),
        ));
    }
    let amps = values
        .chunks_exact(2)
        .map(|c| Complex::new(c[0], c[1]))
        .collect();
    ComplexState::with_tolerance(amps, tol).map_err(|e| invalid(KEY, e))
}

/// Parses and validates an experiment file.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: HashMap<&'static str, &str> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: line_no })?;
        let key = key.trim();
        let known =
            KEYS.iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| ConfigError::UnknownKey {
                    key: key.to_string(),
                    line: line_no,
                })?;
        if entries.insert(known, value.trim()).is_some() {
            return Err(ConfigError::Duplicate {
                key: known.to_string(),
                line: line_no,
            });
        }
    }
    let required = |key: &'static str| entries.get(key).copied().ok_or(ConfigError::Missing(key));

    let n = integer("n", required("n")?)?;
    let lambda = list("lambda", required("lambda")?)?;
    let system = build_ladder(n, &lambda).map_err(|e| invalid("lambda", e))?;

    let kind: ControllerKind = required("controller")?
        .parse()
        .map_err(|e| invalid("controller", e))?;
    let k = list("k", required("k")?)?;
    let alpha = match entries.get("alpha") {
        Some(raw) => list("alpha", raw)?,
        None => Vec::new(),
    };
    if kind == ControllerKind::Fractional && alpha.is_empty() {
        return Err(ConfigError::Missing("alpha"));
    }
    if k.len() != n - 1 {
        return Err(invalid(
            "k",
            format!("expected {} gains, got {}", n - 1, k.len()),
        ));
    }
    if !alpha.is_empty() && alpha.len() != n - 1 {
        return Err(invalid(
            "alpha",
            format!("expected {} exponents, got {}", n - 1, alpha.len()),
        ));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        return Err(invalid("alpha", format!("exponent {a} is outside (0, 1)")));
    }
    let params = ControllerParams::new(kind, k, alpha).map_err(|e| invalid("k", e))?;

    let target = match entries.get("target") {
        Some(raw) => {
            TargetState::new(integer("target", raw)?, n).map_err(|e| invalid("target", e))?
        }
        None => TargetState::last(n),
    };

    let mut integrator = IntegratorConfig::new(1e-3, number("t_max", required("t_max")?)?);
    if let Some(raw) = entries.get("dt") {
        integrator.dt = number("dt", raw)?;
    }
    if let Some(raw) = entries.get("sample_stride") {
        integrator.sample_stride = integer("sample_stride", raw)?;
    }
    if let Some(raw) = entries.get("renormalize") {
        integrator.renormalize = boolean("renormalize", raw)?;
    }
    if let Some(raw) = entries.get("norm_tol") {
        integrator.norm_tol = number("norm_tol", raw)?;
    }
    integrator.validate().map_err(|e| {
        let key = match &e {
            ladder_core::Error::InvalidConfig(m) if m.contains("dt") => "dt",
            ladder_core::Error::InvalidConfig(m) if m.contains("t_max") => "t_max",
            ladder_core::Error::InvalidConfig(m) if m.contains("stride") => "sample_stride",
            _ => "norm_tol",
        };
        invalid(key, e)
    })?;

    let initial = initial_state(required("initial")?, n, integrator.norm_tol.max(1e-12))?;

    let mut criteria = ConvergenceCriteria::default();
    if let Some(raw) = entries.get("epsilon") {
        criteria.epsilon = number("epsilon", raw)?;
        if criteria.epsilon <= 0.0 {
            return Err(invalid("epsilon", "must be positive"));
        }
    }
    if let Some(raw) = entries.get("beta") {
        criteria.beta = number("beta", raw)?;
        if !(criteria.beta > 0.0 && criteria.beta < 1.0) {
            return Err(invalid("beta", "must lie in (0, 1)"));
        }
    }

    let output = entries
        .get("output")
        .filter(|s| !s.is_empty())
        .map(PathBuf::from);
    let probe_time = match entries.get("probe_time") {
        Some(raw) => {
            let t = number("probe_time", raw)?;
            if !(0.0..=integrator.t_max).contains(&t) {
                return Err(invalid("probe_time", "must lie in [0, t_max]"));
            }
            Some(t)
        }
        None => None,
    };

    Ok(ExperimentConfig {
        system,
        params,
        initial,
        target,
        integrator,
        criteria,
        output,
        probe_time,
    })
}
