//! Flat `key = value` run configuration.
//!
//! ```text
//! # plain game, defection dominant
//! model = ipgg
//! n = 5
//! f = 2
//! ```
//!
//! Keys are case-insensitive, `#` starts a comment, every key may appear at
//! most once. `--set key=value` overrides are applied on top of the file.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dynamics::{DEFAULT_CONV_TOL, DEFAULT_STEP, DEFAULT_T_MAX};
use crate::game::{BriberyParams, CoreParams, Model};
use crate::oracle::{DEFAULT_SAMPLES, DEFAULT_SEED};

const CORE_KEYS: [&str; 8] = ["n", "b", "c", "tau", "f", "alpha", "beta", "r_p"];
const BRIBERY_KEYS: [&str; 4] = ["h", "gamma", "p", "q"];
const CONTROL_KEYS: [&str; 5] = ["step", "t_max", "conv_tol", "samples", "seed"];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("--set {entry}: {message}")]
    Override { entry: String, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

/// Numeric controls shared by the integrating and sampling subcommands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controls {
    pub step: f64,
    pub t_max: f64,
    pub conv_tol: f64,
    pub samples: u64,
    pub seed: u64,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            t_max: DEFAULT_T_MAX,
            conv_tol: DEFAULT_CONV_TOL,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub controls: Controls,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn new(model: Model) -> Self {
        Self {
            warnings: model.warnings().iter().map(ToString::to_string).collect(),
            model,
            controls: Controls::default(),
        }
    }

    /// `key = value` lines describing every setting, in a fixed order.
    pub fn describe(&self) -> Vec<String> {
        let core = self.model.core();
        let mut out = vec![format!("model = {}", self.model.name())];
        out.push(format!("n = {}", core.n()));
        for (k, v) in [
            ("b", core.b()),
            ("c", core.c()),
            ("tau", core.tau()),
            ("f", core.f()),
            ("alpha", core.alpha()),
            ("beta", core.beta()),
            ("r_p", core.r_p()),
        ] {
            out.push(format!("{k} = {v}"));
        }
        if let Some(bp) = self.model.bribery() {
            for (k, v) in [("h", bp.h()), ("gamma", bp.gamma()), ("p", bp.p()), ("q", bp.q())] {
                out.push(format!("{k} = {v}"));
            }
        }
        let c = &self.controls;
        out.push(format!("step = {}", c.step));
        out.push(format!("t_max = {}", c.t_max));
        out.push(format!("conv_tol = {:e}", c.conv_tol));
        out.push(format!("samples = {}", c.samples));
        out.push(format!("seed = {}", c.seed));
        out
    }
}

fn is_known(key: &str) -> bool {
    key == "model" || CORE_KEYS.contains(&key) || BRIBERY_KEYS.contains(&key) || CONTROL_KEYS.contains(&key)
}

fn split_entry(raw: &str) -> Result<Option<(String, String)>, String> {
    let content = raw.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let (key, value) = content
        .split_once('=')
        .ok_or_else(|| format!("expected `key = value`, found `{content}`"))?;
    let key = key.trim().to_ascii_lowercase();
    let value = value.trim().to_string();
    if key.is_empty() {
        return Err("missing key before `=`".into());
    }
    if value.is_empty() {
        return Err(format!("missing value for `{key}`"));
    }
    if !is_known(&key) {
        return Err(format!("unknown key `{key}`"));
    }
    Ok(Some((key, value)))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with_overrides(text, &[] as &[&str])
}

pub fn parse_config_with_overrides<S: AsRef<str>>(text: &str, overrides: &[S]) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, String> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let parsed = split_entry(raw).map_err(|message| ConfigError::Parse { line, message })?;
        if let Some((key, value)) = parsed {
            if entries.insert(key.clone(), value).is_some() {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
    }
    for entry in overrides {
        let entry = entry.as_ref();
        let parsed = split_entry(entry).map_err(|message| ConfigError::Override {
            entry: entry.to_string(),
            message,
        })?;
        match parsed {
            Some((key, value)) => {
                entries.insert(key, value);
            }
            None => {
                return Err(ConfigError::Override {
                    entry: entry.to_string(),
                    message: "empty override".into(),
                })
            }
        }
    }
    build(&entries)
}

fn number(entries: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, ConfigError> {
    entries
        .get(key)
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| ConfigError::Validation(format!("`{key}` must be a number (got `{v}`)")))
        })
        .transpose()
}

fn required(entries: &BTreeMap<String, String>, key: &str, model: &str) -> Result<f64, ConfigError> {
    number(entries, key)?.ok_or_else(|| ConfigError::Validation(format!("missing key `{key}` for model {model}")))
}

fn integer(entries: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>, ConfigError> {
    entries
        .get(key)
        .map(|v| {
            v.parse::<u64>()
                .map_err(|_| ConfigError::Validation(format!("`{key}` must be a non-negative integer (got `{v}`)")))
        })
        .transpose()
}

fn build(entries: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let kind = entries
        .get("model")
        .ok_or_else(|| ConfigError::Validation("missing key `model` (ipgg or bg)".into()))?
        .to_ascii_lowercase();
    if kind != "ipgg" && kind != "bg" {
        return Err(ConfigError::Validation(format!("model must be `ipgg` or `bg` (got `{kind}`)")));
    }

    let n = integer(entries, "n")?.ok_or_else(|| ConfigError::Validation(format!("missing key `n` for model {kind}")))?;
    let n = u32::try_from(n).map_err(|_| ConfigError::Validation(format!("n = {n} is too large")))?;
    let value = |key| required(entries, key, &kind);
    let core = CoreParams::new(
        n,
        value("b")?,
        value("c")?,
        value("tau")?,
        value("f")?,
        value("alpha")?,
        value("beta")?,
        value("r_p")?,
    )
    .map_err(|e| ConfigError::Validation(e.to_string()))?;

    let mut warnings = Vec::new();
    let model = if kind == "bg" {
        let bp = BriberyParams::new(core, value("h")?, value("gamma")?, value("p")?, value("q")?)
            .map_err(|e| ConfigError::Validation(e.to_string()))?;
        Model::Bribery(bp)
    } else {
        for key in BRIBERY_KEYS.iter().filter(|k| entries.contains_key(**k)) {
            warnings.push(format!("`{key}` is ignored for model ipgg"));
        }
        Model::Ipgg(core)
    };
    warnings.extend(model.warnings().iter().map(ToString::to_string));

    let defaults = Controls::default();
    let controls = Controls {
        step: number(entries, "step")?.unwrap_or(defaults.step),
        t_max: number(entries, "t_max")?.unwrap_or(defaults.t_max),
        conv_tol: number(entries, "conv_tol")?.unwrap_or(defaults.conv_tol),
        samples: integer(entries, "samples")?.unwrap_or(defaults.samples),
        seed: integer(entries, "seed")?.unwrap_or(defaults.seed),
    };
    for (key, v) in [("step", controls.step), ("t_max", controls.t_max), ("conv_tol", controls.conv_tol)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ConfigError::Validation(format!("`{key}` must be positive (got {v})")));
        }
    }
    if controls.samples < 2 {
        return Err(ConfigError::Validation(format!("`samples` must be at least 2 (got {})", controls.samples)));
    }

    Ok(RunConfig {
        model,
        controls,
        warnings,
    })
}
