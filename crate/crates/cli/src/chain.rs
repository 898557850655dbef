//! Chain files: a JSON object with `rates` (row-major), optional `states` and
//! optional `target`. Numbers may be JSON numbers or decimal strings; output
//! always uses decimal strings with 17 significant digits.

use std::fs;
use std::path::Path;

use mhrev_core::markov_core::MASS_TOL;
use mhrev_core::nalgebra::DMatrix;
use mhrev_core::{validate_generator, Generator, ProbabilityDistribution};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

/// Targets off by more than `MASS_TOL` but within this are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ChainFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<String>>,
    pub rates: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reversible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub irreducible: Option<bool>,
}

/// `{:.16e}`: shortest fixed-width form that round-trips every `f64`.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

fn number(v: &Value, what: impl Fn() -> String) -> Result<f64, CliError> {
    let parsed = match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse::<f64>().ok(),
        _ => None,
    };
    match parsed {
        Some(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Parse(format!("{}: expected a finite number, found {v}", what()))),
    }
}

fn numbers(values: &[Value], what: &str) -> Result<Vec<f64>, CliError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| number(v, || format!("{what} entry {i}")))
        .collect()
}

impl ChainFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("chain file: {e}")))
    }

    pub fn from_generator(g: &Generator, target: Option<&ProbabilityDistribution>) -> Self {
        let row = |r: &[f64]| r.iter().map(|&x| Value::String(format_number(x))).collect();
        ChainFile {
            states: g.labels().map(<[String]>::to_vec),
            rates: g.to_rows().iter().map(|r| row(r)).collect(),
            target: target.map(|t| row(t.as_slice())),
            reversible: None,
            irreducible: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chain files serialize")
    }

    /// Parses `rates` into a validated generator. Errors name the offending row.
    pub fn generator(&self) -> Result<Generator, CliError> {
        let n = self.rates.len();
        if n == 0 {
            return Err(CliError::Parse("rates: empty matrix".into()));
        }
        let mut m = DMatrix::zeros(n, n);
        for (i, row) in self.rates.iter().enumerate() {
            if row.len() != n {
                return Err(CliError::Parse(format!("rates row {i}: expected {n} entries, found {}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = number(v, || format!("rates row {i} column {j}"))?;
            }
        }
        let g = validate_generator(&m)?;
        match &self.states {
            Some(labels) => Ok(g.with_labels(labels.clone())?),
            None => Ok(g),
        }
    }

    pub fn target(&self) -> Result<Option<ProbabilityDistribution>, CliError> {
        self.target.as_deref().map(|t| distribution(numbers(t, "target")?)).transpose()
    }
}

/// Non-negative weights summing to 1 within `MASS_TOL`, or within
/// `RENORMALIZE_TOL` after which they are rescaled with a warning.
pub fn distribution(weights: Vec<f64>) -> Result<ProbabilityDistribution, CliError> {
    if let Some(i) = weights.iter().position(|&w| !(w >= 0.0)) {
        return Err(CliError::Parse(format!("distribution entry {i} is negative or not a number")));
    }
    let total: f64 = weights.iter().sum();
    let off = (total - 1.0).abs();
    if off > MASS_TOL && off <= RENORMALIZE_TOL {
        eprintln!("warning: distribution sums to {total}; renormalizing");
        return Ok(ProbabilityDistribution::normalized(weights)?);
    }
    Ok(ProbabilityDistribution::new(weights)?)
}

/// A distribution given inline (`0.5,0.5` or `[0.5, 0.5]`), as a file holding a
/// JSON array, or as a chain file whose `target` is used.
pub fn read_distribution(arg: &str) -> Result<ProbabilityDistribution, CliError> {
    let trimmed = arg.trim();
    if let Some(values) = parse_inline(trimmed) {
        return distribution(values?);
    }
    let path = Path::new(trimmed);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{trimmed}: {e}")))?;
    match value {
        Value::Array(items) => distribution(numbers(&items, "distribution")?),
        Value::Object(ref obj) if obj.contains_key("target") => {
            let chain: ChainFile = serde_json::from_value(value).map_err(|e| CliError::Parse(e.to_string()))?;
            Ok(chain.target()?.expect("checked key"))
        }
        _ => Err(CliError::Parse(format!("{trimmed}: expected an array or an object with `target`"))),
    }
}

/// `None` if `arg` does not look like an inline list.
pub fn parse_inline(arg: &str) -> Option<Result<Vec<f64>, CliError>> {
    let body = arg.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(arg);
    let looks_numeric = !body.is_empty()
        && body.chars().all(|c| c.is_ascii_digit() || " ,.eE+-".contains(c));
    if !looks_numeric {
        return None;
    }
    Some(
        body.split(',')
            .map(str::trim)
            .enumerate()
            .map(|(i, s)| {
                s.parse::<f64>()
                    .map_err(|_| CliError::Parse(format!("inline entry {i}: cannot parse `{s}`")))
            })
            .collect(),
    )
}
