//! JSON problem files.
//!
//! ```json
//! {
//!   "format": 1,
//!   "variables": ["x1", "x2"],
//!   "objective": [
//!     {"A": {"mu": 50, "sigma": 3}, "B": {"mu": 40, "sigma": 2},
//!      "exponents": {"x1": -1, "x2": -1}}
//!   ],
//!   "constraints": [[ ... ], ...]
//! }
//! ```
//!
//! Exponents omitted from a term default to zero.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reformulate::{RandomProgram, Term, UrgpProblem};
use crate::urv::{LinearNormalUrv, NormalRv};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNormal {
    mu: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    #[serde(rename = "A")]
    a: RawNormal,
    #[serde(rename = "B")]
    b: RawNormal,
    #[serde(default)]
    exponents: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    format: u32,
    variables: Vec<String>,
    objective: Vec<RawTerm>,
    #[serde(default)]
    constraints: Vec<Vec<RawTerm>>,
}

fn field_error(context: String, message: impl Into<String>) -> Error {
    Error::Parse { context, message: message.into() }
}

fn normal(raw: &RawNormal, context: &str) -> Result<NormalRv> {
    if !(raw.sigma > 0.0 && raw.sigma.is_finite()) {
        return Err(field_error(format!("{context}.sigma"), format!("sigma must be positive, got {}", raw.sigma)));
    }
    NormalRv::new(raw.mu, raw.sigma).map_err(|e| field_error(format!("{context}.mu"), e.to_string()))
}

fn term(raw: &RawTerm, vars: &[String], context: &str) -> Result<Term<LinearNormalUrv>> {
    let a = normal(&raw.a, &format!("{context}.A"))?;
    let b = normal(&raw.b, &format!("{context}.B"))?;
    let mut exponents = vec![0.0; vars.len()];
    for (name, &value) in &raw.exponents {
        let Some(j) = vars.iter().position(|v| v == name) else {
            return Err(field_error(format!("{context}.exponents.{name}"), "unknown variable"));
        };
        if !value.is_finite() {
            return Err(field_error(format!("{context}.exponents.{name}"), "exponent must be finite"));
        }
        exponents[j] = value;
    }
    Ok(Term { coeff: LinearNormalUrv::new(a, b), exponents })
}

/// Parses a problem document from a string. `source` names it in errors.
pub fn parse_problem_str(text: &str, source: &str) -> Result<UrgpProblem> {
    let raw: RawProblem = serde_json::from_str(text)
        .map_err(|e| field_error(format!("{source}:{}:{}", e.line(), e.column()), e.to_string()))?;
    if raw.format != FORMAT_VERSION {
        return Err(field_error(
            format!("{source}: format"),
            format!("unsupported format {}, expected {FORMAT_VERSION}", raw.format),
        ));
    }
    let vars = &raw.variables;
    if vars.is_empty() {
        return Err(field_error(format!("{source}: variables"), "at least one variable is required"));
    }
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(field_error(format!("{source}: variables[{i}]"), format!("duplicate variable `{v}`")));
        }
    }
    if raw.objective.is_empty() {
        return Err(field_error(format!("{source}: objective"), "objective needs at least one term"));
    }
    let objective = raw
        .objective
        .iter()
        .enumerate()
        .map(|(i, t)| term(t, vars, &format!("{source}: objective[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut constraints = Vec::with_capacity(raw.constraints.len());
    for (k, row) in raw.constraints.iter().enumerate() {
        if row.is_empty() {
            return Err(field_error(format!("{source}: constraints[{k}]"), "constraint needs at least one term"));
        }
        constraints.push(
            row.iter()
                .enumerate()
                .map(|(i, t)| term(t, vars, &format!("{source}: constraints[{k}][{i}]")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    RandomProgram::new(objective, constraints, vars.clone())
}

/// Reads and parses a problem file.
pub fn parse_problem(path: impl AsRef<Path>) -> Result<UrgpProblem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| field_error(path.display().to_string(), e.to_string()))?;
    parse_problem_str(&text, &path.display().to_string())
}

/// Serializes a problem in the canonical format; zero exponents are omitted.
pub fn to_problem_string(p: &UrgpProblem) -> String {
    let raw_term = |t: &Term<LinearNormalUrv>| RawTerm {
        a: RawNormal { mu: t.coeff.lower.mu(), sigma: t.coeff.lower.sigma() },
        b: RawNormal { mu: t.coeff.upper.mu(), sigma: t.coeff.upper.sigma() },
        exponents: p
            .var_names
            .iter()
            .zip(&t.exponents)
            .filter(|(_, a)| **a != 0.0)
            .map(|(n, a)| (n.clone(), *a))
            .collect(),
    };
    let raw = RawProblem {
        format: FORMAT_VERSION,
        variables: p.var_names.clone(),
        objective: p.objective.iter().map(raw_term).collect(),
        constraints: p.constraints.iter().map(|r| r.iter().map(raw_term).collect()).collect(),
    };
    serde_json::to_string_pretty(&raw).expect("problem serializes")
}
