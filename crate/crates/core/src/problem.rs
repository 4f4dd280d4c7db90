//! JSON problem files.
//!
//! ```json
//! {
//!   "basis": ["m", "kg", "s"],
//!   "variables": [
//!     {"name": "l", "unit": "m"},
//!     {"name": "g", "dimension": [1, 0, -2]}
//!   ],
//!   "target": {"name": "T", "unit": "s"},
//!   "function": "2*pi*sqrt(l/g)",
//!   "options": {"K": 2, "samples": 1000, "seed": 1}
//! }
//! ```
//!
//! Exponents are integers or `"p/q"` strings. Unit expressions are resolved
//! through the built-in registry and require the SI base symbols they use
//! to appear in `basis`.

use serde::{Deserialize, Serialize};

use crate::decompose::{DimensionProblem, Variable};
use crate::dim::{Basis, Dimension};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::rational::{format_rational, int, parse_rational, Rational};
use crate::units::parse_unit;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Int(i64),
    Text(String),
}

impl Exponent {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Exponent::Int(i) => Ok(int(*i)),
            Exponent::Text(s) => parse_rational(s),
        }
    }

    pub fn from_rational(r: &Rational) -> Self {
        Exponent::Text(format_rational(r))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<Vec<Exponent>>,
}

impl VariableSpec {
    fn resolve(&self, basis: &Basis) -> Result<Variable> {
        let dim = match (&self.unit, &self.dimension) {
            (Some(u), None) => parse_unit(u)?.project(basis)?,
            (None, Some(d)) => {
                let exps = d.iter().map(Exponent::to_rational).collect::<Result<Vec<_>>>()?;
                Dimension::new(basis, exps)?
            }
            _ => {
                return Err(Error::Problem(format!(
                    "`{}` needs exactly one of `unit` or `dimension`",
                    self.name
                )))
            }
        };
        Ok(Variable::new(self.name.clone(), dim))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Exponent vector to use instead of the minimum-norm solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<Exponent>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<String>>,
    pub variables: Vec<VariableSpec>,
    pub target: VariableSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default)]
    pub options: Options,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Problem(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Problem(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn basis(&self) -> Result<Basis> {
        match &self.basis {
            Some(b) => Basis::new(b.iter().cloned()),
            None => Ok(Basis::si()),
        }
    }

    pub fn to_problem(&self) -> Result<DimensionProblem> {
        let basis = self.basis()?;
        let vars = self.variables.iter().map(|v| v.resolve(&basis)).collect::<Result<Vec<_>>>()?;
        let target = self.target.resolve(&basis)?;
        let problem = DimensionProblem::new(vars, target)?;
        match &self.function {
            Some(src) => problem.with_candidate(Expr::parse(src)?),
            None => Ok(problem),
        }
    }

    /// The `options.y` override, if present.
    pub fn exponent_override(&self) -> Result<Option<Vec<Rational>>> {
        self.options.y.as_ref().map(|y| y.iter().map(Exponent::to_rational).collect()).transpose()
    }
}
