use crate::error::{Error, Result};
use crate::expr::Expr;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
pub enum ParamKind {
    Real(f64),
    /// Arbitrary function of `args`; `bind` gives what each argument is replaced by.
    Function { args: &'static [&'static str], bind: &'static [&'static str], default: &'static str },
}

#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub name: &'static str,
    pub kind: ParamKind,
    pub range: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Function(String),
}

/// Named parameter values; functions are given as expression source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(pub BTreeMap<String, ParamValue>);

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn real(&self, name: &str) -> Result<f64> {
        match self.0.get(name) {
            Some(ParamValue::Real(v)) => Ok(*v),
            Some(ParamValue::Function(s)) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Param(format!("parameter `{name}` must be a number, got `{s}`"))),
            None => Err(Error::Param(format!("missing parameter `{name}`"))),
        }
    }

    pub fn function(&self, name: &str, args: &[&str]) -> Result<Expr> {
        match self.0.get(name) {
            Some(ParamValue::Function(s)) => Expr::parse(s, args),
            Some(ParamValue::Real(v)) => Ok(Expr::constant(*v, args)),
            None => Err(Error::Param(format!("missing parameter `{name}`"))),
        }
    }

    pub fn set_real(mut self, name: &str, v: f64) -> Self {
        self.0.insert(name.to_string(), ParamValue::Real(v));
        self
    }

    pub fn set_function(mut self, name: &str, src: &str) -> Self {
        self.0.insert(name.to_string(), ParamValue::Function(src.to_string()));
        self
    }

    /// Fill in defaults; reject names that `defs` does not know.
    pub(crate) fn with_defaults(&self, defs: &[ParamDef]) -> Result<Params> {
        for k in self.0.keys() {
            if !defs.iter().any(|d| d.name == k) {
                let known: Vec<&str> = defs.iter().map(|d| d.name).collect();
                return Err(Error::Param(format!("unknown parameter `{k}` (expected one of: {})", known.join(", "))));
            }
        }
        let mut out = BTreeMap::new();
        for d in defs {
            let v = match (self.0.get(d.name), d.kind) {
                (Some(v), ParamKind::Real(_)) => ParamValue::Real(self.real(d.name).map_err(|_| {
                    Error::Param(format!("parameter `{}` must be a number, got {v:?}", d.name))
                })?),
                (Some(v), ParamKind::Function { .. }) => v.clone(),
                (None, ParamKind::Real(x)) => ParamValue::Real(x),
                (None, ParamKind::Function { default, .. }) => ParamValue::Function(default.to_string()),
            };
            if let (ParamValue::Real(x), _) = (&v, d.kind) {
                if !x.is_finite() {
                    return Err(Error::Param(format!("parameter `{}` must be finite", d.name)));
                }
            }
            out.insert(d.name.to_string(), v);
        }
        Ok(Params(out))
    }
}
