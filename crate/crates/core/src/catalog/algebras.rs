//! Realizations of Lie algebras by vector fields in the plane, dimensions 1 to 4,
//! plus the six-dimensional conformal realization.

use super::params::{ParamDef, ParamKind, Params};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::system::{VectorField, PLANE_VARS};
use serde::Serialize;

pub(crate) struct RealizationDef {
    pub id: &'static str,
    /// Realization class; alternative realizations share it.
    pub class: &'static str,
    pub isomorphism: &'static str,
    pub dim: usize,
    pub fields: &'static [(&'static str, &'static str)],
    pub params: &'static [ParamDef],
    pub notes: &'static str,
    pub flag: Option<&'static str>,
}

const fn real(name: &'static str, default: f64, range: &'static str) -> ParamDef {
    ParamDef { name, kind: ParamKind::Real(default), range }
}

const fn func(name: &'static str, default: &'static str, range: &'static str) -> ParamDef {
    ParamDef { name, kind: ParamKind::Function { args: &["x"], bind: &["x"], default }, range }
}

const NO_PARAMS: &[ParamDef] = &[];
const LINEAR_ONLY: &str = "contains linearly connected fields; invariant systems are linear";

macro_rules! r {
    ($id:expr, $class:expr, $iso:expr, $dim:expr, [$(($xi:expr, $eta:expr)),* $(,)?], $params:expr, $notes:expr) => {
        RealizationDef {
            id: $id,
            class: $class,
            isomorphism: $iso,
            dim: $dim,
            fields: &[$(($xi, $eta)),*],
            params: $params,
            notes: $notes,
            flag: None,
        }
    };
}

pub(crate) static REALIZATIONS: &[RealizationDef] = &[
    r!("A1,1", "A1,1", "n1,1", 1, [("0", "1")], NO_PARAMS, "nilpotent"),
    r!("A2,1", "A2,1", "s2,1", 2, [("0", "1"), ("0", "y")], NO_PARAMS, "fields linearly connected"),
    r!("A2,2", "A2,2", "s2,1", 2, [("0", "1"), ("x", "y")], NO_PARAMS, "fields linearly nonconnected"),
    r!("A2,3", "A2,3", "2n1,1", 2, [("0", "1"), ("0", "x")], NO_PARAMS, "abelian; fields linearly connected"),
    r!("A2,4", "A2,4", "2n1,1", 2, [("1", "0"), ("0", "1")], NO_PARAMS, "abelian; fields linearly nonconnected"),
    r!("A3,1", "A3,1", "n3,1", 3, [("0", "1"), ("0", "x"), ("1", "0")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A3,2",
        "A3,2",
        "s3,1",
        3,
        [("1", "0"), ("0", "1"), ("x", "a*y")],
        &[real("a", 0.5, "0 < |a| <= 1 for the algebra; the family accepts any a other than 0 and 1")],
        "solvable; no invariant delay system when a = 1"
    ),
    r!(
        "A3,3",
        "A3,3",
        "s3,1",
        3,
        [("0", "1"), ("0", "x"), ("(1 - a)*x", "y")],
        &[real("a", 0.5, "0 < |a| <= 1")],
        LINEAR_ONLY
    ),
    r!("A3,4", "A3,4", "s3,2", 3, [("1", "0"), ("0", "1"), ("x", "x + y")], NO_PARAMS, "solvable"),
    r!("A3,5", "A3,5", "s3,2", 3, [("0", "1"), ("0", "x"), ("1", "y")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A3,6",
        "A3,6",
        "s3,3",
        3,
        [("1", "0"), ("0", "1"), ("b*x + y", "b*y - x")],
        &[real("b", 0.5, "b >= 0")],
        "solvable"
    ),
    r!(
        "A3,7",
        "A3,7",
        "s3,3",
        3,
        [("0", "1"), ("0", "x"), ("1 + x^2", "(x + b)*y")],
        &[real("b", 0.5, "b >= 0")],
        LINEAR_ONLY
    ),
    r!("A3,8", "A3,8", "sl(2,R)", 3, [("0", "1"), ("x", "y"), ("2*x*y", "y^2")], NO_PARAMS, "imprimitive; centralizer x d/dx"),
    r!(
        "A3,8alt",
        "A3,8",
        "sl(2,R)",
        3,
        [("1", "0"), ("2*x", "y"), ("x^2", "x*y")],
        NO_PARAMS,
        "alternative realization of A3,8"
    ),
    r!("A3,9", "A3,9", "sl(2,R)", 3, [("0", "1"), ("x", "y"), ("2*x*y", "y^2 - x^2")], NO_PARAMS, "primitive over the reals"),
    r!("A3,10", "A3,10", "sl(2,R)", 3, [("0", "1"), ("x", "y"), ("2*x*y", "y^2 + x^2")], NO_PARAMS, "imprimitive"),
    r!(
        "A3,10alt",
        "A3,10",
        "sl(2,R)",
        3,
        [("1", "1"), ("x", "y"), ("x^2", "y^2")],
        NO_PARAMS,
        "alternative realization of A3,10"
    ),
    r!("A3,11", "A3,11", "sl(2,R)", 3, [("0", "1"), ("0", "y"), ("0", "y^2")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A3,12",
        "A3,12",
        "o(3)",
        3,
        [("1 + x^2", "x*y"), ("x*y", "1 + y^2"), ("y", "-x")],
        NO_PARAMS,
        "simple; no nontrivial centralizer"
    ),
    r!("A3,13", "A3,13", "n1,1+s2,1", 3, [("1", "0"), ("0", "1"), ("0", "y")], NO_PARAMS, LINEAR_ONLY),
    r!("A3,14", "A3,14", "n1,1+s2,1", 3, [("0", "x"), ("0", "1"), ("x", "y")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A3,15",
        "A3,15",
        "3n1,1",
        3,
        [("0", "1"), ("0", "x"), ("0", "chi")],
        &[func("chi", "x^3", "1, x, chi linearly independent")],
        LINEAR_ONLY
    ),
    r!("A4,1", "A4,1", "n4,1", 4, [("0", "1"), ("0", "x"), ("0", "x^2"), ("1", "0")], NO_PARAMS, LINEAR_ONLY),
    r!("A4,2", "A4,2", "s4,1", 4, [("0", "1"), ("0", "x"), ("0", "exp(x)"), ("1", "0")], NO_PARAMS, LINEAR_ONLY),
    r!("A4,3", "A4,3", "s4,2", 4, [("0", "1"), ("0", "x"), ("0", "x^2"), ("1", "y")], NO_PARAMS, LINEAR_ONLY),
    RealizationDef {
        id: "A4,4",
        class: "A4,4",
        isomorphism: "s4,3",
        dim: 4,
        fields: &[("0", "1"), ("0", "x"), ("0", "abs(x)^alpha"), ("(1 - a)*x", "y")],
        params: &[
            real("a", 0.5, "a in [-1, 0) or (0, 1)"),
            real("alpha", 3.0, "alpha not in {0, 1/(1 - a), 1}"),
        ],
        notes: LINEAR_ONLY,
        flag: Some("further restrictions on a and alpha exist in the classification literature and are not encoded"),
    },
    r!(
        "A4,5",
        "A4,5",
        "s4,3",
        4,
        [("0", "1"), ("0", "x"), ("0", "chi"), ("0", "y")],
        &[func("chi", "x^3", "1, x, chi linearly independent")],
        LINEAR_ONLY
    ),
    r!(
        "A4,6",
        "A4,6",
        "s4,4",
        4,
        [("0", "1"), ("0", "x"), ("0", "exp(a*x)"), ("1", "y")],
        &[real("a", 2.0, "a not in {0, 1}")],
        LINEAR_ONLY
    ),
    r!(
        "A4,7",
        "A4,7",
        "s4,5",
        4,
        [("0", "1"), ("0", "exp(alpha*x)*cos(beta*x)"), ("0", "exp(alpha*x)*sin(beta*x)"), ("1", "y")],
        &[real("alpha", 0.5, "any"), real("beta", 1.0, "beta != 0")],
        LINEAR_ONLY
    ),
    r!("A4,8", "A4,8", "s4,6", 4, [("0", "1"), ("1", "0"), ("0", "x"), ("x", "0")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A4,9",
        "A4,9",
        "s4,8",
        4,
        [("0", "1"), ("1", "0"), ("0", "x"), ("x", "a*y")],
        &[real("a", 2.0, "a not in {0, 1}")],
        LINEAR_ONLY
    ),
    r!("A4,10", "A4,10", "s4,10", 4, [("0", "1"), ("1", "0"), ("0", "x"), ("x", "2*y + x^2")], NO_PARAMS, LINEAR_ONLY),
    r!("A4,11", "A4,11", "s4,11", 4, [("0", "1"), ("1", "0"), ("0", "x"), ("x", "y")], NO_PARAMS, LINEAR_ONLY),
    r!("A4,12", "A4,12", "s4,11", 4, [("0", "1"), ("0", "x"), ("1", "0"), ("0", "y")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A4,13",
        "A4,13",
        "s4,12",
        4,
        [("1", "0"), ("0", "1"), ("x", "y"), ("y", "-x")],
        NO_PARAMS,
        "no linearly connected fields; a single invariant, so no invariant delay system"
    ),
    r!("A4,14", "A4,14", "s4,12", 4, [("0", "1"), ("0", "x"), ("0", "y"), ("1 + x^2", "x*y")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A4,15",
        "A4,15",
        "n1,1+s3,1",
        4,
        [("0", "abs(x)^(1/(1 - a))"), ("0", "1"), ("0", "x"), ("(1 - a)*x", "y")],
        &[real("a", 0.5, "a in [-1, 0) or (0, 1)")],
        LINEAR_ONLY
    ),
    r!("A4,16", "A4,16", "n1,1+s3,2", 4, [("0", "exp(x)"), ("0", "1"), ("0", "x"), ("1", "y")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A4,17",
        "A4,17",
        "n1,1+s3,3",
        4,
        [("0", "1"), ("1", "0"), ("0", "exp(alpha*x)*cos(x)"), ("0", "exp(alpha*x)*sin(x)")],
        &[real("alpha", 0.5, "alpha >= 0")],
        LINEAR_ONLY
    ),
    r!("A4,18", "A4,18", "n1,1+sl(2,R)", 4, [("1", "0"), ("0", "1"), ("0", "y"), ("0", "y^2")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A4,19",
        "A4,19",
        "n1,1+sl(2,R)",
        4,
        [("x", "0"), ("0", "1"), ("x", "y"), ("2*x*y", "y^2")],
        NO_PARAMS,
        LINEAR_ONLY
    ),
    r!("A4,20", "A4,20", "2s2,1", 4, [("1", "0"), ("x", "0"), ("0", "1"), ("0", "y")], NO_PARAMS, LINEAR_ONLY),
    r!("A4,21", "A4,21", "2s2,1", 4, [("0", "1"), ("x", "y"), ("0", "x"), ("x", "0")], NO_PARAMS, LINEAR_ONLY),
    r!(
        "A4,22",
        "A4,22",
        "4n1,1",
        4,
        [("0", "1"), ("0", "x"), ("0", "chi1"), ("0", "chi2")],
        &[
            func("chi1", "x^2", "1, x, chi1, chi2 linearly independent"),
            func("chi2", "x^3", "1, x, chi1, chi2 linearly independent"),
        ],
        "abelian; all fields linearly connected"
    ),
    r!(
        "so31",
        "so31",
        "so(3,1)",
        6,
        [
            ("1", "0"),
            ("0", "1"),
            ("x", "y"),
            ("y", "-x"),
            ("x^2 - y^2", "2*x*y"),
            ("2*x*y", "y^2 - x^2"),
        ],
        NO_PARAMS,
        "conformal algebra of the plane; no invariants survive"
    ),
];

/// Table entry with its basis fields built at concrete parameters.
#[derive(Debug, Clone, Serialize)]
pub struct AlgebraRealization {
    pub id: String,
    pub class: String,
    pub isomorphism: String,
    pub dim: usize,
    pub basis: Vec<VectorField>,
    pub params: Params,
    pub parameter_ranges: Vec<(String, String)>,
    pub structure_notes: String,
    pub flag: Option<String>,
}

pub(crate) fn find(id: &str) -> Result<&'static RealizationDef> {
    REALIZATIONS.iter().find(|r| r.id == id).ok_or_else(|| Error::UnknownFamily(id.to_string()))
}

fn param_error(id: &str, msg: impl std::fmt::Display) -> Error {
    Error::Param(format!("{id}: {msg}"))
}

fn sample_rank(columns: &[Vec<f64>]) -> usize {
    let rows = columns[0].len();
    let m = nalgebra::DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-9 * smax).count()
}

/// Range checks printed with the table.
fn check_ranges(def: &RealizationDef, p: &Params) -> Result<()> {
    let id = def.id;
    let get = |n: &str| p.real(n);
    match id {
        "A3,2" => {
            let a = get("a")?;
            if a == 0.0 {
                return Err(param_error(id, "a must be nonzero"));
            }
        }
        "A3,3" => {
            let a = get("a")?;
            if !(a != 0.0 && a.abs() <= 1.0) {
                return Err(param_error(id, "requires 0 < |a| <= 1"));
            }
        }
        "A3,6" | "A3,7" => {
            if !(get("b")? >= 0.0) {
                return Err(param_error(id, "requires b >= 0"));
            }
        }
        "A4,4" => {
            let a = get("a")?;
            let al = get("alpha")?;
            if !((-1.0..0.0).contains(&a) || (a > 0.0 && a < 1.0)) {
                return Err(param_error(id, "requires a in [-1, 0) or (0, 1)"));
            }
            if [0.0, 1.0 / (1.0 - a), 1.0].iter().any(|v| (al - v).abs() < 1e-12) {
                return Err(param_error(id, "alpha may not be 0, 1/(1 - a) or 1"));
            }
        }
        "A4,15" => {
            let a = get("a")?;
            if !((-1.0..0.0).contains(&a) || (a > 0.0 && a < 1.0)) {
                return Err(param_error(id, "requires a in [-1, 0) or (0, 1)"));
            }
        }
        "A4,6" | "A4,9" => {
            let a = get("a")?;
            if a == 0.0 || a == 1.0 {
                return Err(param_error(id, "a may not be 0 or 1"));
            }
        }
        "A4,7" => {
            if get("beta")? == 0.0 {
                return Err(param_error(id, "beta must be nonzero"));
            }
        }
        "A4,17" => {
            if !(get("alpha")? >= 0.0) {
                return Err(param_error(id, "requires alpha >= 0"));
            }
        }
        _ => {}
    }
    let funcs: Vec<&str> = def.params.iter().filter(|d| matches!(d.kind, ParamKind::Function { .. })).map(|d| d.name).collect();
    if !funcs.is_empty() {
        let xs = crate::numerics::linspace(0.3, 2.7, 24);
        let mut cols = vec![xs.iter().map(|_| 1.0).collect::<Vec<_>>(), xs.clone()];
        for name in &funcs {
            let e = p.function(name, &["x"])?;
            cols.push(xs.iter().map(|&x| e.eval(&[x])).collect());
        }
        if sample_rank(&cols) < cols.len() {
            return Err(param_error(id, format!("1, x, {} must be linearly independent", funcs.join(", "))));
        }
    }
    Ok(())
}

/// Parse a field component that may mention real and function parameters.
pub(crate) fn component(src: &str, def_params: &[ParamDef], p: &Params) -> Result<Expr> {
    let mut vars: Vec<&str> = PLANE_VARS.to_vec();
    let mut subs = vec![Expr::parse("x", &PLANE_VARS)?, Expr::parse("y", &PLANE_VARS)?];
    let mut reals = Vec::new();
    for d in def_params {
        match d.kind {
            ParamKind::Real(_) => reals.push((d.name, p.real(d.name)?)),
            ParamKind::Function { .. } => {
                vars.push(d.name);
                subs.push(p.function(d.name, &["x"])?.rebind(&PLANE_VARS)?);
            }
        }
    }
    Expr::parse_with(src, &vars, &reals)?.compose(&subs)
}

pub(crate) fn build(def: &RealizationDef, given: &Params) -> Result<AlgebraRealization> {
    let p = given.with_defaults(def.params)?;
    check_ranges(def, &p)?;
    let basis: Result<Vec<VectorField>> = def
        .fields
        .iter()
        .enumerate()
        .map(|(i, (xi, eta))| {
            let xi = component(xi, def.params, &p)?;
            let eta = component(eta, def.params, &p)?;
            Ok(VectorField { label: format!("X{}", i + 1), xi, eta })
        })
        .collect();
    Ok(AlgebraRealization {
        id: def.id.to_string(),
        class: def.class.to_string(),
        isomorphism: def.isomorphism.to_string(),
        dim: def.dim,
        basis: basis?,
        params: p,
        parameter_ranges: def.params.iter().map(|d| (d.name.to_string(), d.range.to_string())).collect(),
        structure_notes: def.notes.to_string(),
        flag: def.flag.map(str::to_string),
    })
}
