//! Group-invariant solutions from one-dimensional subalgebras.
//!
//! Each reduction sets two invariants to constants, giving `y = h(x)` and
//! `x_ = k(x)`. Substitution into the system leaves algebraic conditions on
//! the constants, solved here by damped Newton from a grid of seeds.

mod data;

use crate::catalog::families::{self, FamilyDef};
use crate::catalog::params::ParamKind;
use crate::catalog::{InvariantFamily, Params, DEFAULT_MAX_DELAY};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::LowDiscrepancy;
use crate::system::{DODSystem, JetPoint};
use crate::Mode;
use data::{AnsatzDef, ANSATZE};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::BTreeMap;

pub type Constants = BTreeMap<String, f64>;

/// Residual above which a substituted closed form is not accepted.
pub const ACCEPT_RESIDUAL: f64 = 1e-8;
const FILTER_GRID: usize = 41;
const NEWTON_ITERATIONS: usize = 100;

/// One reduction of a family by a representative subalgebra.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantAnsatz {
    pub family_id: String,
    pub subalgebra: String,
    pub variable: String,
    pub unknowns: Vec<String>,
    pub free: Vec<(String, f64)>,
    pub abscissa: Option<String>,
    pub h: Option<String>,
    pub k: Option<String>,
    pub j1: String,
    pub j2: String,
    pub constraints: Vec<String>,
    pub admissible: Vec<String>,
    pub numeric_only: bool,
    pub orbit_parameters: Vec<String>,
    #[serde(skip)]
    index: usize,
}

impl InvariantAnsatz {
    fn def(&self) -> &'static AnsatzDef {
        &ANSATZE[self.index]
    }

    pub fn is_parametric(&self) -> bool {
        self.abscissa.is_some()
    }
}

fn describe(index: usize) -> InvariantAnsatz {
    let d = &ANSATZE[index];
    let opt = |s: &str| (!s.is_empty()).then(|| s.to_string());
    InvariantAnsatz {
        family_id: d.family.into(),
        subalgebra: d.subalgebra.into(),
        variable: d.variable.into(),
        unknowns: d.unknowns.iter().map(|s| s.to_string()).collect(),
        free: d.free.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
        abscissa: d.abscissa.map(str::to_string),
        h: opt(d.h),
        k: opt(d.k),
        j1: d.j1.into(),
        j2: d.j2.into(),
        constraints: d.constraints.iter().map(|s| s.to_string()).collect(),
        admissible: d.admissible.iter().map(|s| s.to_string()).collect(),
        numeric_only: d.h.is_empty(),
        orbit_parameters: d.orbit.as_ref().map(|o| o.group.iter().map(|s| s.to_string()).collect()).unwrap_or_default(),
        index,
    }
}

/// Representative subalgebras of a family that admit invariant solutions.
pub fn subalgebra_catalog(family_id: &str) -> Result<Vec<InvariantAnsatz>> {
    families::find(family_id)?;
    Ok(ANSATZE.iter().enumerate().filter(|(_, d)| d.family == family_id).map(|(i, _)| describe(i)).collect())
}

/// Every shipped reduction.
pub fn all_ansatze() -> Vec<InvariantAnsatz> {
    (0..ANSATZE.len()).map(describe).collect()
}

/// Family instantiated at the caller's parameters, with templates bound to them.
struct Bound {
    family: InvariantFamily,
    def: &'static FamilyDef,
    reals: Vec<(String, f64)>,
}

impl Bound {
    fn new(family_id: &str, params: &Params) -> Result<Self> {
        let def = families::find(family_id)?;
        let family = families::build(def, params, DEFAULT_MAX_DELAY, false)?;
        let mut reals = Vec::new();
        for p in def.params {
            if let ParamKind::Real(_) = p.kind {
                reals.push((p.name.to_string(), family.params.real(p.name)?));
            }
        }
        Ok(Self { family, def, reals })
    }

    fn system(&self) -> &DODSystem {
        &self.family.system
    }

    /// Parse `src` over `vars`, with real parameters folded and function calls substituted.
    fn parse(&self, src: &str, vars: &[&str], calls: &[(&str, &str, &[&str])]) -> Result<Expr> {
        let reals: Vec<(&str, f64)> = self.reals.iter().map(|(n, v)| (n.as_str(), *v)).collect();
        let mut all: Vec<&str> = vars.to_vec();
        let mut subs: Vec<Expr> = vars.iter().map(|v| Expr::parse(v, vars)).collect::<Result<_>>()?;
        for (alias, fname, args) in calls {
            let fargs = self
                .def
                .params
                .iter()
                .find_map(|p| match p.kind {
                    ParamKind::Function { args, .. } if p.name == *fname => Some(args),
                    _ => None,
                })
                .ok_or_else(|| Error::UnknownIdentifier(fname.to_string()))?;
            let user = self.family.params.function(fname, fargs)?;
            let bound: Vec<Expr> = args.iter().map(|a| Expr::parse_with(a, vars, &reals)).collect::<Result<_>>()?;
            all.push(alias);
            subs.push(user.compose(&bound)?);
        }
        Expr::parse_with(src, &all, &reals)?.compose(&subs)
    }
}

/// Options for [`solve_constraints`].
#[derive(Debug, Clone)]
pub struct ConstraintOptions {
    /// Starting points over the unknowns; `None` uses `{±2^j, j = -3..3}` per unknown.
    pub seeds: Option<Vec<Vec<f64>>>,
    pub tol: f64,
    /// Values for the constants the reduction leaves arbitrary.
    pub free: Constants,
}

impl Default for ConstraintOptions {
    fn default() -> Self {
        Self { seeds: None, tol: 1e-10, free: Constants::new() }
    }
}

/// Admissible roots of the constraint system and the reasons others were dropped.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConstraintRoots {
    pub solutions: Vec<Constants>,
    pub diagnostics: Vec<String>,
}

pub fn default_seeds(n: usize) -> Vec<Vec<f64>> {
    let axis: Vec<f64> = (-3..=3).flat_map(|j| [2f64.powi(j), -(2f64.powi(j))]).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| axis.iter().map(move |&v| [p.clone(), vec![v]].concat())).collect();
    }
    out
}

fn constant_names(d: &AnsatzDef) -> Vec<&'static str> {
    d.unknowns.iter().chain(d.free.iter().map(|(n, _)| n)).copied().collect()
}

fn free_values(d: &AnsatzDef, given: &Constants) -> Result<Vec<f64>> {
    for name in given.keys() {
        if !d.free.iter().any(|(n, _)| n == name) {
            return Err(Error::Param(format!("`{name}` is not a free constant of {} {}", d.family, d.subalgebra)));
        }
    }
    Ok(d.free.iter().map(|(n, v)| given.get(*n).copied().unwrap_or(*v)).collect())
}

fn residuals(cons: &[Expr], u: &[f64]) -> Option<Vec<f64>> {
    cons.iter().map(|c| c.eval_mode(u, Mode::Checked).ok().filter(|v| v.is_finite())).collect()
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Damped Gauss-Newton on `cons` over the first `n` variables; the rest stay fixed.
fn newton(cons: &[Expr], start: &[f64], fixed: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = start.len();
    let mut u: Vec<f64> = start.iter().chain(fixed).copied().collect();
    let mut r = residuals(cons, &u)?;
    let mut polish = 0;
    for _ in 0..NEWTON_ITERATIONS {
        if inf_norm(&r) <= tol {
            polish += 1;
            if polish > 3 || inf_norm(&r) == 0.0 {
                return Some(u[..n].to_vec());
            }
        }
        let mut jac = DMatrix::zeros(cons.len(), n);
        for (i, c) in cons.iter().enumerate() {
            let (_, g) = c.gradient(&u, Mode::Checked).ok()?;
            for j in 0..n {
                jac[(i, j)] = g[j];
            }
        }
        let rhs = -DVector::from_column_slice(&r);
        let step = jac.svd(true, true).solve(&rhs, 1e-14).ok()?;
        let base = norm(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().enumerate().map(|(j, &v)| if j < n { v + lambda * step[j] } else { v }).collect();
            if let Some(rt) = residuals(cons, &trial) {
                if norm(&rt) < base {
                    u = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-6 {
                return (inf_norm(&r) <= tol).then(|| u[..n].to_vec());
            }
        }
    }
    (inf_norm(&r) <= tol).then(|| u[..n].to_vec())
}

/// Roots of the reduction's conditions on its constants, filtered for admissibility.
pub fn solve_constraints(ansatz: &InvariantAnsatz, params: &Params, opts: &ConstraintOptions) -> Result<ConstraintRoots> {
    let d = ansatz.def();
    if d.h.is_empty() {
        return Err(Error::NoRootFound(format!("{} {} has no closed-form reduction", d.family, d.subalgebra)));
    }
    let bound = Bound::new(d.family, params)?;
    let names = constant_names(d);
    let fixed = free_values(d, &opts.free)?;
    let cons: Vec<Expr> = d.constraints.iter().map(|c| bound.parse(c, &names, d.calls)).collect::<Result<_>>()?;
    let admissible: Vec<Expr> = d.admissible.iter().map(|c| bound.parse(c, &names, d.calls)).collect::<Result<_>>()?;
    let seeds = opts.seeds.clone().unwrap_or_else(|| default_seeds(d.unknowns.len()));
    if seeds.iter().any(|s| s.len() != d.unknowns.len()) {
        return Err(Error::Config(format!("seeds must have {} coordinates", d.unknowns.len())));
    }
    let mut roots: Vec<Vec<f64>> = Vec::new();
    for s in &seeds {
        if let Some(u) = newton(&cons, s, &fixed, opts.tol) {
            let far = |r: &Vec<f64>| r.iter().zip(&u).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() > 1e-6;
            if roots.iter().all(far) {
                roots.push(u);
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = ConstraintRoots::default();
    if roots.is_empty() {
        out.diagnostics.push(format!("no root within {:e} from {} seeds", opts.tol, seeds.len()));
    }
    for u in roots {
        let values: Vec<f64> = u.iter().chain(&fixed).copied().collect();
        let constants: Constants = names.iter().map(|n| n.to_string()).zip(values.iter().copied()).collect();
        let label = format_constants(&constants);
        if let Some(i) = admissible.iter().position(|a| !(a.eval(&values) > 0.0)) {
            out.diagnostics.push(format!("{label}: inadmissible, requires {} > 0", d.admissible[i]));
            continue;
        }
        match build_with(&bound, d, &constants, None).and_then(|sol| screen(&bound, &sol)) {
            Ok(()) => out.solutions.push(constants),
            Err(e) => out.diagnostics.push(format!("{label}: {e}")),
        }
    }
    Ok(out)
}

/// Largest `|constraint|` at the given constants.
pub fn constraint_residual(ansatz: &InvariantAnsatz, params: &Params, constants: &Constants) -> Result<f64> {
    let d = ansatz.def();
    let bound = Bound::new(d.family, params)?;
    let names = constant_names(d);
    let values: Vec<f64> = names
        .iter()
        .map(|n| constants.get(*n).copied().ok_or_else(|| Error::Param(format!("missing constant `{n}`"))))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for c in d.constraints {
        worst = worst.max(bound.parse(c, &names, d.calls)?.eval_checked(&values)?.abs());
    }
    Ok(worst)
}

fn format_constants(c: &Constants) -> String {
    c.iter().map(|(k, v)| format!("{k} = {v:.10}")).collect::<Vec<_>>().join(", ")
}

/// Grid checks that the constraint equations do not see.
fn screen(bound: &Bound, sol: &InvariantSolution) -> Result<()> {
    let sys = bound.system();
    let mut coupled = 0.0f64;
    for t in interior_grid(sol.domain, FILTER_GRID) {
        let p = sol.point(t)?;
        if !(p.x_minus < p.x) {
            return Err(Error::Causality { x: p.x, x_minus: p.x_minus });
        }
        if let Ok(m) = sys.manifold_derivatives(&p.jet()) {
            coupled = coupled.max(m.f[2].abs());
        }
    }
    if coupled <= 1e-9 {
        return Err(Error::ConstraintViolated("right-hand side does not depend on y_ along the solution".into()));
    }
    let r = verify(sys, sol, FILTER_GRID)?;
    if !(r <= ACCEPT_RESIDUAL) {
        return Err(Error::ConstraintViolated(format!("substituted residual {r:e}")));
    }
    Ok(())
}

/// A closed-form invariant solution on its admissible parameter interval.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantSolution {
    pub family_id: String,
    pub subalgebra: String,
    pub constants: Constants,
    /// Name of the curve parameter.
    pub variable: String,
    /// `x` as a function of the parameter; `None` when the parameter is `x` itself.
    #[serde(serialize_with = "display_opt")]
    pub abscissa: Option<Expr>,
    #[serde(serialize_with = "display")]
    pub y: Expr,
    /// Parameter value of the delayed point.
    #[serde(serialize_with = "display")]
    pub delay: Expr,
    pub domain: (f64, f64),
}

fn display<S: serde::Serializer>(e: &Expr, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(e)
}

fn display_opt<S: serde::Serializer>(e: &Option<Expr>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match e {
        Some(e) => s.collect_str(e),
        None => s.serialize_none(),
    }
}

/// Solution point with the delayed point resolved along the same curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionPoint {
    pub x: f64,
    pub y: f64,
    pub ydot: f64,
    pub x_minus: f64,
    pub y_minus: f64,
}

impl SolutionPoint {
    pub fn jet(&self) -> JetPoint {
        JetPoint::new(self.x, self.y, self.x_minus, self.y_minus, self.ydot)
    }
}

impl InvariantSolution {
    pub fn is_parametric(&self) -> bool {
        self.abscissa.is_some()
    }

    fn abscissa_at(&self, t: f64) -> Result<(f64, f64)> {
        match &self.abscissa {
            Some(a) => a.diff_eval_index(&[t], 0, Mode::Checked),
            None => Ok((t, 1.0)),
        }
    }

    /// Point at parameter `t`, with `ydot` by the chain rule when parametric.
    pub fn point(&self, t: f64) -> Result<SolutionPoint> {
        let (x, dx) = self.abscissa_at(t)?;
        let (y, dy) = self.y.diff_eval_index(&[t], 0, Mode::Checked)?;
        let tm = self.delay.eval_checked(&[t])?;
        let (x_minus, _) = self.abscissa_at(tm)?;
        let y_minus = self.y.eval_checked(&[tm])?;
        if dx == 0.0 {
            return Err(Error::Domain(format!("curve is vertical at parameter {t}")));
        }
        Ok(SolutionPoint { x, y, ydot: dy / dx, x_minus, y_minus })
    }

    /// `y` as a function of `x`, usable as initial data.
    pub fn graph(&self) -> Option<&Expr> {
        (!self.is_parametric()).then_some(&self.y)
    }

    /// Delayed abscissa at `x` for non-parametric solutions.
    pub fn delayed_abscissa(&self, x: f64) -> Option<f64> {
        (!self.is_parametric()).then(|| self.delay.eval(&[x]))
    }
}

fn interior_grid((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect()
}

fn evaluate_bounds(bound: &Bound, d: &AnsatzDef, lower: &[&str], upper: &[&str], vars: &[&str], values: &[f64]) -> Result<(f64, f64)> {
    let eval = |s: &&str| -> Result<f64> { bound.parse(s, vars, d.calls)?.eval_checked(values) };
    let lo = lower.iter().map(eval).collect::<Result<Vec<_>>>()?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let hi = upper.iter().map(eval).collect::<Result<Vec<_>>>()?.into_iter().fold(f64::INFINITY, f64::min);
    if !(lo < hi) {
        return Err(Error::ConstraintViolated(format!("admissible interval [{lo}, {hi}] is empty")));
    }
    if d.abscissa.is_some() {
        // keep clear of the arc ends where the curve turns vertical
        let m = 0.02 * (hi - lo);
        return Ok((lo + m, hi - m));
    }
    Ok((lo, hi))
}

/// Substitute constants (and group parameters) into the templates.
fn build_with(bound: &Bound, d: &AnsatzDef, constants: &Constants, group: Option<&Constants>) -> Result<InvariantSolution> {
    let mut names: Vec<&str> = constant_names(d);
    let mut values: Vec<f64> = names
        .iter()
        .map(|n| constants.get(*n).copied().ok_or_else(|| Error::Param(format!("missing constant `{n}`"))))
        .collect::<Result<_>>()?;
    let (h, k, lower, upper) = match (group, &d.orbit) {
        (Some(g), Some(o)) => {
            for n in o.group {
                names.push(n);
                values.push(g.get(*n).copied().unwrap_or(0.0));
            }
            (o.h, o.k, o.lower, o.upper)
        }
        _ => (d.h, d.k, d.lower, d.upper),
    };
    let folded: Vec<(String, f64)> = names.iter().map(|n| n.to_string()).zip(values.iter().copied()).collect();
    let curve = |src: &str| -> Result<Expr> {
        let mut vars = vec![d.variable];
        vars.extend(names.iter().copied());
        let e = bound.parse(src, &vars, d.calls)?;
        let mut subs = vec![Expr::parse(d.variable, &[d.variable])?];
        subs.extend(values.iter().map(|&v| Expr::constant(v, &[d.variable])));
        let e = e.compose(&subs)?;
        Expr::parse(&e.to_string(), &[d.variable])
    };
    let domain = evaluate_bounds(bound, d, lower, upper, &names, &values)?;
    let mut all = constants.clone();
    all.extend(folded.into_iter().filter(|(n, _)| !constants.contains_key(n)));
    Ok(InvariantSolution {
        family_id: d.family.into(),
        subalgebra: d.subalgebra.into(),
        constants: all,
        variable: d.variable.into(),
        abscissa: d.abscissa.map(curve).transpose()?,
        y: curve(h)?,
        delay: curve(k)?,
        domain,
    })
}

/// Closed forms for one set of constants, as returned by [`solve_constraints`].
pub fn build_solution(ansatz: &InvariantAnsatz, params: &Params, constants: &Constants) -> Result<InvariantSolution> {
    let d = ansatz.def();
    if d.h.is_empty() {
        return Err(Error::ConstraintViolated(format!("{} {} is numeric-only", d.family, d.subalgebra)));
    }
    build_with(&Bound::new(d.family, params)?, d, constants, None)
}

/// Apply the recorded group orbit and re-check the system mechanically.
pub fn orbit_extend(
    ansatz: &InvariantAnsatz,
    params: &Params,
    solution: &InvariantSolution,
    group: &Constants,
) -> Result<InvariantSolution> {
    let d = ansatz.def();
    let orbit = d.orbit.as_ref().ok_or_else(|| {
        Error::Config(format!("no orbit formulas recorded for {} {}", d.family, d.subalgebra))
    })?;
    if let Some(name) = group.keys().find(|n| !orbit.group.contains(&n.as_str())) {
        return Err(Error::Param(format!("`{name}` is not a group parameter; expected {}", orbit.group.join(", "))));
    }
    let bound = Bound::new(d.family, params)?;
    let extended = build_with(&bound, d, &solution.constants, Some(group))?;
    let r = verify(bound.system(), &extended, FILTER_GRID)?;
    if !(r <= ACCEPT_RESIDUAL) {
        let g: Constants = orbit.group.iter().map(|n| (n.to_string(), group.get(*n).copied().unwrap_or(0.0))).collect();
        return Err(Error::ConstraintViolated(format!(
            "{} {} with {} and {} leaves residual {r:e}",
            d.family,
            d.subalgebra,
            format_constants(&solution.constants),
            format_constants(&g)
        )));
    }
    Ok(extended)
}

/// Largest residual of both equations along the closed form, on `grid` interior points.
pub fn verify(system: &DODSystem, solution: &InvariantSolution, grid: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for t in interior_grid(solution.domain, grid.max(2)) {
        let p = solution.point(t)?;
        let (e1, e2) = system.manifold_residuals(&p.jet());
        let r = e1.abs().max(e2.abs());
        if !r.is_finite() {
            return Ok(f64::INFINITY);
        }
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Smallest `|det d(J1, J2)/d(y, x_)|` over `samples` points of the family's sampling box.
pub fn jacobian_condition(ansatz: &InvariantAnsatz, params: &Params, samples: usize, seed: u64) -> Result<f64> {
    let d = ansatz.def();
    let bound = Bound::new(d.family, params)?;
    let mut vars = vec!["x", "y", "x_", "y_"];
    vars.extend(constant_names(d));
    let j1 = bound.parse(d.j1, &vars, d.calls)?;
    let j2 = bound.parse(d.j2, &vars, d.calls)?;
    let b = bound.family.solution_domain;
    let mut seq = LowDiscrepancy::new(4, seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let u = seq.next_point();
        let x = crate::numerics::scale(u[0], b.x);
        let span = (b.x.1 - b.x.0).max(1.0);
        let mut v = vec![x, crate::numerics::scale(u[1], b.y), x - span * (0.05 + 0.45 * u[2]), crate::numerics::scale(u[3], b.y_minus)];
        v.extend(std::iter::repeat_n(1.0, vars.len() - 4));
        let (_, g1) = j1.gradient(&v, Mode::Checked)?;
        let (_, g2) = j2.gradient(&v, Mode::Checked)?;
        worst = worst.min((g1[1] * g2[2] - g1[2] * g2[1]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests;
