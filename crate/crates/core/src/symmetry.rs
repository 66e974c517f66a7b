//! Prolonged vector fields, determining residuals, invariance verdicts and
//! group flows.

use crate::error::{Error, Result};
use crate::expr::{Expr, Mode};
use crate::numerics::{rk, scale, LowDiscrepancy};
use crate::system::{jet_directional, DODSystem, DelayRelation, JetPoint, VectorField, JET_VARS};
use crate::trajectory::{HermiteTable, Trajectory};
use nalgebra::DMatrix;
use serde::Serialize;

/// Coefficients of `pr X` at one jet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProlongedField {
    pub xi: f64,
    pub eta: f64,
    pub xi_minus: f64,
    pub eta_minus: f64,
    pub zeta: f64,
}

impl ProlongedField {
    /// Tangent vector over `(x, y, x_, y_, yd)`.
    pub fn as_tangent(&self) -> [f64; 5] {
        [self.xi, self.eta, self.xi_minus, self.eta_minus, self.zeta]
    }
}

pub fn prolong(field: &VectorField, jet: &JetPoint) -> Result<ProlongedField> {
    let at = [jet.x, jet.y];
    let (xi, xi_x) = field.xi.diff_eval_index(&at, 0, Mode::Unchecked)?;
    let (_, xi_y) = field.xi.diff_eval_index(&at, 1, Mode::Unchecked)?;
    let (eta, eta_x) = field.eta.diff_eval_index(&at, 0, Mode::Unchecked)?;
    let (_, eta_y) = field.eta.diff_eval_index(&at, 1, Mode::Unchecked)?;
    let (xi_minus, eta_minus) = field.eval(jet.x_minus, jet.y_minus);
    let p = jet.ydot;
    let zeta = eta_x + p * eta_y - p * (xi_x + p * xi_y);
    let out = ProlongedField { xi, eta, xi_minus, eta_minus, zeta };
    if out.as_tangent().iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("field `{}` undefined at the jet", field.label)));
    }
    Ok(out)
}

/// `(r1, r2)` of the determining equations at a manifold jet.
pub fn determining_residual(field: &VectorField, system: &DODSystem, jet: &JetPoint) -> Result<(f64, f64)> {
    let (e1, e2) = system.manifold_residuals(jet);
    if !(e1.abs() <= 1e-10 && e2.abs() <= 1e-10) {
        return Err(Error::Manifold { e1: e1.abs(), e2: e2.abs() });
    }
    let pr = prolong(field, jet)?;
    let d = system.manifold_derivatives(jet)?;
    let r1 = pr.zeta - (pr.xi * d.f[0] + pr.eta * d.f[1] + pr.eta_minus * d.f[2]);
    let r2 = pr.xi_minus - (pr.xi * d.g[0] + pr.eta * d.g[1] + pr.eta_minus * d.g[2]);
    Ok((r1, r2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariance {
    /// Only on the solution manifold.
    Weak,
    /// Identically on the jet space.
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryVerdict {
    pub verdict: bool,
    pub max_residual: f64,
    pub jets: usize,
}

fn check_box(b: (f64, f64), what: &str) -> Result<()> {
    if !(b.0 < b.1) || !b.0.is_finite() || !b.1.is_finite() {
        return Err(Error::Config(format!("degenerate sampling box for {what}: [{}, {}]", b.0, b.1)));
    }
    Ok(())
}

/// Jets on the manifold of `system`, parameterized by `(x, y, y_)`.
pub fn manifold_jets(system: &DODSystem, count: usize, seed: u64) -> Result<Vec<JetPoint>> {
    let b = system.sample_box;
    check_box(b.x, "x")?;
    check_box(b.y, "y")?;
    check_box(b.y_minus, "y_")?;
    let mut seq = LowDiscrepancy::new(3, seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 200 * count.max(1) {
        attempts += 1;
        let u = seq.next_point();
        let (x, y, ym) = (scale(u[0], b.x), scale(u[1], b.y), scale(u[2], b.y_minus));
        if let Ok(jet) = system.jet_on_manifold(x, y, ym) {
            if system.manifold_derivatives(&jet).is_ok() {
                out.push(jet);
            }
        }
    }
    if out.len() < count {
        return Err(Error::Config(format!(
            "only {} of {count} manifold jets could be constructed for `{}`",
            out.len(),
            system.label
        )));
    }
    Ok(out)
}

/// Unconstrained jets inside the sampling box with `x_ < x`.
pub fn free_jets(system: &DODSystem, count: usize, seed: u64) -> Result<Vec<JetPoint>> {
    let b = system.sample_box;
    check_box(b.x, "x")?;
    check_box(b.y, "y")?;
    check_box(b.y_minus, "y_")?;
    let mut seq = LowDiscrepancy::new(5, seed);
    let width = b.x.1 - b.x.0;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u = seq.next_point();
        let x = scale(u[0], b.x);
        let xm = x - width * (0.02 + 0.98 * u[2]);
        out.push(JetPoint::new(x, scale(u[1], b.y), xm, scale(u[3], b.y_minus), scale(u[4], b.y)));
    }
    Ok(out)
}

fn defining_functions(system: &DODSystem) -> Result<(Expr, Expr)> {
    let sub = Expr::parse("yd - f", &["yd", "f"])?;
    let yd = Expr::parse("yd", &JET_VARS)?;
    let big_f = sub.compose(&[yd, system.f.clone()])?;
    let big_g = match &system.delay {
        DelayRelation::Explicit { g } => {
            let xm = Expr::parse("x_", &JET_VARS)?;
            Expr::parse("a - b", &["a", "b"])?.compose(&[xm, g.clone()])?
        }
        DelayRelation::Implicit { residual, .. } => residual.clone(),
    };
    Ok((big_f, big_g))
}

/// Sampled invariance test of `system` under `field`.
pub fn is_symmetry(
    field: &VectorField,
    system: &DODSystem,
    sample: usize,
    seed: u64,
    tol: f64,
    mode: Invariance,
) -> Result<SymmetryVerdict> {
    if sample < 20 {
        return Err(Error::Config(format!("symmetry sample {sample} below 20")));
    }
    let mut worst = 0.0f64;
    let jets = match mode {
        Invariance::Weak => {
            let jets = manifold_jets(system, sample, seed)?;
            for jet in &jets {
                let (r1, r2) = determining_residual(field, system, jet)?;
                worst = worst.max(r1.abs()).max(r2.abs());
            }
            jets.len()
        }
        Invariance::Strong => {
            let (big_f, big_g) = defining_functions(system)?;
            let jets = free_jets(system, sample, seed)?;
            let mut used = 0;
            for jet in &jets {
                let Ok(pr) = prolong(field, jet) else { continue };
                let t = pr.as_tangent();
                let (Ok(a), Ok(b)) = (
                    jet_directional(&big_f, jet, t, Mode::Checked),
                    jet_directional(&big_g, jet, t, Mode::Checked),
                ) else {
                    continue;
                };
                used += 1;
                worst = worst.max(a.abs()).max(b.abs());
            }
            if used == 0 {
                return Err(Error::Config("no admissible jets in the sampling box".into()));
            }
            used
        }
    };
    let verdict = worst <= tol && worst.is_finite();
    Ok(SymmetryVerdict { verdict, max_residual: worst, jets })
}

/// `pr X(I)` for a jet expression `I`.
pub fn apply_prolonged(field: &VectorField, invariant: &Expr, jet: &JetPoint) -> Result<f64> {
    let pr = prolong(field, jet)?;
    jet_directional(invariant, jet, pr.as_tangent(), Mode::Checked)
}

/// Numerical rank of the matrix of prolonged coefficients.
pub fn rank_z(fields: &[VectorField], jet: &JetPoint) -> Result<usize> {
    if fields.is_empty() {
        return Err(Error::Config("rank of an empty field list".into()));
    }
    let rows: Result<Vec<[f64; 5]>> = fields.iter().map(|f| prolong(f, jet).map(|p| p.as_tangent())).collect();
    let rows = rows?;
    let m = DMatrix::from_fn(rows.len(), 5, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > 1e-9 * smax).count())
}

/// Jets away from the usual singular loci, for generic-rank evaluation.
pub fn generic_jets(count: usize, seed: u64) -> Vec<JetPoint> {
    let mut seq = LowDiscrepancy::new(5, seed);
    (0..count)
        .map(|_| {
            let u = seq.next_point();
            let x = scale(u[0], (1.1, 2.9));
            let xm = x * scale(u[2], (0.15, 0.85));
            JetPoint::new(x, scale(u[1], (0.3, 2.7)), xm, scale(u[3], (-2.3, -0.2)), scale(u[4], (-1.9, 1.7)))
        })
        .collect()
}

pub const RANK_SAMPLES: usize = 25;

/// `5 - rank Z`, the rank taken as a maximum over generic jets.
pub fn invariant_count(fields: &[VectorField], sample: usize, seed: u64) -> Result<usize> {
    let mut best = 0;
    let mut any = false;
    for jet in generic_jets(sample.max(1), seed) {
        if let Ok(r) = rank_z(fields, &jet) {
            any = true;
            best = best.max(r);
        }
    }
    if !any {
        return Err(Error::Domain("fields undefined at every sampled jet".into()));
    }
    Ok(JetPoint::DIM - best)
}

const FLOW_TOL: f64 = 1e-12;

/// Image of `point` under the one-parameter group of `field` at parameter `epsilon`.
pub fn flow(field: &VectorField, epsilon: f64, point: (f64, f64)) -> Result<(f64, f64)> {
    let y = rk::integrate(
        |_, s, d| {
            let (a, b) = field.eval(s[0], s[1]);
            d[0] = a;
            d[1] = b;
        },
        0.0,
        &[point.0, point.1],
        epsilon,
        FLOW_TOL,
        FLOW_TOL,
    )
    .map_err(|e| match e {
        rk::RkFailure::Underflow(t) | rk::RkFailure::NonFinite(t) => Error::BlowUp(t),
    })?;
    Ok((y[0], y[1]))
}

/// Flow of a point together with a tangent vector carried by the linearized flow.
pub fn flow_with_tangent(field: &VectorField, epsilon: f64, point: (f64, f64), tangent: (f64, f64)) -> Result<[f64; 4]> {
    let y = rk::integrate(
        |_, s, d| {
            let at = [s[0], s[1]];
            let (a, ax) = field.xi.diff_eval_index(&at, 0, Mode::Unchecked).unwrap_or((f64::NAN, f64::NAN));
            let (_, ay) = field.xi.diff_eval_index(&at, 1, Mode::Unchecked).unwrap_or((f64::NAN, f64::NAN));
            let (b, bx) = field.eta.diff_eval_index(&at, 0, Mode::Unchecked).unwrap_or((f64::NAN, f64::NAN));
            let (_, by) = field.eta.diff_eval_index(&at, 1, Mode::Unchecked).unwrap_or((f64::NAN, f64::NAN));
            d[0] = a;
            d[1] = b;
            d[2] = ax * s[2] + ay * s[3];
            d[3] = bx * s[2] + by * s[3];
        },
        0.0,
        &[point.0, point.1, tangent.0, tangent.1],
        epsilon,
        FLOW_TOL,
        FLOW_TOL,
    )
    .map_err(|e| match e {
        rk::RkFailure::Underflow(t) | rk::RkFailure::NonFinite(t) => Error::BlowUp(t),
    })?;
    Ok([y[0], y[1], y[2], y[3]])
}

/// Push the graph of a solution through the flow of `field`.
///
/// Nodes are a uniform grid of `grid` points plus every kink; slopes on
/// each side of a kink are carried separately.
pub fn transform_solution(field: &VectorField, epsilon: f64, sol: &impl Trajectory, grid: usize) -> Result<HermiteTable> {
    let (lo, hi) = sol.range();
    let n = grid.max(2);
    let mut nodes: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let mut special = sol.kinks();
    special.push(sol.start());
    nodes.extend(special.iter().copied().filter(|k| *k > lo && *k < hi));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    let map_slope = |t: [f64; 4]| -> Result<f64> {
        if !(t[2] > 0.0) {
            return Err(Error::NonGraph(t[0]));
        }
        Ok(t[3] / t[2])
    };
    let (mut xs, mut ys, mut left, mut right) = (vec![], vec![], vec![], vec![]);
    for &x in &nodes {
        let (y, _) = sol.eval(x)?;
        let (dl, dr) = sol.one_sided(x)?;
        let l = flow_with_tangent(field, epsilon, (x, y), (1.0, dl))?;
        let r = if dr == dl { l } else { flow_with_tangent(field, epsilon, (x, y), (1.0, dr))? };
        xs.push(l[0]);
        ys.push(l[1]);
        left.push(map_slope(l)?);
        right.push(map_slope(r)?);
    }
    let map_x = |x: f64| -> Result<f64> {
        let (y, _) = sol.eval(x)?;
        Ok(flow(field, epsilon, (x, y))?.0)
    };
    let start = map_x(sol.start())?;
    let kinks: Result<Vec<f64>> = sol.kinks().into_iter().map(map_x).collect();
    HermiteTable::new(xs, ys, left, right, start, kinks?)
}
