//! Method-of-steps integration of delay systems with dense output.
//!
//! Steps are Dormand–Prince 5(4) with cubic Hermite interpolation between
//! step ends. Every stage resolves the delayed abscissa from the delay
//! relation and reads `y_` from history. When the delayed point lies inside
//! the step being taken, the step is iterated against its own interpolant.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::roots::{bisect, largest_root_below};
use crate::numerics::rk::{error_norm, step_factor, A, C, E};
use crate::system::{DODSystem, DelayRelation, JetPoint, CAUSAL_GAP};
use crate::trajectory::{hermite, out_of_range, Trajectory};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub delay_root_tol: f64,
    /// Allowed mismatch of the initial data with the delay relation.
    pub compat_tol: f64,
    /// Continue past a failed compatibility check.
    pub force: bool,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            delay_root_tol: 1e-12,
            compat_tol: 1e-8,
            force: false,
            max_steps: 2_000_000,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, n: &str| {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::Config(format!("{n} must be positive, got {v}")))
            }
        };
        pos(self.rel_tol, "rel_tol")?;
        pos(self.abs_tol, "abs_tol")?;
        pos(self.max_step, "max_step")?;
        pos(self.delay_root_tol, "delay_root_tol")?;
        pos(self.compat_tol, "compat_tol")
    }
}

/// One accepted step; `d0` is the slope leaving `x0`, `d1` the slope arriving at `x1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub d0: f64,
    pub d1: f64,
    pub segment: usize,
}

impl StepRecord {
    fn eval(&self, x: f64) -> (f64, f64) {
        let h = self.x1 - self.x0;
        hermite((x - self.x0) / h, h, self.y0, self.d0, self.y1, self.d1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Most sign changes seen when scanning for a delayed abscissa.
    pub max_root_multiplicity: usize,
    /// Smallest `x - x_` met at an accepted step end.
    pub min_delay: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PiecewiseSolution {
    /// Initial function over `x`.
    pub phi: Expr,
    pub initial: (f64, f64),
    pub steps: Vec<StepRecord>,
    /// `x0` followed by every propagated breakpoint.
    pub breakpoints: Vec<f64>,
    pub stats: SolveStats,
    pub warnings: Vec<String>,
}

/// Row of a sampled solution; `segment` is -1 on the initial interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleRow {
    pub x: f64,
    pub y: f64,
    pub ydot: f64,
    pub segment_index: i64,
}

impl PiecewiseSolution {
    pub fn x0(&self) -> f64 {
        self.initial.1
    }

    pub fn end(&self) -> f64 {
        self.steps.last().map_or(self.initial.1, |s| s.x1)
    }

    fn phi_at(&self, x: f64) -> Result<(f64, f64)> {
        self.phi.diff_eval_index(&[x], 0, crate::Mode::Checked)
    }

    fn step_index(&self, x: f64) -> usize {
        self.steps.partition_point(|s| s.x1 <= x).min(self.steps.len() - 1)
    }

    /// Segment containing `x`; -1 on the initial interval.
    pub fn segment_of(&self, x: f64) -> i64 {
        if x < self.x0() || self.steps.is_empty() {
            -1
        } else {
            self.steps[self.step_index(x)].segment as i64
        }
    }

    /// `n` evenly spaced rows over the initial interval and the solution, plus every step end.
    pub fn sample(&self, n: usize, include_initial: bool) -> Result<Vec<SampleRow>> {
        let lo = if include_initial { self.initial.0 } else { self.x0() };
        let hi = self.end();
        let mut xs: Vec<f64> = if n >= 2 { crate::numerics::linspace(lo, hi, n) } else { Vec::new() };
        xs.push(self.x0());
        xs.extend(self.steps.iter().map(|s| s.x1));
        if include_initial {
            xs.push(self.initial.0);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.into_iter()
            .map(|x| {
                let (y, ydot) = self.eval(x)?;
                Ok(SampleRow { x, y, ydot, segment_index: self.segment_of(x) })
            })
            .collect()
    }
}

impl Trajectory for PiecewiseSolution {
    fn range(&self) -> (f64, f64) {
        (self.initial.0, self.end())
    }

    fn start(&self) -> f64 {
        self.x0()
    }

    fn kinks(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        let r = self.range();
        if !(x >= r.0 && x <= r.1) {
            return Err(out_of_range(x, r));
        }
        if x < self.x0() || self.steps.is_empty() {
            return self.phi_at(x);
        }
        let s = &self.steps[self.step_index(x)];
        if x == s.x1 {
            return Ok((s.y1, s.d1));
        }
        Ok(s.eval(x))
    }

    fn one_sided(&self, x: f64) -> Result<(f64, f64)> {
        let r = self.range();
        if !(x >= r.0 && x <= r.1) {
            return Err(out_of_range(x, r));
        }
        if x < self.x0() || self.steps.is_empty() {
            let d = self.phi_at(x)?.1;
            return Ok((d, d));
        }
        if x == self.x0() {
            return Ok((self.phi_at(x)?.1, self.steps[0].d0));
        }
        let i = self.steps.partition_point(|s| s.x1 < x);
        let s = &self.steps[i.min(self.steps.len() - 1)];
        if x == s.x1 {
            let right = self.steps.get(i + 1).map_or(s.d1, |n| n.d0);
            return Ok((s.d1, right));
        }
        let d = s.eval(x).1;
        Ok((d, d))
    }
}

/// Resolves `x_` at a point, given `y` along the history.
pub(crate) struct Resolver<'a> {
    pub system: &'a DODSystem,
    /// Left end of the history.
    pub lower: f64,
    pub tol: f64,
}

pub(crate) struct Resolved {
    pub x_minus: f64,
    pub y_minus: f64,
    pub multiplicity: usize,
}

impl Resolver<'_> {
    fn slack(&self, x: f64) -> f64 {
        1e-8 * (1.0 + x.abs())
    }

    fn admit(&self, x: f64, xm: f64) -> Result<()> {
        if !(xm < x) || xm < self.lower - self.slack(x) {
            return Err(Error::Causality { x, x_minus: xm });
        }
        Ok(())
    }

    /// `hint` is a nearby earlier root used to start local searches.
    pub fn resolve(&self, x: f64, y: f64, hint: Option<f64>, hist: &dyn Fn(f64) -> f64) -> Result<Resolved> {
        let sys = self.system;
        match &sys.delay {
            DelayRelation::Explicit { g } if !sys.delay_depends_on_history() => {
                let xm = g.eval(&JetPoint::new(x, y, 0.0, 0.0, 0.0).values());
                if !xm.is_finite() {
                    return Err(Error::Domain(format!("delay map undefined at x = {x}, y = {y}")));
                }
                self.admit(x, xm)?;
                Ok(Resolved { x_minus: xm, y_minus: hist(xm), multiplicity: 1 })
            }
            DelayRelation::Explicit { g } => {
                let map = |s: f64| g.eval(&JetPoint::new(x, y, 0.0, hist(s), 0.0).values());
                let mut s = hint.unwrap_or(x - CAUSAL_GAP).clamp(self.lower, x);
                for _ in 0..50 {
                    let next = map(s);
                    if !next.is_finite() {
                        break;
                    }
                    if (next - s).abs() <= self.tol * (1.0 + s.abs()) {
                        if self.admit(x, next).is_ok() {
                            return Ok(Resolved { x_minus: next, y_minus: hist(next), multiplicity: 1 });
                        }
                        break;
                    }
                    s = next;
                }
                // repelling or non-causal fixed point
                let defect = |s: f64| s - map(s);
                if let Some(root) = hint.and_then(|h| self.local_root(x, h, &defect)) {
                    if self.admit(x, root).is_ok() {
                        return Ok(Resolved { x_minus: root, y_minus: hist(root), multiplicity: 1 });
                    }
                }
                self.scan(x, defect, hist)
            }
            DelayRelation::Implicit { residual, .. } => {
                let res = |s: f64| residual.eval(&JetPoint::new(x, y, s, hist(s), 0.0).values());
                if let Some(h) = hint {
                    if let Some(root) = self.local_root(x, h, &res) {
                        return Ok(Resolved { x_minus: root, y_minus: hist(root), multiplicity: 1 });
                    }
                }
                self.scan(x, res, hist)
            }
        }
    }

    /// Full downward scan for the largest root.
    pub fn resolve_scan(&self, x: f64, y: f64, hist: &dyn Fn(f64) -> f64) -> Result<Resolved> {
        let sys = self.system;
        match &sys.delay {
            DelayRelation::Implicit { residual, .. } => {
                self.scan(x, |s| residual.eval(&JetPoint::new(x, y, s, hist(s), 0.0).values()), hist)
            }
            DelayRelation::Explicit { .. } => self.resolve(x, y, None, hist),
        }
    }

    fn reach(&self, x: f64) -> f64 {
        let span = x - self.lower + self.slack(x);
        match &self.system.delay {
            DelayRelation::Implicit { max_delay, .. } => span.min(*max_delay),
            DelayRelation::Explicit { .. } => span,
        }
    }

    fn scan(&self, x: f64, mut f: impl FnMut(f64) -> f64, hist: &dyn Fn(f64) -> f64) -> Result<Resolved> {
        let reach = self.reach(x);
        if !(reach > CAUSAL_GAP) {
            return Err(Error::NoRootFound(format!("no history below x = {x}")));
        }
        let tol = self.tol * (1.0 + x.abs());
        // where the slack below the history start reads undefined history, use the start itself
        let lower = self.lower;
        let mut g = |s: f64| {
            let v = f(s);
            if v.is_finite() || s >= lower {
                v
            } else {
                f(lower)
            }
        };
        let found = largest_root_below(x, reach, CAUSAL_GAP, tol, &mut g)
            .ok_or_else(|| Error::NoRootFound(format!("delay relation has no root in [{}, {x})", x - reach)))?;
        let xm = found.root.max(self.lower);
        self.admit(x, xm)?;
        Ok(Resolved { x_minus: xm, y_minus: hist(xm), multiplicity: found.multiplicity })
    }

    /// Bracket a root next to `hint`, preferring the side towards `x`.
    fn local_root(&self, x: f64, hint: f64, f: &dyn Fn(f64) -> f64) -> Option<f64> {
        let top = x - CAUSAL_GAP;
        let bottom = x - self.reach(x);
        let s0 = hint.clamp(bottom, top);
        let v0 = f(s0);
        if !v0.is_finite() {
            return None;
        }
        let tol = self.tol * (1.0 + x.abs());
        if v0 == 0.0 {
            return Some(s0);
        }
        let mut d = 1e-6 * (1.0 + (x - s0).abs());
        for _ in 0..30 {
            for s in [(s0 + d).min(top), (s0 - d).max(bottom)] {
                let v = f(s);
                if v.is_finite() && (v < 0.0) != (v0 < 0.0) {
                    let (a, b) = if s > s0 { (s0, s) } else { (s, s0) };
                    return Some(bisect(f, a, b, tol));
                }
            }
            if s0 + d >= top && s0 - d <= bottom {
                break;
            }
            d *= 2.0;
        }
        None
    }
}

struct Trial {
    x1: f64,
    y1: f64,
    d1: f64,
    err: f64,
    defect: f64,
    xm_end: f64,
    multiplicity: usize,
}

struct Integrator<'a> {
    system: &'a DODSystem,
    phi: &'a Expr,
    x0: f64,
    opts: SolverOptions,
    resolver: Resolver<'a>,
    steps: Vec<StepRecord>,
    stats: SolveStats,
}

const GAUSS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

impl Integrator<'_> {
    /// `y` on the committed history, falling back to `ahead` past its end.
    fn history(&self, s: f64, ahead: &dyn Fn(f64) -> f64) -> f64 {
        if s <= self.x0 {
            return self.phi.eval(&[s]);
        }
        match self.steps.last() {
            Some(last) if s <= last.x1 => {
                let i = self.steps.partition_point(|st| st.x1 < s);
                self.steps[i].eval(s).0
            }
            _ => ahead(s),
        }
    }

    fn rhs(&mut self, x: f64, y: f64, hint: Option<f64>, ahead: &dyn Fn(f64) -> f64) -> Result<(f64, f64, usize)> {
        self.stats.rhs_evals += 1;
        let hist = |s: f64| self.history(s, ahead);
        let r = self.resolver.resolve(x, y, hint, &hist)?;
        let v = self.system.f.eval(&JetPoint::new(x, y, r.x_minus, r.y_minus, 0.0).values());
        Ok((v, r.x_minus, r.multiplicity))
    }

    /// One trial step from `(t, y, k0)` to `x1`, iterated when stages look ahead of `t`.
    fn trial(&mut self, t: f64, y: f64, k0: f64, xm0: f64, x1: f64) -> Result<Option<Trial>> {
        let h = x1 - t;
        let last = self.steps.last().copied();
        let mut guess: Box<dyn Fn(f64) -> f64> = match last {
            Some(s) => Box::new(move |q| s.eval(q).0),
            None => Box::new(move |q| y + k0 * (q - t)),
        };
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..50 {
            let mut k = [0.0; 7];
            k[0] = k0;
            let mut ahead_used = false;
            let mut xm = xm0;
            let mut mult = 1;
            let mut yn = y;
            for s in 1..7 {
                let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
                let xs = if s == 6 { x1 } else { t + C[s] * h };
                let (v, m, mm) = self.rhs(xs, ys, Some(xm), &guess)?;
                ahead_used |= m > t;
                xm = m;
                mult = mult.max(mm);
                k[s] = v;
                if s == 6 {
                    yn = ys;
                }
            }
            if !(yn.is_finite() && k.iter().all(|v| v.is_finite())) {
                return Ok(None);
            }
            let err_v = h * (0..7).map(|j| E[j] * k[j]).sum::<f64>();
            let err = error_norm(&[err_v], &[y], &[yn], self.opts.rel_tol, self.opts.abs_tol);
            let d1 = k[6];
            let step = StepRecord { x0: t, x1, y0: y, y1: yn, d0: k0, d1, segment: 0 };
            let converged = match prev {
                Some((py, pd)) => {
                    let tol = self.opts.delay_root_tol;
                    (yn - py).abs() <= tol * (1.0 + yn.abs()) && (d1 - pd).abs() <= tol * (1.0 + d1.abs())
                }
                None => false,
            };
            if !ahead_used || converged {
                let mut defect = 0.0f64;
                let noise = 16.0 * f64::EPSILON * (y.abs().max(yn.abs()) + h * k0.abs().max(d1.abs())) / h;
                for g in GAUSS {
                    let xg = t + g * h;
                    let (yg, dg) = step.eval(xg);
                    let (fg, _, _) = self.rhs(xg, yg, Some(xm0 + g * (xm - xm0)), &|q| step.eval(q).0)?;
                    let scale = 0.1 * (self.opts.rel_tol * fg.abs() + self.opts.abs_tol) + noise;
                    defect = defect.max((dg - fg).abs() / scale);
                }
                return Ok(Some(Trial { x1, y1: yn, d1, err, defect, xm_end: xm, multiplicity: mult }));
            }
            prev = Some((yn, d1));
            guess = Box::new(move |q| step.eval(q).0);
        }
        Ok(None)
    }

    /// Earliest point in the step where the delayed abscissa meets a breakpoint.
    fn event(&self, t: f64, xm0: f64, trial: &Trial, y0: f64, k0: f64, breakpoints: &[f64]) -> Option<f64> {
        let step = StepRecord { x0: t, x1: trial.x1, y0, y1: trial.y1, d0: k0, d1: trial.d1, segment: 0 };
        let eps = 1e-10 * (1.0 + t.abs());
        let mut best: Option<f64> = None;
        for &b in breakpoints {
            let (a, c) = (xm0 - b, trial.xm_end - b);
            if a.abs() <= eps || (a < 0.0) == (c < 0.0) && c.abs() > eps {
                continue;
            }
            let root = if c.abs() <= eps {
                trial.x1
            } else {
                let mut hint = xm0;
                let e = |s: f64| -> f64 {
                    let (ys, _) = step.eval(s);
                    let hist = |q: f64| self.history(q, &|q| step.eval(q).0);
                    match self.resolver.resolve(s, ys, Some(hint), &hist) {
                        Ok(r) => {
                            hint = r.x_minus;
                            r.x_minus - b
                        }
                        Err(_) => f64::NAN,
                    }
                };
                bisect(e, t, trial.x1, 0.0)
            };
            if best.is_none_or(|r| root < r) {
                best = Some(root);
            }
        }
        best
    }
}

fn initial_checks(system: &DODSystem, phi: &Expr, (xl, x0): (f64, f64), opts: &SolverOptions) -> Result<Option<String>> {
    let y0 = phi.eval_checked(&[x0])?;
    let yl = phi.eval_checked(&[xl])?;
    let defect = match &system.delay {
        DelayRelation::Explicit { g } => {
            let xm = g.eval_checked(&JetPoint::new(x0, y0, 0.0, yl, 0.0).values())?;
            if xm >= x0 {
                return Err(Error::Causality { x: x0, x_minus: xm });
            }
            if xm < xl - opts.compat_tol {
                return Err(Error::Causality { x: x0, x_minus: xm });
            }
            (xm - xl).abs()
        }
        DelayRelation::Implicit { residual, .. } => residual.eval_checked(&JetPoint::new(x0, y0, xl, yl, 0.0).values())?.abs(),
    };
    if defect > opts.compat_tol {
        if opts.force {
            return Ok(Some(format!("initial data violate the delay relation by {defect:e}; continuing")));
        }
        return Err(Error::Compatibility { defect });
    }
    Ok(None)
}

/// Integrate `system` from the initial function `phi` on `[x_{-1}, x0]` up to `x_end`.
pub fn solve(
    system: &DODSystem,
    phi: &Expr,
    initial: (f64, f64),
    x_end: f64,
    opts: &SolverOptions,
) -> Result<PiecewiseSolution> {
    opts.validate()?;
    let (xl, x0) = initial;
    if phi.variables().len() != 1 {
        return Err(Error::Config("initial function must be of one variable".into()));
    }
    if !(xl < x0) {
        return Err(Error::Config(format!("initial interval [{xl}, {x0}] is empty")));
    }
    if !(x_end > x0) {
        return Err(Error::Config(format!("x_end = {x_end} must exceed x0 = {x0}")));
    }
    let mut warnings: Vec<String> = initial_checks(system, phi, initial, opts)?.into_iter().collect();
    let mut it = Integrator {
        system,
        phi,
        x0,
        opts: *opts,
        resolver: Resolver { system, lower: xl, tol: opts.delay_root_tol },
        steps: Vec::new(),
        stats: SolveStats { min_delay: f64::INFINITY, ..Default::default() },
    };
    let mut breakpoints = vec![x0];
    let mut t = x0;
    let mut y = phi.eval_checked(&[x0])?;
    let no_ahead = |_: f64| f64::NAN;
    let hist0 = |s: f64| phi.eval(&[s]);
    let start = it.resolver.resolve_scan(x0, y, &hist0)?;
    let (mut k0, mut xm, _) = it.rhs(x0, y, Some(start.x_minus), &no_ahead)?;
    let span = x_end - x0;
    let mut h = (0.01 * span).min(opts.max_step).min(0.1 * (x0 - xm).max(1e-6));
    let mut pending: Option<f64> = None;
    let mut segment = 0;
    let min_h = 1e-13 * (1.0 + x0.abs().max(x_end.abs()));
    while t < x_end {
        if it.stats.accepted + it.stats.rejected >= opts.max_steps {
            return Err(Error::Stiffness { x: t, h });
        }
        if h < min_h {
            return Err(Error::Stiffness { x: t, h });
        }
        let mut x1 = (t + h.min(opts.max_step)).min(x_end);
        if let Some(p) = pending {
            if p < x1 {
                x1 = p;
            }
        }
        if x_end - x1 < min_h {
            x1 = x_end;
        }
        let trial = match it.trial(t, y, k0, xm, x1) {
            Ok(Some(tr)) => tr,
            Ok(None) => {
                it.stats.rejected += 1;
                h = 0.25 * (x1 - t);
                continue;
            }
            Err(e @ (Error::Causality { .. } | Error::NoRootFound(_))) => {
                if x1 - t > 4.0 * min_h {
                    it.stats.rejected += 1;
                    h = 0.25 * (x1 - t);
                    continue;
                }
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        let hs = x1 - t;
        if let Some(ev) = it.event(t, xm, &trial, y, k0, &breakpoints) {
            if ev < x1 - min_h {
                pending = Some(ev);
                h = ev - t;
                continue;
            }
            pending = Some(x1);
        }
        let defect_factor = if trial.defect == 0.0 { 5.0 } else { (0.9 * trial.defect.powf(-1.0 / 3.0)).clamp(0.2, 5.0) };
        let factor = step_factor(trial.err).min(defect_factor);
        if trial.err > 1.0 || trial.defect > 1.0 {
            it.stats.rejected += 1;
            h = hs * factor.min(0.9);
            continue;
        }
        it.steps.push(StepRecord { x0: t, x1, y0: y, y1: trial.y1, d0: k0, d1: trial.d1, segment });
        it.stats.accepted += 1;
        it.stats.max_root_multiplicity = it.stats.max_root_multiplicity.max(trial.multiplicity);
        t = x1;
        y = trial.y1;
        k0 = trial.d1;
        xm = trial.xm_end;
        if system.is_implicit() {
            let hist = |s: f64| it.history(s, &no_ahead);
            let r = it.resolver.resolve_scan(t, y, &hist)?;
            it.stats.max_root_multiplicity = it.stats.max_root_multiplicity.max(r.multiplicity);
            if (r.x_minus - xm).abs() > 1e-8 * (1.0 + t.abs()) {
                warnings.push(format!("delayed abscissa jumped to a larger root at x = {t}"));
                xm = r.x_minus;
                let (v, _, _) = it.rhs(t, y, Some(xm), &no_ahead)?;
                k0 = v;
            }
        }
        it.stats.min_delay = it.stats.min_delay.min(t - xm);
        if pending.is_some_and(|p| p <= t) {
            pending = None;
            breakpoints.push(t);
            segment += 1;
        }
        h = hs * factor;
    }
    Ok(PiecewiseSolution { phi: phi.clone(), initial, steps: it.steps, breakpoints, stats: it.stats, warnings })
}

/// Dense-output value and slope.
pub fn evaluate(sol: &PiecewiseSolution, x: f64) -> Result<(f64, f64)> {
    sol.eval(x)
}

/// Points of `(x0, x_end)` where residuals are sampled, kept off kinks.
pub fn residual_grid(sol: &impl Trajectory, n: usize) -> Vec<f64> {
    let (_, hi) = sol.range();
    let lo = sol.start();
    let kinks = sol.kinks();
    (0..n)
        .map(|i| {
            let mut x = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
            for &k in &kinks {
                if (x - k).abs() < 1e-9 {
                    x = if k + 1e-9 < hi { k + 1e-9 } else { k - 1e-9 };
                }
            }
            x
        })
        .collect()
}

/// Largest `|yd - f|` over `n` grid points, with `x_` re-resolved from the trajectory.
pub fn residual(sol: &impl Trajectory, system: &DODSystem, n: usize) -> Result<f64> {
    Ok(residual_profile(sol, system, n)?.into_iter().map(|(_, r)| r).fold(0.0, f64::max))
}

/// `(x, |yd - f|)` along the residual grid.
pub fn residual_profile(sol: &impl Trajectory, system: &DODSystem, n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 10 {
        return Err(Error::Config(format!("residual grid of {n} points is below 10")));
    }
    let (lo, _) = sol.range();
    let resolver = Resolver { system, lower: lo, tol: 1e-13 };
    let hist = |s: f64| sol.eval(s).map_or(f64::NAN, |v| v.0);
    residual_grid(sol, n)
        .into_iter()
        .map(|x| {
            let (y, yd) = sol.eval(x)?;
            let r = resolver.resolve_scan(x, y, &hist)?;
            let f = system.f.eval(&JetPoint::new(x, y, r.x_minus, r.y_minus, yd).values());
            Ok((x, (yd - f).abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests;
