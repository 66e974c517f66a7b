//! Delay ordinary differential systems and points of their jet space.

use crate::error::{Error, Result};
use crate::expr::{Dual, Expr, Mode};
use crate::numerics::roots::largest_root_below;
use serde::Serialize;

/// Variable order for every expression evaluated on a jet.
///
/// `dx` and `dy` are the differences `x - x_` and `y - y_`.
pub const JET_VARS: [&str; 7] = ["x", "y", "x_", "y_", "yd", "dx", "dy"];

/// Variables of a point vector field.
pub const PLANE_VARS: [&str; 2] = ["x", "y"];

/// Gap kept between a resolved delayed abscissa and `x`.
pub const CAUSAL_GAP: f64 = 1e-12;

/// Point `(x, y, x_, y_, ydot)` of the five-dimensional jet space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JetPoint {
    pub x: f64,
    pub y: f64,
    pub x_minus: f64,
    pub y_minus: f64,
    pub ydot: f64,
}

impl JetPoint {
    pub const DIM: usize = 5;

    pub fn new(x: f64, y: f64, x_minus: f64, y_minus: f64, ydot: f64) -> Self {
        Self { x, y, x_minus, y_minus, ydot }
    }

    pub fn dx(&self) -> f64 {
        self.x - self.x_minus
    }

    pub fn dy(&self) -> f64 {
        self.y - self.y_minus
    }

    pub fn coords(&self) -> [f64; 5] {
        [self.x, self.y, self.x_minus, self.y_minus, self.ydot]
    }

    pub fn from_coords(c: [f64; 5]) -> Self {
        Self::new(c[0], c[1], c[2], c[3], c[4])
    }

    /// Values in [`JET_VARS`] order.
    pub fn values(&self) -> [f64; 7] {
        [self.x, self.y, self.x_minus, self.y_minus, self.ydot, self.dx(), self.dy()]
    }
}

/// Duals in [`JET_VARS`] order for base tangent `dir` (over the five coordinates).
pub fn jet_duals(c: [f64; 5], dir: [f64; 5]) -> [Dual; 7] {
    [
        Dual::new(c[0], dir[0]),
        Dual::new(c[1], dir[1]),
        Dual::new(c[2], dir[2]),
        Dual::new(c[3], dir[3]),
        Dual::new(c[4], dir[4]),
        Dual::new(c[0] - c[2], dir[0] - dir[2]),
        Dual::new(c[1] - c[3], dir[1] - dir[3]),
    ]
}

/// Value and gradient over the five base coordinates of a jet expression.
pub fn jet_gradient(e: &Expr, jet: &JetPoint, mode: Mode) -> Result<(f64, [f64; 5])> {
    let c = jet.coords();
    let mut g = [0.0; 5];
    let mut value = match mode {
        Mode::Checked => e.eval_checked(&jet.values())?,
        Mode::Unchecked => e.eval(&jet.values()),
    };
    let touches = |k: usize| {
        e.uses(k) || ((k == 0 || k == 2) && e.uses(5)) || ((k == 1 || k == 3) && e.uses(6))
    };
    for (k, slot) in g.iter_mut().enumerate() {
        if !touches(k) {
            continue;
        }
        let mut dir = [0.0; 5];
        dir[k] = 1.0;
        let d = e.eval_dual(&jet_duals(c, dir), mode)?;
        value = d.value;
        *slot = d.partial;
    }
    Ok((value, g))
}

/// Derivative of a jet expression along a tangent vector.
pub fn jet_directional(e: &Expr, jet: &JetPoint, dir: [f64; 5], mode: Mode) -> Result<f64> {
    Ok(e.eval_dual(&jet_duals(jet.coords(), dir), mode)?.partial)
}

/// How the delayed abscissa is fixed.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayRelation {
    /// `x_ = g(x, y, y_)`; may use `dy` but not `x_` or `dx`.
    Explicit { g: Expr },
    /// `G(x, y, x_, y_) = 0`, solved for the largest root below `x`.
    Implicit { residual: Expr, max_delay: f64 },
}

/// Sampling box for validation and random jets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub y_minus: (f64, f64),
}

impl SampleBox {
    pub fn over(domain: (f64, f64)) -> Self {
        Self { x: domain, y: (-10.0, 10.0), y_minus: (-10.0, 10.0) }
    }
}

/// A delay equation `yd = f` together with its delay relation.
#[derive(Debug, Clone, Serialize)]
pub struct DODSystem {
    /// Right-hand side over [`JET_VARS`]; `x_` stands for the resolved delayed abscissa.
    pub f: Expr,
    pub delay: DelayRelation,
    pub domain: (f64, f64),
    pub label: String,
    pub sample_box: SampleBox,
}

/// Total first derivatives on the manifold, with `x_` eliminated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldDerivatives {
    pub f: [f64; 3],
    pub g: [f64; 3],
}

fn check_vars(e: &Expr, forbidden: &[&str], what: &str) -> Result<()> {
    for v in forbidden {
        if e.uses_name(v) {
            return Err(Error::Config(format!("{what} may not depend on `{v}`")));
        }
    }
    Ok(())
}

impl DODSystem {
    pub fn new(f: Expr, delay: DelayRelation, domain: (f64, f64), label: impl Into<String>) -> Result<Self> {
        if f.variables() != JET_VARS {
            return Err(Error::Config("right-hand side must be over the jet variables".into()));
        }
        check_vars(&f, &["yd"], "f")?;
        match &delay {
            DelayRelation::Explicit { g } => {
                if g.variables() != JET_VARS {
                    return Err(Error::Config("delay map must be over the jet variables".into()));
                }
                check_vars(g, &["x_", "dx", "yd"], "g")?;
            }
            DelayRelation::Implicit { residual, max_delay } => {
                if residual.variables() != JET_VARS {
                    return Err(Error::Config("delay residual must be over the jet variables".into()));
                }
                check_vars(residual, &["yd"], "delay residual")?;
                if !(*max_delay > 0.0) {
                    return Err(Error::Config("max_delay must be positive".into()));
                }
            }
        }
        if !(domain.0 < domain.1) {
            return Err(Error::Config(format!("empty domain [{}, {}]", domain.0, domain.1)));
        }
        Ok(Self { f, delay, domain, label: label.into(), sample_box: SampleBox::over(domain) })
    }

    /// System with `yd = f` and `x_ = g`, both given as source text.
    pub fn explicit(f: &str, g: &str, domain: (f64, f64)) -> Result<Self> {
        let f = Expr::parse(f, &JET_VARS)?;
        let g = Expr::parse(g, &JET_VARS)?;
        Self::new(f, DelayRelation::Explicit { g }, domain, "")
    }

    /// System with `yd = f` and an implicit relation `residual = 0`.
    pub fn implicit(f: &str, residual: &str, domain: (f64, f64), max_delay: f64) -> Result<Self> {
        let f = Expr::parse(f, &JET_VARS)?;
        let residual = Expr::parse(residual, &JET_VARS)?;
        Self::new(f, DelayRelation::Implicit { residual, max_delay }, domain, "")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_box(mut self, b: SampleBox) -> Self {
        self.sample_box = b;
        self
    }

    /// Same relation, different right-hand side.
    pub fn with_rhs(&self, f: Expr) -> Result<Self> {
        let mut s = Self::new(f, self.delay.clone(), self.domain, self.label.clone())?;
        s.sample_box = self.sample_box;
        Ok(s)
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self.delay, DelayRelation::Implicit { .. })
    }

    /// True if the delayed abscissa depends on `y_` (through `y_` or `dy`).
    pub fn delay_depends_on_history(&self) -> bool {
        match &self.delay {
            DelayRelation::Explicit { g } => g.uses_name("y_") || g.uses_name("dy"),
            DelayRelation::Implicit { residual, .. } => residual.uses_name("y_") || residual.uses_name("dy"),
        }
    }

    /// Right-hand side at a point with known delayed abscissa.
    pub fn rhs(&self, x: f64, y: f64, x_minus: f64, y_minus: f64) -> f64 {
        self.f.eval(&JetPoint::new(x, y, x_minus, y_minus, 0.0).values())
    }

    /// Signed defect of the delay relation at a trial delayed abscissa.
    /// Explicit relations use `x_ - g`.
    pub fn delay_defect(&self, x: f64, y: f64, x_minus: f64, y_minus: f64) -> f64 {
        let v = JetPoint::new(x, y, x_minus, y_minus, 0.0).values();
        match &self.delay {
            DelayRelation::Explicit { g } => x_minus - g.eval(&v),
            DelayRelation::Implicit { residual, .. } => residual.eval(&v),
        }
    }

    /// Delayed abscissa for known `(x, y, y_)`.
    pub fn delayed_x(&self, x: f64, y: f64, y_minus: f64) -> Result<f64> {
        match &self.delay {
            DelayRelation::Explicit { g } => {
                let xm = g.eval_checked(&JetPoint::new(x, y, f64::NAN, y_minus, 0.0).values_no_dx())?;
                if xm >= x {
                    return Err(Error::DelayOrder { x, x_minus: xm });
                }
                Ok(xm)
            }
            DelayRelation::Implicit { max_delay, .. } => {
                let found = largest_root_below(x, *max_delay, CAUSAL_GAP, 1e-15 * x.abs().max(1.0), |t| {
                    self.delay_defect(x, y, t, y_minus)
                });
                found.map(|r| r.root).ok_or_else(|| {
                    Error::NoRootFound(format!("delay relation has no root below x = {x} (y = {y}, y_ = {y_minus})"))
                })
            }
        }
    }

    /// Point on the system manifold with free coordinates `(x, y, y_)`.
    pub fn jet_on_manifold(&self, x: f64, y: f64, y_minus: f64) -> Result<JetPoint> {
        let xm = self.delayed_x(x, y, y_minus)?;
        let ydot = self.f.eval_checked(&JetPoint::new(x, y, xm, y_minus, 0.0).values())?;
        Ok(JetPoint::new(x, y, xm, y_minus, ydot))
    }

    /// Residuals `E1 = yd - f` and `E2` (the delay defect) at an arbitrary jet.
    pub fn manifold_residuals(&self, jet: &JetPoint) -> (f64, f64) {
        let e1 = jet.ydot - self.f.eval(&jet.values());
        let e2 = self.delay_defect(jet.x, jet.y, jet.x_minus, jet.y_minus);
        (e1, e2)
    }

    /// Exact total derivatives of `f` and of the delay map in `(x, y, y_)`.
    pub fn manifold_derivatives(&self, jet: &JetPoint) -> Result<ManifoldDerivatives> {
        // g_v from the explicit map or by implicit differentiation
        let g = match &self.delay {
            DelayRelation::Explicit { g } => {
                let (_, d) = jet_gradient(g, jet, Mode::Checked)?;
                [d[0], d[1], d[3]]
            }
            DelayRelation::Implicit { residual, .. } => {
                let (_, d) = jet_gradient(residual, jet, Mode::Checked)?;
                if d[2] == 0.0 {
                    return Err(Error::Domain("delay residual is stationary in x_".into()));
                }
                [-d[0] / d[2], -d[1] / d[2], -d[3] / d[2]]
            }
        };
        let (_, df) = jet_gradient(&self.f, jet, Mode::Checked)?;
        let f = [df[0] + df[2] * g[0], df[1] + df[2] * g[1], df[3] + df[2] * g[2]];
        Ok(ManifoldDerivatives { f, g })
    }
}

impl JetPoint {
    /// Values with `x_` unknown; only valid for expressions free of `x_` and `dx`.
    fn values_no_dx(&self) -> [f64; 7] {
        [self.x, self.y, 0.0, self.y_minus, self.ydot, 0.0, self.dy()]
    }
}

/// A point vector field `xi d/dx + eta d/dy`.
#[derive(Debug, Clone, Serialize)]
pub struct VectorField {
    pub xi: Expr,
    pub eta: Expr,
    pub label: String,
}

impl VectorField {
    pub fn new(xi: &str, eta: &str) -> Result<Self> {
        Self::with_params(xi, eta, &[])
    }

    pub fn with_params(xi: &str, eta: &str, params: &[(&str, f64)]) -> Result<Self> {
        let xi = Expr::parse_with(xi, &PLANE_VARS, params)?;
        let eta = Expr::parse_with(eta, &PLANE_VARS, params)?;
        let label = field_label(&xi, &eta);
        Ok(Self { xi, eta, label })
    }

    /// Field from coefficient expressions over any subset of `(x, y)`.
    pub fn from_exprs(xi: &Expr, eta: &Expr) -> Result<Self> {
        let xi = xi.rebind(&PLANE_VARS)?;
        let eta = eta.rebind(&PLANE_VARS)?;
        let label = field_label(&xi, &eta);
        Ok(Self { xi, eta, label })
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &VectorField, b: f64) -> Result<VectorField> {
        let lin = |p: &Expr, q: &Expr| -> Result<Expr> {
            let l = Expr::parse_with("a*p + b*q", &["p", "q"], &[("a", a), ("b", b)])?;
            l.compose(&[p.clone(), q.clone()])
        };
        let xi = lin(&self.xi, &other.xi)?;
        let eta = lin(&self.eta, &other.eta)?;
        let label = field_label(&xi, &eta);
        Ok(VectorField { xi, eta, label })
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.xi.eval(&[x, y]), self.eta.eval(&[x, y]))
    }
}

fn field_label(xi: &Expr, eta: &Expr) -> String {
    let part = |e: &Expr, d: &str| -> Option<String> {
        let s = e.source().trim().to_string();
        match s.as_str() {
            "0" => None,
            "1" => Some(d.to_string()),
            _ => Some(format!("({s}){d}")),
        }
    };
    let parts: Vec<String> = [part(xi, "d/dx"), part(eta, "d/dy")].into_iter().flatten().collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// `yd = alpha(x) y + beta(x) y_ + gamma(x)` with `x_ = g(x)`.
#[derive(Debug, Clone, Serialize)]
pub struct LinearDODS {
    pub alpha: Expr,
    pub beta: Expr,
    pub gamma: Expr,
    pub g: Expr,
    pub domain: (f64, f64),
}

impl LinearDODS {
    pub fn new(alpha: &str, beta: &str, gamma: &str, g: &str, domain: (f64, f64)) -> Result<Self> {
        let p = |s: &str| Expr::parse(s, &["x"]);
        Self::from_exprs(p(alpha)?, p(beta)?, p(gamma)?, p(g)?, domain)
    }

    pub fn from_exprs(alpha: Expr, beta: Expr, gamma: Expr, g: Expr, domain: (f64, f64)) -> Result<Self> {
        for e in [&alpha, &beta, &gamma, &g] {
            if e.variables() != ["x"] {
                return Err(Error::Config("linear coefficients must be functions of x alone".into()));
            }
        }
        if !(domain.0 < domain.1) {
            return Err(Error::Config("empty domain".into()));
        }
        let lin = Self { alpha, beta, gamma, g, domain };
        let grid = crate::numerics::linspace(domain.0, domain.1, 200);
        if grid.iter().all(|&x| lin.beta.eval(&[x]).abs() <= 1e-12) {
            return Err(Error::Config("beta vanishes identically".into()));
        }
        if let Some(&x) = grid.iter().find(|&&x| lin.g.eval(&[x]) >= x) {
            return Err(Error::DelayOrder { x, x_minus: lin.g.eval(&[x]) });
        }
        let g0 = lin.g.eval(&[grid[0]]);
        if grid.iter().all(|&x| (lin.g.eval(&[x]) - g0).abs() <= 1e-12) {
            return Err(Error::Config("delay map is constant".into()));
        }
        Ok(lin)
    }

    /// Read the coefficients off a general system whose right-hand side is
    /// affine in `(y, y_)` and whose delay map depends on `x` only.
    pub fn from_system(sys: &DODSystem) -> Result<Self> {
        let g = match &sys.delay {
            DelayRelation::Explicit { g } => g,
            DelayRelation::Implicit { .. } => {
                return Err(Error::Config("linear systems need an explicit delay map".into()))
            }
        };
        for v in ["y", "y_", "dy"] {
            if g.uses_name(v) {
                return Err(Error::Config("linear systems need a solution-independent delay".into()));
            }
        }
        let over_x = |src: &str| Expr::parse(src, &["x"]);
        let gx = g.compose(&[
            over_x("x")?,
            over_x("0")?,
            over_x("0")?,
            over_x("0")?,
            over_x("0")?,
            over_x("0")?,
            over_x("0")?,
        ])?;
        // f at (x, y, g(x), y_) with dx = x - g(x), dy = y - y_
        let at = |y: &str, ym: &str, dy: &str| -> Result<Expr> {
            let subs = [
                over_x("x")?,
                over_x(y)?,
                gx.clone(),
                over_x(ym)?,
                over_x("0")?,
                Expr::parse("x - g", &["x", "g"])?.compose(&[over_x("x")?, gx.clone()])?,
                over_x(dy)?,
            ];
            sys.f.compose(&subs)
        };
        let gamma = at("0", "0", "0")?;
        let diff = |e: Expr| -> Result<Expr> {
            Expr::parse("p - q", &["p", "q"])?.compose(&[e, gamma.clone()])
        };
        let alpha = diff(at("1", "0", "1")?)?;
        let beta = diff(at("0", "1", "-1")?)?;
        let lin = Self::from_exprs(alpha, beta, gamma, gx, sys.domain)?;
        lin.check_affine(sys)?;
        Ok(lin)
    }

    fn check_affine(&self, sys: &DODSystem) -> Result<()> {
        let mut s = crate::numerics::LowDiscrepancy::new(3, 11);
        for _ in 0..64 {
            let u = s.next_point();
            let x = crate::numerics::scale(u[0], self.domain);
            let y = crate::numerics::scale(u[1], sys.sample_box.y);
            let ym = crate::numerics::scale(u[2], sys.sample_box.y_minus);
            let xm = self.g.eval(&[x]);
            let full = sys.rhs(x, y, xm, ym);
            let lin = self.rhs(x, y, ym);
            if (full - lin).abs() > 1e-9 * (1.0 + full.abs()) {
                return Err(Error::Config(format!("right-hand side is not affine in (y, y_) near x = {x}")));
            }
        }
        Ok(())
    }

    pub fn rhs(&self, x: f64, y: f64, y_minus: f64) -> f64 {
        self.alpha.eval(&[x]) * y + self.beta.eval(&[x]) * y_minus + self.gamma.eval(&[x])
    }

    /// The same system in general form.
    pub fn to_system(&self) -> Result<DODSystem> {
        let over_jet = |e: &Expr| e.rebind(&JET_VARS);
        let template = Expr::parse("a*y + b*y_ + c", &["a", "b", "c", "y", "y_"])?;
        let f = template.compose(&[
            over_jet(&self.alpha)?,
            over_jet(&self.beta)?,
            over_jet(&self.gamma)?,
            Expr::parse("y", &JET_VARS)?,
            Expr::parse("y_", &JET_VARS)?,
        ])?;
        let g = over_jet(&self.g)?;
        DODSystem::new(f, DelayRelation::Explicit { g }, self.domain, "linear")
    }

    pub fn is_homogeneous(&self) -> bool {
        let grid = crate::numerics::linspace(self.domain.0, self.domain.1, 200);
        grid.iter().all(|&x| self.gamma.eval(&[x]) == 0.0)
    }
}
