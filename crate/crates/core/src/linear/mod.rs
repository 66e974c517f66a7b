//! Linear systems `yd = alpha(x) y + beta(x) y_ + gamma(x)` with `x_ = g(x)`.
//!
//! Every such system carries the superposition symmetries `rho(x) d/dy` and
//! `y d/dy`. A further symmetry moving `x` exists when the function
//! `K = alpha - g' alpha(g) - beta'/beta` satisfies the compatibility
//! condition and `xi = exp(int K)` also solves `xi(g) = g' xi`.

mod maps;

use crate::error::{Error, Result};
use crate::expr::{Expr, Mode, Table};
use crate::numerics::{linspace, quad};
use crate::solver::{solve, PiecewiseSolution, SolverOptions};
use crate::system::{DODSystem, LinearDODS, VectorField};
use crate::trajectory::Trajectory;
pub use maps::MonotoneMap;
use serde::{Deserialize, Serialize};

pub const COMPAT_GRID: usize = 200;
pub const COMPAT_TOL: f64 = 1e-8;
/// Residual a particular solution may leave on the grid.
pub const PARTICULAR_TOL: f64 = 1e-8;
const TABLE_NODES: usize = 6001;
const QUAD_TOL: f64 = 1e-14;
const MAX_ITERATES: usize = 100_000;

fn at(e: &Expr, x: f64) -> Result<f64> {
    e.eval_checked(&[x])
}

fn d1(e: &Expr, x: f64) -> Result<(f64, f64)> {
    e.diff_eval_index(&[x], 0, Mode::Checked)
}

fn d2(e: &Expr, x: f64) -> Result<(f64, f64, f64)> {
    e.second_derivative(&[x], 0, Mode::Checked)
}

/// `K(x) = alpha(x) - g'(x) alpha(g(x)) - beta'(x)/beta(x)`.
pub fn k_function(lin: &LinearDODS, x: f64) -> Result<f64> {
    let (b, db) = d1(&lin.beta, x)?;
    if b == 0.0 {
        return Err(Error::Domain(format!("beta vanishes at x = {x}")));
    }
    let (gx, dg) = d1(&lin.g, x)?;
    Ok(at(&lin.alpha, x)? - dg * at(&lin.alpha, gx)? - db / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Compatibility {
    pub holds: bool,
    /// Largest `|K(g) g'^2 - g'' - K g'|` on the grid.
    pub max_defect: f64,
    pub worst_x: f64,
}

/// Defect of `K(g) g'^2 = g'' + K g'` over `grid` points of the domain.
pub fn compatibility(lin: &LinearDODS, grid: usize, tol: f64) -> Result<Compatibility> {
    if grid < 20 {
        return Err(Error::Config(format!("compatibility grid of {grid} points is below 20")));
    }
    let mut worst = (0.0f64, lin.domain.0);
    for x in linspace(lin.domain.0, lin.domain.1, grid) {
        let (gx, dg, ddg) = d2(&lin.g, x)?;
        let defect = (k_function(lin, gx)? * dg * dg - ddg - k_function(lin, x)? * dg).abs();
        if !(defect <= worst.0) {
            worst = (defect, x);
        }
    }
    Ok(Compatibility { holds: worst.0 <= tol, max_defect: worst.0, worst_x: worst.1 })
}

/// The symmetry `xi d/dx + (A y + B) d/dy` beyond superposition.
#[derive(Debug, Clone, Serialize)]
pub struct ExtraSymmetry {
    pub xi: Expr,
    #[serde(rename = "A")]
    pub a: Expr,
    #[serde(rename = "A0")]
    pub a0: f64,
    #[serde(rename = "B")]
    pub b: Expr,
    pub field: VectorField,
    /// Largest relative mismatch of `xi(g) = g' xi` on the grid.
    pub functional_defect: f64,
    /// Which particular solution `B` is: the one vanishing on the initial interval.
    pub b_initial: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtraSymmetryReport {
    pub compatibility: Compatibility,
    pub functional_defect: Option<f64>,
    pub symmetry: Option<ExtraSymmetry>,
    pub diagnostics: Vec<String>,
}

fn vanishes(e: &Expr, domain: (f64, f64)) -> bool {
    linspace(domain.0, domain.1, COMPAT_GRID).iter().all(|&x| e.eval(&[x]) == 0.0)
}

/// Lowest delayed abscissa reached from the domain.
fn history_start(lin: &LinearDODS) -> Result<f64> {
    let mut lo = lin.domain.0;
    for x in linspace(lin.domain.0, lin.domain.1, 4 * COMPAT_GRID) {
        lo = lo.min(at(&lin.g, x)?);
    }
    Ok(lo)
}

/// Grid over `[lo, hi]` that contains `x0` as a node.
fn anchored_grid(lo: f64, x0: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = hi - lo;
    let left = (((x0 - lo) / span) * n as f64).round().max(2.0) as usize;
    let right = (n.saturating_sub(left)).max(2);
    let mut xs = if x0 > lo { linspace(lo, x0, left) } else { vec![x0] };
    if hi > x0 {
        xs.extend(linspace(x0, hi, right).into_iter().skip(1));
    }
    xs
}

/// Running integral over an anchored grid, zero at `x0`.
fn integral_from(f: impl FnMut(f64) -> f64, xs: &[f64], x0: f64) -> Vec<f64> {
    let acc = quad::cumulative(f, xs, QUAD_TOL);
    let i0 = xs.iter().position(|&x| x == x0).unwrap_or(0);
    let base = acc[i0];
    acc.into_iter().map(|v| v - base).collect()
}

/// Table with slopes from three-point differences, for coefficients whose
/// derivative is not needed exactly.
fn sampled_table(name: &str, xs: Vec<f64>, ys: Vec<f64>) -> Result<Table> {
    let n = xs.len();
    let mut slopes = vec![0.0; n];
    for i in 0..n {
        let (a, b, c) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (x0, x1, x2) = (xs[a], xs[b], xs[c]);
        let (y0, y1, y2) = (ys[a], ys[b], ys[c]);
        let x = xs[i];
        slopes[i] = y0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
            + y1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
            + y2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
    }
    Table::smooth(name, xs, ys, slopes)
}

fn over_x(src: &str) -> Expr {
    Expr::parse(src, &["x"]).expect("fixed expression")
}

fn product(p: &Expr, q: &Expr) -> Result<Expr> {
    Expr::parse("p*q", &["p", "q"])?.compose(&[p.clone(), q.clone()])
}

/// `xi = exp(int K)` normalized to one at the left end of the domain.
struct XiTable {
    expr: Expr,
    closed: bool,
}

fn build_xi(lin: &LinearDODS, lo: f64, hi: f64) -> Result<XiTable> {
    let x0 = lin.domain.0;
    let grid = linspace(lo, hi, COMPAT_GRID);
    let ks: Vec<f64> = grid.iter().map(|&x| k_function(lin, x)).collect::<Result<_>>()?;
    let k0 = ks[0];
    if ks.iter().all(|&k| (k - k0).abs() <= 1e-13 * (1.0 + k0.abs())) {
        let expr = if k0 == 0.0 {
            over_x("1")
        } else {
            Expr::parse_with("exp(k*(x - x0))", &["x"], &[("k", k0), ("x0", x0)])?
        };
        return Ok(XiTable { expr, closed: true });
    }
    let xs = anchored_grid(lo, x0, hi, TABLE_NODES);
    let logs = integral_from(|s| k_function(lin, s).unwrap_or(f64::NAN), &xs, x0);
    if logs.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("K is undefined somewhere on the history range".into()));
    }
    let ys: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    let slopes: Vec<f64> = xs.iter().zip(&ys).map(|(&x, &y)| Ok(k_function(lin, x)? * y)).collect::<Result<_>>()?;
    let table = Table::smooth("xi", xs, ys, slopes)?;
    Ok(XiTable { expr: Expr::tabulated(table, "x"), closed: false })
}

/// Largest `|xi(g)/(g' xi) - 1|` over the domain grid.
fn functional_defect(lin: &LinearDODS, xi: &Expr) -> Result<(f64, f64, f64)> {
    let (mut worst, mut lo, mut hi) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for x in linspace(lin.domain.0, lin.domain.1, COMPAT_GRID) {
        let (gx, dg) = d1(&lin.g, x)?;
        let ratio = at(xi, gx)? / (dg * at(xi, x)?);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        worst = worst.max((ratio - 1.0).abs());
    }
    Ok((worst, lo, hi))
}

/// Forcing of the equation for `B`: `gamma xi' + gamma' xi - gamma A`, written
/// as `xi (gamma' - gamma (g' alpha(g) + beta'/beta))`, with its slope.
fn b_forcing(lin: &LinearDODS, xi: &Expr, x: f64) -> Result<(f64, f64)> {
    let (c, dc, ddc) = d2(&lin.gamma, x)?;
    let (b, db, ddb) = d2(&lin.beta, x)?;
    let (gx, dg, ddg) = d2(&lin.g, x)?;
    let (ag, dag) = d1(&lin.alpha, gx)?;
    let (xv, dxv) = d1(xi, x)?;
    let q = dg * ag + db / b;
    let dq = ddg * ag + dg * dg * dag + ddb / b - (db / b).powi(2);
    let w = dc - c * q;
    let dw = ddc - dc * q - c * dq;
    Ok((xv * w, dxv * w + xv * dw))
}

/// Hermite table reproducing a solver run, zero on its initial interval.
fn solution_table(name: &str, sol: &PiecewiseSolution) -> Result<Table> {
    let (lo, x0) = sol.initial;
    let (mut xs, mut ys, mut left, mut right) = (vec![lo], vec![0.0], vec![0.0], vec![0.0]);
    let first = sol.steps.first().ok_or_else(|| Error::Config("empty solver run".into()))?;
    if x0 > lo {
        xs.push(x0);
        ys.push(first.y0);
        left.push(0.0);
        right.push(first.d0);
    } else {
        right[0] = first.d0;
    }
    for (i, s) in sol.steps.iter().enumerate() {
        xs.push(s.x1);
        ys.push(s.y1);
        left.push(s.d1);
        right.push(sol.steps.get(i + 1).map_or(s.d1, |n| n.d0));
    }
    Table::new(name, xs, ys, left, right)
}

/// Construct the extra symmetry, or explain why there is none.
pub fn extra_symmetry(lin: &LinearDODS, tol: f64) -> Result<ExtraSymmetryReport> {
    let compat = match compatibility(lin, COMPAT_GRID, tol) {
        Err(Error::Domain(m)) => {
            let compatibility = Compatibility { holds: false, max_defect: f64::INFINITY, worst_x: f64::NAN };
            return Ok(ExtraSymmetryReport { compatibility, functional_defect: None, symmetry: None, diagnostics: vec![m] });
        }
        other => other?,
    };
    let mut report = ExtraSymmetryReport { compatibility: compat, functional_defect: None, symmetry: None, diagnostics: vec![] };
    if !compat.holds {
        report.diagnostics.push(format!(
            "compatibility condition fails: defect {:e} at x = {}",
            compat.max_defect, compat.worst_x
        ));
        return Ok(report);
    }
    let lo = history_start(lin)?;
    let pad = 0.05 * (lin.domain.1 - lo);
    let xi = build_xi(lin, lo - pad, lin.domain.1 + pad)?;
    let (defect, rmin, rmax) = functional_defect(lin, &xi.expr)?;
    report.functional_defect = Some(defect);
    if !(defect <= tol) {
        report.diagnostics.push(format!(
            "xi(g)/(g' xi) ranges over [{rmin}, {rmax}]; no rescaling of xi makes it 1"
        ));
        return Ok(report);
    }
    let a = if vanishes(&lin.alpha, lin.domain) { over_x("0") } else { product(&xi.expr, &lin.alpha)? };
    let b = if vanishes(&lin.gamma, lin.domain) {
        over_x("0")
    } else {
        let xs = anchored_grid(lo, lin.domain.0, lin.domain.1 + pad, TABLE_NODES);
        let (mut ys, mut ds) = (vec![], vec![]);
        for &x in &xs {
            let (v, d) = b_forcing(lin, &xi.expr, x)?;
            ys.push(v);
            ds.push(d);
        }
        let forcing = Expr::tabulated(Table::smooth("forcing", xs, ys, ds)?, "x");
        let eq = LinearDODS::from_exprs(lin.alpha.clone(), lin.beta.clone(), forcing, lin.g.clone(), lin.domain)?;
        let sys = eq.to_system()?;
        let run = solve(&sys, &over_x("0"), (lo, lin.domain.0), lin.domain.1, &SolverOptions::default())?;
        Expr::tabulated(solution_table("B", &run)?, "x")
    };
    let eta = if a.source() == "0" && b.source() == "0" {
        over_x("0")
    } else {
        let t = Expr::parse("a*y + b", &["x", "y", "a", "b"])?;
        let xy = |e: &Expr| e.rebind(&["x", "y"]);
        t.compose(&[xy(&over_x("x"))?, Expr::parse("y", &["x", "y"])?, xy(&a)?, xy(&b)?])?
    };
    let field = VectorField::from_exprs(&xi.expr, &eta)?;
    if !xi.closed {
        report.diagnostics.push("xi tabulated from quadrature of K".into());
    }
    report.symmetry = Some(ExtraSymmetry {
        xi: xi.expr,
        a,
        a0: 0.0,
        b,
        field,
        functional_defect: defect,
        b_initial: (lo, lin.domain.0),
    });
    Ok(report)
}

/// The homogeneous system obtained by subtracting a particular solution.
#[derive(Debug, Clone, Serialize)]
pub struct Homogenized {
    pub system: LinearDODS,
    /// New dependent variable is `y - sigma(x)`.
    pub sigma: Expr,
    pub residual: f64,
}

pub fn homogenize(lin: &LinearDODS, sigma: &Expr) -> Result<Homogenized> {
    let sigma = sigma.rebind(&["x"])?;
    let mut worst = 0.0f64;
    for x in linspace(lin.domain.0, lin.domain.1, COMPAT_GRID) {
        let (s, ds) = d1(&sigma, x)?;
        let sg = at(&sigma, at(&lin.g, x)?)?;
        let r = ds - at(&lin.alpha, x)? * s - at(&lin.beta, x)? * sg - at(&lin.gamma, x)?;
        worst = worst.max(r.abs());
    }
    if !(worst <= PARTICULAR_TOL) {
        return Err(Error::NotAParticularSolution(worst));
    }
    let system = LinearDODS::from_exprs(lin.alpha.clone(), lin.beta.clone(), over_x("0"), lin.g.clone(), lin.domain)?;
    Ok(Homogenized { system, sigma, residual: worst })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Compatible,
    Incompatible,
}

/// Target of the reduction when no extra symmetry exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CanonicalMode {
    /// Straighten the delay: `yd = f(x) y_ + h(x)`, `x_ = x - 1`.
    #[default]
    Canonical2,
    /// Absorb beta: `yd = y_ + h(x)`, `x_ = g(x)`.
    Canonical3,
}

/// How the canonical variables arise from the original ones:
/// `xbar = x_map(x)` and `ybar = y_factor(x) * y`.
#[derive(Debug, Clone, Serialize)]
pub struct Transformation {
    pub x_map: MonotoneMap,
    pub y_factor: Expr,
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalForm {
    pub tag: Tag,
    pub mode: Option<CanonicalMode>,
    pub system: LinearDODS,
    pub transformation: Transformation,
    /// Constant delay `C` of `x_ = x - C`, when the delay is a shift.
    pub shift: Option<f64>,
    /// Sign of the `y_` coefficient when it is normalized to magnitude one.
    pub sign: Option<f64>,
}

/// `e^{-int alpha}` and the coefficients of the equation it produces,
/// `ubar' = beta_t u_ + gamma_t` with `beta_t = beta e^{a(g) - a}`.
struct Weighted {
    xs: Vec<f64>,
    a: Vec<f64>,
}

impl Weighted {
    fn new(lin: &LinearDODS, lo: f64) -> Result<Self> {
        let xs = anchored_grid(lo, lin.domain.0, lin.domain.1, TABLE_NODES);
        let a = if vanishes(&lin.alpha, (lo, lin.domain.1)) {
            vec![0.0; xs.len()]
        } else {
            integral_from(|s| lin.alpha.eval(&[s]), &xs, lin.domain.0)
        };
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("alpha is not integrable on the history range".into()));
        }
        Ok(Self { xs, a })
    }

    fn factor(&self, lin: &LinearDODS) -> Result<Expr> {
        if self.a.iter().all(|&v| v == 0.0) {
            return Ok(over_x("1"));
        }
        let ys: Vec<f64> = self.a.iter().map(|v| (-v).exp()).collect();
        let ds: Vec<f64> = self.xs.iter().zip(&ys).map(|(&x, &y)| -lin.alpha.eval(&[x]) * y).collect();
        Ok(Expr::tabulated(Table::smooth("weight", self.xs.clone(), ys, ds)?, "x"))
    }

    fn integral(&self, x: f64, lin: &LinearDODS) -> f64 {
        if self.a.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        quad::integrate(|s| lin.alpha.eval(&[s]), lin.domain.0, x, QUAD_TOL)
    }

    /// `(beta_t, gamma_t)` at `x`.
    fn coefficients(&self, lin: &LinearDODS, x: f64) -> Result<(f64, f64)> {
        let gx = at(&lin.g, x)?;
        let ax = self.integral(x, lin);
        let ag = self.integral(gx, lin);
        Ok((at(&lin.beta, x)? * (ag - ax).exp(), at(&lin.gamma, x)? * (-ax).exp()))
    }
}

fn shift_system(c: f64, sign: f64, gamma: Expr, domain: (f64, f64)) -> Result<LinearDODS> {
    let g = Expr::parse_with("x - C", &["x"], &[("C", c)])?;
    LinearDODS::from_exprs(over_x("0"), Expr::constant(sign, &["x"]), gamma, g, domain)
}

/// Reduce to a canonical form: a shifted delay when the extra symmetry exists,
/// otherwise the form chosen by `mode`.
pub fn canonical_form(lin: &LinearDODS, mode: CanonicalMode) -> Result<CanonicalForm> {
    let report = extra_symmetry(lin, COMPAT_TOL)?;
    let lo = history_start(lin)?;
    let w = Weighted::new(lin, lo)?;
    let y_factor = w.factor(lin)?;
    let homogeneous = vanishes(&lin.gamma, lin.domain);
    let x0 = lin.domain.0;
    if let Some(sym) = report.symmetry {
        // xbar = x0 + |c| int dx/xi, where c = xi beta_t is constant
        let xi = &sym.xi;
        let (b0, _) = w.coefficients(lin, x0)?;
        let c = at(xi, x0)? * b0;
        let scale = c.abs();
        let xs = w.xs.clone();
        let phi = integral_from(|s| 1.0 / xi.eval(&[s]), &xs, x0);
        let image: Vec<f64> = phi.iter().map(|p| x0 + scale * p).collect();
        let slopes: Vec<f64> = xs.iter().map(|&x| Ok(scale / at(xi, x)?)).collect::<Result<_>>()?;
        let map = MonotoneMap::new(xs.clone(), image, slopes)?;
        let shift = map.forward(x0)? - map.forward(at(&lin.g, x0)?)?;
        let gamma = if homogeneous {
            over_x("0")
        } else {
            let (mut nodes, mut vals) = (vec![], vec![]);
            for &x in xs.iter().filter(|&&x| x >= x0) {
                let (_, gt) = w.coefficients(lin, x)?;
                nodes.push(map.forward(x)?);
                vals.push(gt * at(xi, x)? / scale);
            }
            Expr::tabulated(sampled_table("h", nodes, vals)?, "x")
        };
        let domain = (map.forward(lin.domain.0)?, map.forward(lin.domain.1)?);
        let system = shift_system(shift, c.signum(), gamma, domain)?;
        return Ok(CanonicalForm {
            tag: Tag::Compatible,
            mode: None,
            system,
            transformation: Transformation { x_map: map, y_factor },
            shift: Some(shift),
            sign: Some(c.signum()),
        });
    }
    match mode {
        CanonicalMode::Canonical2 => straighten(lin, &w, y_factor, homogeneous),
        CanonicalMode::Canonical3 => absorb(lin, &w, y_factor, homogeneous),
    }
}

/// `phi` with `phi(g(x)) = phi(x) - 1`, built on the fundamental interval
/// `[g(x0), x0]` as a cubic whose first two derivatives match across its
/// ends, then carried forward by the delay map.
fn abel_map(lin: &LinearDODS, xs: &[f64]) -> Result<MonotoneMap> {
    let x0 = lin.domain.0;
    let p = at(&lin.g, x0)?;
    let len = x0 - p;
    let (_, dg0, ddg0) = d2(&lin.g, x0)?;
    if !(dg0 > 0.0) {
        return Err(Error::NonMonotoneTransform(x0));
    }
    // phi'(p + t) = c0 + c1 t + c2 t^2
    let m = nalgebra::Matrix3::new(
        1.0 - dg0,
        len,
        len * len,
        -ddg0,
        1.0 - dg0 * dg0,
        2.0 * len,
        len,
        len * len / 2.0,
        len.powi(3) / 3.0,
    );
    let c = m
        .lu()
        .solve(&nalgebra::Vector3::new(0.0, 0.0, 1.0))
        .ok_or(Error::NonMonotoneTransform(x0))?;
    let base = |s: f64| {
        let t = s - p;
        (x0 - 1.0 + c[0] * t + c[1] * t * t / 2.0 + c[2] * t.powi(3) / 3.0, c[0] + c[1] * t + c[2] * t * t)
    };
    let (mut image, mut slopes) = (vec![], vec![]);
    for &x in xs {
        let (mut s, mut n, mut chain) = (x, 0usize, 1.0);
        while s > x0 {
            let (gs, dgs) = d1(&lin.g, s)?;
            if !(dgs > 0.0) {
                return Err(Error::NonMonotoneTransform(s));
            }
            chain *= dgs;
            s = gs;
            n += 1;
            if n > MAX_ITERATES {
                return Err(Error::NonMonotoneTransform(x));
            }
        }
        if s < p {
            return Err(Error::NonMonotoneTransform(x));
        }
        let (v, d) = base(s);
        image.push(v + n as f64);
        slopes.push(d * chain);
    }
    MonotoneMap::new(xs.to_vec(), image, slopes)
}

fn straighten(lin: &LinearDODS, w: &Weighted, y_factor: Expr, homogeneous: bool) -> Result<CanonicalForm> {
    let x0 = lin.domain.0;
    let p = at(&lin.g, x0)?;
    let xs: Vec<f64> = w.xs.iter().copied().filter(|&x| x >= p).collect();
    let map = abel_map(lin, &xs)?;
    let (mut nodes, mut fs, mut hs) = (vec![], vec![], vec![]);
    for &x in xs.iter().filter(|&&x| x >= x0) {
        let (bt, gt) = w.coefficients(lin, x)?;
        let slope = map.derivative(x)?;
        nodes.push(map.forward(x)?);
        fs.push(bt / slope);
        hs.push(gt / slope);
    }
    let beta = Expr::tabulated(sampled_table("f", nodes.clone(), fs)?, "x");
    let gamma = if homogeneous { over_x("0") } else { Expr::tabulated(sampled_table("h", nodes, hs)?, "x") };
    let domain = (map.forward(lin.domain.0)?, map.forward(lin.domain.1)?);
    let system = LinearDODS::from_exprs(over_x("0"), beta, gamma, over_x("x - 1"), domain)?;
    Ok(CanonicalForm {
        tag: Tag::Incompatible,
        mode: Some(CanonicalMode::Canonical2),
        system,
        transformation: Transformation { x_map: map, y_factor },
        shift: Some(1.0),
        sign: None,
    })
}

fn absorb(lin: &LinearDODS, w: &Weighted, y_factor: Expr, homogeneous: bool) -> Result<CanonicalForm> {
    let x0 = lin.domain.0;
    let xs = w.xs.clone();
    let bts: Vec<f64> = xs.iter().map(|&x| Ok(w.coefficients(lin, x)?.0)).collect::<Result<_>>()?;
    let sign = bts[0].signum();
    if let Some(i) = bts.iter().position(|b| !(b * sign > 0.0)) {
        return Err(Error::NonMonotoneTransform(xs[i]));
    }
    let psi = integral_from(|s| w.coefficients(lin, s).map_or(f64::NAN, |c| c.0.abs()), &xs, x0);
    let image: Vec<f64> = psi.iter().map(|v| x0 + v).collect();
    let slopes: Vec<f64> = bts.iter().map(|b| b.abs()).collect();
    let map = MonotoneMap::new(xs.clone(), image, slopes.clone())?;
    let (mut nodes, mut gs, mut dgs, mut hs) = (vec![], vec![], vec![], vec![]);
    for (i, &x) in xs.iter().enumerate().filter(|(_, &x)| x >= x0) {
        let (gx, dg) = d1(&lin.g, x)?;
        let (_, gt) = w.coefficients(lin, x)?;
        nodes.push(map.forward(x)?);
        gs.push(map.forward(gx)?);
        dgs.push(map.derivative(gx)? * dg / slopes[i]);
        hs.push(gt / slopes[i]);
    }
    let g = Expr::tabulated(Table::smooth("gbar", nodes.clone(), gs, dgs)?, "x");
    let gamma = if homogeneous { over_x("0") } else { Expr::tabulated(sampled_table("h", nodes, hs)?, "x") };
    let domain = (map.forward(lin.domain.0)?, map.forward(lin.domain.1)?);
    let system = LinearDODS::from_exprs(over_x("0"), Expr::constant(sign, &["x"]), gamma, g, domain)?;
    Ok(CanonicalForm {
        tag: Tag::Incompatible,
        mode: Some(CanonicalMode::Canonical3),
        system,
        transformation: Transformation { x_map: map, y_factor },
        shift: None,
        sign: Some(sign),
    })
}

/// `sum c_i y_i` of trajectories sharing an initial interval.
pub struct Combination<'a, T> {
    parts: &'a [T],
    coeffs: &'a [f64],
    range: (f64, f64),
}

impl<'a, T: Trajectory> Combination<'a, T> {
    pub fn new(parts: &'a [T], coeffs: &'a [f64]) -> Result<Self> {
        if parts.is_empty() || parts.len() != coeffs.len() {
            return Err(Error::Config("need one coefficient per solution".into()));
        }
        let (lo, start) = (parts[0].range().0, parts[0].start());
        let mut hi = f64::INFINITY;
        for p in parts {
            if p.range().0 != lo || p.start() != start {
                return Err(Error::Config("solutions do not share an initial interval".into()));
            }
            hi = hi.min(p.range().1);
        }
        Ok(Self { parts, coeffs, range: (lo, hi) })
    }
}

impl<T: Trajectory> Trajectory for Combination<'_, T> {
    fn range(&self) -> (f64, f64) {
        self.range
    }

    fn start(&self) -> f64 {
        self.parts[0].start()
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.parts.iter().flat_map(|p| p.kinks()).filter(|&x| x <= self.range.1).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        self.parts.iter().zip(self.coeffs).try_fold((0.0, 0.0), |acc, (p, c)| {
            let (y, d) = p.eval(x)?;
            Ok((acc.0 + c * y, acc.1 + c * d))
        })
    }

    fn one_sided(&self, x: f64) -> Result<(f64, f64)> {
        self.parts.iter().zip(self.coeffs).try_fold((0.0, 0.0), |acc, (p, c)| {
            let (l, r) = p.one_sided(x)?;
            Ok((acc.0 + c * l, acc.1 + c * r))
        })
    }
}

/// Residual of `sum c_i y_i` under `system` on `grid` points.
pub fn superposition_check<T: Trajectory>(system: &DODSystem, sols: &[T], coeffs: &[f64], grid: usize) -> Result<f64> {
    let comb = Combination::new(sols, coeffs)?;
    crate::solver::residual(&comb, system, grid)
}

/// Summary for reports.
#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub tag: Tag,
    pub compatibility: Compatibility,
    pub functional_defect: Option<f64>,
    #[serde(rename = "Z")]
    pub z: Option<String>,
    pub canonical: CanonicalSummary,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalSummary {
    pub mode: Option<CanonicalMode>,
    pub shift: Option<f64>,
    pub sign: Option<f64>,
    pub domain: (f64, f64),
    pub delay: String,
    pub coefficient: String,
    pub forcing: String,
}

pub fn classify(lin: &LinearDODS, mode: CanonicalMode) -> Result<Classification> {
    let report = extra_symmetry(lin, COMPAT_TOL)?;
    let canon = canonical_form(lin, mode)?;
    Ok(Classification {
        tag: canon.tag,
        compatibility: report.compatibility,
        functional_defect: report.functional_defect,
        z: report.symmetry.as_ref().map(|s| s.field.label.clone()),
        canonical: CanonicalSummary {
            mode: canon.mode,
            shift: canon.shift,
            sign: canon.sign,
            domain: canon.system.domain,
            delay: canon.system.g.to_string(),
            coefficient: canon.system.beta.to_string(),
            forcing: canon.system.gamma.to_string(),
        },
        diagnostics: report.diagnostics,
    })
}

#[cfg(test)]
mod tests;
