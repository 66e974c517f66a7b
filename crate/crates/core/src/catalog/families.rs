//! Invariant delay systems for the algebras of dimension at most three.

use super::algebras::{self, AlgebraRealization};
use super::params::{ParamDef, ParamKind, Params};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::system::{DODSystem, DelayRelation, JetPoint, SampleBox, JET_VARS};
use crate::validate::{validate_system, DEFAULT_SAMPLE};
use serde::Serialize;

pub const DEFAULT_MAX_DELAY: f64 = 10.0;

#[derive(Debug, Clone, Copy)]
pub(crate) enum DelayForm {
    /// `x_ = template`
    Explicit(&'static str),
    /// `template = 0`
    Implicit(&'static str),
}

pub(crate) struct FamilyDef {
    pub id: &'static str,
    pub algebra: &'static str,
    pub form: &'static str,
    pub params: &'static [ParamDef],
    pub rhs: &'static str,
    pub delay: DelayForm,
    pub invariants: &'static [(&'static str, &'static str)],
    pub domain: (f64, f64),
    pub sample: SampleBox,
    pub constraints: &'static [&'static str],
}

const fn real(name: &'static str, default: f64, range: &'static str) -> ParamDef {
    ParamDef { name, kind: ParamKind::Real(default), range }
}

const fn func(
    name: &'static str,
    args: &'static [&'static str],
    bind: &'static [&'static str],
    default: &'static str,
) -> ParamDef {
    ParamDef { name, kind: ParamKind::Function { args, bind, default }, range: "arbitrary" }
}

const fn boxed(x: (f64, f64), y: (f64, f64), y_minus: (f64, f64)) -> SampleBox {
    SampleBox { x, y, y_minus }
}

const Y_UP: (f64, f64) = (0.5, 2.5);
const Y_DOWN: (f64, f64) = (-2.5, -0.5);
const C2_NONZERO: &str = "C2 != 0";

pub(crate) static FAMILIES: &[FamilyDef] = &[
    FamilyDef {
        id: "A1,1",
        algebra: "A1,1",
        form: "yd = f(x, dy/dx), dx = g(x, dy)",
        params: &[
            func("f", &["x", "z"], &["x", "dy/dx"], "sin(x) + z/(1 + z^2)"),
            func("g", &["x", "w"], &["x", "dy"], "1 + w^2/(4 + w^2)"),
        ],
        rhs: "f",
        delay: DelayForm::Explicit("x - g"),
        invariants: &[("I1", "x"), ("I2", "x_"), ("I3", "dy"), ("I4", "yd")],
        domain: (0.0, 5.0),
        sample: boxed((0.0, 5.0), Y_UP, Y_DOWN),
        constraints: &["g > 0"],
    },
    FamilyDef {
        id: "A2,1",
        algebra: "A2,1",
        form: "yd = f(x) dy/dx, x_ = g(x)",
        params: &[func("f", &["x"], &["x"], "1 + sin(x)/2"), func("g", &["x"], &["x"], "x - 1")],
        rhs: "f*dy/dx",
        delay: DelayForm::Explicit("g"),
        invariants: &[("I1", "x"), ("I2", "x_"), ("I3", "yd/dy")],
        domain: (0.0, 5.0),
        sample: boxed((0.0, 5.0), Y_UP, Y_DOWN),
        constraints: &["f != 0", "g(x) < x", "g not constant"],
    },
    FamilyDef {
        id: "A2,2",
        algebra: "A2,2",
        form: "yd = f(dy/dx), x_ = x g(dy/dx)",
        params: &[
            func("f", &["z"], &["dy/dx"], "z/(1 + z^2)"),
            func("g", &["z"], &["dy/dx"], "1/2 + atan(z)/10"),
        ],
        rhs: "f",
        delay: DelayForm::Implicit("x_ - x*g"),
        invariants: &[("I1", "dx/x"), ("I2", "dy/dx"), ("I3", "yd")],
        domain: (1.0, 5.0),
        sample: boxed((1.0, 5.0), Y_UP, Y_DOWN),
        constraints: &["x > 0", "x and x_ of the same sign", "0 < g < 1"],
    },
    FamilyDef {
        id: "A2,3",
        algebra: "A2,3",
        form: "yd = dy/dx + f(x), x_ = g(x)",
        params: &[func("f", &["x"], &["x"], "sin(x)"), func("g", &["x"], &["x"], "x - 1")],
        rhs: "dy/dx + f",
        delay: DelayForm::Explicit("g"),
        invariants: &[("I1", "x"), ("I2", "x_"), ("I3", "yd - dy/dx")],
        domain: (0.0, 5.0),
        sample: boxed((0.0, 5.0), Y_UP, Y_DOWN),
        constraints: &["f != 0", "g(x) < x", "g not constant"],
    },
    FamilyDef {
        id: "A2,4",
        algebra: "A2,4",
        form: "yd = f(dy/dx), dx = g(dy)",
        params: &[func("f", &["z"], &["dy/dx"], "z^2"), func("g", &["w"], &["dy"], "1 + w/2")],
        rhs: "f",
        delay: DelayForm::Explicit("x - g"),
        invariants: &[("I1", "dx"), ("I2", "dy"), ("I3", "yd")],
        domain: (0.0, 5.0),
        sample: boxed((0.0, 5.0), Y_UP, Y_DOWN),
        constraints: &["g > 0"],
    },
    FamilyDef {
        id: "A3,2",
        algebra: "A3,2",
        form: "yd = C1 dy/dx, dx = C2 dy^(1/a)",
        params: &[
            real("a", 0.5, "a not in {0, 1}"),
            real("C1", 1.5, "C1 != 0"),
            real("C2", 1.0, C2_NONZERO),
        ],
        rhs: "C1*dy/dx",
        delay: DelayForm::Explicit("x - C2*dy^(1/a)"),
        invariants: &[("I1", "dy/dx^a"), ("I2", "yd*dx/dy")],
        domain: (0.0, 5.0),
        sample: boxed((0.0, 5.0), (0.3, 0.9), (-0.6, 0.0)),
        constraints: &["dy > 0", "C2 > 0"],
    },
    FamilyDef {
        id: "A3,4",
        algebra: "A3,4",
        form: "yd = dy/dx + C1, dx = C2 exp(dy/dx)",
        params: &[real("C1", 0.5, "any"), real("C2", 1.5, C2_NONZERO)],
        rhs: "dy/dx + C1",
        delay: DelayForm::Implicit("dx - C2*exp(dy/dx)"),
        invariants: &[("I1", "exp(dy/dx)/dx"), ("I2", "yd - dy/dx")],
        domain: (0.0, 5.0),
        sample: boxed((0.0, 5.0), Y_UP, Y_DOWN),
        constraints: &["C2 > 0"],
    },
    FamilyDef {
        id: "A3,6",
        algebra: "A3,6",
        form: "yd = (dy/dx + C1)/(1 - C1 dy/dx), dx exp(b atan(dy/dx)) sqrt(1 + (dy/dx)^2) = C2",
        params: &[real("b", 0.5, "b >= 0"), real("C1", 0.3, "any"), real("C2", 4.0, C2_NONZERO)],
        rhs: "(dy/dx + C1)/(1 - C1*dy/dx)",
        delay: DelayForm::Implicit("dx*exp(b*atan(dy/dx))*sqrt(1 + (dy/dx)^2) - C2"),
        invariants: &[
            ("I1", "dx*exp(b*atan(dy/dx))*sqrt(1 + (dy/dx)^2)"),
            ("I2", "(yd - dy/dx)/(1 + yd*dy/dx)"),
        ],
        domain: (0.0, 5.0),
        sample: boxed((0.0, 5.0), (0.2, 0.6), (-0.6, -0.2)),
        constraints: &["C2 > 0", "1 - C1 dy/dx != 0"],
    },
    FamilyDef {
        id: "A3,8",
        algebra: "A3,8",
        form: "yd = dy/(2x + C1 dy), x x_ = C2 dy^2",
        params: &[real("C1", 0.5, "any"), real("C2", 0.1, C2_NONZERO)],
        rhs: "dy/(2*x + C1*dy)",
        delay: DelayForm::Explicit("C2*dy^2/x"),
        invariants: &[("I1", "dy^2/(x*x_)"), ("I2", "1/yd - 2*x/dy")],
        domain: (2.0, 6.0),
        sample: boxed((2.0, 6.0), Y_UP, Y_DOWN),
        constraints: &["x > 0", "x and x_ of the same sign", "C2 dy^2 < x^2"],
    },
    FamilyDef {
        id: "A3,8alt",
        algebra: "A3,8alt",
        form: "yd = dy/dx + C1/y, dx = C2 y y_",
        params: &[real("C1", 0.5, "any"), real("C2", 0.5, C2_NONZERO)],
        rhs: "dy/dx + C1/y",
        delay: DelayForm::Explicit("x - C2*y*y_"),
        invariants: &[("I1", "dx/(y*y_)"), ("I2", "y*(yd - dy/dx)")],
        domain: (1.0, 5.0),
        sample: boxed((1.0, 5.0), (1.0, 3.0), (0.5, 2.5)),
        constraints: &["C2 y y_ > 0"],
    },
    FamilyDef {
        id: "A3,9",
        algebra: "A3,9",
        form: "yd = (dy^2 + x_^2 - x^2 + 2 C1 x dy)/(2 x dy - C1 (dy^2 + x_^2 - x^2)), dy^2 + dx^2 = C2 x x_",
        params: &[real("C1", 0.5, "any"), real("C2", 0.5, C2_NONZERO)],
        rhs: "(dy^2 + x_^2 - x^2 + 2*C1*x*dy)/(2*x*dy - C1*(dy^2 + x_^2 - x^2))",
        delay: DelayForm::Implicit("dy^2 + dx^2 - C2*x*x_"),
        invariants: &[
            ("I1", "(dy^2 + dx^2)/(x*x_)"),
            ("I2", "(2*dy*x*yd - dy^2 - x_^2 + x^2)/(2*dy*x + (dy^2 + x_^2 - x^2)*yd)"),
        ],
        domain: (2.0, 6.0),
        sample: boxed((2.0, 6.0), (0.2, 0.6), (-0.6, -0.2)),
        constraints: &["x > 0", "C2 > 0", "4 dy^2 <= (4 C2 + C2^2) x^2"],
    },
    FamilyDef {
        id: "A3,10",
        algebra: "A3,10",
        form: "yd = (dy^2 + x^2 - x_^2 + 2 C1 x dy)/(2 x dy + C1 (dy^2 + x^2 - x_^2)), dy^2 - dx^2 = C2 x x_",
        params: &[real("C1", 0.5, "any"), real("C2", -0.5, C2_NONZERO)],
        rhs: "(dy^2 + x^2 - x_^2 + 2*C1*x*dy)/(2*x*dy + C1*(dy^2 + x^2 - x_^2))",
        delay: DelayForm::Implicit("dy^2 - dx^2 - C2*x*x_"),
        invariants: &[
            ("I1", "(dy^2 - dx^2)/(x*x_)"),
            ("I2", "(2*dy*x*yd - dy^2 - x^2 + x_^2)/(2*dy*x - (dy^2 + x^2 - x_^2)*yd)"),
        ],
        domain: (2.0, 6.0),
        sample: boxed((2.0, 6.0), (0.2, 0.6), (-0.6, -0.2)),
        constraints: &["x > 0"],
    },
    FamilyDef {
        id: "A3,10alt",
        algebra: "A3,10alt",
        form: "yd = C1 ((y - x_)/(x - x_))^2, dy dx/((y - x)(y_ - x_)) = C2",
        params: &[real("C1", 0.5, "C1 != 0"), real("C2", 2.0, C2_NONZERO)],
        rhs: "C1*((y - x_)/(x - x_))^2",
        delay: DelayForm::Implicit("dy*dx - C2*(y - x)*(y_ - x_)"),
        invariants: &[("I1", "dy*dx/((y - x)*(y_ - x_))"), ("I2", "(dx/(y - x_))^2*yd")],
        domain: (1.0, 2.0),
        sample: boxed((1.0, 2.0), (4.0, 5.0), (0.2, 0.8)),
        constraints: &["y != x", "y_ != x_"],
    },
    FamilyDef {
        id: "A3,12",
        algebra: "A3,12",
        form: "dx (yd - dy/dx)/(sqrt(1 + yd^2 + (y - x yd)^2) sqrt(1 + x_^2 + y_^2)) = C1, \
               dx^2 (1 + (dy/dx)^2 + (y - x dy/dx)^2)/((1 + x^2 + y^2)(1 + x_^2 + y_^2)) = C2",
        params: &[real("C1", 0.1, "C1 != 0"), real("C2", 0.5, C2_NONZERO)],
        rhs: "dy/dx + (C1^2*(1 + x_^2 + y_^2)*(dy/dx - x*(y - x*dy/dx)) \
              + sign(C1)*sqrt((C1^2*(1 + x_^2 + y_^2)*(dy/dx - x*(y - x*dy/dx)))^2 \
              + (dx^2 - C1^2*(1 + x_^2 + y_^2)*(1 + x^2))*C1^2*(1 + x_^2 + y_^2)*(1 + (dy/dx)^2 + (y - x*dy/dx)^2))) \
              /(dx^2 - C1^2*(1 + x_^2 + y_^2)*(1 + x^2))",
        delay: DelayForm::Implicit("dx^2*(1 + (dy/dx)^2 + (y - x*dy/dx)^2)/((1 + x^2 + y^2)*(1 + x_^2 + y_^2)) - C2"),
        invariants: &[
            ("I1", "dx^2*(1 + (dy/dx)^2 + (y - x*dy/dx)^2)/((1 + x^2 + y^2)*(1 + x_^2 + y_^2))"),
            ("I2", "dx*(yd - dy/dx)/(sqrt(1 + yd^2 + (y - x*yd)^2)*sqrt(1 + x_^2 + y_^2))"),
        ],
        domain: (-1.0, 1.0),
        sample: boxed((-0.5, 0.5), (0.1, 0.3), (-0.3, -0.1)),
        constraints: &[
            "0 < C2",
            "dx^2 > C1^2 (1 + x_^2 + y_^2)(1 + x^2)",
            "yd branch chosen so that sign(yd - dy/dx) = sign(C1)",
        ],
    },
];

/// Closed-form invariant of the prolonged group action.
#[derive(Debug, Clone, Serialize)]
pub struct Invariant {
    pub label: String,
    pub expr: Expr,
}

impl Invariant {
    pub fn eval(&self, jet: &JetPoint) -> f64 {
        self.expr.eval(&jet.values())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantFamily {
    pub id: String,
    pub algebra: AlgebraRealization,
    pub form: String,
    pub params: Params,
    pub parameter_ranges: Vec<(String, String)>,
    pub system: DODSystem,
    pub invariants: Vec<Invariant>,
    /// Box in `(x, y, y_)` where jets are admissible.
    pub solution_domain: SampleBox,
    pub constraints: Vec<String>,
}

pub(crate) fn find(id: &str) -> Result<&'static FamilyDef> {
    FAMILIES.iter().find(|f| f.id == id).ok_or_else(|| Error::UnknownFamily(id.to_string()))
}

fn check_ranges(def: &FamilyDef, p: &Params) -> Result<()> {
    let id = def.id;
    let err = |m: &str| Err(Error::Param(format!("{id}: {m}")));
    for name in ["C1", "C2"] {
        if def.params.iter().any(|d| d.name == name) {
            let v = p.real(name)?;
            let required = def.params.iter().find(|d| d.name == name).map(|d| d.range.contains("!= 0"));
            if required == Some(true) && v == 0.0 {
                return err(&format!("{name} must be nonzero"));
            }
        }
    }
    match id {
        "A3,2" => {
            let a = p.real("a")?;
            if a == 0.0 {
                return err("a must be nonzero");
            }
            if a == 1.0 {
                return Err(Error::DegenerateFamily(
                    "A3,2 with a = 1 forces dy/dx constant; the only invariant equation is a trivial ODE".into(),
                ));
            }
        }
        "A3,6" => {
            if !(p.real("b")? >= 0.0) {
                return err("requires b >= 0");
            }
        }
        _ => {}
    }
    Ok(())
}

/// Parse a template over the jet variables, real parameters and bound functions.
fn instantiate(src: &str, def: &FamilyDef, p: &Params) -> Result<Expr> {
    let mut vars: Vec<&str> = JET_VARS.to_vec();
    let mut subs: Vec<Expr> = JET_VARS.iter().map(|v| Expr::parse(v, &JET_VARS)).collect::<Result<_>>()?;
    let mut reals = Vec::new();
    for d in def.params {
        match d.kind {
            ParamKind::Real(_) => reals.push((d.name, p.real(d.name)?)),
            ParamKind::Function { args, bind, .. } => {
                let user = p.function(d.name, args).map_err(|e| match e {
                    Error::UnknownIdentifier(v) => Error::Param(format!(
                        "function `{}` may only use {}; found `{v}`",
                        d.name,
                        args.join(", ")
                    )),
                    other => other,
                })?;
                let bound: Vec<Expr> = bind.iter().map(|b| Expr::parse(b, &JET_VARS)).collect::<Result<_>>()?;
                vars.push(d.name);
                subs.push(user.compose(&bound)?);
            }
        }
    }
    Expr::parse_with(src, &vars, &reals)?.compose(&subs)
}

fn algebra_params(def: &FamilyDef, p: &Params) -> Result<Params> {
    let alg = algebras::find(def.algebra)?;
    let mut out = Params::new();
    for d in alg.params {
        if let Some(v) = p.0.get(d.name) {
            out.0.insert(d.name.to_string(), v.clone());
        }
    }
    Ok(out)
}

pub(crate) fn build(def: &FamilyDef, given: &Params, max_delay: f64, validate: bool) -> Result<InvariantFamily> {
    let p = given.with_defaults(def.params)?;
    check_ranges(def, &p)?;
    let algebra = algebras::build(algebras::find(def.algebra)?, &algebra_params(def, &p)?)?;
    let f = instantiate(def.rhs, def, &p)?;
    let delay = match def.delay {
        DelayForm::Explicit(g) => DelayRelation::Explicit { g: instantiate(g, def, &p)? },
        DelayForm::Implicit(r) => DelayRelation::Implicit { residual: instantiate(r, def, &p)?, max_delay },
    };
    let system = DODSystem::new(f, delay, def.domain, def.id)?.with_box(def.sample);
    if validate {
        let report = validate_system(&system, DEFAULT_SAMPLE, 0)?;
        if let Some(c) = report.failures().first() {
            return Err(Error::Param(format!("{}: parameters give an invalid system: {}", def.id, c.detail)));
        }
    }
    let invariants = def
        .invariants
        .iter()
        .map(|(label, src)| Ok(Invariant { label: label.to_string(), expr: instantiate(src, def, &p)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(InvariantFamily {
        id: def.id.to_string(),
        algebra,
        form: def.form.to_string(),
        params: p,
        parameter_ranges: def.params.iter().map(|d| (d.name.to_string(), d.range.to_string())).collect(),
        system,
        invariants,
        solution_domain: def.sample,
        constraints: def.constraints.iter().map(|s| s.to_string()).collect(),
    })
}
