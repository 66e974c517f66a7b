//! Scalar expressions over named variables.
//!
//! Sources are parsed against an ordered variable list; evaluation takes
//! values in that order. Forward-mode derivatives come from [`Dual`].
//! The grammar is written out in `docs/expressions.md`.

mod dual;
mod parse;
mod table;

pub use dual::{Dual, Scalar, Taylor2};
pub use table::Table;

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Atan,
    Atan2,
    Sqrt,
    Abs,
    Sign,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Atan,
        Func::Atan2,
        Func::Sqrt,
        Func::Abs,
        Func::Sign,
    ];

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Atan2 => "atan2",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn arity(self) -> usize {
        if self == Func::Atan2 {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Const(Constant),
    Var(usize),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
    /// Tabulated function applied to an argument.
    Table(Arc<Table>, Box<Node>),
}

/// Parsed expression. Cloning is cheap; the tree is shared.
#[derive(Debug, Clone)]
pub struct Expr {
    root: Arc<Node>,
    vars: Arc<[String]>,
    source: Arc<str>,
}

/// Whether evaluation should reject undefined operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Checked,
    Unchecked,
}

fn is_integral(e: f64) -> bool {
    (e - e.round()).abs() < 1e-12 && e.abs() < i32::MAX as f64
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

impl Expr {
    /// Parse `source` against the ordered variable list.
    pub fn parse(source: &str, variables: &[&str]) -> Result<Expr> {
        Self::parse_with(source, variables, &[])
    }

    /// Parse with named numeric parameters folded into literals.
    pub fn parse_with(source: &str, variables: &[&str], params: &[(&str, f64)]) -> Result<Expr> {
        if source.trim().is_empty() {
            return Err(Error::Syntax { offset: 0, message: "empty expression".into() });
        }
        let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let params: Vec<(String, f64)> = params.iter().map(|(n, v)| (n.to_string(), *v)).collect();
        let root = parse::Parser::new(source, &vars, &params)?.parse_all()?;
        Ok(Expr { root: Arc::new(root), vars: vars.into(), source: source.into() })
    }

    /// A literal constant over the given variables.
    pub fn constant(value: f64, variables: &[&str]) -> Expr {
        let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let node = Node::Num(value);
        let source = unparse(&node, &vars);
        Expr { root: Arc::new(node), vars: vars.into(), source: source.into() }
    }

    pub fn from_node(node: Node, variables: &[String]) -> Expr {
        let source = unparse(&node, variables);
        Expr { root: Arc::new(node), vars: variables.to_vec().into(), source: source.into() }
    }

    pub fn node(&self) -> &Node {
        &self.root
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    /// The text this expression was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// True when the variable at `index` occurs in the tree.
    pub fn uses(&self, index: usize) -> bool {
        fn walk(n: &Node, i: usize) -> bool {
            match n {
                Node::Var(j) => *j == i,
                Node::Num(_) | Node::Const(_) => false,
                Node::Neg(a) => walk(a, i),
                Node::Bin(_, a, b) => walk(a, i) || walk(b, i),
                Node::Call(_, args) => args.iter().any(|a| walk(a, i)),
                Node::Table(_, a) => walk(a, i),
            }
        }
        walk(&self.root, index)
    }

    pub fn uses_name(&self, name: &str) -> bool {
        self.var_index(name).is_some_and(|i| self.uses(i))
    }

    /// Replace every variable by the matching expression in `subs`.
    /// All substitutes must share one variable list, which the result adopts.
    pub fn compose(&self, subs: &[Expr]) -> Result<Expr> {
        if subs.len() != self.vars.len() {
            return Err(Error::Config(format!(
                "compose needs {} substitutes, got {}",
                self.vars.len(),
                subs.len()
            )));
        }
        let target: Vec<String> = match subs.first() {
            Some(s) => s.vars.to_vec(),
            None => Vec::new(),
        };
        if subs.iter().any(|s| *s.vars != *target) {
            return Err(Error::Config("compose substitutes disagree on variables".into()));
        }
        fn walk(n: &Node, subs: &[Expr]) -> Node {
            match n {
                Node::Var(i) => (*subs[*i].root).clone(),
                Node::Num(_) | Node::Const(_) => n.clone(),
                Node::Neg(a) => Node::Neg(Box::new(walk(a, subs))),
                Node::Bin(op, a, b) => Node::Bin(*op, Box::new(walk(a, subs)), Box::new(walk(b, subs))),
                Node::Call(f, args) => Node::Call(*f, args.iter().map(|a| walk(a, subs)).collect()),
                Node::Table(t, a) => Node::Table(t.clone(), Box::new(walk(a, subs))),
            }
        }
        Ok(Expr::from_node(walk(&self.root, subs), &target))
    }

    /// Re-express over a different variable list by name.
    pub fn rebind(&self, variables: &[&str]) -> Result<Expr> {
        let subs: Result<Vec<Expr>> = self.vars.iter().map(|v| Expr::parse(v, variables)).collect();
        let out = self.compose(&subs?)?;
        // names are unchanged, so the original text still reads the same
        Ok(Expr { source: self.source.clone(), ..out })
    }

    fn check_arity(&self, values: usize) -> Result<()> {
        if values != self.vars.len() {
            return Err(Error::Config(format!(
                "expression over {} variables evaluated with {} values",
                self.vars.len(),
                values
            )));
        }
        Ok(())
    }

    /// Plain evaluation. Non-finite results propagate.
    pub fn eval(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.vars.len());
        eval_node::<f64>(&self.root, values, Mode::Unchecked).unwrap_or(f64::NAN)
    }

    /// Evaluation that reports undefined operations and non-finite results.
    pub fn eval_checked(&self, values: &[f64]) -> Result<f64> {
        self.check_arity(values.len())?;
        let v = eval_node::<f64>(&self.root, values, Mode::Checked)?;
        if !v.is_finite() {
            return Err(domain(format!("non-finite result {v}")));
        }
        Ok(v)
    }

    pub fn eval_mode(&self, values: &[f64], mode: Mode) -> Result<f64> {
        match mode {
            Mode::Checked => self.eval_checked(values),
            Mode::Unchecked => {
                self.check_arity(values.len())?;
                Ok(self.eval(values))
            }
        }
    }

    /// Evaluate on dual numbers.
    pub fn eval_dual(&self, values: &[Dual], mode: Mode) -> Result<Dual> {
        self.check_arity(values.len())?;
        let d = eval_node::<Dual>(&self.root, values, mode)?;
        if mode == Mode::Checked && !(d.value.is_finite() && d.partial.is_finite()) {
            return Err(domain("non-finite derivative"));
        }
        Ok(d)
    }

    /// Value and exact partial with respect to the variable `direction`.
    pub fn diff_eval(&self, values: &[f64], direction: &str) -> Result<(f64, f64)> {
        let k = self.var_index(direction).ok_or_else(|| Error::UnknownIdentifier(direction.to_string()))?;
        self.diff_eval_index(values, k, Mode::Unchecked)
    }

    pub fn diff_eval_index(&self, values: &[f64], k: usize, mode: Mode) -> Result<(f64, f64)> {
        let duals: Vec<Dual> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| if i == k { Dual::seed(v) } else { Dual::constant(v) })
            .collect();
        let d = self.eval_dual(&duals, mode)?;
        Ok((d.value, d.partial))
    }

    /// `table(x)` over the single variable `var`.
    pub fn tabulated(table: Table, var: &str) -> Expr {
        let node = Node::Table(Arc::new(table), Box::new(Node::Var(0)));
        Expr::from_node(node, &[var.to_string()])
    }

    /// Value, first and second partial with respect to variable `k`.
    pub fn second_derivative(&self, values: &[f64], k: usize, mode: Mode) -> Result<(f64, f64, f64)> {
        self.check_arity(values.len())?;
        let t: Vec<Taylor2> =
            values.iter().enumerate().map(|(i, &v)| if i == k { Taylor2::seed(v) } else { Taylor2::cst(v) }).collect();
        let r = eval_node::<Taylor2>(&self.root, &t, mode)?;
        if mode == Mode::Checked && !(r.value.is_finite() && r.d1.is_finite() && r.d2.is_finite()) {
            return Err(domain("non-finite derivative"));
        }
        Ok((r.value, r.d1, r.d2))
    }

    /// Value and full gradient, one forward pass per variable.
    pub fn gradient(&self, values: &[f64], mode: Mode) -> Result<(f64, Vec<f64>)> {
        let mut grad = Vec::with_capacity(values.len());
        let mut value = match mode {
            Mode::Checked => self.eval_checked(values)?,
            Mode::Unchecked => self.eval(values),
        };
        for k in 0..values.len() {
            if !self.uses(k) {
                grad.push(0.0);
                continue;
            }
            let (v, p) = self.diff_eval_index(values, k, mode)?;
            value = v;
            grad.push(p);
        }
        Ok((value, grad))
    }
}

fn eval_node<T: Scalar>(n: &Node, vals: &[T], mode: Mode) -> Result<T> {
    let checked = mode == Mode::Checked;
    Ok(match n {
        Node::Num(v) => T::cst(*v),
        Node::Const(Constant::Pi) => T::cst(std::f64::consts::PI),
        Node::Const(Constant::E) => T::cst(std::f64::consts::E),
        Node::Var(i) => vals[*i],
        Node::Neg(a) => -eval_node(a, vals, mode)?,
        Node::Bin(op, a, b) => {
            let l = eval_node(a, vals, mode)?;
            let r = eval_node(b, vals, mode)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div => {
                    if checked && r.val() == 0.0 {
                        return Err(domain("division by zero"));
                    }
                    l / r
                }
                BinOp::Pow => power(l, r, checked)?,
            }
        }
        Node::Call(f, args) => {
            let a = eval_node(&args[0], vals, mode)?;
            match f {
                Func::Exp => a.exp(),
                Func::Log => {
                    if checked && a.val() <= 0.0 {
                        return Err(domain(format!("log of non-positive value {}", a.val())));
                    }
                    a.ln()
                }
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Atan => a.atan(),
                Func::Atan2 => {
                    let x = eval_node(&args[1], vals, mode)?;
                    a.atan2(x)
                }
                Func::Sqrt => {
                    if checked && a.val() < 0.0 {
                        return Err(domain(format!("sqrt of negative value {}", a.val())));
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
                Func::Sign => a.sign(),
            }
        }
        Node::Table(t, a) => {
            let a = eval_node(a, vals, mode)?;
            let (v, d1, d2) = t.eval3(a.val());
            if checked && !v.is_finite() {
                return Err(domain(format!("{} evaluated outside its table at {}", t.name, a.val())));
            }
            a.lift(v, d1, d2)
        }
    })
}

fn power<T: Scalar>(base: T, exp: T, checked: bool) -> Result<T> {
    let (b, e) = (base.val(), exp.val());
    if checked && b == 0.0 && e < 0.0 {
        return Err(domain("zero raised to a negative power"));
    }
    if b <= 0.0 && is_integral(e) {
        return Ok(base.powi(e.round() as i32));
    }
    if checked && b < 0.0 {
        return Err(domain(format!("negative base {b} with non-integer exponent {e}")));
    }
    Ok(base.powf(exp))
}

/// Render a tree back to source text the parser accepts.
pub fn unparse(n: &Node, vars: &[String]) -> String {
    let mut out = String::new();
    write_node(n, vars, 0, &mut out);
    out
}

fn prec(n: &Node) -> u8 {
    match n {
        Node::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Node::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Node::Neg(_) => 3,
        Node::Bin(BinOp::Pow, ..) => 4,
        Node::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
        _ => 5,
    }
}

fn write_node(n: &Node, vars: &[String], min: u8, out: &mut String) {
    let p = prec(n);
    let wrap = p < min;
    if wrap {
        out.push('(');
    }
    match n {
        Node::Num(v) => write_num(*v, out),
        Node::Const(Constant::Pi) => out.push_str("pi"),
        Node::Const(Constant::E) => out.push('e'),
        Node::Var(i) => out.push_str(&vars[*i]),
        Node::Neg(a) => {
            out.push('-');
            write_node(a, vars, 3, out);
        }
        Node::Bin(op, a, b) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => (" * ", 2, 3),
                BinOp::Div => (" / ", 2, 3),
                BinOp::Pow => ("^", 5, 3),
            };
            write_node(a, vars, lmin, out);
            out.push_str(sym);
            write_node(b, vars, rmin, out);
        }
        Node::Call(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_node(a, vars, 0, out);
            }
            out.push(')');
        }
        Node::Table(t, a) => {
            out.push_str(&t.name);
            out.push('(');
            write_node(a, vars, 0, out);
            out.push(')');
        }
    }
    if wrap {
        out.push(')');
    }
}

fn write_num(v: f64, out: &mut String) {
    if v.is_nan() {
        out.push_str("(0/0)");
    } else if v.is_infinite() {
        out.push_str(if v > 0.0 { "(1/0)" } else { "(-1/0)" });
    } else {
        if v.is_sign_negative() {
            out.push('-');
        }
        let a = v.abs();
        // both forms print the shortest digits that read back to the same value
        if a == 0.0 || (1e-4..1e15).contains(&a) {
            out.push_str(&format!("{a}"));
        } else {
            out.push_str(&format!("{a:e}"));
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&unparse(&self.root, &self.vars))
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.vars == other.vars
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.source())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> [&'static str; 2] {
        ["x", "y"]
    }

    #[test]
    fn divided_difference_evaluates() {
        let e = Expr::parse("(y - y_)/(x - x_)", &["x", "y", "x_", "y_"]).unwrap();
        assert_eq!(e.eval(&[1.0, 2.0, 0.5, 1.0]), 2.0);
    }

    #[test]
    fn constant_fold_of_exp() {
        let e = Expr::parse("exp(1)/1", &[]).unwrap();
        assert_eq!(e.eval(&[]), std::f64::consts::E);
    }

    #[test]
    fn syntax_error_offset() {
        match Expr::parse("x +* y", &xy()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_named() {
        assert!(matches!(Expr::parse("x + z", &xy()), Err(Error::UnknownIdentifier(s)) if s == "z"));
    }

    #[test]
    fn checked_log_of_negative() {
        let e = Expr::parse("log(x)", &["x"]).unwrap();
        assert!(matches!(e.eval_checked(&[-1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn checked_rejects_fractional_power_of_negative() {
        let e = Expr::parse("x^0.5", &["x"]).unwrap();
        assert!(matches!(e.eval_checked(&[-4.0]), Err(Error::Domain(_))));
        let e = Expr::parse("x^(1/2)", &["x"]).unwrap();
        assert_eq!(e.eval_checked(&[4.0]).unwrap(), 2.0);
        let e = Expr::parse("x^3", &["x"]).unwrap();
        assert_eq!(e.eval_checked(&[-2.0]).unwrap(), -8.0);
        let e = Expr::parse("x^-1", &["x"]).unwrap();
        assert!(e.eval_checked(&[0.0]).is_err());
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        let e = Expr::parse("-x^2", &["x"]).unwrap();
        assert_eq!(e.eval(&[3.0]), -9.0);
        let e = Expr::parse("2^3^2", &[]).unwrap();
        assert_eq!(e.eval(&[]), 512.0);
        let e = Expr::parse("2^-1*4", &[]).unwrap();
        assert_eq!(e.eval(&[]), 2.0);
    }

    #[test]
    fn diff_eval_examples() {
        let e = Expr::parse("x^2", &["x"]).unwrap();
        assert_eq!(e.diff_eval(&[3.0], "x").unwrap(), (9.0, 6.0));
        let e = Expr::parse("x*y", &xy()).unwrap();
        assert_eq!(e.diff_eval(&[2.0, 5.0], "y").unwrap(), (10.0, 2.0));
        let e = Expr::parse("exp(2*x)", &["x"]).unwrap();
        let (v, p) = e.diff_eval(&[0.5], "x").unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
        assert!((p - 2.0 * std::f64::consts::E).abs() < 1e-14);
    }

    #[test]
    fn params_fold_into_literals() {
        let e = Expr::parse_with("C1*x", &["x"], &[("C1", -2.5)]).unwrap();
        assert_eq!(e.eval(&[2.0]), -5.0);
        let back = Expr::parse(&e.to_string(), &["x"]).unwrap();
        assert_eq!(back.eval(&[2.0]), -5.0);
    }

    #[test]
    fn compose_substitutes_variables() {
        let f = Expr::parse("z^2 + 1", &["z"]).unwrap();
        let z = Expr::parse("dy/dx", &["dx", "dy"]).unwrap();
        let g = f.compose(&[z]).unwrap();
        assert_eq!(g.eval(&[2.0, 6.0]), 10.0);
    }

    #[test]
    fn unparse_roundtrip_keeps_structure() {
        let src = "-(x - y)^2 / (1 - x) - atan2(y, -x) * sign(x)^3";
        let e = Expr::parse(src, &xy()).unwrap();
        let again = Expr::parse(&e.to_string(), &xy()).unwrap();
        assert_eq!(e.node(), again.node());
    }

    #[test]
    fn literals_print_exactly() {
        for v in [0.1 + 0.2, 1.0 / 3.0, 2.0, 1e-20, 1.5e300, 123456.789, 0.0] {
            let e = Expr::constant(v, &xy());
            let back = Expr::parse(&e.to_string(), &xy()).unwrap();
            assert_eq!(back.eval(&[0.0, 0.0]).to_bits(), v.to_bits(), "{e}");
        }
        assert_eq!(Expr::parse("2*x + 0.5", &xy()).unwrap().to_string(), "2 * x + 0.5");
    }
}
