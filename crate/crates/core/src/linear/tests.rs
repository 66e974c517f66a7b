use super::*;
use crate::catalog::{invariant_family, Params};
use crate::symmetry::{is_symmetry, transform_solution, Invariance};
use crate::trajectory::HermiteTable;
use std::f64::consts::TAU;

fn lin(a: &str, b: &str, c: &str, g: &str, domain: (f64, f64)) -> LinearDODS {
    LinearDODS::new(a, b, c, g, domain).unwrap()
}

fn shift_demo() -> LinearDODS {
    lin("0", "1", "0", "x - 1", (1.0, 5.0))
}

/// beta periodic with the delay's period, so the extra symmetry is not a translation.
fn periodic(gamma: &str) -> LinearDODS {
    lin("0", "exp(sin(2*pi*x)/2)", gamma, "x - 1", (1.0, 4.0))
}

fn omega() -> f64 {
    let mut w = 0.5f64;
    for _ in 0..50 {
        w -= (w * w.exp() - 1.0) / ((1.0 + w) * w.exp());
    }
    w
}

fn run(l: &LinearDODS, phi: &str, end: f64) -> PiecewiseSolution {
    let sys = l.to_system().unwrap();
    let x0 = l.domain.0;
    let xl = l.g.eval(&[x0]);
    solve(&sys, &Expr::parse(phi, &["x"]).unwrap(), (xl, x0), end, &SolverOptions::default()).unwrap()
}

#[test]
fn k_function_examples() {
    assert_eq!(k_function(&shift_demo(), 2.7).unwrap(), 0.0);
    let l = lin("0", "x", "0", "x - 1", (2.0, 5.0));
    assert!((k_function(&l, 2.0).unwrap() + 0.5).abs() < 1e-15);
    let l = lin("1", "1", "0", "x - 1", (1.0, 5.0));
    assert_eq!(k_function(&l, 3.3).unwrap(), 0.0);
    let l = lin("0", "x - 3", "0", "x - 1", (1.0, 5.0));
    assert!(matches!(k_function(&l, 3.0), Err(Error::Domain(_))));
}

#[test]
fn compatibility_examples() {
    let c = compatibility(&shift_demo(), COMPAT_GRID, COMPAT_TOL).unwrap();
    assert!(c.holds && c.max_defect == 0.0);
    let l = lin("0", "x", "0", "x - 1", (2.0, 5.0));
    let c = compatibility(&l, COMPAT_GRID, COMPAT_TOL).unwrap();
    let hand = linspace(2.0, 5.0, COMPAT_GRID).into_iter().map(|x| (1.0 / x - 1.0 / (x - 1.0)).abs()).fold(0.0, f64::max);
    assert!(!c.holds && (c.max_defect - hand).abs() <= 1e-10, "{c:?}");
    let half = lin("0", "1", "0", "x/2", (1.0, 8.0));
    let c = compatibility(&half, COMPAT_GRID, COMPAT_TOL).unwrap();
    assert!(c.holds && c.max_defect == 0.0);
    assert!(compatibility(&half, 10, COMPAT_TOL).is_err());
    assert!(compatibility(&periodic("0"), COMPAT_GRID, COMPAT_TOL).unwrap().max_defect < 1e-12);
}

#[test]
fn translation_is_the_extra_symmetry_of_a_shift() {
    let l = shift_demo();
    let rep = extra_symmetry(&l, COMPAT_TOL).unwrap();
    let z = rep.symmetry.unwrap();
    assert_eq!(z.field.label, "d/dx");
    let v = is_symmetry(&z.field, &l.to_system().unwrap(), 200, 3, 1e-7, Invariance::Weak).unwrap();
    assert!(v.verdict && v.max_residual <= 1e-7);
}

#[test]
fn extra_symmetry_rejections() {
    let rep = extra_symmetry(&lin("0", "x", "0", "x - 1", (2.0, 5.0)), COMPAT_TOL).unwrap();
    assert!(rep.symmetry.is_none() && rep.functional_defect.is_none());
    let rep = extra_symmetry(&lin("0", "1", "0", "x/2", (1.0, 8.0)), COMPAT_TOL).unwrap();
    assert!(rep.compatibility.holds && rep.symmetry.is_none());
    // xi is constant, so xi(g)/(g' xi) = 2 everywhere
    assert!((rep.functional_defect.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(rep.diagnostics.len(), 1);
}

#[test]
fn tabulated_xi_matches_closed_form() {
    let l = periodic("0");
    let z = extra_symmetry(&l, COMPAT_TOL).unwrap().symmetry.unwrap();
    let exact = |x: f64| (-((TAU * x).sin() - TAU.sin()) / 2.0).exp();
    for x in linspace(0.0, 4.0, 97) {
        assert!((z.xi.eval(&[x]) - exact(x)).abs() < 1e-10, "{x}");
    }
    let v = is_symmetry(&z.field, &l.to_system().unwrap(), 200, 5, 1e-7, Invariance::Weak).unwrap();
    assert!(v.verdict, "{v:?}");
}

#[test]
fn extra_symmetry_moves_solutions_to_solutions() {
    for gamma in ["0", "1 + x/4"] {
        let l = periodic(gamma);
        let sys = l.to_system().unwrap();
        let z = extra_symmetry(&l, COMPAT_TOL).unwrap().symmetry.unwrap();
        let v = is_symmetry(&z.field, &sys, 200, 5, 1e-6, Invariance::Weak).unwrap();
        assert!(v.verdict, "{gamma}: {v:?}");
        let sol = run(&l, "1 + x/3", 3.5);
        let moved = transform_solution(&z.field, 0.1, &sol, 2000).unwrap();
        let r = crate::solver::residual(&moved, &sys, 200).unwrap();
        assert!(r <= 1e-6, "{gamma}: {r:e}");
    }
}

#[test]
fn affine_weight_enters_the_y_component() {
    let l = lin("0.3", "1", "0", "x - 1", (1.0, 5.0));
    let z = extra_symmetry(&l, COMPAT_TOL).unwrap().symmetry.unwrap();
    assert_eq!(z.field.eval(2.0, 5.0), (1.0, 1.5));
}

#[test]
fn homogenize_examples() {
    let l = lin("0", "1", "1", "x - 1", (1.0, 5.0));
    let h = homogenize(&l, &over_x("-1")).unwrap();
    assert!(h.system.is_homogeneous() && h.residual == 0.0);
    // residual 1 - (x - 1) - 1 peaks at the right end
    assert!(matches!(homogenize(&l, &over_x("x")), Err(Error::NotAParticularSolution(r)) if (r - 4.0).abs() < 1e-12));
    let h = homogenize(&shift_demo(), &over_x("0")).unwrap();
    assert_eq!(h.system.beta, shift_demo().beta);
}

fn round_trip(map: &MonotoneMap) -> f64 {
    let (lo, hi) = map.domain();
    linspace(lo, hi, 501).into_iter().map(|x| (map.inverse(map.forward(x).unwrap()).unwrap() - x).abs()).fold(0.0, f64::max)
}

/// Push a solution through the canonical change of variables.
fn transformed(sol: &PiecewiseSolution, form: &CanonicalForm) -> HermiteTable {
    let t = &form.transformation;
    let mut xs = linspace(sol.initial.0, sol.end(), 600);
    xs.extend(sol.breakpoints.iter().copied());
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let (mut u, mut v, mut l, mut r) = (vec![], vec![], vec![], vec![]);
    for &x in &xs {
        let (y, _) = sol.eval(x).unwrap();
        let (dl, dr) = sol.one_sided(x).unwrap();
        let (w, dw) = t.y_factor.diff_eval_index(&[x], 0, Mode::Checked).unwrap();
        let s = t.x_map.derivative(x).unwrap();
        u.push(t.x_map.forward(x).unwrap());
        v.push(w * y);
        l.push((dw * y + w * dl) / s);
        r.push((dw * y + w * dr) / s);
    }
    let kinks = sol.breakpoints.iter().map(|&b| t.x_map.forward(b).unwrap()).collect();
    HermiteTable::new(u, v, l, r, t.x_map.forward(sol.x0()).unwrap(), kinks).unwrap()
}

#[test]
fn shift_is_already_canonical() {
    let f = canonical_form(&shift_demo(), CanonicalMode::Canonical2).unwrap();
    assert_eq!(f.tag, Tag::Compatible);
    assert!((f.shift.unwrap() - 1.0).abs() < 1e-13 && f.sign == Some(1.0));
    assert!((f.transformation.x_map.forward(3.0).unwrap() - 3.0).abs() < 1e-13);
    assert!(round_trip(&f.transformation.x_map) <= 1e-9);
}

#[test]
fn compatible_reduction_to_a_shift() {
    let l = lin("0.2", "exp(sin(2*pi*x)/2)", "cos(x)", "x - 1", (1.0, 4.0));
    let f = canonical_form(&l, CanonicalMode::Canonical2).unwrap();
    assert_eq!(f.tag, Tag::Compatible);
    assert!(round_trip(&f.transformation.x_map) <= 1e-9);
    let sol = run(&l, "1", 4.0);
    let moved = transformed(&sol, &f);
    let r = crate::solver::residual(&moved, &f.system.to_system().unwrap(), 200).unwrap();
    assert!(r <= 1e-6, "{r:e}");
    assert!(f.system.beta.eval(&[2.0]) == 1.0 && f.system.alpha.eval(&[2.0]) == 0.0);
}

#[test]
fn straightened_delay_has_varying_coefficient() {
    let l = lin("0", "x", "0", "x - 1", (2.0, 5.0));
    let f = canonical_form(&l, CanonicalMode::Canonical2).unwrap();
    assert_eq!((f.tag, f.mode), (Tag::Incompatible, Some(CanonicalMode::Canonical2)));
    assert!(round_trip(&f.transformation.x_map) <= 1e-9);
    let (lo, hi) = f.system.domain;
    let slopes: Vec<f64> =
        linspace(lo, hi, 50).into_iter().map(|u| f.system.beta.diff_eval_index(&[u], 0, Mode::Checked).unwrap().1).collect();
    assert!(slopes.iter().all(|s| s.abs() > 0.5), "{slopes:?}");
    assert_eq!(f.system.g.eval(&[3.5]), 2.5);
}

#[test]
fn straightening_a_nonlinear_delay() {
    let l = lin("0.1", "1 + x/5", "sin(x)", "x/2", (1.0, 6.0));
    let f = canonical_form(&l, CanonicalMode::Canonical2).unwrap();
    assert_eq!(f.tag, Tag::Incompatible);
    let map = &f.transformation.x_map;
    assert!(round_trip(map) <= 1e-9);
    for x in linspace(1.0, 6.0, 40) {
        assert!((map.forward(x / 2.0).unwrap() - (map.forward(x).unwrap() - 1.0)).abs() < 1e-10);
    }
    let sol = run(&l, "cos(x)", 6.0);
    let r = crate::solver::residual(&transformed(&sol, &f), &f.system.to_system().unwrap(), 200).unwrap();
    assert!(r <= 1e-6, "{r:e}");
}

#[test]
fn absorbed_coefficient_leaves_the_delay_curved() {
    let l = lin("0", "1", "0", "x/2", (1.0, 8.0));
    let f = canonical_form(&l, CanonicalMode::Canonical3).unwrap();
    assert_eq!((f.tag, f.mode), (Tag::Incompatible, Some(CanonicalMode::Canonical3)));
    for u in linspace(1.0, 8.0, 30) {
        assert!((f.system.g.eval(&[u]) - u / 2.0).abs() < 1e-10);
    }
    let l = lin("-0.3", "2 + cos(x)", "1", "x/2", (1.0, 6.0));
    let f = canonical_form(&l, CanonicalMode::Canonical3).unwrap();
    assert!(round_trip(&f.transformation.x_map) <= 1e-9);
    let sol = run(&l, "x", 6.0);
    let r = crate::solver::residual(&transformed(&sol, &f), &f.system.to_system().unwrap(), 200).unwrap();
    assert!(r <= 1e-6, "{r:e}");
    let flip = lin("0", "x - 3", "0", "x/2", (1.0, 6.0));
    assert!(matches!(canonical_form(&flip, CanonicalMode::Canonical3), Err(Error::NonMonotoneTransform(_))));
}

#[test]
fn superposition_examples() {
    let l = lin("0", "1", "0", "x - 1", (0.0, 3.0));
    let sys = l.to_system().unwrap();
    let w = omega();
    let a = run(&l, "1", 3.0);
    let b = run(&l, &format!("exp({w}*x)"), 3.0);
    let r = superposition_check(&sys, &[a.clone(), b], &[2.0, -3.0], 200).unwrap();
    assert!(r <= 1e-7, "{r:e}");
    let own = crate::solver::residual(&a, &sys, 200).unwrap();
    assert_eq!(superposition_check(&sys, &[a], &[1.0], 200).unwrap(), own);
}

#[test]
fn superposition_fails_for_a_nonlinear_family() {
    let p = Params::new();
    let sys = invariant_family("A2,4", &p).unwrap();
    let opts = SolverOptions::default();
    let p1 = Expr::parse("x", &["x"]).unwrap();
    // both initial functions put x_ = -2 at x0 = 0
    let p2 = Expr::parse("x + x*(x + 2)/8", &["x"]).unwrap();
    let a = solve(&sys, &p1, (-2.0, 0.0), 2.0, &opts).unwrap();
    let b = solve(&sys, &p2, (-2.0, 0.0), 2.0, &opts).unwrap();
    let r = superposition_check(&sys, &[a, b], &[0.5, 0.5], 200).unwrap();
    assert!(r >= 1e-3, "{r:e}");
}

#[test]
fn linear_families_from_the_catalog() {
    let fam = invariant_family("A2,1", &Params::new()).unwrap();
    let l = LinearDODS::from_system(&fam).unwrap();
    assert!(l.is_homogeneous());
    let a = run(&l, "1 + x", 4.0);
    let b = run(&l, "cos(x)", 4.0);
    assert!(superposition_check(&fam, &[a, b], &[1.5, -0.7], 200).unwrap() <= 1e-7);

    let fam = invariant_family("A2,3", &Params::new()).unwrap();
    let l = LinearDODS::from_system(&fam).unwrap();
    assert!(!l.is_homogeneous());
    // sigma = p sin x + q cos x solves sigma' = sigma - sigma(x - 1) + sin x
    let (s, c) = (1f64.sin(), 1f64.cos());
    let m = nalgebra::Matrix2::new(1.0 - c, 1.0 - s, s - 1.0, 1.0 - c);
    let pq = m.lu().solve(&nalgebra::Vector2::new(-1.0, 0.0)).unwrap();
    let sigma = Expr::parse_with("p*sin(x) + q*cos(x)", &["x"], &[("p", pq[0]), ("q", pq[1])]).unwrap();
    let h = homogenize(&l, &sigma).unwrap();
    let hs = h.system.to_system().unwrap();
    let a = run(&h.system, "1", 4.0);
    let b = run(&h.system, "x^2", 4.0);
    assert!(superposition_check(&hs, &[a, b], &[-2.0, 0.25], 200).unwrap() <= 1e-7);
}

#[test]
fn classification_summary() {
    let c = classify(&shift_demo(), CanonicalMode::Canonical2).unwrap();
    let v = serde_json::to_value(&c).unwrap();
    assert_eq!(v["tag"], "compatible");
    assert_eq!(v["Z"], "d/dx");
    let c = classify(&lin("0", "x", "0", "x - 1", (2.0, 5.0)), CanonicalMode::Canonical2).unwrap();
    let v = serde_json::to_value(&c).unwrap();
    assert_eq!(v["tag"], "incompatible");
    assert!(v["Z"].is_null());
}
