use super::*;
use crate::solver::{solve, SolverOptions};
use crate::trajectory::Trajectory;

fn ansatz(family: &str, sub: &str) -> InvariantAnsatz {
    subalgebra_catalog(family).unwrap().into_iter().find(|a| a.subalgebra == sub).unwrap()
}

fn reals(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().fold(Params::new(), |p, (n, v)| p.set_real(n, *v))
}

fn power_params() -> Params {
    reals(&[("a", 2.0), ("C1", 4.0 / 3.0), ("C2", 1.0)])
}

fn only_root(a: &InvariantAnsatz, p: &Params) -> Constants {
    let roots = solve_constraints(a, p, &ConstraintOptions::default()).unwrap();
    assert_eq!(roots.solutions.len(), 1, "{} {}: {:?}", a.family_id, a.subalgebra, roots);
    roots.solutions[0].clone()
}

/// Parameter choices under which each closed-form reduction has roots.
fn cases() -> Vec<(&'static str, &'static str, Params)> {
    let quad = Params::new().set_function("f", "z^2").set_function("g", "z/2");
    vec![
        ("A2,2", "X2", quad),
        ("A2,4", "X1 + a X2", Params::new()),
        ("A3,2", "X1 + X2", reals(&[("a", 2.0), ("C1", 1.0), ("C2", 1.0)])),
        ("A3,2", "X1 - X2", reals(&[("a", 1.0 / 3.0), ("C1", 1.0), ("C2", -1.0)])),
        ("A3,2", "X3", power_params()),
        ("A3,4", "X1", reals(&[("C1", 0.0)])),
        ("A3,4", "X3", Params::new()),
        ("A3,6", "X1", reals(&[("C1", 0.0)])),
        ("A3,6", "X3", Params::new()),
        ("A3,8alt", "X1", reals(&[("C1", 0.0)])),
        ("A3,8alt", "X2", reals(&[("C1", -0.5)])),
        ("A3,8alt", "X1 + X3", Params::new()),
        ("A3,9", "X2", reals(&[("C1", 2.0), ("C2", 2.0)])),
        ("A3,10alt", "X1", reals(&[("C1", 4.0 / 9.0), ("C2", 4.0)])),
        ("A3,10alt", "X2", reals(&[("C1", 0.5), ("C2", -2.0)])),
        ("A3,10alt", "X1 + X3", Params::new()),
        ("A3,12", "X1", Params::new()),
    ]
}

#[test]
fn catalog_lists_representatives() {
    let a22 = subalgebra_catalog("A2,2").unwrap();
    assert_eq!(a22.len(), 1);
    assert_eq!((a22[0].h.as_deref(), a22[0].k.as_deref()), (Some("A*x"), Some("B*x")));
    let subs: Vec<String> = subalgebra_catalog("A3,8alt").unwrap().into_iter().map(|a| a.subalgebra).collect();
    assert_eq!(subs, ["X1", "X2", "X1 + X3"]);
    assert!(subalgebra_catalog("A1,1").unwrap().is_empty());
    assert!(matches!(subalgebra_catalog("A7,7"), Err(Error::UnknownFamily(_))));
    let numeric: Vec<_> = all_ansatze().into_iter().filter(|a| a.numeric_only).collect();
    assert_eq!(numeric.len(), 1);
    assert_eq!((numeric[0].family_id.as_str(), numeric[0].subalgebra.as_str()), ("A3,9", "X1 + X3"));
}

#[test]
fn every_closed_form_reduction_is_exercised() {
    let covered = cases();
    // the pure translation of the power family never reduces
    let skip = |a: &InvariantAnsatz| a.numeric_only || (a.family_id == "A3,2" && a.subalgebra == "X1");
    for a in all_ansatze().into_iter().filter(|a| !skip(a)) {
        assert!(
            covered.iter().any(|(f, s, _)| *f == a.family_id && *s == a.subalgebra),
            "{} {}",
            a.family_id,
            a.subalgebra
        );
    }
}

#[test]
fn scaling_reduction_with_quadratic_function() {
    let p = Params::new().set_function("f", "z^2").set_function("g", "z/2");
    let a = ansatz("A2,2", "X2");
    let roots = solve_constraints(&a, &p, &ConstraintOptions::default()).unwrap();
    assert_eq!(roots.solutions.len(), 1);
    let c = &roots.solutions[0];
    assert!((c["A"] - 1.0).abs() < 1e-12 && (c["B"] - 0.5).abs() < 1e-12);
    // A = 0 gives a vanishing delay
    assert_eq!(roots.diagnostics.len(), 1, "{:?}", roots.diagnostics);
    let sol = build_solution(&a, &p, c).unwrap();
    assert!((sol.y.eval(&[3.0]) - 3.0).abs() < 1e-15);
    assert!((sol.delay.eval(&[3.0]) - 1.5).abs() < 1e-15);
}

#[test]
fn translation_reduction_of_free_functions() {
    let a = ansatz("A2,4", "X1 + a X2");
    let c = only_root(&a, &Params::new());
    assert!((c["a"] - 1.0).abs() < 1e-12 && (c["B"] - 2.0).abs() < 1e-12);
    let opts = ConstraintOptions { free: [("A".to_string(), 5.0)].into(), ..Default::default() };
    let roots = solve_constraints(&a, &Params::new(), &opts).unwrap();
    let sol = build_solution(&a, &Params::new(), &roots.solutions[0]).unwrap();
    assert!((sol.y.eval(&[1.0]) - 6.0).abs() < 1e-15);
    assert!((sol.delay.eval(&[1.0]) + 1.0).abs() < 1e-15);
    let sys = crate::catalog::invariant_family("A2,4", &Params::new()).unwrap();
    let r = verify(&sys, &sol, 100).unwrap();
    assert!(r <= 1e-13, "{r:e} {:?}", roots.solutions);
}

#[test]
fn power_reduction_constants() {
    let a = ansatz("A3,2", "X3");
    let c = only_root(&a, &power_params());
    assert!((c["A"] - 1.0 / 3.0).abs() < 1e-12, "{c:?}");
    assert!((c["B"] - 0.5).abs() < 1e-12);
    let sol = build_solution(&a, &power_params(), &c).unwrap();
    assert_eq!(sol.domain, (1.0, 10.0));
    let sys = crate::catalog::invariant_family("A3,2", &power_params()).unwrap();
    assert!(verify(&sys, &sol, 200).unwrap() <= 1e-12);
    let mut off = sol.clone();
    off.y = Expr::parse("1.01*x^2/3", &["x"]).unwrap();
    let r = verify(&sys, &off, 200).unwrap();
    assert!((1e-3..1e-1).contains(&r), "{r:e}");
}

#[test]
fn constant_reductions_need_their_conditions() {
    let a = ansatz("A3,4", "X1");
    assert!(solve_constraints(&a, &Params::new(), &ConstraintOptions::default()).unwrap().solutions.is_empty());
    let c = only_root(&a, &reals(&[("C1", 0.0)]));
    assert!((c["B"] - 1.5).abs() < 1e-12);
    for p in [power_params(), Params::new(), reals(&[("a", -0.5), ("C2", 3.0)])] {
        let roots = solve_constraints(&ansatz("A3,2", "X1"), &p, &ConstraintOptions::default()).unwrap();
        assert!(roots.solutions.is_empty(), "{roots:?}");
    }
}

#[test]
fn reductions_satisfy_their_systems() {
    for (family, sub, p) in cases() {
        let a = ansatz(family, sub);
        let roots = solve_constraints(&a, &p, &ConstraintOptions::default()).unwrap();
        assert!(!roots.solutions.is_empty(), "{family} {sub}: {:?}", roots.diagnostics);
        let sys = families::build(families::find(family).unwrap(), &p, DEFAULT_MAX_DELAY, false).unwrap().system;
        for c in &roots.solutions {
            let sol = build_solution(&a, &p, c).unwrap();
            let r = verify(&sys, &sol, 200).unwrap();
            assert!(r <= 1e-10, "{family} {sub} {c:?}: {r:e}");
        }
    }
}

#[test]
fn jacobian_condition_holds() {
    for a in all_ansatze() {
        let det = jacobian_condition(&a, &Params::new(), 50, 4).unwrap();
        assert!(det > 1e-8, "{} {}: {det:e}", a.family_id, a.subalgebra);
    }
}

#[test]
fn numeric_only_reduction_has_no_closed_form() {
    let a = ansatz("A3,9", "X1 + X3");
    assert!(solve_constraints(&a, &Params::new(), &ConstraintOptions::default()).is_err());
    assert!(build_solution(&a, &Params::new(), &Constants::new()).is_err());
}

#[test]
fn orbits_of_invariant_solutions() {
    let p = Params::new().set_function("f", "z^2").set_function("g", "z/2");
    let a = ansatz("A2,2", "X2");
    let sol = build_solution(&a, &p, &only_root(&a, &p)).unwrap();
    let shifted = orbit_extend(&a, &p, &sol, &[("alpha".to_string(), 3.0)].into()).unwrap();
    assert!((shifted.y.eval(&[2.0]) - 5.0).abs() < 1e-15);
    assert!((shifted.delay.eval(&[2.0]) - 1.0).abs() < 1e-15);
    let same = orbit_extend(&a, &p, &sol, &Constants::new()).unwrap();
    assert_eq!(same.y.eval(&[2.5]), sol.y.eval(&[2.5]));

    // translations in both variables keep the power solution exact
    let a = ansatz("A3,2", "X3");
    let sol = build_solution(&a, &power_params(), &only_root(&a, &power_params())).unwrap();
    let g: Constants = [("alpha".to_string(), 1.0), ("beta".to_string(), 0.0)].into();
    let moved = orbit_extend(&a, &power_params(), &sol, &g).unwrap();
    assert!((moved.y.eval(&[3.0]) - 4.0).abs() < 1e-14);
    let g: Constants = [("alpha".to_string(), -2.0), ("beta".to_string(), 1.5)].into();
    assert!(orbit_extend(&a, &power_params(), &sol, &g).is_ok());

    // a slope added to the constant solution changes the delay condition
    let a = ansatz("A3,4", "X1");
    let p = reals(&[("C1", 0.0)]);
    let sol = build_solution(&a, &p, &only_root(&a, &p)).unwrap();
    let r = orbit_extend(&a, &p, &sol, &[("alpha".to_string(), 0.5)].into());
    assert!(matches!(r, Err(Error::ConstraintViolated(_))), "{r:?}");
    assert!(orbit_extend(&a, &p, &sol, &[("gamma".to_string(), 0.5)].into()).is_err());

    let a = ansatz("A3,4", "X3");
    let sol = build_solution(&a, &Params::new(), &only_root(&a, &Params::new())).unwrap();
    let g: Constants = [("alpha".to_string(), 0.7), ("beta".to_string(), -0.5)].into();
    assert!(orbit_extend(&a, &Params::new(), &sol, &g).is_ok());
}

#[test]
fn log_reduction_condition() {
    // B ln|B|/(1 - B) = C1 - 1 for the reduction by the third field
    let a = ansatz("A3,4", "X3");
    let c = only_root(&a, &Params::new());
    let b = c["B"];
    assert!((b * b.abs().ln() / (1.0 - b) + 0.5).abs() < 1e-10);
}

#[test]
fn spiral_reduction_is_parametric() {
    let a = ansatz("A3,6", "X3");
    assert!(a.is_parametric());
    let roots = solve_constraints(&a, &Params::new(), &ConstraintOptions::default()).unwrap();
    let sol = build_solution(&a, &Params::new(), &roots.solutions[0]).unwrap();
    assert!(sol.graph().is_none());
    let (lo, hi) = sol.domain;
    for i in 0..20 {
        let p = sol.point(lo + (hi - lo) * (i as f64 + 0.5) / 20.0).unwrap();
        assert!(p.x_minus < p.x);
    }
}

/// Breakpoints of the natural interval sequence, from the closed-form delay.
fn spans(sol: &InvariantSolution, x0: f64, n: usize) -> Vec<f64> {
    let mut out = vec![x0];
    for _ in 0..n {
        let prev = *out.last().unwrap();
        let mut hi = prev + 1.0;
        while sol.delay.eval(&[hi]) < prev {
            hi = prev + 2.0 * (hi - prev);
        }
        out.push(crate::numerics::roots::bisect(|x| sol.delay.eval(&[x]) - prev, prev, hi, 1e-14));
    }
    out
}

#[test]
fn solver_reproduces_invariant_solutions() {
    let starts: &[(&str, &str, f64)] = &[
        ("A2,2", "X2", 1.0),
        ("A2,4", "X1 + a X2", 0.0),
        ("A3,2", "X1 + X2", 0.0),
        ("A3,2", "X1 - X2", 0.0),
        ("A3,2", "X3", 1.0),
        ("A3,4", "X1", 0.0),
        ("A3,4", "X3", 1.0),
        ("A3,6", "X1", 0.0),
        ("A3,8alt", "X1", 0.0),
        ("A3,8alt", "X2", 1.0),
        ("A3,8alt", "X1 + X3", -1.0),
        ("A3,9", "X2", 1.0),
        ("A3,10alt", "X1", 0.0),
    ];
    for &(family, sub, x0) in starts {
        let p = cases().into_iter().find(|c| c.0 == family && c.1 == sub).unwrap().2;
        let a = ansatz(family, sub);
        // linear delays outgrow the default scan window after a few spans
        let sys = families::build(families::find(family).unwrap(), &p, 100.0, false).unwrap().system;
        for c in solve_constraints(&a, &p, &ConstraintOptions::default()).unwrap().solutions {
            let sol = build_solution(&a, &p, &c).unwrap();
            let marks = spans(&sol, x0, 3);
            let xl = sol.delay.eval(&[x0]);
            let num = solve(&sys, sol.graph().unwrap(), (xl, x0), marks[3], &SolverOptions::default())
                .unwrap_or_else(|e| panic!("{family} {sub} {c:?}: {e}"));
            let worst = crate::numerics::linspace(x0, marks[3], 400)
                .into_iter()
                .map(|x| (num.eval(x).unwrap().0 - sol.y.eval(&[x])).abs())
                .fold(0.0, f64::max);
            assert!(worst <= 1e-7, "{family} {sub} {c:?}: {worst:e}");
        }
    }
}
