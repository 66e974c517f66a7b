use super::*;

fn lambert_omega() -> f64 {
    let mut w = 0.5f64;
    for _ in 0..50 {
        w -= (w * w.exp() - 1.0) / (w.exp() * (1.0 + w));
    }
    w
}

fn unit_delay() -> (DODSystem, Expr) {
    (DODSystem::explicit("y_", "x - 1", (-1.0, 10.0)).unwrap(), Expr::parse("1", &["x"]).unwrap())
}

#[test]
fn method_of_steps_values() {
    let (s, phi) = unit_delay();
    let sol = solve(&s, &phi, (-1.0, 0.0), 2.0, &SolverOptions::default()).unwrap();
    assert!((sol.eval(1.0).unwrap().0 - 2.0).abs() < 1e-8);
    assert!((sol.eval(1.5).unwrap().0 - 2.625).abs() < 1e-8);
    assert!((sol.eval(2.0).unwrap().0 - 3.5).abs() < 1e-8);
    assert_eq!(evaluate(&sol, 0.0).unwrap(), (1.0, 1.0));
    assert_eq!(evaluate(&sol, -0.5).unwrap(), (1.0, 0.0));
    assert!(matches!(evaluate(&sol, 5.0), Err(Error::OutOfRange { .. })));
    assert!(residual(&sol, &s, 100).unwrap() <= 1e-8);
}

#[test]
fn breakpoints_of_unit_delay() {
    let (s, phi) = unit_delay();
    let sol = solve(&s, &phi, (-1.0, 0.0), 3.5, &SolverOptions::default()).unwrap();
    assert_eq!(sol.breakpoints.len(), 4, "{:?}", sol.breakpoints);
    for (n, b) in sol.breakpoints.iter().enumerate() {
        assert!((b - n as f64).abs() <= 1e-10, "{b}");
    }
    for &b in &sol.breakpoints[1..] {
        let i = sol.steps.iter().position(|st| st.x1 == b).unwrap();
        assert!((sol.steps[i].y1 - sol.steps[i + 1].y0).abs() <= 1e-10);
        assert_eq!(sol.steps[i + 1].segment, sol.steps[i].segment + 1);
    }
}

#[test]
fn exponential_solution_is_preserved() {
    let w = lambert_omega();
    assert!((w - 0.567_143_290_4).abs() < 1e-10);
    let s = DODSystem::explicit("y_", "x - 1", (-1.0, 10.0)).unwrap();
    let phi = Expr::parse_with("exp(w*x)", &["x"], &[("w", w)]).unwrap();
    let sol = solve(&s, &phi, (-1.0, 0.0), 3.0, &SolverOptions::default()).unwrap();
    let exact = (3.0 * w).exp();
    assert!(((sol.eval(3.0).unwrap().0 - exact) / exact).abs() <= 1e-6);
    assert!((exact - 5.4817).abs() < 1e-4);
}

#[test]
fn solution_dependent_quotient() {
    let s = DODSystem::explicit("dy/dx", "x/2", (0.5, 10.0)).unwrap();
    let phi = Expr::parse("x", &["x"]).unwrap();
    let sol = solve(&s, &phi, (0.5, 1.0), 2.0, &SolverOptions::default()).unwrap();
    assert!((sol.eval(2.0).unwrap().0 - 2.0).abs() <= 1e-8);
}

#[test]
fn compatibility_and_causality() {
    let (s, _) = unit_delay();
    let phi = Expr::parse("x^2", &["x"]).unwrap();
    let r = solve(&s, &phi, (-2.0, 0.0), 1.0, &SolverOptions::default());
    assert!(matches!(r, Err(Error::Compatibility { defect }) if (defect - 1.0).abs() < 1e-12));
    let r = solve(&s, &phi, (-0.5, 0.0), 1.0, &SolverOptions::default());
    assert!(matches!(r, Err(Error::Causality { .. })));
    let ahead = DODSystem::explicit("y_", "x + 1", (-1.0, 10.0)).unwrap();
    let r = solve(&ahead, &Expr::parse("1", &["x"]).unwrap(), (-1.0, 0.0), 1.0, &SolverOptions::default());
    assert!(matches!(r, Err(Error::Causality { .. })));
}

#[test]
fn forced_run_continues_with_warning() {
    let (s, _) = unit_delay();
    let phi = Expr::parse("x^2", &["x"]).unwrap();
    let opts = SolverOptions { force: true, ..Default::default() };
    let sol = solve(&s, &phi, (-2.0, 0.0), 2.0, &opts).unwrap();
    assert_eq!(sol.warnings.len(), 1);
    // y = 1/3 ((x-1)^3 + 1) on [0, 1]
    assert!((sol.eval(1.0).unwrap().0 - 1.0 / 3.0).abs() < 1e-9);
    assert!(residual(&sol, &s, 100).unwrap() < 1e-8);
    // the initial function continued past x0 is no solution
    let xs = crate::numerics::linspace(0.0, 2.0, 41);
    let d: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
    let fake = crate::trajectory::HermiteTable::new(
        xs.clone(),
        xs.iter().map(|x| x * x).collect(),
        d.clone(),
        d,
        0.0,
        vec![],
    )
    .unwrap();
    let mut glued = fake.clone();
    glued.xs.insert(0, -2.0);
    glued.ys.insert(0, 4.0);
    glued.left.insert(0, -4.0);
    glued.right.insert(0, -4.0);
    assert!(residual(&glued, &s, 100).unwrap() > 0.1);
}

#[test]
fn implicit_relation_tracks_largest_root() {
    // x_ solves (x - x_)^2 = 1 for x_ < x, i.e. x_ = x - 1
    let s = DODSystem::implicit("y_", "(x - x_)^2 - 1", (-1.0, 10.0), 10.0).unwrap();
    let phi = Expr::parse("1", &["x"]).unwrap();
    let sol = solve(&s, &phi, (-1.0, 0.0), 2.0, &SolverOptions::default()).unwrap();
    assert!((sol.eval(2.0).unwrap().0 - 3.5).abs() < 1e-8);
    assert!(sol.breakpoints.iter().any(|b| (b - 1.0).abs() < 1e-10));
}

#[test]
fn state_dependent_explicit_delay() {
    // x_ = x - 1 - y_^2/100 resolved by fixed point each stage
    let s = DODSystem::explicit("-y_", "x - 1 - y_^2/100", (-2.0, 10.0)).unwrap();
    let phi = Expr::parse("1", &["x"]).unwrap();
    let sol = solve(&s, &phi, (-1.01, 0.0), 3.0, &SolverOptions::default()).unwrap();
    assert!(residual(&sol, &s, 200).unwrap() <= 1e-8);
    assert!(sol.breakpoints.len() >= 3);
}

#[test]
fn halving_the_step_cap_reduces_residual() {
    let (s, phi) = unit_delay();
    let run = |cap: f64| {
        let o = SolverOptions { rel_tol: 1.0, abs_tol: 1.0, max_step: cap, ..Default::default() };
        let sol = solve(&s, &phi, (-1.0, 0.0), 5.0, &o).unwrap();
        residual(&sol, &s, 400).unwrap()
    };
    let (a, b) = (run(0.1), run(0.05));
    assert!(a / b >= 4.0, "{a:e} {b:e}");
}

#[test]
fn options_are_checked() {
    let (s, phi) = unit_delay();
    let o = SolverOptions { rel_tol: 0.0, ..Default::default() };
    assert!(matches!(solve(&s, &phi, (-1.0, 0.0), 1.0, &o), Err(Error::Config(_))));
    assert!(matches!(solve(&s, &phi, (-1.0, 0.0), -1.0, &SolverOptions::default()), Err(Error::Config(_))));
}

#[test]
fn residual_scan_finds_roots_next_to_the_history_start() {
    let p = crate::catalog::Params::new().set_function("f", "z^2").set_function("g", "z/2");
    let sys = crate::catalog::invariant_family("A2,2", &p).unwrap();
    let phi = Expr::parse("x", &["x"]).unwrap();
    // the first residual point delays to just above 0.5
    let sol = solve(&sys, &phi, (0.5, 1.0), 4.0, &SolverOptions::default()).unwrap();
    assert!(residual(&sol, &sys, 400).unwrap() <= 1e-10);
    assert!((sol.eval(4.0).unwrap().0 - 4.0).abs() <= 1e-8);
}
