//! Acceptance criteria, one line per criterion. Exits non-zero on any failure.

mod common;

use dods_core::catalog::{default_families, family_with_max_delay, list_algebras, Params};
use dods_core::invariant_solutions::{
    build_solution, constraint_residual, solve_constraints, subalgebra_catalog, verify, ConstraintOptions, InvariantAnsatz,
    InvariantSolution,
};
use dods_core::linear::{classify, compatibility, extra_symmetry, superposition_check, CanonicalMode, Tag, COMPAT_GRID, COMPAT_TOL};
use dods_core::numerics::{linspace, roots::bisect};
use dods_core::solver::{residual, solve, PiecewiseSolution, SolverOptions};
use dods_core::symmetry::{apply_prolonged, invariant_count, is_symmetry, manifold_jets, transform_solution, Invariance, RANK_SAMPLES};
use dods_core::trajectory::Trajectory;
use dods_core::{DODSystem, Expr, LinearDODS, Mode, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::panic::{catch_unwind, AssertUnwindSafe};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn omega() -> f64 {
    let mut w = 0.5f64;
    for _ in 0..60 {
        w -= (w * w.exp() - 1.0) / ((1.0 + w) * w.exp());
    }
    w
}

fn unit_delay() -> DODSystem {
    DODSystem::explicit("y_", "x - 1", (-1.0, 10.0)).unwrap()
}

fn run(sys: &DODSystem, phi: &str, start: (f64, f64), end: f64) -> Result<PiecewiseSolution, String> {
    let phi = Expr::parse(phi, &["x"]).map_err(err)?;
    solve(sys, &phi, start, end, &SolverOptions::default()).map_err(err)
}

fn annihilation() -> Outcome {
    let mut worst = 0.0f64;
    let families = default_families();
    for fam in &families {
        let jets = manifold_jets(&fam.system, 200, 11).map_err(|e| format!("{}: {e}", fam.id))?;
        for field in &fam.algebra.basis {
            for inv in &fam.invariants {
                for j in &jets {
                    let v = apply_prolonged(field, &inv.expr, j).map_err(err)?.abs();
                    ensure(v <= 1e-8, format!("{} {} {}: {v:e}", fam.id, field.label, inv.label))?;
                    worst = worst.max(v);
                }
            }
        }
    }
    Ok(format!("{} families, worst {worst:.1e}", families.len()))
}

fn symmetry_verdicts() -> Outcome {
    let add = Expr::parse("a + 0.1*y", &["a", "y"]).map_err(err)?;
    let y = Expr::parse("y", &dods_core::system::JET_VARS).map_err(err)?;
    let (mut kept, mut lost) = (0.0f64, f64::INFINITY);
    for fam in default_families() {
        for field in &fam.algebra.basis {
            let v = is_symmetry(field, &fam.system, 200, 3, 1e-8, Invariance::Weak).map_err(err)?;
            ensure(v.verdict, format!("{} {}: {:e}", fam.id, field.label, v.max_residual))?;
            kept = kept.max(v.max_residual);
        }
        let sys = fam.system.with_rhs(add.compose(&[fam.system.f.clone(), y.clone()]).map_err(err)?).map_err(err)?;
        let mut worst = 0.0f64;
        for field in &fam.algebra.basis {
            worst = worst.max(is_symmetry(field, &sys, 200, 3, 1e-8, Invariance::Weak).map_err(err)?.max_residual);
        }
        ensure(worst >= 1e-3, format!("perturbed {} still symmetric: {worst:e}", fam.id))?;
        lost = lost.min(worst);
    }
    Ok(format!("admitted up to {kept:.1e}, perturbed at least {lost:.1e}"))
}

fn invariant_counts() -> Outcome {
    let mut checked = 0;
    for a in list_algebras() {
        let k = invariant_count(&a.basis, RANK_SAMPLES, 0).map_err(err)?;
        let expected = match (a.dim, a.id.as_str()) {
            (_, "so31") => {
                ensure(k <= 1, format!("so31: {k}"))?;
                checked += 1;
                continue;
            }
            (_, "A4,13") => 1,
            (1, _) => 4,
            (2, _) => 3,
            (3, _) => 2,
            _ => continue,
        };
        ensure(k == expected, format!("{}: {k} invariants, expected {expected}", a.id))?;
        checked += 1;
    }
    Ok(format!("{checked} realizations"))
}

fn method_of_steps() -> Outcome {
    let sys = unit_delay();
    let sol = run(&sys, "1", (-1.0, 0.0), 3.0)?;
    let e1 = (sol.eval(1.0).map_err(err)?.0 - 2.0).abs();
    let e2 = (sol.eval(2.0).map_err(err)?.0 - 3.5).abs();
    ensure(e1 <= 1e-8 && e2 <= 1e-8, format!("y(1) off by {e1:e}, y(2) off by {e2:e}"))?;
    let w = omega();
    let phi = Expr::parse_with("exp(w*x)", &["x"], &[("w", w)]).map_err(err)?;
    let sol = solve(&sys, &phi, (-1.0, 0.0), 3.0, &SolverOptions::default()).map_err(err)?;
    let exact = (3.0 * w).exp();
    let rel = ((sol.eval(3.0).map_err(err)?.0 - exact) / exact).abs();
    ensure(rel <= 1e-6, format!("exponential relative error {rel:e}"))?;
    Ok(format!("constant history {:.1e}, exponential {rel:.1e}", e1.max(e2)))
}

fn quotient_delay() -> Outcome {
    let sys = DODSystem::explicit("dy/dx", "x/2", (0.5, 10.0)).map_err(err)?;
    let sol = run(&sys, "x", (0.5, 1.0), 2.0)?;
    let e = (sol.eval(2.0).map_err(err)?.0 - 2.0).abs();
    ensure(e <= 1e-8, format!("y(2) off by {e:e}"))?;
    Ok(format!("y(2) error {e:.1e}"))
}

fn ansatz(family: &str, sub: &str) -> Result<InvariantAnsatz, String> {
    subalgebra_catalog(family)
        .map_err(err)?
        .into_iter()
        .find(|a| a.subalgebra == sub)
        .ok_or_else(|| format!("{family} has no subalgebra {sub}"))
}

/// Abscissae where the delayed point crosses the previous one, starting at `x0`.
fn spans(sol: &InvariantSolution, x0: f64, n: usize) -> Vec<f64> {
    let mut out = vec![x0];
    for _ in 0..n {
        let prev = *out.last().unwrap();
        let mut hi = prev + 1.0;
        while sol.delay.eval(&[hi]) < prev {
            hi = prev + 2.0 * (hi - prev);
        }
        out.push(bisect(|x| sol.delay.eval(&[x]) - prev, prev, hi, 1e-14));
    }
    out
}

fn reproduce(family: &str, params: &Params, sol: &InvariantSolution, x0: f64) -> Result<f64, String> {
    let sys = family_with_max_delay(family, params, 100.0).map_err(err)?.system;
    let marks = spans(sol, x0, 3);
    let graph = sol.graph().ok_or("parametric solution")?;
    let xl = sol.delay.eval(&[x0]);
    let num = solve(&sys, graph, (xl, x0), marks[3], &SolverOptions::default()).map_err(err)?;
    let mut worst = 0.0f64;
    for x in linspace(x0, marks[3], 400) {
        worst = worst.max((num.eval(x).map_err(err)?.0 - sol.y.eval(&[x])).abs());
    }
    Ok(worst)
}

fn invariant_solutions() -> Outcome {
    let p = Params::new();
    let a = ansatz("A2,4", "X1 + a X2")?;
    let roots = solve_constraints(&a, &p, &ConstraintOptions::default()).map_err(err)?;
    ensure(roots.solutions.len() == 1, format!("A2,4: {} roots", roots.solutions.len()))?;
    let c = &roots.solutions[0];
    ensure((c["a"] - 1.0).abs() < 1e-12 && (c["B"] - 2.0).abs() < 1e-12, format!("A2,4 constants {c:?}"))?;
    let r1 = constraint_residual(&a, &p, c).map_err(err)?;
    ensure(r1 <= 1e-12, format!("A2,4 constraint residual {r1:e}"))?;
    let sol = build_solution(&a, &p, c).map_err(err)?;
    let s1 = reproduce("A2,4", &p, &sol, 0.0)?;
    ensure(s1 <= 1e-7, format!("A2,4 solver mismatch {s1:e}"))?;

    let p = Params::new().set_real("a", 2.0).set_real("C1", 4.0 / 3.0).set_real("C2", 1.0);
    let a = ansatz("A3,2", "X3")?;
    let roots = solve_constraints(&a, &p, &ConstraintOptions::default()).map_err(err)?;
    ensure(roots.solutions.len() == 1, format!("A3,2: {} roots", roots.solutions.len()))?;
    let c = &roots.solutions[0];
    ensure((c["A"] - 1.0 / 3.0).abs() < 1e-12 && (c["B"] - 0.5).abs() < 1e-12, format!("A3,2 constants {c:?}"))?;
    let sol = build_solution(&a, &p, c).map_err(err)?;
    let sys = dods_core::catalog::invariant_family("A3,2", &p).map_err(err)?;
    let r2 = verify(&sys, &sol, 200).map_err(err)?;
    ensure(r2 <= 1e-12, format!("A3,2 residual {r2:e}"))?;
    let s2 = reproduce("A3,2", &p, &sol, 1.0)?;
    ensure(s2 <= 1e-7, format!("A3,2 solver mismatch {s2:e}"))?;
    Ok(format!("constraints {r1:.1e}, residual {r2:.1e}, solver {:.1e}", s1.max(s2)))
}

fn trichotomy() -> Outcome {
    let shift = LinearDODS::new("0", "1", "0", "x - 1", (1.0, 5.0)).map_err(err)?;
    let c = classify(&shift, CanonicalMode::Canonical2).map_err(err)?;
    ensure(c.tag == Tag::Compatible && c.z.as_deref() == Some("d/dx"), format!("shift: {:?} {:?}", c.tag, c.z))?;
    let z = extra_symmetry(&shift, COMPAT_TOL).map_err(err)?.symmetry.ok_or("shift: no extra symmetry")?;
    let v = is_symmetry(&z.field, &shift.to_system().map_err(err)?, 200, 3, 1e-7, Invariance::Weak).map_err(err)?;
    ensure(v.verdict, format!("translation residual {:e}", v.max_residual))?;

    let ramp = LinearDODS::new("0", "x", "0", "x - 1", (2.0, 5.0)).map_err(err)?;
    let c = classify(&ramp, CanonicalMode::Canonical2).map_err(err)?;
    let hand = linspace(2.0, 5.0, COMPAT_GRID).into_iter().map(|x| (1.0 / x - 1.0 / (x - 1.0)).abs()).fold(0.0, f64::max);
    let defect = compatibility(&ramp, COMPAT_GRID, COMPAT_TOL).map_err(err)?.max_defect;
    ensure(c.tag == Tag::Incompatible && c.z.is_none(), format!("ramp: {:?}", c.tag))?;
    ensure((defect - hand).abs() <= 1e-10, format!("ramp defect {defect} vs {hand}"))?;

    let half = LinearDODS::new("0", "1", "0", "x/2", (1.0, 8.0)).map_err(err)?;
    let rep = extra_symmetry(&half, COMPAT_TOL).map_err(err)?;
    let fd = rep.functional_defect.unwrap_or(0.0);
    ensure(rep.compatibility.holds && rep.symmetry.is_none() && fd > 1e-3, format!("halving: functional defect {fd}"))?;
    Ok(format!("translation {:.1e}, incompatible defect {defect:.3}, functional defect {fd:.3}", v.max_residual))
}

fn superposition() -> Outcome {
    let opts = SolverOptions::default();
    let bound = 10.0 * opts.rel_tol;
    let lin = LinearDODS::new("0", "1", "0", "x - 1", (0.0, 3.0)).map_err(err)?;
    let sys = lin.to_system().map_err(err)?;
    let a = run(&sys, "1", (-1.0, 0.0), 3.0)?;
    let b = run(&sys, "cos(3*x)", (-1.0, 0.0), 3.0)?;
    let pair = [a, b];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let coeffs = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let r = superposition_check(&sys, &pair, &coeffs, 200).map_err(err)?;
        ensure(r <= bound, format!("combination {coeffs:?}: {r:e} above {bound:e}"))?;
        worst = worst.max(r);
    }
    let p = Params::new();
    let fam = dods_core::catalog::invariant_family("A2,4", &p).map_err(err)?;
    let u = run(&fam, "x", (-2.0, 0.0), 2.0)?;
    let v = run(&fam, "x + x*(x + 2)/8", (-2.0, 0.0), 2.0)?;
    let bad = superposition_check(&fam, &[u, v], &[0.5, 0.5], 200).map_err(err)?;
    ensure(bad >= 1e6 * bound, format!("nonlinear combination only {bad:e}"))?;
    Ok(format!("linear {worst:.1e}, nonlinear {bad:.1e}"))
}

fn transformed_solutions() -> Outcome {
    let sys = unit_delay();
    let sol = run(&sys, "1", (-1.0, 0.0), 3.0)?;
    let apply = |xi: &str, eta: &str, eps: f64| -> Result<f64, String> {
        let field = VectorField::new(xi, eta).map_err(err)?;
        let moved = transform_solution(&field, eps, &sol, 2000).map_err(err)?;
        residual(&moved, &sys, 200).map_err(err)
    };
    let scale = apply("0", "y", std::f64::consts::LN_2)?;
    let shift = apply("1", "0", 1.0)?;
    let stretch = apply("x", "0", 0.5)?;
    ensure(scale <= 1e-6 && shift <= 1e-6, format!("symmetries moved off: {scale:e}, {shift:e}"))?;
    ensure(stretch >= 1e-2, format!("non-symmetry stayed on: {stretch:e}"))?;
    Ok(format!("y-scaling {scale:.1e}, shift {shift:.1e}, x-scaling {stretch:.1e}"))
}

fn derivatives_and_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for n in 0..1000 {
        let src = common::random_source(&mut rng, 4);
        let e = Expr::parse(&src, &common::VARS).map_err(|e| format!("{src}: {e}"))?;
        let again = Expr::parse(&e.to_string(), &common::VARS).map_err(|e| format!("{e}: reparse {src}"))?;
        ensure(again.node() == e.node(), format!("round trip changed `{src}` into `{again}`"))?;
        let pt = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        for k in 0..2 {
            let (_, ad) = e.diff_eval_index(&pt, k, Mode::Unchecked).map_err(err)?;
            let fd = common::central_difference(
                |t| {
                    let mut q = pt;
                    q[k] = t;
                    e.eval(&q)
                },
                pt[k],
            );
            let rel = (ad - fd).abs() / ad.abs().max(1.0);
            ensure(rel <= 1e-6, format!("#{n} `{src}` at {pt:?} d/d{}: ad {ad} fd {fd}", common::VARS[k]))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("1000 expressions, worst relative gap {worst:.1e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("invariants annihilated by prolonged fields", annihilation),
        ("symmetry verdicts and perturbations", symmetry_verdicts),
        ("invariant counts", invariant_counts),
        ("method of steps with unit delay", method_of_steps),
        ("solution-dependent delay x/2", quotient_delay),
        ("invariant solutions", invariant_solutions),
        ("linear trichotomy", trichotomy),
        ("superposition", superposition),
        ("transformed solutions", transformed_solutions),
        ("automatic derivatives and round trip", derivatives_and_round_trip),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
