use crate::config::{Run, RunConfig, Task};
use crate::defaults;
use crate::error::{CliError, CliResult};
use crate::output;
use dods_core::catalog::{self, AlgebraRealization, InvariantFamily, CATALOG_SCHEMA};
use dods_core::expr::Expr;
use dods_core::invariant_solutions::{
    build_solution, jacobian_condition, solve_constraints, subalgebra_catalog, verify, ConstraintOptions, InvariantSolution,
    ACCEPT_RESIDUAL,
};
use dods_core::linear::{classify, homogenize};
use dods_core::solver::{residual, solve};
use dods_core::symmetry::is_symmetry;
use dods_core::VectorField;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub const SOLUTION_SCHEMA: &str = "dods-solution/1";
pub const SYMMETRY_SCHEMA: &str = "dods-symmetry/1";
pub const INVARIANT_SCHEMA: &str = "dods-invariant-solutions/1";
pub const LINEAR_SCHEMA: &str = "dods-linear/1";

/// Result of one run: a JSON report, a human rendering, and an optional
/// failure that still leaves the report meaningful.
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub failure: Option<CliError>,
}

fn with_sweep(mut v: Value, run: &Run) -> Value {
    if !run.assignment.is_empty() {
        let map: serde_json::Map<String, Value> = run.assignment.iter().map(|(k, x)| (k.clone(), json!(x))).collect();
        v["sweep"] = Value::Object(map);
    }
    v
}

pub fn run_task(task: Task, run: &Run) -> CliResult<Outcome> {
    run.config.check_task(task)?;
    run.config.solver.validate()?;
    match task {
        Task::Solve => solve_run(run, false),
        Task::CheckSymmetry => check_symmetry(run),
        Task::InvariantSolutions => invariant_solutions(run),
        Task::ClassifyLinear => classify_linear(run),
    }
}

/// Integrate, write the CSV and the breakpoint sidecar, and report the residual.
/// With `export_only` a residual above tolerance is not a failure.
pub fn solve_run(run: &Run, export_only: bool) -> CliResult<Outcome> {
    let cfg = &run.config;
    let sys = cfg.build_system()?;

    let init = cfg.initial_spec()?;
    let phi = Expr::parse(&init.phi, &["x"])?;
    let sol = solve(&sys, &phi, init.interval, init.end, &cfg.solver)?;
    let out = &cfg.output;
    let r = residual(&sol, &sys, out.residual_grid)?;
    let rows = sol.sample(out.samples, out.include_initial)?;
    let stem = run.stem();
    let dir = out.dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let csv_path = dir.join(format!("{stem}.csv"));
    output::write_rows(&csv_path, &rows)?;
    let json = with_sweep(
        json!({
            "schema": SOLUTION_SCHEMA,
            "system": sys.label,
            "initial": [init.interval.0, init.interval.1],
            "x0": sol.x0(),
            "end": sol.end(),
            "breakpoints": sol.breakpoints,
            "segments": sol.steps.last().map_or(0, |s| s.segment + 1),
            "stats": sol.stats,
            "warnings": sol.warnings,
            "residual": r,
            "residual_tol": out.residual_tol,
            "csv": csv_path.file_name().map(|f| f.to_string_lossy().into_owned()),
        }),
        run,
    );
    output::write_json(&dir.join(format!("{stem}.breakpoints.json")), &json)?;
    let last = rows.last().copied();
    let mut text = format!(
        "system      {}\nsolved on   [{}, {}] from history on [{}, {}]\nbreakpoints {}\nsteps       {} accepted, {} rejected\nresidual    {r:.3e} (tol {:.1e})\n",
        sys.label,
        sol.x0(),
        sol.end(),
        init.interval.0,
        init.interval.1,
        sol.breakpoints.len(),
        sol.stats.accepted,
        sol.stats.rejected,
        out.residual_tol
    );
    if let Some(l) = last {
        text.push_str(&format!("final row   x = {}, y = {}\n", l.x, l.y));
    }
    for w in &sol.warnings {
        text.push_str(&format!("warning     {w}\n"));
    }
    text.push_str(&format!("wrote       {}\n", csv_path.display()));
    let failure = (!export_only && !(r <= out.residual_tol))
        .then(|| CliError::CheckFailed(format!("residual {r:e} exceeds {:e}", out.residual_tol)));
    Ok(Outcome { json, text, failure })
}

fn check_symmetry(run: &Run) -> CliResult<Outcome> {
    let cfg = &run.config;
    let spec = cfg.symmetry.as_ref().ok_or_else(|| CliError::Usage("config has no [symmetry] table".into()))?;
    let sys = cfg.build_system()?;
    let mut fields: Vec<VectorField> = spec.fields.iter().map(|f| VectorField::new(&f.xi, &f.eta)).collect::<Result<_, _>>()?;
    if spec.algebra {
        let params = &cfg.system_spec()?.params;
        fields.extend(catalog::family(cfg.family_id()?, params)?.algebra.basis);
    }
    if fields.is_empty() {
        return Err(CliError::Usage("[symmetry] lists no fields".into()));
    }
    let mut rows = Vec::new();
    let mut text = format!("system {}\n{:<36} {:<8} {:>12} {:>6}\n", sys.label, "field", "verdict", "residual", "jets");
    let mut failed = Vec::new();
    for f in &fields {
        let v = is_symmetry(f, &sys, spec.sample, cfg.seed, spec.tol, spec.mode)?;
        text.push_str(&format!(
            "{:<36} {:<8} {:>12.3e} {:>6}\n",
            f.label,
            if v.verdict { "pass" } else { "fail" },
            v.max_residual,
            v.jets
        ));
        if !v.verdict {
            failed.push(f.label.clone());
        }
        rows.push(json!({
            "field": f.label,
            "xi": f.xi.to_string(),
            "eta": f.eta.to_string(),
            "verdict": v.verdict,
            "max_residual": v.max_residual,
            "jets": v.jets,
        }));
    }
    let json = with_sweep(
        json!({
            "schema": SYMMETRY_SCHEMA,
            "system": sys.label,
            "mode": spec.mode,
            "tol": spec.tol,
            "seed": cfg.seed,
            "fields": rows,
            "all_pass": failed.is_empty(),
        }),
        run,
    );
    let failure = (!failed.is_empty()).then(|| CliError::CheckFailed(format!("not a symmetry: {}", failed.join(", "))));
    Ok(Outcome { json, text, failure })
}

fn solution_json(sol: &InvariantSolution, residual: f64) -> Value {
    let mut v = serde_json::to_value(sol).expect("solution serializes");
    v["residual"] = json!(residual);
    v["accepted"] = json!(residual <= ACCEPT_RESIDUAL);
    v
}

fn invariant_solutions(run: &Run) -> CliResult<Outcome> {
    let cfg = &run.config;
    let id = cfg.family_id()?;
    let params = &cfg.system_spec()?.params;
    let spec = cfg.invariant.clone().unwrap_or_default();
    let sys = cfg.build_system()?;
    let mut ansatze = subalgebra_catalog(id)?;
    if let Some(sub) = &spec.subalgebra {
        ansatze.retain(|a| &a.subalgebra == sub);
        if ansatze.is_empty() {
            return Err(CliError::Usage(format!("{id} has no subalgebra representative `{sub}`")));
        }
    }
    let opts = ConstraintOptions { free: spec.free.clone(), ..Default::default() };
    let mut entries = Vec::new();
    let mut found: Vec<InvariantSolution> = Vec::new();
    let mut text = format!("family {id}\n");
    for a in &ansatze {
        let mut entry = json!({
            "subalgebra": a.subalgebra,
            "unknowns": a.unknowns,
            "numeric_only": a.numeric_only,
            "J1": a.j1,
            "J2": a.j2,
        });
        if a.numeric_only && spec.subalgebra.is_none() {
            entry["solutions"] = json!([]);
            entry["diagnostics"] = json!(["numeric-only reduction: no closed form is built"]);
            text.push_str(&format!("{:<12} numeric-only\n", a.subalgebra));
            entries.push(entry);
            continue;
        }
        let roots = solve_constraints(a, params, &opts)?;
        let jac = jacobian_condition(a, params, defaults::JACOBIAN_SAMPLES, cfg.seed).ok();
        let mut sols = Vec::new();
        for c in &roots.solutions {
            let sol = build_solution(a, params, c)?;
            let r = verify(&sys, &sol, spec.verify_grid)?;
            let consts: Vec<String> = c.iter().map(|(k, v)| format!("{k} = {v:.10}")).collect();
            text.push_str(&format!(
                "{:<12} {}   y = {}   delay = {}   residual {r:.2e}\n",
                a.subalgebra,
                consts.join(", "),
                sol.y,
                sol.delay
            ));
            sols.push(solution_json(&sol, r));
            found.push(sol);
        }
        if roots.solutions.is_empty() {
            text.push_str(&format!("{:<12} no admissible roots\n", a.subalgebra));
        }
        for d in &roots.diagnostics {
            text.push_str(&format!("{:<12}   note: {d}\n", ""));
        }
        entry["jacobian_condition"] = json!(jac);
        entry["solutions"] = Value::Array(sols);
        entry["diagnostics"] = json!(roots.diagnostics);
        entries.push(entry);
    }
    if spec.samples > 0 {
        if let Some(path) = cfg.out_path(&format!("{}.invariant", run.stem()), "csv") {
            output::write_invariant_samples(&path, &found, spec.samples)?;
            text.push_str(&format!("wrote {}\n", path.display()));
        }
    }
    let json = with_sweep(
        json!({
            "schema": INVARIANT_SCHEMA,
            "family": id,
            "params": sys_params(params),
            "reductions": entries,
        }),
        run,
    );
    let failure = found.is_empty().then(|| CliError::NoRoots(format!("no invariant solution of {id} under the selected subalgebras")));
    Ok(Outcome { json, text, failure })
}

fn sys_params(p: &catalog::Params) -> Value {
    serde_json::to_value(p).expect("params serialize")
}

fn classify_linear(run: &Run) -> CliResult<Outcome> {
    let (lin, mode, sigma) = run.config.build_linear()?;
    let mut homogenized = None;
    let target = match sigma {
        Some(s) => {
            let h = homogenize(&lin, &Expr::parse(&s, &["x"])?)?;
            homogenized = Some(json!({ "sigma": s, "residual": h.residual }));
            h.system
        }
        None => lin.clone(),
    };
    let c = classify(&target, mode)?;
    let mut json = serde_json::to_value(&c).expect("classification serializes");
    json["schema"] = json!(LINEAR_SCHEMA);
    json["system"] = json!({
        "alpha": lin.alpha.to_string(),
        "beta": lin.beta.to_string(),
        "gamma": lin.gamma.to_string(),
        "g": lin.g.to_string(),
        "domain": [lin.domain.0, lin.domain.1],
    });
    if let Some(h) = homogenized {
        json["homogenized"] = h;
    }
    let tag = serde_json::to_value(c.tag).expect("tag serializes");
    let mut text = format!(
        "tag          {}\ncompat       max defect {:.3e} at x = {}\n",
        tag.as_str().unwrap_or_default(),
        c.compatibility.max_defect,
        c.compatibility.worst_x
    );
    if let Some(fd) = c.functional_defect {
        text.push_str(&format!("functional   defect {fd:.3e}\n"));
    }
    text.push_str(&format!("Z            {}\n", c.z.as_deref().unwrap_or("none")));
    let cs = &c.canonical;
    if let Some(m) = cs.mode {
        text.push_str(&format!("mode         {}\n", serde_json::to_value(m).expect("mode serializes").as_str().unwrap_or_default()));
    }
    if let Some(s) = cs.shift {
        text.push_str(&format!("shift        {s}\n"));
    }
    if let Some(s) = cs.sign {
        text.push_str(&format!("sign         {s}\n"));
    }
    text.push_str(&format!(
        "canonical    yd = ({}) y_ + ({}), x_ = {} on [{}, {}]\n",
        cs.coefficient, cs.forcing, cs.delay, cs.domain.0, cs.domain.1
    ));
    for d in &c.diagnostics {
        text.push_str(&format!("note         {d}\n"));
    }
    Ok(Outcome { json: with_sweep(json, run), text, failure: None })
}

/// Algebras and default families matching the filters.
pub fn catalog_selection(dim: Option<usize>, id: Option<&str>) -> CliResult<(Vec<AlgebraRealization>, Vec<InvariantFamily>)> {
    let mut algebras = catalog::list_algebras();
    if let Some(id) = id {
        if !algebras.iter().any(|a| a.id == id) {
            return Err(dods_core::Error::UnknownFamily(id.to_string()).into());
        }
        algebras.retain(|a| a.id == id);
    }
    if let Some(d) = dim {
        algebras.retain(|a| a.dim == d);
    }
    let families = catalog::default_families()
        .into_iter()
        .filter(|f| algebras.iter().any(|a| a.id == f.algebra.id))
        .collect();
    Ok((algebras, families))
}

pub fn catalog_json(dim: Option<usize>, id: Option<&str>) -> CliResult<Value> {
    let (a, f) = catalog_selection(dim, id)?;
    let mut v = catalog::export_json(&a, &f);
    debug_assert_eq!(v["schema"], CATALOG_SCHEMA);
    v["count"] = json!(a.len());
    v["classes"] = json!(class_count(&a));
    Ok(v)
}

/// Distinct algebra classes; alternative realizations share a class.
fn class_count(algebras: &[AlgebraRealization]) -> usize {
    algebras.iter().map(|a| a.class.as_str()).collect::<std::collections::BTreeSet<_>>().len()
}

pub fn catalog_text(dim: Option<usize>, id: Option<&str>) -> CliResult<String> {
    let (algebras, families) = catalog_selection(dim, id)?;
    let mut out = format!("{} algebra classes, {} realizations\n", class_count(&algebras), algebras.len());
    for a in &algebras {
        let basis: Vec<&str> = a.basis.iter().map(|b| b.label.as_str()).collect();
        out.push_str(&format!("{:<10} dim {}  {:<12} {}", a.id, a.dim, a.class, basis.join("; ")));
        if let Some(flag) = &a.flag {
            out.push_str(&format!("  [{flag}]"));
        }
        out.push('\n');
    }
    for f in &families {
        let inv: Vec<String> = f.invariants.iter().map(|i| format!("{} = {}", i.label, i.expr)).collect();
        out.push_str(&format!("family {:<10} {}\n    invariants: {}\n", f.id, f.form, inv.join(", ")));
    }
    Ok(out)
}

pub fn load_single(path: &Path, force: bool) -> CliResult<Run> {
    let table = crate::config::read_table(path)?;
    let mut runs = crate::config::expand(path, &table, &[], force)?;
    Ok(runs.remove(0))
}

pub fn override_dir(config: &mut RunConfig, dir: Option<&Path>) {
    if let Some(d) = dir {
        config.output.dir = Some(d.to_path_buf());
    }
}
