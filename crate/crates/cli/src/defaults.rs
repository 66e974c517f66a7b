//! Every numeric default used by the front end, in one place.

use dods_core::catalog::DEFAULT_MAX_DELAY;
use dods_core::invariant_solutions::{ConstraintOptions, ACCEPT_RESIDUAL};
use dods_core::linear::{COMPAT_GRID, COMPAT_TOL, PARTICULAR_TOL};
use dods_core::solver::SolverOptions;
use dods_core::symmetry::{Invariance, RANK_SAMPLES};

pub const SAMPLES: usize = 401;
pub const RESIDUAL_GRID: usize = 400;
pub const RESIDUAL_TOL: f64 = 1e-6;
pub const SYMMETRY_SAMPLE: usize = 200;
pub const SYMMETRY_TOL: f64 = 1e-8;
pub const VERIFY_GRID: usize = 200;
pub const JACOBIAN_SAMPLES: usize = 50;

pub fn symmetry_sample() -> usize {
    SYMMETRY_SAMPLE
}

pub fn symmetry_tol() -> f64 {
    SYMMETRY_TOL
}

pub fn invariance() -> Invariance {
    Invariance::Weak
}

pub fn verify_grid() -> usize {
    VERIFY_GRID
}

/// Name and value of every default, for `--verbose`.
pub fn listing() -> Vec<(&'static str, String)> {
    let s = SolverOptions::default();
    vec![
        ("seed", "0".into()),
        ("solver.rel_tol", format!("{:e}", s.rel_tol)),
        ("solver.abs_tol", format!("{:e}", s.abs_tol)),
        ("solver.max_step", format!("{}", s.max_step)),
        ("solver.delay_root_tol", format!("{:e}", s.delay_root_tol)),
        ("solver.compat_tol", format!("{:e}", s.compat_tol)),
        ("solver.force", s.force.to_string()),
        ("solver.max_steps", s.max_steps.to_string()),
        ("system.max_delay", DEFAULT_MAX_DELAY.to_string()),
        ("output.stem", "run".into()),
        ("output.samples", SAMPLES.to_string()),
        ("output.include_initial", "true".into()),
        ("output.residual_grid", RESIDUAL_GRID.to_string()),
        ("output.residual_tol", format!("{RESIDUAL_TOL:e}")),
        ("symmetry.sample", SYMMETRY_SAMPLE.to_string()),
        ("symmetry.tol", format!("{SYMMETRY_TOL:e}")),
        ("symmetry.mode", "weak".into()),
        ("symmetry.rank_samples", RANK_SAMPLES.to_string()),
        ("invariant.verify_grid", VERIFY_GRID.to_string()),
        ("invariant.samples", "0".into()),
        ("invariant.accept_residual", format!("{ACCEPT_RESIDUAL:e}")),
        ("invariant.newton_tol", format!("{:e}", ConstraintOptions::default().tol)),
        ("invariant.jacobian_samples", JACOBIAN_SAMPLES.to_string()),
        ("linear.compat_grid", COMPAT_GRID.to_string()),
        ("linear.compat_tol", format!("{COMPAT_TOL:e}")),
        ("linear.particular_tol", format!("{PARTICULAR_TOL:e}")),
        ("linear.mode", "canonical2".into()),
    ]
}
