//! Checks that a system satisfies the defining conditions of a delay system.

use crate::error::{Error, Result};
use crate::numerics::{scale, LowDiscrepancy};
use crate::system::{DODSystem, JetPoint};
use serde::Serialize;

pub const DEFAULT_SAMPLE: usize = 200;
const NONZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// The right-hand side depends on `y_`.
    DelayDependence,
    /// `x_ < x` at every sample.
    Causal,
    /// The delay map is not constant.
    NonConstantDelay,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionResult {
    pub condition: Condition,
    pub passed: bool,
    pub detail: String,
    /// `(x, y, y_)` where the condition was decided.
    pub witness: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub results: Vec<ConditionResult>,
    /// Samples where the delay relation could not be resolved.
    pub unresolved: usize,
    pub sampled: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> Vec<&ConditionResult> {
        self.results.iter().filter(|r| !r.passed).collect()
    }
}

pub fn validate_system(system: &DODSystem, sample_size: usize, seed: u64) -> Result<ValidationReport> {
    if sample_size < 10 {
        return Err(Error::Config(format!("sample size {sample_size} below 10")));
    }
    let b = system.sample_box;
    let mut seq = LowDiscrepancy::new(3, seed);
    let mut max_dep = (0.0f64, None);
    let mut violation: Option<([f64; 3], f64)> = None;
    let mut g_range: Option<(f64, f64, [f64; 3])> = None;
    let mut g_spread = (0.0f64, None);
    let mut unresolved = 0;
    for _ in 0..sample_size {
        let u = seq.next_point();
        let p = [scale(u[0], b.x), scale(u[1], b.y), scale(u[2], b.y_minus)];
        let xm = match system.delayed_x(p[0], p[1], p[2]) {
            Ok(v) => v,
            Err(Error::DelayOrder { x_minus, .. }) => {
                violation.get_or_insert((p, x_minus));
                continue;
            }
            Err(_) => {
                unresolved += 1;
                continue;
            }
        };
        if let Some((g0, _, _)) = g_range {
            let d = (xm - g0).abs();
            if d > g_spread.0 {
                g_spread = (d, Some(p));
            }
        } else {
            g_range = Some((xm, xm, p));
        }
        let jet = match system.f.eval_checked(&JetPoint::new(p[0], p[1], xm, p[2], 0.0).values()) {
            Ok(ydot) => JetPoint::new(p[0], p[1], xm, p[2], ydot),
            Err(_) => {
                unresolved += 1;
                continue;
            }
        };
        match system.manifold_derivatives(&jet) {
            Ok(d) => {
                if d.f[2].abs() > max_dep.0 {
                    max_dep = (d.f[2].abs(), Some(p));
                }
            }
            Err(_) => unresolved += 1,
        }
    }
    let resolved = sample_size - unresolved;
    let mut results = Vec::new();
    results.push(ConditionResult {
        condition: Condition::DelayDependence,
        passed: max_dep.0 > NONZERO,
        detail: if max_dep.0 > NONZERO {
            format!("max |df/dy_| = {:e}", max_dep.0)
        } else {
            "df/dy_ vanishes on the sample".into()
        },
        witness: max_dep.1,
    });
    results.push(match violation {
        Some((p, xm)) => ConditionResult {
            condition: Condition::Causal,
            passed: false,
            detail: format!("x_ < x violated: x_ = {xm} at x = {}", p[0]),
            witness: Some(p),
        },
        None => ConditionResult {
            condition: Condition::Causal,
            passed: resolved > 0,
            detail: if resolved > 0 {
                "x_ < x at every resolved sample".into()
            } else {
                "delay relation unresolved at every sample".into()
            },
            witness: None,
        },
    });
    results.push(ConditionResult {
        condition: Condition::NonConstantDelay,
        passed: g_spread.0 > NONZERO,
        detail: if g_spread.0 > NONZERO {
            format!("delay map varies by {:e}", g_spread.0)
        } else {
            "delay map is constant on the sample".into()
        },
        witness: g_spread.1,
    });
    Ok(ValidationReport { results, unresolved, sampled: sample_size })
}
